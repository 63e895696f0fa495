#pragma once

#include "dnf/fe/material.hpp"
#include "dnf/fe/mesh.hpp"
#include "dnf/nf/normal_form.hpp"
#include "dnf/solvers/harmonic_balance.hpp"

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace dnf::cli {

enum class SystemSource { Discrete, Block, Beam, Arch, MshFile };

/**
 * Everything a pipeline run needs. Paths are resolved against the directory
 * of the configuration file. Mode numbers and the driven master are 1-based,
 * matching the configuration text.
 */
struct PipelineConfig {
  SystemSource source = SystemSource::Beam;
  std::filesystem::path system_file;
  fe::ElementKind element = fe::ElementKind::Hex8;
  fe::BlockParams block;
  fe::BeamParams beam;
  fe::ArchParams arch;
  fe::Material material = fe::silicon_mems();
  std::vector<std::string> clamp_sets;

  std::vector<int> masters{1};
  int mode_count = 0;  ///< modes written to modes.csv; raised to the largest master
  double resonance_tolerance = nf::kDefaultResonanceTolerance;
  double quality_factor = std::numeric_limits<double>::infinity();

  int driven = 1;
  std::vector<double> kappa;
  double omega_min = 0.9;
  double omega_max = 1.1;
  bool omega_relative = true;  ///< range in units of the driven master frequency
  bool physical_amplitude = true;
  int physical_dof = 0;        ///< 1-based free DOF; 0 takes the max over all DOFs

  solvers::HBConfig hb;
  solvers::ContinuationConfig continuation;

  std::filesystem::path output_dir = "out";
  bool sidecar = true;

  /// Throws ConfigError naming the offending key or missing path.
  void validate() const;
};

/// Parses the flat key = value format documented in the README.
PipelineConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

enum class Command { Run, Modes, Check };

struct PipelineResult {
  bool passed = true;  ///< every residual met its threshold
  std::vector<std::filesystem::path> artifacts;
};

/**
 * Runs the stages up to the one the command needs and publishes the
 * artifacts into the output directory. Files are staged in a private
 * directory and moved only after every stage has finished, so a failing
 * stage leaves no partial output behind. Stage failures rethrow the
 * original error category with the stage name prefixed.
 */
PipelineResult run_pipeline(const PipelineConfig& config, Command command);

/// Exit status for an error category: 2 config, 3 numerical, 4 I/O.
int exit_code_for(const std::exception& e);

}  // namespace dnf::cli
