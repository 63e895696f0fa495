#pragma once

#include "dnf/nf/normal_form.hpp"

#include <filesystem>
#include <limits>
#include <string>

namespace dnf::nf {

/**
 * Real reduced dynamics on n masters:
 *
 *   r_p'' + c r_p' + w_p^2 r_p + sum g[p][k][l] r_k r_l
 *     + sum ((h + A)[p][k][l][m] + P[p][k][l][m]) r_k r_l r_m
 *     + sum (B + Q)[p][k][l][m] r_k r_l' r_m' = kappa delta_{pI} cos(w t)
 *
 * with ordered sums over all master indices. Mapping vectors live on the
 * free DOFs of the originating system.
 */
struct ReducedModel {
  std::vector<int> mode_numbers;
  Vec omega;
  double quality_factor = std::numeric_limits<double>::infinity();
  double damping = 0.0;  ///< c = omega_I / Q
  int driven = 0;        ///< master index I (0-based)
  double kappa = 0.0;
  double resonance_tolerance = kDefaultResonanceTolerance;
  std::vector<ResonanceEntry> resonances;

  Tensor3 g;
  Tensor4 h, A, B, P, Q;
  Tensor4 vel_rrv, vel_vvv;

  Mat phi;        ///< N x n
  Mat a_hat;      ///< N x n^2, column k * n + l
  Mat b_hat;
  Mat gamma_hat;

  int size() const { return static_cast<int>(omega.size()); }
  Index dof_count() const { return phi.rows(); }
  bool has_maps() const { return phi.size() > 0; }
  /// Normal velocity s from (r, rdot); equals rdot unless second-order resonances are present.
  Vec normal_velocity(const Vec& r, const Vec& rdot) const;
  /// Throws ConfigError on inconsistent table shapes or non-finite entries.
  void validate() const;
};

struct BuildOptions {
  double resonance_tolerance = kDefaultResonanceTolerance;
  double quality_factor = std::numeric_limits<double>::infinity();
  int driven = 0;
  double kappa = 0.0;
};

/// Diagnostics gathered while building a reduced model.
struct BuildReport {
  double max_homological_residual = 0.0;
  double max_orthogonality = 0.0;
  double max_odd_residual = 0.0;
  double seconds_quadratic = 0.0;
  double seconds_cubic = 0.0;
  int pair_count = 0;
  int resonant_pair_count = 0;
};

struct Reduction {
  ReducedModel model;
  ResonanceTable resonances;
  QuadraticMapSet maps;
  CubicCoefficients cubic;
  BuildReport report;
};

/// Detects resonances, solves all pairs, computes the cubic terms and assembles the model.
Reduction build_reduced_model(const model::MechanicalSystem& system, const spectral::ModeSet& masters,
                              const BuildOptions& options = {});

/// Same, with `masters` given as positions into `modes`.
Reduction build_reduced_model(const model::MechanicalSystem& system, const spectral::ModeSet& modes,
                              const std::vector<int>& masters, const BuildOptions& options = {});

/**
 * Writes the model as JSON. Tables are sparse lists of 1-based index
 * tuples with a value. Mapping vectors go to `sidecar` (little-endian
 * doubles, row-major N x (n + 3 n^2): phi, a_hat, b_hat, gamma_hat) when a
 * path is given, otherwise they are embedded.
 */
std::string reduced_model_to_json(const ReducedModel& model, const std::string& sidecar_name = {});
void write_reduced_model(const ReducedModel& model, const std::filesystem::path& json_path,
                         bool use_sidecar = true);
ReducedModel read_reduced_model(const std::filesystem::path& json_path);
ReducedModel reduced_model_from_json(const std::string& text, const std::filesystem::path& base_dir = {});

}  // namespace dnf::nf
