#include "dnf/cli/pipeline.hpp"

#include "dnf/core/error.hpp"
#include "dnf/core/parallel.hpp"
#include "dnf/fe/fe_model.hpp"
#include "dnf/model/discrete_system.hpp"
#include "dnf/nf/reduced_model.hpp"
#include "dnf/rom/rom.hpp"
#include "dnf/solvers/frf.hpp"
#include "dnf/spectral/modes.hpp"

#include <json.hpp>

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

namespace dnf::cli {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr double kEigenResidualLimit = 1e-8;
constexpr double kOrthonormalityLimit = 1e-10;
constexpr double kHomologicalLimit = 1e-9;
constexpr double kMassOrthogonalityLimit = 1e-10;
constexpr double kDecompositionLimit = 1e-10;

template <class F>
auto stage(const char* name, F&& body) {
  const std::string prefix = std::string(name) + " stage: ";
  try {
    return body();
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const IoError& e) {
    throw IoError(prefix + e.what());
  } catch (const Error& e) {
    throw NumericalError(prefix + e.what());
  }
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void log(const std::string& line) { std::clog << "dnf-rom: " << line << std::endl; }

/// Shortest decimal that reads back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

json tensor_summary(const std::vector<double>& data) {
  double sum = 0.0;
  int nonzero = 0;
  for (double v : data) {
    sum += v * v;
    if (v != 0.0) ++nonzero;
  }
  return json{{"frobenius_norm", std::sqrt(sum)}, {"nonzero", nonzero}};
}

json vec_json(const Vec& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

/// Private directory inside the output directory; removed unless committed.
class Staging {
 public:
  explicit Staging(std::filesystem::path out) : out_(std::move(out)) {
    std::error_code ec;
    std::filesystem::create_directories(out_, ec);
    if (ec) throw IoError("cannot create output directory " + out_.string() + ": " + ec.message());
    dir_ = out_ / (".staging-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir_, ec);
    std::filesystem::create_directory(dir_, ec);
    if (ec) throw IoError("cannot create staging directory " + dir_.string() + ": " + ec.message());
  }
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;
  ~Staging() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }

  std::filesystem::path path(const std::string& name) {
    names_.push_back(name);
    return dir_ / name;
  }

  void write(const std::string& name, const std::string& text) {
    std::ofstream f(path(name), std::ios::binary);
    f << text;
    if (!f) throw IoError("failed writing " + (dir_ / name).string());
  }

  std::vector<std::filesystem::path> commit() {
    std::vector<std::filesystem::path> out;
    for (const auto& name : names_) {
      std::error_code ec;
      std::filesystem::rename(dir_ / name, out_ / name, ec);
      if (ec) throw IoError("cannot move " + name + " into " + out_.string() + ": " + ec.message());
      out.push_back(out_ / name);
    }
    return out;
  }

 private:
  std::filesystem::path out_;
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

struct BuiltSystem {
  std::optional<fe::FeModel> fe;
  std::unique_ptr<model::MechanicalSystem> system;
};

BuiltSystem build_system(const PipelineConfig& c) {
  BuiltSystem out;
  if (c.source == SystemSource::Discrete) {
    out.system = std::make_unique<model::MechanicalSystem>(
        model::build_discrete_system(model::load_discrete_json(c.system_file)));
    return out;
  }
  fe::Mesh mesh;
  switch (c.source) {
    case SystemSource::Block: mesh = fe::generate_block(c.block, c.element); break;
    case SystemSource::Beam: mesh = fe::generate_beam(c.beam, c.element); break;
    case SystemSource::Arch: mesh = fe::generate_arch(c.arch, c.element); break;
    default: mesh = fe::parse_msh(c.system_file); break;
  }
  out.fe.emplace(std::move(mesh), c.material, c.clamp_sets);
  out.system = std::make_unique<model::MechanicalSystem>(out.fe->to_system());
  return out;
}

std::string modes_csv(const BuiltSystem& built, const spectral::ModeSet& modes) {
  std::ostringstream os;
  if (built.fe) {
    Mat expanded(built.fe->total_dof_count(), modes.size());
    for (int k = 0; k < modes.size(); ++k) expanded.col(k) = built.fe->expand(modes.vectors.col(k));
    spectral::write_modes_csv(os, modes, expanded, &built.fe->mesh().nodes);
  } else {
    spectral::write_modes_csv(os, modes, modes.vectors, nullptr);
  }
  return os.str();
}

json resonances_json(const nf::ReducedModel& m) {
  const int n = m.size();
  auto state = [&](int s) {
    return json{{"mode", m.mode_numbers[static_cast<std::size_t>(s % n)]}, {"conjugate", s >= n}};
  };
  json entries = json::array();
  for (const auto& e : m.resonances) {
    json targets = json::array();
    for (int r : e.targets) targets.push_back(m.mode_numbers[static_cast<std::size_t>(r)]);
    entries.push_back(json{{"states", json::array({state(e.a), state(e.b)})}, {"sigma", e.sigma}, {"targets", targets}});
  }
  return json{{"tolerance", m.resonance_tolerance},
              {"masters", m.mode_numbers},
              {"omega", vec_json(m.omega)},
              {"entries", entries}};
}

/// Relative defect of K u + G(u,u) + H(u,u,u) against the unsplit force for the sum of the master modes.
std::optional<double> decomposition_residual(const model::MechanicalSystem& sys, const spectral::ModeSet& masters) {
  if (!sys.has_unsplit_force()) return std::nullopt;
  Vec u = masters.vectors.rowwise().sum();
  const double umax = u.cwiseAbs().maxCoeff();
  if (umax == 0.0) return std::nullopt;
  u /= umax;
  const Vec full = sys.full_internal_force(u);
  const Vec split = sys.stiffness().multiply(u) + sys.eval_quadratic(u, u) + sys.eval_cubic(u, u, u);
  return (full - split).norm() / full.norm();
}

struct FrfResult {
  solvers::Branch branch;
  std::vector<double> physical;
  double seconds = 0.0;
};

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const IoError*>(&e)) return 4;
  if (dynamic_cast<const Error*>(&e)) return 3;
  return 1;
}

PipelineResult run_pipeline(const PipelineConfig& config, Command command) {
  config.validate();
  if (command == Command::Run && config.kappa.empty())
    throw ConfigError("forcing.kappa: at least one forcing level is required for the FRF stage");

  PipelineResult result;
  Staging staging(config.output_dir);
  json report;
  json timings = json::object();
  json checks = json::object();
  auto check = [&](const char* name, double value, double limit) {
    const bool ok = value < limit;
    checks[name] = json{{"value", value}, {"limit", limit}, {"passed", ok}};
    result.passed = result.passed && ok;
  };
  report["command"] = command == Command::Run ? "run" : command == Command::Modes ? "modes" : "check";
  report["threads"] = configured_thread_count();

  auto t0 = Clock::now();
  log("building system");
  const BuiltSystem built = stage("system", [&] { return build_system(config); });
  const auto& sys = *built.system;
  timings["system"] = seconds_since(t0);
  report["system"] = json{{"dof_count", sys.dof_count()}, {"unreduced_dof_count", sys.unreduced_dof_count()}};
  if (built.fe) {
    report["system"]["nodes"] = built.fe->mesh().node_count();
    report["system"]["elements"] = built.fe->mesh().element_count();
    report["system"]["element_kind"] = fe::element_kind_name(built.fe->mesh().kind);
  }

  const int largest_master = *std::max_element(config.masters.begin(), config.masters.end());
  const int mode_count = std::max(config.mode_count, largest_master);
  if (mode_count > sys.dof_count())
    throw ConfigError("masters: mode " + std::to_string(mode_count) + " exceeds the " +
                      std::to_string(sys.dof_count()) + " free DOFs");

  t0 = Clock::now();
  log("solving " + std::to_string(mode_count) + " modes on " + std::to_string(sys.dof_count()) + " DOFs");
  const auto modes = stage("modes", [&] {
    return spectral::solve_modes(sys.mass(), sys.stiffness(), spectral::ModeSelector::lowest(mode_count));
  });
  timings["modes"] = seconds_since(t0);
  report["modes"] = json{{"mode_numbers", modes.mode_numbers}, {"omega", vec_json(modes.frequencies)}};
  check("eigen_residual", spectral::max_eigen_residual(sys.mass(), sys.stiffness(), modes), kEigenResidualLimit);
  check("orthonormality", spectral::orthonormality_error(sys.mass(), modes), kOrthonormalityLimit);
  if (command != Command::Check) staging.write("modes.csv", modes_csv(built, modes));

  if (command != Command::Modes) {
    std::vector<int> positions;
    for (int m : config.masters) positions.push_back(m - 1);
    nf::BuildOptions opt;
    opt.resonance_tolerance = config.resonance_tolerance;
    opt.quality_factor = config.quality_factor;
    opt.driven = config.driven - 1;
    opt.kappa = config.kappa.empty() ? 0.0 : config.kappa.front();

    t0 = Clock::now();
    log("building reduced model on masters " + nlohmann::json(config.masters).dump());
    const auto red = stage("reduction", [&] { return nf::build_reduced_model(sys, modes, positions, opt); });
    timings["reduction"] = seconds_since(t0);
    const auto& rep = red.report;
    check("homological_residual", rep.max_homological_residual, kHomologicalLimit);
    check("mass_orthogonality", rep.max_orthogonality, kMassOrthogonalityLimit);
    if (const auto d = decomposition_residual(sys, modes.subset(positions))) check("decomposition", *d, kDecompositionLimit);
    report["reduction"] = json{{"pairs", rep.pair_count},
                               {"resonant_pairs", rep.resonant_pair_count},
                               {"odd_residual", rep.max_odd_residual},
                               {"seconds_quadratic", rep.seconds_quadratic},
                               {"seconds_cubic", rep.seconds_cubic}};
    const auto& m = red.model;
    report["coefficients"] = json{{"masters", m.mode_numbers},
                                  {"omega", vec_json(m.omega)},
                                  {"damping", m.damping},
                                  {"driven_mode", m.mode_numbers[static_cast<std::size_t>(m.driven)]},
                                  {"g", tensor_summary(m.g.data())},
                                  {"h", tensor_summary(m.h.data())},
                                  {"A", tensor_summary(m.A.data())},
                                  {"B", tensor_summary(m.B.data())},
                                  {"P", tensor_summary(m.P.data())},
                                  {"Q", tensor_summary(m.Q.data())}};
    const json res = resonances_json(m);
    report["resonances"] = res["entries"];
    staging.write("resonances.json", res.dump(2) + "\n");

    if (command == Command::Run) {
      stage("rom output", [&] { nf::write_reduced_model(m, staging.path("rom.json"), config.sidecar); });
      if (config.sidecar && m.has_maps()) staging.path("rom.bin");

      if (config.physical_dof > m.dof_count())
        throw ConfigError("forcing.physical_dof: exceeds the " + std::to_string(m.dof_count()) + " free DOFs");
      const rom::RomEvaluator ev(m);
      const double scale = config.omega_relative ? m.omega(m.driven) : 1.0;
      solvers::ContinuationConfig cont = config.continuation;
      cont.omega_start = config.omega_min * scale;
      cont.omega_end = config.omega_max * scale;

      t0 = Clock::now();
      log("continuing " + std::to_string(config.kappa.size()) + " forcing level(s) over [" + shortest(cont.omega_start) +
          ", " + shortest(cont.omega_end) + "]");
      std::vector<FrfResult> frf(config.kappa.size());
      std::vector<std::exception_ptr> errors(config.kappa.size());
      parallel_for(config.kappa.size(), [&](std::size_t i) {
        try {
          const auto start = Clock::now();
          const auto ode = ev.ode(config.kappa[i]);
          frf[i].branch = solvers::hb_continue(ode, config.hb, cont);
          if (config.physical_amplitude && m.has_maps()) {
            const solvers::HarmonicBalance hb(ode, frf[i].branch.harmonics);
            frf[i].physical =
                solvers::branch_physical_amplitude(hb, ev, frf[i].branch, static_cast<Index>(config.physical_dof) - 1);
          }
          frf[i].seconds = seconds_since(start);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
      for (const auto& e : errors)
        if (e) stage("frf", [&] { std::rethrow_exception(e); });
      timings["frf"] = seconds_since(t0);

      json branches = json::array();
      for (std::size_t i = 0; i < frf.size(); ++i) {
        const auto& b = frf[i].branch;
        const std::string name = "frf_" + shortest(config.kappa[i]) + ".csv";
        std::ostringstream os;
        solvers::write_branch_csv(os, b, frf[i].physical.empty() ? nullptr : &frf[i].physical);
        staging.write(name, os.str());
        double worst = 0.0;
        json markers = json::array();
        for (const auto& p : b.points) {
          worst = std::max(worst, p.residual);
          if (p.marker != solvers::Bifurcation::None) markers.push_back(json{{"omega", p.omega}, {"type", solvers::to_string(p.marker)}});
        }
        branches.push_back(json{{"kappa", config.kappa[i]},
                                {"file", name},
                                {"points", b.points.size()},
                                {"completed", b.completed},
                                {"diagnostic", b.diagnostic},
                                {"max_hb_residual", worst},
                                {"bifurcations", markers},
                                {"seconds", frf[i].seconds}});
        result.passed = result.passed && b.completed;
      }
      report["frf"] = json{{"omega_start", cont.omega_start}, {"omega_end", cont.omega_end}, {"branches", branches}};
    }
  }

  report["checks"] = checks;
  report["timings"] = timings;
  report["status"] = result.passed ? "passed" : "failed";
  staging.write("report.json", report.dump(2) + "\n");
  result.artifacts = staging.commit();
  log(std::string("run ") + (result.passed ? "passed" : "failed") + "; artifacts in " + config.output_dir.string());
  return result;
}

}  // namespace dnf::cli
