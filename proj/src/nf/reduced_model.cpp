#include "dnf/nf/reduced_model.hpp"

#include "dnf/core/error.hpp"

#include <json.hpp>

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dnf::nf {

using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

json sparse3(const Tensor3& t) {
  json out = json::array();
  const int n = t.extent();
  for (int p = 0; p < n; ++p)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        if (t(p, k, l) != 0.0) out.push_back({p + 1, k + 1, l + 1, t(p, k, l)});
  return out;
}

json sparse4(const Tensor4& t) {
  json out = json::array();
  const int n = t.extent();
  for (int p = 0; p < n; ++p)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m)
          if (t(p, k, l, m) != 0.0) out.push_back({p + 1, k + 1, l + 1, m + 1, t(p, k, l, m)});
  return out;
}

Tensor3 dense3(const json& j, int n, const char* name) {
  Tensor3 t(n);
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 4) throw ConfigError(std::string("table ") + name + ": entries need 3 indices and a value");
    const int p = e[0].get<int>() - 1, k = e[1].get<int>() - 1, l = e[2].get<int>() - 1;
    if (p < 0 || k < 0 || l < 0 || p >= n || k >= n || l >= n) throw ConfigError(std::string("table ") + name + ": index out of range");
    t(p, k, l) = e[3].get<double>();
  }
  return t;
}

Tensor4 dense4(const json& j, int n, const char* name) {
  Tensor4 t(n);
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 5) throw ConfigError(std::string("table ") + name + ": entries need 4 indices and a value");
    const int p = e[0].get<int>() - 1, k = e[1].get<int>() - 1, l = e[2].get<int>() - 1, m = e[3].get<int>() - 1;
    if (p < 0 || k < 0 || l < 0 || m < 0 || p >= n || k >= n || l >= n || m >= n)
      throw ConfigError(std::string("table ") + name + ": index out of range");
    t(p, k, l, m) = e[4].get<double>();
  }
  return t;
}

Mat map_block(const ReducedModel& m) {
  const Index n = m.size();
  Mat all(m.dof_count(), n + 3 * n * n);
  all << m.phi, m.a_hat, m.b_hat, m.gamma_hat;
  return all;
}

void split_block(ReducedModel& m, const Mat& all) {
  const Index n = m.size();
  if (all.cols() != n + 3 * n * n) throw ConfigError("mapping block has the wrong column count");
  m.phi = all.leftCols(n);
  m.a_hat = all.middleCols(n, n * n);
  m.b_hat = all.middleCols(n + n * n, n * n);
  m.gamma_hat = all.rightCols(n * n);
}

static_assert(std::endian::native == std::endian::little, "sidecar I/O assumes a little-endian host");

}  // namespace

Vec ReducedModel::normal_velocity(const Vec& r, const Vec& rdot) const {
  const int n = size();
  Vec s = rdot;
  if (vel_rrv.extent() != n) return s;
  for (int p = 0; p < n; ++p)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m)
          s(p) -= vel_rrv(p, k, l, m) * r(k) * r(l) * rdot(m) + vel_vvv(p, k, l, m) * rdot(k) * rdot(l) * rdot(m);
  return s;
}

void ReducedModel::validate() const {
  const int n = size();
  if (n == 0) throw ConfigError("reduced model has no masters");
  if (static_cast<int>(mode_numbers.size()) != n) throw ConfigError("mode number list and frequencies disagree");
  for (Index i = 0; i < n; ++i)
    if (!(omega(i) > 0.0) || !std::isfinite(omega(i))) throw ConfigError("reduced model frequencies must be positive");
  if (!(quality_factor > 0.0)) throw ConfigError("quality factor must be positive");
  if (!(damping >= 0.0) || !std::isfinite(damping)) throw ConfigError("damping coefficient must be finite and non-negative");
  if (driven < 0 || driven >= n) throw ConfigError("driven master index out of range");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ConfigError("load multiplier must be finite and non-negative");
  if (g.extent() != n || !finite(g.data())) throw ConfigError("quadratic table has the wrong shape or non-finite entries");
  for (const Tensor4* t : {&h, &A, &B, &P, &Q, &vel_rrv, &vel_vvv})
    if (t->extent() != n || !finite(t->data())) throw ConfigError("cubic table has the wrong shape or non-finite entries");
  if (has_maps()) {
    if (phi.cols() != n || a_hat.cols() != n * n || b_hat.cols() != n * n || gamma_hat.cols() != n * n ||
        a_hat.rows() != phi.rows() || b_hat.rows() != phi.rows() || gamma_hat.rows() != phi.rows())
      throw ConfigError("mapping vectors have inconsistent shapes");
  }
}

Reduction build_reduced_model(const model::MechanicalSystem& system, const spectral::ModeSet& masters,
                              const BuildOptions& options) {
  const int n = masters.size();
  if (n == 0) throw ConfigError("at least one master mode is required");
  if (masters.vectors.rows() != system.dof_count() || masters.vectors.cols() != n)
    throw DimensionError("master mode vectors do not match the system size");
  if (!(options.quality_factor > 0.0)) throw ConfigError("quality factor must be positive");
  if (options.driven < 0 || options.driven >= n) throw ConfigError("driven master must be one of the masters");
  if (!(options.kappa >= 0.0)) throw ConfigError("load multiplier must be non-negative");

  Reduction out;
  out.resonances = detect_resonances(masters.frequencies, options.resonance_tolerance);
  auto t0 = std::chrono::steady_clock::now();
  out.maps = solve_quadratic_maps(system, masters, out.resonances);
  out.report.seconds_quadratic = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  out.cubic = compute_cubic_coefficients(system, masters, out.maps, out.resonances);
  out.report.seconds_cubic = seconds_since(t0);

  BuildReport& rep = out.report;
  rep.pair_count = static_cast<int>(out.maps.pairs.size());
  for (const auto& p : out.maps.pairs) {
    rep.max_homological_residual = std::max({rep.max_homological_residual, p.residual_p, p.residual_n});
    rep.max_orthogonality = std::max(rep.max_orthogonality, p.orthogonality);
    if (!p.targets.empty()) ++rep.resonant_pair_count;
  }
  rep.max_odd_residual = out.cubic.max_odd_residual;

  ReducedModel& m = out.model;
  m.mode_numbers = masters.mode_numbers;
  m.omega = masters.frequencies;
  m.quality_factor = options.quality_factor;
  m.driven = options.driven;
  m.kappa = options.kappa;
  m.damping = std::isinf(options.quality_factor) ? 0.0 : masters.frequencies(options.driven) / options.quality_factor;
  m.resonance_tolerance = options.resonance_tolerance;
  m.resonances = out.resonances.entries();
  m.g = Tensor3(n);
  for (int p = 0; p < n; ++p)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) m.g(p, k, l) = 2.0 * masters.frequencies(p) * out.maps.f2(p, k, l);
  m.h = out.cubic.h;
  m.A = out.cubic.A;
  m.B = out.cubic.B;
  m.P = out.cubic.P;
  m.Q = out.cubic.Q;
  m.vel_rrv = out.cubic.vel_rrv;
  m.vel_vvv = out.cubic.vel_vvv;

  const Index dofs = system.dof_count();
  m.phi = masters.vectors;
  m.a_hat.resize(dofs, n * n);
  m.b_hat.resize(dofs, n * n);
  m.gamma_hat.resize(dofs, n * n);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      const PairSolution& p = out.maps.pair(k, l);
      const RealMaps rm = realize_quadratic_maps(p.psi_p, p.psi_n, masters.frequencies(k), masters.frequencies(l));
      m.a_hat.col(k * n + l) = rm.a_hat;
      m.b_hat.col(k * n + l) = rm.b_hat;
      m.gamma_hat.col(k * n + l) = rm.gamma_hat;
    }
  }
  m.validate();
  return out;
}

Reduction build_reduced_model(const model::MechanicalSystem& system, const spectral::ModeSet& modes,
                              const std::vector<int>& masters, const BuildOptions& options) {
  for (int p : masters)
    if (p < 0 || p >= modes.size()) throw ConfigError("master position outside the computed mode set");
  return build_reduced_model(system, modes.subset(masters), options);
}

std::string reduced_model_to_json(const ReducedModel& model, const std::string& sidecar_name) {
  model.validate();
  const int n = model.size();
  json doc;
  doc["format"] = "dnf-rom reduced model";
  doc["version"] = 1;
  doc["mode_numbers"] = model.mode_numbers;
  doc["omega"] = std::vector<double>(model.omega.data(), model.omega.data() + n);
  doc["quality_factor"] = std::isinf(model.quality_factor) ? json(nullptr) : json(model.quality_factor);
  doc["damping"] = model.damping;
  doc["driven"] = model.driven + 1;
  doc["kappa"] = model.kappa;
  doc["resonance_tolerance"] = model.resonance_tolerance;
  json res = json::array();
  for (const auto& e : model.resonances) {
    std::vector<int> targets;
    for (int r : e.targets) targets.push_back(r + 1);
    res.push_back({{"a", e.a + 1}, {"b", e.b + 1}, {"sigma", e.sigma}, {"targets", targets}});
  }
  doc["resonances"] = res;
  json& tables = doc["tables"];
  tables["g"] = sparse3(model.g);
  tables["h"] = sparse4(model.h);
  tables["A"] = sparse4(model.A);
  tables["B"] = sparse4(model.B);
  tables["P"] = sparse4(model.P);
  tables["Q"] = sparse4(model.Q);
  tables["velocity_rrv"] = sparse4(model.vel_rrv);
  tables["velocity_vvv"] = sparse4(model.vel_vvv);
  if (model.has_maps()) {
    json maps;
    maps["rows"] = model.dof_count();
    maps["cols"] = n + 3 * n * n;
    maps["layout"] = {"phi", "a_hat", "b_hat", "gamma_hat"};
    if (!sidecar_name.empty()) {
      maps["file"] = sidecar_name;
    } else {
      const Mat all = map_block(model);
      json rows = json::array();
      for (Index i = 0; i < all.rows(); ++i) {
        const Eigen::RowVectorXd row = all.row(i);
        rows.push_back(std::vector<double>(row.data(), row.data() + row.size()));
      }
      maps["values"] = rows;
    }
    doc["maps"] = maps;
  }
  return doc.dump(1);
}

void write_reduced_model(const ReducedModel& model, const std::filesystem::path& json_path, bool use_sidecar) {
  std::string sidecar;
  if (use_sidecar && model.has_maps()) {
    std::filesystem::path bin = json_path;
    bin.replace_extension(".bin");
    sidecar = bin.filename().string();
    const Mat all = map_block(model);
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = all;
    std::ofstream out(bin, std::ios::binary);
    if (!out) throw IoError("cannot write " + bin.string());
    out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
    if (!out) throw IoError("failed writing " + bin.string());
  }
  const std::string text = reduced_model_to_json(model, sidecar);
  std::ofstream out(json_path);
  if (!out) throw IoError("cannot write " + json_path.string());
  out << text << "\n";
  if (!out) throw IoError("failed writing " + json_path.string());
}

ReducedModel reduced_model_from_json(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("reduced model JSON does not parse: ") + e.what());
  }
  ReducedModel m;
  try {
    m.mode_numbers = doc.at("mode_numbers").get<std::vector<int>>();
    const auto omega = doc.at("omega").get<std::vector<double>>();
    const int n = static_cast<int>(omega.size());
    m.omega = Eigen::Map<const Vec>(omega.data(), n);
    m.quality_factor = doc.at("quality_factor").is_null() ? std::numeric_limits<double>::infinity()
                                                          : doc.at("quality_factor").get<double>();
    m.damping = doc.at("damping").get<double>();
    m.driven = doc.at("driven").get<int>() - 1;
    m.kappa = doc.at("kappa").get<double>();
    m.resonance_tolerance = doc.at("resonance_tolerance").get<double>();
    for (const auto& e : doc.at("resonances")) {
      ResonanceEntry r;
      r.a = e.at("a").get<int>() - 1;
      r.b = e.at("b").get<int>() - 1;
      r.sigma = e.at("sigma").get<double>();
      for (int t : e.at("targets").get<std::vector<int>>()) r.targets.push_back(t - 1);
      m.resonances.push_back(std::move(r));
    }
    const json& t = doc.at("tables");
    m.g = dense3(t.at("g"), n, "g");
    m.h = dense4(t.at("h"), n, "h");
    m.A = dense4(t.at("A"), n, "A");
    m.B = dense4(t.at("B"), n, "B");
    m.P = dense4(t.at("P"), n, "P");
    m.Q = dense4(t.at("Q"), n, "Q");
    m.vel_rrv = dense4(t.at("velocity_rrv"), n, "velocity_rrv");
    m.vel_vvv = dense4(t.at("velocity_vvv"), n, "velocity_vvv");
    if (doc.contains("maps")) {
      const json& maps = doc.at("maps");
      const Index rows = maps.at("rows").get<Index>();
      const Index cols = maps.at("cols").get<Index>();
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> all(rows, cols);
      if (maps.contains("file")) {
        const std::filesystem::path bin = base_dir / maps.at("file").get<std::string>();
        std::ifstream in(bin, std::ios::binary);
        if (!in) throw IoError("cannot open mapping sidecar " + bin.string());
        in.read(reinterpret_cast<char*>(all.data()), static_cast<std::streamsize>(all.size() * sizeof(double)));
        if (in.gcount() != static_cast<std::streamsize>(all.size() * sizeof(double)))
          throw IoError("mapping sidecar " + bin.string() + " is truncated");
      } else {
        const json& values = maps.at("values");
        if (static_cast<Index>(values.size()) != rows) throw ConfigError("embedded mapping rows disagree with 'rows'");
        for (Index i = 0; i < rows; ++i) {
          const auto row = values[static_cast<std::size_t>(i)].get<std::vector<double>>();
          if (static_cast<Index>(row.size()) != cols) throw ConfigError("embedded mapping row has the wrong length");
          for (Index j = 0; j < cols; ++j) all(i, j) = row[static_cast<std::size_t>(j)];
        }
      }
      split_block(m, all);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("reduced model JSON is missing or mistyped: ") + e.what());
  }
  m.validate();
  return m;
}

ReducedModel read_reduced_model(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw IoError("cannot open " + json_path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return reduced_model_from_json(ss.str(), json_path.parent_path());
}

}  // namespace dnf::nf
