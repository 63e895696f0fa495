#include "dnf/model/discrete_system.hpp"

#include "dnf/core/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dnf::model {

namespace {

using nlohmann::json;

bool close(double a, double b) {
  return std::abs(a - b) <= 1e-13 * std::max({1.0, std::abs(a), std::abs(b)});
}

template <std::size_t K>
void check_symmetric(const std::map<std::array<int, K>, double>& table, const char* name) {
  for (const auto& [key, value] : table) {
    std::array<int, K> perm = key;
    std::sort(perm.begin() + 1, perm.end());
    do {
      auto it = table.find(perm);
      const double other = it == table.end() ? 0.0 : it->second;
      if (!close(other, value)) {
        std::ostringstream os;
        os << name << " table is not symmetric in its trailing indices at (";
        for (std::size_t i = 0; i < K; ++i) os << (i ? "," : "") << key[i] + 1;
        os << ")";
        throw ConfigError(os.str());
      }
    } while (std::next_permutation(perm.begin() + 1, perm.end()));
  }
}

}  // namespace

MechanicalSystem build_discrete_system(const DiscreteCoefficients& coeffs) {
  const int n = static_cast<int>(coeffs.frequencies.size());
  if (n == 0) throw ConfigError("discrete system needs at least one frequency");
  Vec w2(n);
  for (int i = 0; i < n; ++i) {
    const double w = coeffs.frequencies[static_cast<std::size_t>(i)];
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("frequencies must be positive and finite");
    w2(i) = w * w;
  }
  for (const auto& [key, v] : coeffs.g) {
    for (int idx : key)
      if (idx < 0 || idx >= n) throw DimensionError("g index outside the frequency list");
    if (!std::isfinite(v)) throw ConfigError("g coefficient not finite");
  }
  for (const auto& [key, v] : coeffs.h) {
    for (int idx : key)
      if (idx < 0 || idx >= n) throw DimensionError("h index outside the frequency list");
    if (!std::isfinite(v)) throw ConfigError("h coefficient not finite");
  }
  check_symmetric(coeffs.g, "g");
  check_symmetric(coeffs.h, "h");

  using GEntry = std::pair<std::array<int, 3>, double>;
  using HEntry = std::pair<std::array<int, 4>, double>;
  auto g = std::make_shared<std::vector<GEntry>>(coeffs.g.begin(), coeffs.g.end());
  auto h = std::make_shared<std::vector<HEntry>>(coeffs.h.begin(), coeffs.h.end());

  NonlinearOperators ops;
  ops.quadratic = [g, n](const Vec& a, const Vec& b) {
    Vec out = Vec::Zero(n);
    for (const auto& [k, v] : *g) out(k[0]) += v * a(k[1]) * b(k[2]);
    return out;
  };
  ops.cubic = [h, n](const Vec& a, const Vec& b, const Vec& c) {
    Vec out = Vec::Zero(n);
    for (const auto& [k, v] : *h) out(k[0]) += v * a(k[1]) * b(k[2]) * c(k[3]);
    return out;
  };
  return MechanicalSystem(SparseSymmetricMatrix::identity(n), SparseSymmetricMatrix::diagonal(w2),
                          std::move(ops));
}

DiscreteCoefficients parse_discrete_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("discrete system JSON: ") + e.what());
  }
  DiscreteCoefficients c;
  try {
    c.frequencies = doc.at("frequencies").get<std::vector<double>>();
    if (doc.contains("g")) {
      for (const auto& row : doc.at("g")) {
        if (row.size() != 4) throw ConfigError("g rows need [s,k,l,value]");
        c.g[{row[0].get<int>() - 1, row[1].get<int>() - 1, row[2].get<int>() - 1}] += row[3].get<double>();
      }
    }
    if (doc.contains("h")) {
      for (const auto& row : doc.at("h")) {
        if (row.size() != 5) throw ConfigError("h rows need [s,k,l,m,value]");
        c.h[{row[0].get<int>() - 1, row[1].get<int>() - 1, row[2].get<int>() - 1,
             row[3].get<int>() - 1}] += row[4].get<double>();
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("discrete system JSON: ") + e.what());
  }
  return c;
}

DiscreteCoefficients load_discrete_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open discrete system file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_discrete_json(ss.str());
}

std::string to_discrete_json(const DiscreteCoefficients& coeffs) {
  json doc;
  doc["frequencies"] = coeffs.frequencies;
  doc["g"] = json::array();
  for (const auto& [k, v] : coeffs.g) doc["g"].push_back({k[0] + 1, k[1] + 1, k[2] + 1, v});
  doc["h"] = json::array();
  for (const auto& [k, v] : coeffs.h) doc["h"].push_back({k[0] + 1, k[1] + 1, k[2] + 1, k[3] + 1, v});
  return doc.dump(2);
}

void set_symmetric_g(DiscreteCoefficients& c, int s, int k, int l, double v) {
  c.g[{s, k, l}] = v;
  c.g[{s, l, k}] = v;
}

void set_symmetric_h(DiscreteCoefficients& c, int s, int k, int l, int m, double v) {
  std::array<int, 3> idx{k, l, m};
  std::sort(idx.begin(), idx.end());
  do {
    c.h[{s, idx[0], idx[1], idx[2]}] = v;
  } while (std::next_permutation(idx.begin(), idx.end()));
}

}  // namespace dnf::model
