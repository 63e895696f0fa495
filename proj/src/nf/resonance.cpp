#include "dnf/core/error.hpp"
#include "dnf/nf/normal_form.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace dnf::nf {

ResonanceTable::ResonanceTable(Vec omega, double tolerance, std::vector<ResonanceEntry> entries)
    : omega_(std::move(omega)), tolerance_(tolerance), entries_(std::move(entries)) {}

std::vector<int> ResonanceTable::targets(int a, int b) const {
  if (a > b) std::swap(a, b);
  for (const auto& e : entries_)
    if (e.a == a && e.b == b) return e.targets;
  return {};
}

std::vector<int> ResonanceTable::pair_targets(int k, int l) const {
  const int n = master_count();
  std::set<int> merged;
  for (int a : {k, k + n})
    for (int b : {l, l + n})
      for (int r : targets(a, b)) merged.insert(r);
  return {merged.begin(), merged.end()};
}

ResonanceTable detect_resonances(const Vec& omega, double eps_rel) {
  if (!(eps_rel > 0.0 && eps_rel <= 0.2))
    throw ConfigError("resonance tolerance must lie in (0, 0.2], got " + std::to_string(eps_rel));
  const spectral::ComplexSpectrum spec = spectral::build_spectrum(omega);
  const int n = spec.master_count();
  std::vector<ResonanceEntry> entries;
  for (int a = 0; a < 2 * n; ++a) {
    for (int b = a; b < 2 * n; ++b) {
      const double sigma = spec.imag(a) + spec.imag(b);
      ResonanceEntry e{a, b, sigma, {}};
      for (int r = 0; r < n; ++r)
        if (std::abs(std::abs(sigma) - omega[r]) / omega[r] < eps_rel) e.targets.push_back(r);
      if (!e.targets.empty()) entries.push_back(std::move(e));
    }
  }
  return ResonanceTable(omega, eps_rel, std::move(entries));
}

}  // namespace dnf::nf
