#include "dnf/fe/step.hpp"

#include "dnf/core/error.hpp"

#include <cmath>

namespace dnf::fe {

StepVectors step_extract(const std::function<Vec(const Vec&)>& full_force, const std::vector<Vec>& modes,
                         double amplitude, const std::optional<SparseSymmetricMatrix>& stiffness, bool cross_terms) {
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) throw ConfigError("STEP amplitude must be positive");
  if (cross_terms && !stiffness) throw ConfigError("STEP cross terms need the stiffness matrix");
  const double a = amplitude;
  StepVectors out;
  // Odd part H(v,v,v) of a combined displacement v.
  auto odd_cubic = [&](const Vec& v, const Vec& fp, const Vec& fm) -> Vec {
    if (stiffness) return (fp - fm - 2.0 * a * stiffness->multiply(v)) / (2.0 * a * a * a);
    const Vec fp2 = full_force(2.0 * a * v);
    const Vec fm2 = full_force(-2.0 * a * v);
    return ((fp2 - fm2) - 2.0 * (fp - fm)) / (12.0 * a * a * a);
  };
  const int n = static_cast<int>(modes.size());
  for (int i = 0; i < n; ++i) {
    const Vec& p = modes[static_cast<std::size_t>(i)];
    const Vec fp = full_force(a * p);
    const Vec fm = full_force(-a * p);
    out.quadratic[{i, i}] = (fp + fm) / (2.0 * a * a);
    out.cubic[{i, i, i}] = odd_cubic(p, fp, fm);
  }
  if (!cross_terms) return out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Vec s = modes[static_cast<std::size_t>(i)] + modes[static_cast<std::size_t>(j)];
      const Vec d = modes[static_cast<std::size_t>(i)] - modes[static_cast<std::size_t>(j)];
      const Vec fsp = full_force(a * s), fsm = full_force(-a * s);
      const Vec fdp = full_force(a * d), fdm = full_force(-a * d);
      const Vec gs = (fsp + fsm) / (2.0 * a * a);
      const Vec gd = (fdp + fdm) / (2.0 * a * a);
      out.quadratic[{i, j}] = 0.25 * (gs - gd);
      const Vec hs = odd_cubic(s, fsp, fsm);
      const Vec hd = odd_cubic(d, fdp, fdm);
      const Vec& hiii = out.cubic.at({i, i, i});
      const Vec& hjjj = out.cubic.at({j, j, j});
      out.cubic[{i, i, j}] = (hs - hd - 2.0 * hjjj) / 6.0;
      out.cubic[{i, j, j}] = (hs + hd - 2.0 * hiii) / 6.0;
    }
  return out;
}

}  // namespace dnf::fe
