#include "dnf/solvers/frf.hpp"

#include "dnf/core/error.hpp"

#include <cmath>
#include <numbers>

namespace dnf::solvers {

Vec physical_amplitude(const HarmonicBalance& hb, const rom::RomEvaluator& rom, const Vec& x, double omega,
                       int samples) {
  if (samples < 3) throw ConfigError("physical amplitude needs at least 3 phase samples");
  if (hb.dim() != rom.size()) throw DimensionError("harmonic balance and reduced model sizes differ");
  Mat u;
  for (int i = 0; i < samples; ++i) {
    const double tau = 2.0 * std::numbers::pi * i / samples;
    const auto state = rom.reconstruct_physical(hb.displacement(x, tau), hb.velocity(x, omega, tau));
    if (i == 0) u.resize(state[0].size(), samples);
    u.col(i) = state[0].cwiseAbs();
  }
  Vec out(u.rows());
  for (Index j = 0; j < u.rows(); ++j) {
    Index i = 0;
    const double y1 = u.row(j).maxCoeff(&i);
    const double y0 = u(j, (i + samples - 1) % samples);
    const double y2 = u(j, (i + 1) % samples);
    const double den = y0 - 2.0 * y1 + y2;
    out(j) = den < 0.0 ? y1 - 0.125 * (y2 - y0) * (y2 - y0) / den : y1;
  }
  return out;
}

std::vector<double> branch_physical_amplitude(const HarmonicBalance& hb, const rom::RomEvaluator& rom,
                                              const Branch& branch, Index dof, int samples) {
  std::vector<double> out;
  out.reserve(branch.points.size());
  for (const auto& p : branch.points) {
    const Vec a = physical_amplitude(hb, rom, p.coefficients, p.omega, samples);
    if (dof >= a.size()) throw DimensionError("physical DOF index out of range");
    out.push_back(dof >= 0 ? a(dof) : a.maxCoeff());
  }
  return out;
}

}  // namespace dnf::solvers
