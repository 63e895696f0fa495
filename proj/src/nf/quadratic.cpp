#include "dnf/core/error.hpp"
#include "dnf/core/parallel.hpp"
#include "dnf/nf/normal_form.hpp"

#include <cmath>
#include <sstream>

namespace dnf::nf {

namespace {

constexpr double kSingularRcond = 1e-13;

int pair_slot(int k, int l, int n) {
  if (k > l) std::swap(k, l);
  return k * n - k * (k - 1) / 2 + (l - k);
}

[[noreturn]] void undetected_resonance(double sigma, const Vec& omega) {
  Index nearest = 0;
  (omega.array() - std::abs(sigma)).abs().minCoeff(&nearest);
  std::ostringstream os;
  os.precision(10);
  os << "undetected resonance: K - sigma^2 M is singular at sigma = " << sigma
     << " (nearest master omega_r = " << omega(nearest) << ")";
  throw NumericalError(os.str());
}

struct MapSolve {
  Vec psi;
  Vec mu;
  double residual = 0.0;
};

MapSolve solve_map(const model::MechanicalSystem& system, const Vec& g, double sigma, const Mat& border,
                   const Vec& omega) {
  const Index n = system.dof_count();
  MapSolve out;
  const double gnorm = g.norm();
  if (gnorm == 0.0) {
    out.psi = Vec::Zero(n);
    out.mu = Vec::Zero(border.cols());
    return out;
  }
  const SparseSymmetricMatrix a = system.stiffness().combine(1.0, system.mass(), -sigma * sigma);
  if (border.cols() == 0) {
    const Definiteness kind = sigma == 0.0 ? Definiteness::Positive : Definiteness::Indefinite;
    SymmetricSolver solver(a, kind);
    if (solver.rcond() < kSingularRcond) undetected_resonance(sigma, omega);
    out.psi = solver.solve(Vec(-g));
    out.mu = Vec::Zero(0);
  } else {
    BorderedSolution sol = solve_bordered(a, border, -g, Vec::Zero(border.cols()));
    out.psi = std::move(sol.x);
    out.mu = std::move(sol.y);
  }
  Vec r = a.multiply(out.psi) + g;
  if (border.cols() > 0) r += border * out.mu;
  out.residual = r.norm() / gnorm;
  if (!std::isfinite(out.residual)) undetected_resonance(sigma, omega);
  return out;
}

}  // namespace

PairSolution solve_second_order_pair(const model::MechanicalSystem& system, const spectral::ModeSet& masters,
                                     const ResonanceTable& table, int k, int l) {
  const int n = masters.size();
  if (k < 0 || l < 0 || k >= n || l >= n) throw DimensionError("pair index outside the master set");
  if (table.master_count() != n) throw DimensionError("resonance table and master set disagree");
  if (k > l) std::swap(k, l);
  PairSolution out;
  out.k = k;
  out.l = l;
  out.targets = table.pair_targets(k, l);

  const Vec& omega = masters.frequencies;
  const Vec g = system.eval_quadratic(masters.vectors.col(k), masters.vectors.col(l));
  Mat border(system.dof_count(), static_cast<Index>(out.targets.size()));
  for (std::size_t i = 0; i < out.targets.size(); ++i)
    border.col(static_cast<Index>(i)) = system.mass().multiply(Vec(masters.vectors.col(out.targets[i])));

  MapSolve p = solve_map(system, g, omega(k) + omega(l), border, omega);
  MapSolve m = solve_map(system, g, k == l ? 0.0 : omega(k) - omega(l), border, omega);
  out.psi_p = std::move(p.psi);
  out.psi_n = std::move(m.psi);
  out.mu_p = std::move(p.mu);
  out.mu_n = std::move(m.mu);
  out.residual_p = p.residual;
  out.residual_n = m.residual;
  for (Index c = 0; c < border.cols(); ++c) {
    out.orthogonality = std::max(out.orthogonality, std::abs(border.col(c).dot(out.psi_p)));
    out.orthogonality = std::max(out.orthogonality, std::abs(border.col(c).dot(out.psi_n)));
  }
  return out;
}

RealMaps realize_quadratic_maps(const Vec& psi_p, const Vec& psi_n, double omega_k, double omega_l) {
  if (!(omega_k > 0.0) || !(omega_l > 0.0)) throw NumericalError("real maps need positive frequencies");
  if (psi_p.size() != psi_n.size()) throw DimensionError("real maps: P and N lengths differ");
  RealMaps out;
  out.a_hat = 0.5 * (psi_p + psi_n);
  out.b_hat = (psi_n - psi_p) / (2.0 * omega_k * omega_l);
  out.gamma_hat = ((omega_l + omega_k) / omega_l) * psi_p + ((omega_l - omega_k) / omega_l) * psi_n;
  return out;
}

Vec velocity_map(const Vec& psi, const Vec& f2_imag, double lambda_a_imag, double lambda_b_imag, const Mat& phi) {
  const Index n = phi.cols();
  if (f2_imag.size() != 2 * n) throw DimensionError("velocity map: f2 column must cover 2n states");
  if (psi.size() != phi.rows()) throw DimensionError("velocity map: mapping length mismatch");
  Vec out = (lambda_a_imag + lambda_b_imag) * psi;
  for (Index s = 0; s < 2 * n; ++s)
    if (f2_imag(s) != 0.0) out += f2_imag(s) * phi.col(s % n);
  return out;
}

const PairSolution& QuadraticMapSet::pair(int k, int l) const {
  if (k < 0 || l < 0 || k >= n || l >= n) throw DimensionError("pair index outside the master set");
  return pairs.at(static_cast<std::size_t>(pair_slot(k, l, n)));
}

const Vec& QuadraticMapSet::psi(int a, int b) const {
  const PairSolution& p = pair(a % n, b % n);
  return (a < n) == (b < n) ? p.psi_p : p.psi_n;
}

QuadraticMapSet solve_quadratic_maps(const model::MechanicalSystem& system, const spectral::ModeSet& masters,
                                     const ResonanceTable& table) {
  const int n = masters.size();
  QuadraticMapSet out;
  out.n = n;
  std::vector<std::pair<int, int>> order;
  for (int k = 0; k < n; ++k)
    for (int l = k; l < n; ++l) order.emplace_back(k, l);
  out.pairs.resize(order.size());
  parallel_for(order.size(), [&](std::size_t i) {
    out.pairs[i] = solve_second_order_pair(system, masters, table, order[i].first, order[i].second);
  });

  out.f2 = Tensor3(2 * n);
  for (const auto& p : out.pairs) {
    if (p.targets.empty()) continue;
    const Vec g = system.eval_quadratic(masters.vectors.col(p.k), masters.vectors.col(p.l));
    for (int r : p.targets) {
      const double value = masters.vectors.col(r).dot(g) / (2.0 * masters.frequencies(r));
      for (int a : {p.k, p.k + n}) {
        for (int b : {p.l, p.l + n}) {
          out.f2(r, a, b) = out.f2(r, b, a) = value;
          out.f2(r + n, a, b) = out.f2(r + n, b, a) = -value;
        }
      }
    }
  }
  return out;
}

}  // namespace dnf::nf
