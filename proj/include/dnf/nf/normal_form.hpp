#pragma once

#include "dnf/core/linalg.hpp"
#include "dnf/model/mechanical_system.hpp"
#include "dnf/nf/tensor.hpp"
#include "dnf/spectral/modes.hpp"

#include <map>
#include <utility>
#include <vector>

namespace dnf::nf {

/// Default relative tolerance of the second-order resonance test.
inline constexpr double kDefaultResonanceTolerance = 0.05;

/// State-level resonance: lambda_a + lambda_b = i sigma close to +-i omega_r.
struct ResonanceEntry {
  int a = 0;                 ///< state index, a <= b
  int b = 0;
  double sigma = 0.0;        ///< Im(lambda_a + lambda_b)
  std::vector<int> targets;  ///< master indices r with ||sigma| - omega_r| / omega_r < eps
};

/**
 * Second-order resonance bookkeeping over master states.
 *
 * States 0..n-1 carry +i omega, states n..2n-1 their conjugates. Only
 * resonant pairs are stored. pair_targets() merges the four sign
 * combinations of a master pair; the pair solves use that merged set.
 */
class ResonanceTable {
 public:
  ResonanceTable() = default;
  ResonanceTable(Vec omega, double tolerance, std::vector<ResonanceEntry> entries);

  double tolerance() const { return tolerance_; }
  int master_count() const { return static_cast<int>(omega_.size()); }
  const Vec& omega() const { return omega_; }
  const std::vector<ResonanceEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  /// Targets of the state pair (symmetric in a, b); empty when not resonant.
  std::vector<int> targets(int a, int b) const;
  /// Union of targets over every sign combination of the master pair (k, l), ascending.
  std::vector<int> pair_targets(int k, int l) const;

 private:
  Vec omega_;
  double tolerance_ = kDefaultResonanceTolerance;
  std::vector<ResonanceEntry> entries_;
};

/// Throws ConfigError unless 0 < eps_rel <= 0.2.
ResonanceTable detect_resonances(const Vec& omega, double eps_rel);

/// Second-order maps of one unordered master pair.
struct PairSolution {
  int k = 0;
  int l = 0;
  std::vector<int> targets;  ///< master indices the maps are M-orthogonal to
  Vec psi_p;                 ///< sigma = omega_k + omega_l
  Vec psi_n;                 ///< sigma = omega_k - omega_l
  Vec mu_p;                  ///< bordered multipliers, equal to -phi_r^T G(phi_k, phi_l)
  Vec mu_n;
  double residual_p = 0.0;   ///< ||[K - sigma^2 M] psi + M Phi_R mu + G|| / ||G||
  double residual_n = 0.0;
  double orthogonality = 0.0;  ///< max |phi_r^T M psi| over targets and both maps
};

/**
 * Solves [K - (omega_k +- omega_l)^2 M] psi = -G(phi_k, phi_l), bordered
 * with M phi_r for every resonant target. The sigma = 0 map of a
 * non-resonant pair is a plain stiffness solve.
 */
PairSolution solve_second_order_pair(const model::MechanicalSystem& system, const spectral::ModeSet& masters,
                                     const ResonanceTable& table, int k, int l);

/// Real displacement and velocity maps of a master pair.
struct RealMaps {
  Vec a_hat;
  Vec b_hat;
  Vec gamma_hat;  ///< coefficient of r_k s_l (not symmetric in k, l)
};

/// a = (P + N)/2, b = (N - P)/(2 w_k w_l), gamma = ((w_l + w_k)/w_l) P + ((w_l - w_k)/w_l) N.
RealMaps realize_quadratic_maps(const Vec& psi_p, const Vec& psi_n, double omega_k, double omega_l);

/**
 * Imaginary part of the velocity map (lambda_a + lambda_b) Psi + sum_s f2_s phi_s.
 * `f2_imag` holds Im f2_{s,a,b} for the 2n states; state s uses column s mod n of `phi`.
 */
Vec velocity_map(const Vec& psi, const Vec& f2_imag, double lambda_a_imag, double lambda_b_imag, const Mat& phi);

/// All pair maps plus the resonant quadratic coefficients.
struct QuadraticMapSet {
  int n = 0;
  std::vector<PairSolution> pairs;  ///< ordered (0,0), (0,1), ..., (n-1,n-1)
  Tensor3 f2;                       ///< Im f2[s][a][b] over 2n states

  const PairSolution& pair(int k, int l) const;
  /// Psi for the state pair (a, b): P map when both signs agree, N map otherwise.
  const Vec& psi(int a, int b) const;
};

QuadraticMapSet solve_quadratic_maps(const model::MechanicalSystem& system, const spectral::ModeSet& masters,
                                     const ResonanceTable& table);

/**
 * Third-order coefficients.
 *
 * f3 stores Im f3[s][a][b][c] for s over 2n states. The real tables use
 * ordered sums over master indices:
 *   h[p][k][l][m] = phi_p^T H(phi_k, phi_l, phi_m)
 *   A[p][k][l][m] = 2 phi_p^T G(phi_k, a_lm),  B[p][k][l][m] = 2 phi_p^T G(phi_k, b_lm)
 * P and Q hold the difference between the exact real expansion of the
 * complex reduced dynamics and (h + A) r r r, B r rdot rdot; they vanish
 * without resonance. `vel_rrv` and `vel_vvv` give rdot_p - s_p in terms of
 * r_k r_l rdot_m and rdot_k rdot_l rdot_m.
 */
struct CubicCoefficients {
  int n = 0;
  Tensor4 f3;
  Tensor4 h, A, B, P, Q;
  Tensor4 vel_rrv, vel_vvv;
  double max_odd_residual = 0.0;  ///< largest dropped odd-in-velocity term (round-off scale)
};

CubicCoefficients compute_cubic_coefficients(const model::MechanicalSystem& system, const spectral::ModeSet& masters,
                                             const QuadraticMapSet& maps, const ResonanceTable& table);

/// Sum over p of -Psi_{s,pc} f2_{p,ab} - Psi_{s,ap} f2_{p,bc} (imaginary part), from the stored maps.
double resonant_sum_relation(const model::MechanicalSystem& system, const spectral::ModeSet& masters,
                             const QuadraticMapSet& maps, int s, int a, int b, int c);

}  // namespace dnf::nf
