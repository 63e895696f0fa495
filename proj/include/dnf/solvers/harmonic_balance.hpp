#pragma once

#include "dnf/rom/rom.hpp"

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

namespace dnf::solvers {

using rom::SecondOrderOde;

struct HBConfig {
  int harmonics = 9;
  double tolerance = 1e-10;  ///< on ||R|| / max(||load||, tiny)
  int max_iterations = 25;
};

struct ContinuationConfig {
  double omega_start = 0.0;
  double omega_end = 0.0;
  double initial_step = 0.01;  ///< in the scaled (omega, coefficients) arclength metric
  double min_step = 1e-6;
  double max_step = 0.05;
  double grow = 1.5;
  double shrink = 0.5;
  int max_points = 20000;
  bool stability = true;
  /// Scale of the Fourier coefficients in the arclength metric; 0 picks the peak linear response.
  double amplitude_scale = 0.0;
};

enum class Bifurcation { None, SaddleNode, NeimarkSacker };
std::string to_string(Bifurcation b);

struct BranchPoint {
  double omega = 0.0;
  Vec coefficients;  ///< per variable: mean, (cos h, sin h) for h = 1..H
  Vec amplitude;     ///< max over one period of |x_j(t)|
  std::vector<std::complex<double>> multipliers;
  bool stable = true;
  Bifurcation marker = Bifurcation::None;
  int iterations = 0;
  double residual = 0.0;
};

struct Branch {
  int dim = 0;
  int harmonics = 0;
  std::vector<BranchPoint> points;
  bool completed = false;  ///< reached the end of the frequency range
  std::string diagnostic;
};

/**
 * Fourier-Galerkin discretization of x'' + f(x, x') = load cos(w t).
 *
 * The nonlinear force is sampled on 4H + 1 points per period
 * (alternating frequency-time), which is alias-free for cubic terms.
 */
class HarmonicBalance {
 public:
  HarmonicBalance(SecondOrderOde ode, int harmonics);

  int dim() const { return ode_.dim; }
  int harmonics() const { return h_; }
  int block() const { return 2 * h_ + 1; }
  Index unknowns() const { return static_cast<Index>(dim()) * block(); }
  const SecondOrderOde& ode() const { return ode_; }

  /// Residual; fills dR/dX and dR/domega when requested.
  Vec residual(const Vec& x, double omega, Mat* jac = nullptr, Vec* d_omega = nullptr) const;
  /// Linear response of the system linearized at x = 0.
  Vec linear_guess(double omega) const;
  /// Newton solve at fixed frequency; returns false on non-convergence.
  bool solve(Vec& x, double omega, const HBConfig& cfg, int* iterations = nullptr, double* residual = nullptr) const;

  /// x_j(t) and x_j'(t) at phase tau = w t.
  Vec displacement(const Vec& x, double tau) const;
  Vec velocity(const Vec& x, double omega, double tau) const;
  /// Max over one period of |x_j|, located by Newton refinement of the sampled maximum.
  Vec peak_amplitude(const Vec& x) const;

 private:
  SecondOrderOde ode_;
  int h_;
  int nt_;
  Mat synth_;    // nt x block
  Mat project_;  // block x nt
  Mat dtau_;     // block x block
};

/// Floquet multipliers of a periodic solution by RK4 integration of the variational equation.
struct FloquetResult {
  std::vector<std::complex<double>> multipliers;
  bool stable = true;
};
FloquetResult floquet_stability(const HarmonicBalance& hb, const Vec& x, double omega, int steps = 0);

/// Pseudo-arclength continuation of the periodic response over the configured frequency range.
Branch hb_continue(const SecondOrderOde& ode, const HBConfig& hb, const ContinuationConfig& cont);

/// Marks SN (real multiplier through +1) and NS (complex pair through the unit circle) between neighbours.
void mark_bifurcations(Branch& branch);

/// CSV with columns omega, amp_r<p>..., [max_physical_amp], stable, bifurcation.
void write_branch_csv(std::ostream& os, const Branch& branch, const std::vector<double>* physical = nullptr);

}  // namespace dnf::solvers
