#pragma once

#include "dnf/model/mechanical_system.hpp"
#include "dnf/rom/rom.hpp"

#include <functional>
#include <vector>

namespace dnf::solvers {

using rom::SecondOrderOde;

struct GenAlphaOptions {
  double rho_inf = 0.9;  ///< spectral radius at infinite step
  double dt = 0.0;
  double t_end = 0.0;
  double newton_tolerance = 1e-10;  ///< relative to the force scale
  int max_iterations = 30;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> v;
};

/// Generalized-alpha (Chung-Hulbert) with full Newton on x'' + f(x, x') = load cos(w t).
Trajectory integrate_generalized_alpha(const SecondOrderOde& ode, double omega, const Vec& x0, const Vec& v0,
                                       const GenAlphaOptions& options, int record_every = 1);

using Observer = std::function<void(double t, const Vec& u, const Vec& v)>;

/**
 * Generalized-alpha on M u'' + c M u' + K u + G(u,u) + H(u,u,u) = load cos(w t).
 * The iteration matrix uses the linear stiffness (modified Newton) and is
 * factorized once. `u` and `v` hold the initial state on entry and the
 * final state on return; `observe` is called after every step.
 */
void integrate_generalized_alpha(const model::MechanicalSystem& system, double damping, const Vec& load, double omega,
                                 Vec& u, Vec& v, const GenAlphaOptions& options, const Observer& observe);

/// Adaptive Dormand-Prince reference integration sampled every `sample_dt`.
Trajectory integrate_reference(const SecondOrderOde& ode, double omega, const Vec& x0, const Vec& v0, double t_end,
                               double sample_dt, double rel_tol = 1e-11, double abs_tol = 1e-13);

/// Max |x_j| over samples with t >= from_time.
Vec steady_amplitude(const Trajectory& traj, double from_time);

}  // namespace dnf::solvers
