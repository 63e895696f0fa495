#pragma once

#include "dnf/nf/reduced_model.hpp"

#include <array>
#include <functional>

namespace dnf::rom {

/// x'' + force(x, x') = load cos(w t), with identity mass.
struct SecondOrderOde {
  int dim = 0;
  /// Writes the internal force; Jacobians are filled when the pointers are non-null.
  std::function<void(const Vec& x, const Vec& v, Vec& f, Mat* dfdx, Mat* dfdv)> force;
  Vec load;
};

struct Forcing {
  double kappa = 0.0;
  double omega = 0.0;
};

/**
 * Executable form of a ReducedModel. The cubic tables are merged once:
 * T = (h + A) + P multiplies r_k r_l r_m and U = B + Q multiplies r_k r_l' r_m'.
 */
class RomEvaluator {
 public:
  explicit RomEvaluator(nf::ReducedModel model);

  const nf::ReducedModel& model() const { return model_; }
  int size() const { return model_.size(); }

  /// Polynomial part g r r + T r r r + U r r' r'.
  void nonlinear_force(const Vec& r, const Vec& rdot, Vec& f, Mat* dfdr, Mat* dfdv) const;
  /// r'' from (r, r') at time t.
  Vec acceleration(const Vec& r, const Vec& rdot, double t, const Forcing& forcing) const;
  /// Derivative of the first-order state (r, r').
  Vec reduced_rhs(const Vec& state, double t, const Forcing& forcing) const;
  /// Conservative energy-like integral of a single-master model without resonant terms.
  double single_mode_energy(double r, double rdot) const;

  /// Full reduced ODE with linear terms, damping and the load on the driven master.
  /// The returned callable refers to this evaluator, which must outlive it.
  SecondOrderOde ode(double kappa) const;
  /// Displacement and velocity on the free DOFs of the originating system.
  std::array<Vec, 2> reconstruct_physical(const Vec& r, const Vec& rdot) const;

 private:
  nf::ReducedModel model_;
  nf::Tensor4 t_;
  nf::Tensor4 u_;
};

}  // namespace dnf::rom
