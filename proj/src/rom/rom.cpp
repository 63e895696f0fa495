#include "dnf/rom/rom.hpp"

#include "dnf/core/error.hpp"

#include <cmath>

namespace dnf::rom {

RomEvaluator::RomEvaluator(nf::ReducedModel model) : model_(std::move(model)) {
  model_.validate();
  const int n = model_.size();
  t_ = nf::Tensor4(n);
  u_ = nf::Tensor4(n);
  for (std::size_t i = 0; i < t_.data().size(); ++i) {
    t_.data()[i] = model_.h.data()[i] + model_.A.data()[i] + model_.P.data()[i];
    u_.data()[i] = model_.B.data()[i] + model_.Q.data()[i];
  }
}

void RomEvaluator::nonlinear_force(const Vec& r, const Vec& rdot, Vec& f, Mat* dfdr, Mat* dfdv) const {
  const int n = size();
  if (r.size() != n || rdot.size() != n) throw DimensionError("reduced state length differs from the master count");
  f = Vec::Zero(n);
  if (dfdr) *dfdr = Mat::Zero(n, n);
  if (dfdv) *dfdv = Mat::Zero(n, n);
  for (int p = 0; p < n; ++p) {
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) {
        const double g = model_.g(p, k, l);
        if (g != 0.0) {
          f(p) += g * r(k) * r(l);
          if (dfdr) {
            (*dfdr)(p, k) += g * r(l);
            (*dfdr)(p, l) += g * r(k);
          }
        }
        for (int m = 0; m < n; ++m) {
          const double t = t_(p, k, l, m);
          if (t != 0.0) {
            f(p) += t * r(k) * r(l) * r(m);
            if (dfdr) {
              (*dfdr)(p, k) += t * r(l) * r(m);
              (*dfdr)(p, l) += t * r(k) * r(m);
              (*dfdr)(p, m) += t * r(k) * r(l);
            }
          }
          const double u = u_(p, k, l, m);
          if (u != 0.0) {
            f(p) += u * r(k) * rdot(l) * rdot(m);
            if (dfdr) (*dfdr)(p, k) += u * rdot(l) * rdot(m);
            if (dfdv) {
              (*dfdv)(p, l) += u * r(k) * rdot(m);
              (*dfdv)(p, m) += u * r(k) * rdot(l);
            }
          }
        }
      }
    }
  }
}

Vec RomEvaluator::acceleration(const Vec& r, const Vec& rdot, double t, const Forcing& forcing) const {
  Vec f;
  nonlinear_force(r, rdot, f, nullptr, nullptr);
  Vec acc = -f - model_.damping * rdot - model_.omega.cwiseAbs2().cwiseProduct(r);
  acc(model_.driven) += forcing.kappa * std::cos(forcing.omega * t);
  return acc;
}

Vec RomEvaluator::reduced_rhs(const Vec& state, double t, const Forcing& forcing) const {
  const int n = size();
  if (state.size() != 2 * n) throw DimensionError("reduced state must hold r and rdot");
  Vec out(2 * n);
  out.head(n) = state.tail(n);
  out.tail(n) = acceleration(state.head(n), state.tail(n), t, forcing);
  return out;
}

double RomEvaluator::single_mode_energy(double r, double rdot) const {
  if (size() != 1) throw ConfigError("the energy integral is defined for single-master models");
  const double w2 = model_.omega(0) * model_.omega(0);
  const double a = t_(0, 0, 0, 0);
  const double b = u_(0, 0, 0, 0);
  const double u = r * r;
  const double z = b * u;
  const double lin = b == 0.0 ? u : std::expm1(z) / b;
  // (z e^z - expm1 z) / b^2, expanded for small z.
  const double quart = std::abs(z) < 1e-4 ? u * u * (0.5 + z / 3.0 + z * z / 8.0) : (z * std::exp(z) - std::expm1(z)) / (b * b);
  return std::exp(z) * rdot * rdot + w2 * lin + a * quart;
}

SecondOrderOde RomEvaluator::ode(double kappa) const {
  SecondOrderOde out;
  out.dim = size();
  out.load = Vec::Zero(size());
  out.load(model_.driven) = kappa;
  out.force = [this](const Vec& x, const Vec& v, Vec& f, Mat* dfdx, Mat* dfdv) {
    nonlinear_force(x, v, f, dfdx, dfdv);
    f += model_.omega.cwiseAbs2().cwiseProduct(x) + model_.damping * v;
    if (dfdx) dfdx->diagonal() += model_.omega.cwiseAbs2();
    if (dfdv) dfdv->diagonal().array() += model_.damping;
  };
  return out;
}

std::array<Vec, 2> RomEvaluator::reconstruct_physical(const Vec& r, const Vec& rdot) const {
  if (!model_.has_maps()) throw ConfigError("reduced model carries no mapping vectors");
  const int n = size();
  if (r.size() != n || rdot.size() != n) throw DimensionError("reduced state length differs from the master count");
  const Vec s = model_.normal_velocity(r, rdot);
  Vec rr(n * n), ss(n * n), rs(n * n);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      rr(k * n + l) = r(k) * r(l);
      ss(k * n + l) = s(k) * s(l);
      rs(k * n + l) = r(k) * s(l);
    }
  }
  Vec u = model_.phi * r + model_.a_hat * rr + model_.b_hat * ss;
  Vec v = model_.phi * s + model_.gamma_hat * rs;
  return {std::move(u), std::move(v)};
}

}  // namespace dnf::rom
