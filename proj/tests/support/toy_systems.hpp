#pragma once

#include "dnf/model/discrete_system.hpp"
#include "dnf/rom/rom.hpp"
#include "dnf/spectral/modes.hpp"

#include <vector>

namespace toys {

using dnf::Index;
using dnf::Mat;
using dnf::Vec;

/// Unit modal vectors of a discrete system (M = I) for the given 0-based masters.
inline dnf::spectral::ModeSet unit_modes(const std::vector<double>& omega, const std::vector<int>& masters) {
  dnf::spectral::ModeSet m;
  const Index n = static_cast<Index>(omega.size());
  m.frequencies.resize(static_cast<Index>(masters.size()));
  m.vectors = Mat::Zero(n, static_cast<Index>(masters.size()));
  for (std::size_t i = 0; i < masters.size(); ++i) {
    m.mode_numbers.push_back(masters[i] + 1);
    m.frequencies(static_cast<Index>(i)) = omega[static_cast<std::size_t>(masters[i])];
    m.vectors(masters[i], static_cast<Index>(i)) = 1.0;
  }
  return m;
}

/// omega = (1, ratio) with g[2][1][1] = 0.3 and g[1][1][2] = g[1][2][1] = 0.3 (1-based).
inline dnf::model::DiscreteCoefficients one_two(double ratio) {
  dnf::model::DiscreteCoefficients c;
  c.frequencies = {1.0, ratio};
  dnf::model::set_symmetric_g(c, 1, 0, 0, 0.3);
  dnf::model::set_symmetric_g(c, 0, 0, 1, 0.3);
  return c;
}

/**
 * Full discrete system as an ODE with damping c * I and load on one DOF:
 *   u'' + c u' + diag(omega^2) u + G(u,u) + H(u,u,u) = kappa e_driven cos(w t).
 * The coefficient tables are copied into the callable.
 */
inline dnf::rom::SecondOrderOde discrete_ode(const dnf::model::DiscreteCoefficients& c, double damping, int driven,
                                             double kappa) {
  dnf::rom::SecondOrderOde ode;
  const int n = static_cast<int>(c.frequencies.size());
  ode.dim = n;
  ode.load = Vec::Zero(n);
  ode.load(driven) = kappa;
  Vec w2(n);
  for (int i = 0; i < n; ++i) w2(i) = c.frequencies[static_cast<std::size_t>(i)] * c.frequencies[static_cast<std::size_t>(i)];
  ode.force = [g = c.g, h = c.h, w2, damping](const Vec& x, const Vec& v, Vec& f, Mat* dfdx, Mat* dfdv) {
    const Index n = x.size();
    f = w2.cwiseProduct(x) + damping * v;
    if (dfdx) *dfdx = Mat(w2.asDiagonal());
    if (dfdv) *dfdv = damping * Mat::Identity(n, n);
    for (const auto& [key, val] : g) {
      const auto [s, k, l] = key;
      f(s) += val * x(k) * x(l);
      if (dfdx) {
        (*dfdx)(s, k) += val * x(l);
        (*dfdx)(s, l) += val * x(k);
      }
    }
    for (const auto& [key, val] : h) {
      const auto [s, k, l, m] = key;
      f(s) += val * x(k) * x(l) * x(m);
      if (dfdx) {
        (*dfdx)(s, k) += val * x(l) * x(m);
        (*dfdx)(s, l) += val * x(k) * x(m);
        (*dfdx)(s, m) += val * x(k) * x(l);
      }
    }
  };
  return ode;
}

}  // namespace toys
