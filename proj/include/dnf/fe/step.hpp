#pragma once

#include "dnf/core/linalg.hpp"

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace dnf::fe {

/// Quadratic and cubic force vectors recovered from imposed static displacements.
struct StepVectors {
  std::map<std::pair<int, int>, Vec> quadratic;  ///< G(phi_i, phi_j), i <= j
  std::map<std::array<int, 3>, Vec> cubic;       ///< H(phi_i, phi_i, phi_i), H(phi_i, phi_i, phi_j), H(phi_i, phi_j, phi_j)
};

/**
 * Stiffness evaluation procedure on an arbitrary full-force evaluator F(u).
 *
 * Single mode, with amplitude a:
 *   G(p,p)   = [F(a p) + F(-a p)] / (2 a^2)
 *   H(p,p,p) = [F(a p) - F(-a p) - 2 a K p] / (2 a^3)
 * When no stiffness is supplied the linear part is removed with a second
 * amplitude 2a instead. Mixed terms of mode pairs use the sum and difference
 * of the two modes and require the stiffness.
 */
StepVectors step_extract(const std::function<Vec(const Vec&)>& full_force, const std::vector<Vec>& modes,
                         double amplitude, const std::optional<SparseSymmetricMatrix>& stiffness = std::nullopt,
                         bool cross_terms = false);

}  // namespace dnf::fe
