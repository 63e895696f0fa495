#pragma once

#include "dnf/core/linalg.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace dnf::model {

using QuadraticOp = std::function<Vec(const Vec&, const Vec&)>;
using CubicOp = std::function<Vec(const Vec&, const Vec&, const Vec&)>;
using FullForceOp = std::function<Vec(const Vec&)>;

/// Polynomial internal-force evaluators of a mechanical system.
struct NonlinearOperators {
  QuadraticOp quadratic;           ///< G(a,b), symmetric bilinear
  CubicOp cubic;                   ///< H(a,b,c), symmetric trilinear
  std::optional<FullForceOp> full; ///< F(u) assembled without splitting, if available
};

/**
 * N-DOF conservative system  M u'' + K u + G(u,u) + H(u,u,u) = f.
 *
 * Vectors live on free DOFs. The constrained index set refers to the
 * unreduced numbering and is kept for expansion and export only.
 */
class MechanicalSystem {
 public:
  MechanicalSystem(SparseSymmetricMatrix mass, SparseSymmetricMatrix stiffness,
                   NonlinearOperators ops, std::vector<Index> constrained_dofs = {},
                   Index unreduced_dof_count = -1);

  Index dof_count() const { return mass_.dim(); }
  Index unreduced_dof_count() const { return unreduced_; }
  const SparseSymmetricMatrix& mass() const { return mass_; }
  const SparseSymmetricMatrix& stiffness() const { return stiffness_; }
  const std::vector<Index>& constrained_dofs() const { return constrained_; }

  Vec eval_quadratic(const Vec& a, const Vec& b) const;
  Vec eval_cubic(const Vec& a, const Vec& b, const Vec& c) const;
  /// Full internal force K u + G(u,u) + H(u,u,u); uses the unsplit evaluator when present.
  Vec full_internal_force(const Vec& u) const;
  bool has_unsplit_force() const { return ops_.full.has_value(); }

 private:
  void check(const Vec& v, const char* what) const;

  SparseSymmetricMatrix mass_;
  SparseSymmetricMatrix stiffness_;
  NonlinearOperators ops_;
  std::vector<Index> constrained_;
  Index unreduced_;
};

using SystemPtr = std::shared_ptr<const MechanicalSystem>;

}  // namespace dnf::model
