#include "dnf/model/mechanical_system.hpp"

#include "dnf/core/error.hpp"

#include <string>

namespace dnf::model {

MechanicalSystem::MechanicalSystem(SparseSymmetricMatrix mass, SparseSymmetricMatrix stiffness,
                                   NonlinearOperators ops, std::vector<Index> constrained_dofs,
                                   Index unreduced_dof_count)
    : mass_(std::move(mass)),
      stiffness_(std::move(stiffness)),
      ops_(std::move(ops)),
      constrained_(std::move(constrained_dofs)),
      unreduced_(unreduced_dof_count < 0 ? mass_.dim() : unreduced_dof_count) {
  if (mass_.dim() != stiffness_.dim()) throw DimensionError("mass and stiffness dimensions differ");
  if (!mass_.all_finite() || !stiffness_.all_finite())
    throw NumericalError("mass or stiffness has non-finite entries");
  if (!ops_.quadratic || !ops_.cubic) throw ConfigError("quadratic and cubic evaluators are required");
}

void MechanicalSystem::check(const Vec& v, const char* what) const {
  if (v.size() != dof_count()) {
    throw DimensionError(std::string(what) + ": vector length " + std::to_string(v.size()) +
                         " differs from DOF count " + std::to_string(dof_count()));
  }
}

Vec MechanicalSystem::eval_quadratic(const Vec& a, const Vec& b) const {
  check(a, "eval_quadratic");
  check(b, "eval_quadratic");
  return ops_.quadratic(a, b);
}

Vec MechanicalSystem::eval_cubic(const Vec& a, const Vec& b, const Vec& c) const {
  check(a, "eval_cubic");
  check(b, "eval_cubic");
  check(c, "eval_cubic");
  return ops_.cubic(a, b, c);
}

Vec MechanicalSystem::full_internal_force(const Vec& u) const {
  check(u, "full_internal_force");
  if (ops_.full) return (*ops_.full)(u);
  return stiffness_.multiply(u) + ops_.quadratic(u, u) + ops_.cubic(u, u, u);
}

}  // namespace dnf::model
