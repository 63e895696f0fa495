#pragma once

#include "dnf/core/linalg.hpp"
#include "dnf/fe/material.hpp"
#include "dnf/fe/mesh.hpp"
#include "dnf/model/mechanical_system.hpp"

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace dnf::fe {

struct FeOptions {
  int quadrature_extra = 0;  ///< raises the stiffness/force rule above the default order
};

/**
 * Total-Lagrangian Saint-Venant-Kirchhoff discretization of a mesh.
 *
 * Three displacement components per node, numbered node-major. Every node of
 * the listed clamp sets is fixed in all directions and removed from the
 * free numbering. Force routines take and return free-DOF vectors.
 */
class FeModel {
 public:
  FeModel(Mesh mesh, Material material, const std::vector<std::string>& clamp_sets, FeOptions options = {});

  const Mesh& mesh() const;
  const Material& material() const;
  Index total_dof_count() const;
  Index free_dof_count() const;
  /// Constrained DOFs in the unreduced numbering.
  const std::vector<Index>& constrained_dofs() const;
  /// Free index of (node, component), or -1 when clamped.
  Index free_index(int node, int component) const;

  Vec expand(const Vec& free) const;
  Vec restrict(const Vec& total) const;

  /// Consistent mass and linear stiffness on the free DOFs.
  std::pair<SparseSymmetricMatrix, SparseSymmetricMatrix> assemble_linear() const;

  Vec quadratic_force(const Vec& a, const Vec& b) const;
  Vec cubic_force(const Vec& a, const Vec& b, const Vec& c) const;
  /// Internal force of the unsplit Green-Lagrange strain and second Piola-Kirchhoff stress.
  Vec full_internal_force(const Vec& u) const;
  /// Linear elastic internal force, equal to K u without forming K.
  Vec linear_force(const Vec& u) const;

  /// Mechanical system sharing this model's kernels (assembles M and K).
  model::MechanicalSystem to_system() const;

  /// Nearest node to a point.
  int nearest_node(const std::array<double, 3>& point) const;

  /// Opaque element data shared by copies of the model.
  struct Data;

 private:
  std::shared_ptr<const Data> data_;
};

}  // namespace dnf::fe
