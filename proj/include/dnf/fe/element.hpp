#pragma once

#include "dnf/fe/mesh.hpp"

#include <Eigen/Dense>

#include <vector>

namespace dnf::fe {

/// Integration point in the reference element.
struct QuadraturePoint {
  Eigen::Vector3d xi;
  double weight = 0.0;
};

/// Tensor Gauss rule on [-1,1]^3 with n points per direction (1 <= n <= 5).
std::vector<QuadraturePoint> gauss_hex(int n);

/// Symmetric 4-point rule on the unit tetrahedron, exact for quadratics.
std::vector<QuadraturePoint> tet4_point_rule();

/// Collapsed-cube Gauss rule on the unit tetrahedron with n points per direction.
std::vector<QuadraturePoint> collapsed_tet_rule(int n);

/// Stiffness and force rule; `extra` raises the order above the default.
std::vector<QuadraturePoint> stiffness_rule(ElementKind kind, int extra = 0);

/// Mass rule; the tetrahedral 4-point rule under-integrates the quadratic mass.
std::vector<QuadraturePoint> mass_rule(ElementKind kind);

/// Shape function values at xi, one per element node.
Eigen::VectorXd shape_values(ElementKind kind, const Eigen::Vector3d& xi);

/// Reference gradients, one row per node: dN_a/dxi_j.
Eigen::MatrixXd shape_gradients(ElementKind kind, const Eigen::Vector3d& xi);

/// Reference coordinates of the element nodes (rows).
Eigen::MatrixXd reference_nodes(ElementKind kind);

}  // namespace dnf::fe
