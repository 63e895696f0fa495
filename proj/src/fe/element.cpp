#include "dnf/fe/element.hpp"

#include "dnf/core/error.hpp"

#include <array>
#include <cmath>

namespace dnf::fe {

namespace {

struct Gauss1D {
  std::vector<double> x, w;
};

Gauss1D gauss_1d(int n) {
  switch (n) {
    case 1: return {{0.0}, {2.0}};
    case 2: {
      const double a = 1.0 / std::sqrt(3.0);
      return {{-a, a}, {1.0, 1.0}};
    }
    case 3: {
      const double a = std::sqrt(0.6);
      return {{-a, 0.0, a}, {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}};
    }
    case 4: {
      const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(1.2));
      const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(1.2));
      const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
      const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
      return {{-b, -a, a, b}, {wb, wa, wa, wb}};
    }
    case 5: {
      const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
      const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
      const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
      const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
      return {{-b, -a, 0.0, a, b}, {wb, wa, 128.0 / 225.0, wa, wb}};
    }
    default: throw ConfigError("Gauss rule supports 1 to 5 points per direction");
  }
}

const std::array<std::array<double, 3>, 8> kHexSigns = {{{-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
                                                          {-1, -1, 1}, {1, -1, 1}, {1, 1, 1}, {-1, 1, 1}}};
const int kTetEdges[6][2] = {{0, 1}, {1, 2}, {2, 0}, {3, 0}, {3, 2}, {3, 1}};

}  // namespace

std::vector<QuadraturePoint> gauss_hex(int n) {
  const Gauss1D g = gauss_1d(n);
  std::vector<QuadraturePoint> out;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        out.push_back({Eigen::Vector3d(g.x[i], g.x[j], g.x[k]), g.w[i] * g.w[j] * g.w[k]});
  return out;
}

std::vector<QuadraturePoint> tet4_point_rule() {
  const double a = 0.5854101966249685;
  const double b = 0.1381966011250105;
  const double w = 1.0 / 24.0;
  return {{Eigen::Vector3d(b, b, b), w}, {Eigen::Vector3d(a, b, b), w},
          {Eigen::Vector3d(b, a, b), w}, {Eigen::Vector3d(b, b, a), w}};
}

std::vector<QuadraturePoint> collapsed_tet_rule(int n) {
  const Gauss1D g = gauss_1d(n);
  std::vector<QuadraturePoint> out;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double u = 0.5 * (g.x[i] + 1.0);
        const double v = 0.5 * (g.x[j] + 1.0);
        const double w = 0.5 * (g.x[k] + 1.0);
        const double jac = (1.0 - u) * (1.0 - u) * (1.0 - v);
        out.push_back({Eigen::Vector3d(u, v * (1.0 - u), w * (1.0 - u) * (1.0 - v)),
                       0.125 * g.w[i] * g.w[j] * g.w[k] * jac});
      }
  return out;
}

std::vector<QuadraturePoint> stiffness_rule(ElementKind kind, int extra) {
  if (extra < 0) throw ConfigError("quadrature increment must be non-negative");
  if (kind == ElementKind::Hex8) return gauss_hex(2 + extra);
  return extra == 0 ? tet4_point_rule() : collapsed_tet_rule(2 + extra);
}

std::vector<QuadraturePoint> mass_rule(ElementKind kind) {
  return kind == ElementKind::Hex8 ? gauss_hex(2) : collapsed_tet_rule(4);
}

Eigen::VectorXd shape_values(ElementKind kind, const Eigen::Vector3d& xi) {
  if (kind == ElementKind::Hex8) {
    Eigen::VectorXd n(8);
    for (int a = 0; a < 8; ++a) {
      const auto& s = kHexSigns[static_cast<std::size_t>(a)];
      n(a) = 0.125 * (1 + s[0] * xi(0)) * (1 + s[1] * xi(1)) * (1 + s[2] * xi(2));
    }
    return n;
  }
  const double l[4] = {1.0 - xi.sum(), xi(0), xi(1), xi(2)};
  Eigen::VectorXd n(10);
  for (int a = 0; a < 4; ++a) n(a) = l[a] * (2.0 * l[a] - 1.0);
  for (int e = 0; e < 6; ++e) n(4 + e) = 4.0 * l[kTetEdges[e][0]] * l[kTetEdges[e][1]];
  return n;
}

Eigen::MatrixXd shape_gradients(ElementKind kind, const Eigen::Vector3d& xi) {
  if (kind == ElementKind::Hex8) {
    Eigen::MatrixXd d(8, 3);
    for (int a = 0; a < 8; ++a) {
      const auto& s = kHexSigns[static_cast<std::size_t>(a)];
      const double f0 = 1 + s[0] * xi(0), f1 = 1 + s[1] * xi(1), f2 = 1 + s[2] * xi(2);
      d(a, 0) = 0.125 * s[0] * f1 * f2;
      d(a, 1) = 0.125 * f0 * s[1] * f2;
      d(a, 2) = 0.125 * f0 * f1 * s[2];
    }
    return d;
  }
  const double l[4] = {1.0 - xi.sum(), xi(0), xi(1), xi(2)};
  // dL/dxi rows for the four barycentric coordinates.
  const double dl[4][3] = {{-1, -1, -1}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  Eigen::MatrixXd d(10, 3);
  for (int a = 0; a < 4; ++a)
    for (int j = 0; j < 3; ++j) d(a, j) = (4.0 * l[a] - 1.0) * dl[a][j];
  for (int e = 0; e < 6; ++e) {
    const int p = kTetEdges[e][0], q = kTetEdges[e][1];
    for (int j = 0; j < 3; ++j) d(4 + e, j) = 4.0 * (dl[p][j] * l[q] + l[p] * dl[q][j]);
  }
  return d;
}

Eigen::MatrixXd reference_nodes(ElementKind kind) {
  if (kind == ElementKind::Hex8) {
    Eigen::MatrixXd x(8, 3);
    for (int a = 0; a < 8; ++a)
      for (int j = 0; j < 3; ++j) x(a, j) = kHexSigns[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)];
    return x;
  }
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(10, 3);
  x(1, 0) = 1;
  x(2, 1) = 1;
  x(3, 2) = 1;
  for (int e = 0; e < 6; ++e) x.row(4 + e) = 0.5 * (x.row(kTetEdges[e][0]) + x.row(kTetEdges[e][1]));
  return x;
}

}  // namespace dnf::fe
