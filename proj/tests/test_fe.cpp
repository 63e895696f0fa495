#include "dnf/core/error.hpp"
#include "dnf/fe/element.hpp"
#include "dnf/fe/fe_model.hpp"
#include "dnf/fe/step.hpp"
#include "dnf/spectral/modes.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dnf;
using namespace dnf::fe;

namespace {

Vec random_vector(Index n, std::mt19937& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

Mesh small_beam(ElementKind kind) {
  BeamParams p;
  p.length = 200.0;
  p.bridge_left = 60.0;
  p.bridge_right = 65.0;
  p.target_cell = 20.0;
  return generate_beam(p, kind);
}

Mesh distorted_block(ElementKind kind, std::mt19937& rng) {
  Mesh m = generate_block({2.0, 1.0, 1.5, 3, 2, 2}, kind);
  std::uniform_real_distribution<double> u(-0.04, 0.04);
  for (auto& x : m.nodes)
    for (double& c : x) c += u(rng);
  return m;
}

}  // namespace

TEST_CASE("single hexahedron block") {
  const Mesh m = generate_block({1, 1, 1, 1, 1, 1}, ElementKind::Hex8);
  CHECK(m.node_count() == 8);
  CHECK(m.element_count() == 1);
  CHECK(m.node_sets.at("xmin").size() == 4);
  CHECK(m.node_sets.at("clamped") == m.node_sets.at("xmin"));
}

TEST_CASE("quadratic tetrahedral block") {
  const Mesh m = generate_block({1, 1, 1, 1, 1, 1}, ElementKind::Tet10);
  CHECK(m.element_count() == 6);
  CHECK(m.node_count() == 27);
  const FeModel fe(m, Material{1.0, 0.3, 1.0}, {});
  auto [mass, k] = fe.assemble_linear();
  Vec ex = Vec::Zero(fe.free_dof_count());
  for (Index i = 0; i < ex.size(); i += 3) ex(i) = 1.0;
  CHECK(ex.dot(mass.multiply(ex)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero thickness and bad parameters are rejected") {
  BeamParams p;
  p.thickness = 0.0;
  CHECK_THROWS_AS(generate_beam(p, ElementKind::Hex8), ConfigError);
  CHECK_THROWS_AS(generate_block({1, 1, 0, 1, 1, 1}, ElementKind::Hex8), ConfigError);
  CHECK_THROWS_AS(generate_block({1, 1, 1, 0, 1, 1}, ElementKind::Hex8), ConfigError);
}

TEST_CASE("double beam layout") {
  BeamParams p;  // L = 1000, B = 12, H = 5
  const Mesh m = generate_beam(p, ElementKind::Hex8);
  double ymax = 0, xmax = 0, zmax = 0;
  for (const auto& x : m.nodes) {
    xmax = std::max(xmax, x[0]);
    ymax = std::max(ymax, x[1]);
    zmax = std::max(zmax, x[2]);
  }
  CHECK(xmax == doctest::Approx(1000.0));
  CHECK(ymax == doctest::Approx(15.0));
  CHECK(zmax == doctest::Approx(12.0));
  // Gap elements exist only at the three bridges.
  int gap_elements = 0;
  for (int e = 0; e < m.element_count(); ++e) {
    double cx = 0, cy = 0;
    for (int a = 0; a < 8; ++a) {
      cx += m.nodes[static_cast<std::size_t>(m.element(e)[a])][0] / 8.0;
      cy += m.nodes[static_cast<std::size_t>(m.element(e)[a])][1] / 8.0;
    }
    if (cy > 5.0 && cy < 10.0) {
      ++gap_elements;
      const bool at_bridge = std::abs(cx - 311.0) < 2.5 || std::abs(cx - 500.0) < 2.5 || std::abs(cx - 684.0) < 2.5;
      CHECK(at_bridge);
    }
  }
  CHECK(gap_elements == 3);
  CHECK(m.node_sets.at("clamped").size() == m.node_sets.at("left").size() + m.node_sets.at("right").size());
}

TEST_CASE("arch template rises at midspan") {
  ArchParams p;
  const Mesh m = generate_arch(p, ElementKind::Tet10);
  double ymin_mid = 1e9, ymin_end = 1e9;
  for (const auto& x : m.nodes) {
    if (std::abs(x[0] - 265.0) < 1e-9) ymin_mid = std::min(ymin_mid, x[1]);
    if (std::abs(x[0]) < 1e-9) ymin_end = std::min(ymin_end, x[1]);
  }
  CHECK(ymin_mid - ymin_end == doctest::Approx(13.4));
  const FeModel fe(m, silicon_mems(), {"clamped"});
  CHECK(fe.free_dof_count() > 0);
}

TEST_CASE("mesh file round trip and dialect errors") {
  for (auto kind : {ElementKind::Hex8, ElementKind::Tet10}) {
    const Mesh m = small_beam(kind);
    const Mesh back = parse_msh_string(write_msh_string(m));
    CHECK(back.node_count() == m.node_count());
    CHECK(back.element_count() == m.element_count());
    CHECK(back.kind == m.kind);
    CHECK(back.node_sets == m.node_sets);
  }
  const std::string tet4 =
      "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$PhysicalNames\n1\n2 7 \"base\"\n$EndPhysicalNames\n"
      "$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n$EndNodes\n"
      "$Elements\n2\n1 4 2 1 1 1 2 3 4\n2 2 2 7 1 1 2 3\n$EndElements\n";
  const Mesh promoted = parse_msh_string(tet4);
  CHECK(promoted.kind == ElementKind::Tet10);
  CHECK(promoted.node_count() == 10);
  CHECK(promoted.node_sets.at("base").size() == 3);
  try {
    parse_msh_string("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Periodic\n0\n$EndPeriodic\n");
    FAIL("expected an error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("$Periodic") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_msh_string("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n1\n1 0 0 0\n$EndNodes\n"
                                   "$Elements\n1\n1 7 2 0 1 1 1 1 1 1\n$EndElements\n"),
                  IoError);
  CHECK_THROWS_AS(parse_msh_string("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n2\n1 0 0\n"), IoError);
}

TEST_CASE("inverted element is rejected") {
  Mesh m = generate_block({1, 1, 1, 1, 1, 1}, ElementKind::Hex8);
  std::swap(m.connectivity[0], m.connectivity[1]);
  std::swap(m.connectivity[2], m.connectivity[3]);
  std::swap(m.connectivity[4], m.connectivity[5]);
  std::swap(m.connectivity[6], m.connectivity[7]);
  CHECK_THROWS_AS(FeModel(m, Material{1, 0.3, 1}, {}), ConfigError);
}

TEST_CASE("rigid translation lies in the stiffness null space and mass sums to rho V") {
  std::mt19937 rng(5);
  for (auto kind : {ElementKind::Hex8, ElementKind::Tet10}) {
    const Mesh m = distorted_block(kind, rng);
    const Material mat{210.0, 0.3, 7.8};
    const FeModel fe(m, mat, {});
    auto [mass, k] = fe.assemble_linear();
    // Volume from the unit-density mass of a single direction.
    const FeModel unit(m, Material{210.0, 0.3, 1.0}, {});
    for (int dir = 0; dir < 3; ++dir) {
      Vec t = Vec::Zero(fe.free_dof_count());
      for (Index i = dir; i < t.size(); i += 3) t(i) = 1.0;
      CHECK(k.multiply(t).norm() / k.max_abs() < 1e-10);
      const double rv = t.dot(mass.multiply(t));
      CHECK(rv == doctest::Approx(7.8 * t.dot(unit.assemble_linear().first.multiply(t))).epsilon(1e-12));
    }
    Vec ex = Vec::Zero(fe.free_dof_count());
    for (Index i = 0; i < ex.size(); i += 3) ex(i) = 1.0;
    if (kind == ElementKind::Hex8) {
      // Perturbed hexahedra are not parallelepipeds; the undistorted block gives the exact volume.
      const FeModel exact(generate_block({2.0, 1.0, 1.5, 3, 2, 2}, kind), mat, {});
      CHECK(ex.dot(exact.assemble_linear().first.multiply(ex)) == doctest::Approx(7.8 * 3.0).epsilon(1e-12));
    } else {
      CHECK(ex.dot(mass.multiply(ex)) > 0.0);
    }
  }
}

TEST_CASE("slender cantilever matches Euler-Bernoulli within 5%") {
  const double L = 100.0, b = 4.0, h = 4.0;
  const Mesh m = generate_block({L, b, h, 25, 1, 1}, ElementKind::Tet10);
  const Material mat{1.6e5, 0.22, 2.33e-3};
  const FeModel fe(m, mat, {"xmin"});
  auto [mass, k] = fe.assemble_linear();
  const auto modes = spectral::solve_modes(mass, k, spectral::ModeSelector::lowest(1));
  const double inertia = b * h * h * h / 12.0;
  const double eb = 1.875104068711961 * 1.875104068711961 / (L * L) *
                    std::sqrt(mat.young_modulus * inertia / (mat.density * b * h));
  MESSAGE("FE omega_1 = " << modes.frequencies(0) << ", beam theory = " << eb);
  CHECK(std::abs(modes.frequencies(0) / eb - 1.0) < 0.05);
}

TEST_CASE("exact cubic decomposition of the Saint-Venant-Kirchhoff force") {
  std::mt19937 rng(17);
  for (auto kind : {ElementKind::Hex8, ElementKind::Tet10}) {
    for (int draw = 0; draw < 3; ++draw) {
      const Mesh m = distorted_block(kind, rng);
      const FeModel fe(m, Material{100.0, 0.28, 1.0}, {"xmin"});
      auto [mass, k] = fe.assemble_linear();
      const Vec u = random_vector(fe.free_dof_count(), rng, 0.2);
      const Vec full = fe.full_internal_force(u);
      const Vec split = k.multiply(u) + fe.quadratic_force(u, u) + fe.cubic_force(u, u, u);
      CHECK(relative_difference(split, full) < 1e-10);
      CHECK(relative_difference(fe.linear_force(u), k.multiply(u)) < 1e-12);
    }
  }
}

TEST_CASE("nonlinear forces are symmetric and vanish for zero arguments") {
  std::mt19937 rng(23);
  const FeModel fe(small_beam(ElementKind::Tet10), silicon_mems(), {"clamped"});
  const Index n = fe.free_dof_count();
  const Vec a = random_vector(n, rng, 1.0), b = random_vector(n, rng, 1.0), c = random_vector(n, rng, 1.0);
  CHECK(fe.quadratic_force(Vec::Zero(n), b).norm() == 0.0);
  CHECK(fe.cubic_force(a, Vec::Zero(n), c).norm() == 0.0);
  CHECK(relative_difference(fe.quadratic_force(a, b), fe.quadratic_force(b, a)) < 1e-13);
  const Vec h = fe.cubic_force(a, b, c);
  CHECK(relative_difference(fe.cubic_force(c, a, b), h) < 1e-13);
  CHECK(relative_difference(fe.cubic_force(b, a, c), h) < 1e-13);
  CHECK_THROWS_AS(fe.quadratic_force(a, Vec::Zero(n + 1)), DimensionError);
}

TEST_CASE("full force linearizes to the stiffness") {
  std::mt19937 rng(29);
  const FeModel fe(small_beam(ElementKind::Hex8), silicon_mems(), {"clamped"});
  auto [mass, k] = fe.assemble_linear();
  const Vec u = random_vector(fe.free_dof_count(), rng, 1.0);
  double previous = 1.0;
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    const double err = relative_difference(fe.full_internal_force(eps * u), k.multiply(eps * u));
    CHECK(err < previous);
    previous = err;
  }
  CHECK(previous < 1e-5);
  CHECK(fe.full_internal_force(Vec::Zero(fe.free_dof_count())).norm() == 0.0);
}

TEST_CASE("rigid rotation produces no internal force") {
  const Mesh m = generate_block({2.0, 1.0, 1.0, 2, 2, 2}, ElementKind::Tet10);
  const FeModel fe(m, Material{100.0, 0.3, 1.0}, {});
  auto [mass, k] = fe.assemble_linear();
  for (double theta : {0.1, 0.5}) {
    const double c = std::cos(theta), s = std::sin(theta);
    Vec u(fe.total_dof_count());
    for (int nidx = 0; nidx < m.node_count(); ++nidx) {
      const auto& x = m.nodes[static_cast<std::size_t>(nidx)];
      u(3 * nidx) = c * x[0] - s * x[1] - x[0];
      u(3 * nidx + 1) = s * x[0] + c * x[1] - x[1];
      u(3 * nidx + 2) = 0.0;
    }
    const Vec f = fe.full_internal_force(fe.restrict(u));
    CHECK(f.norm() < 1e-8 * k.max_abs() * theta * theta);
  }
}

TEST_CASE("raising the quadrature order leaves affine stiffness unchanged") {
  for (auto kind : {ElementKind::Hex8, ElementKind::Tet10}) {
    const Mesh m = generate_block({3.0, 1.0, 2.0, 3, 1, 2}, kind);
    const Material mat{100.0, 0.3, 1.0};
    const auto k0 = FeModel(m, mat, {"xmin"}).assemble_linear().second.dense();
    const auto k1 = FeModel(m, mat, {"xmin"}, FeOptions{1}).assemble_linear().second.dense();
    CHECK((k1 - k0).cwiseAbs().maxCoeff() < 1e-10 * k0.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("assembly is independent of the worker count") {
  std::mt19937 rng(31);
  const FeModel fe(small_beam(ElementKind::Tet10), silicon_mems(), {"clamped"});
  const Vec u = random_vector(fe.free_dof_count(), rng, 1.0);
  setenv("DNF_ROM_THREADS", "1", 1);
  const Vec f1 = fe.full_internal_force(u);
  setenv("DNF_ROM_THREADS", "4", 1);
  const Vec f4 = fe.full_internal_force(u);
  unsetenv("DNF_ROM_THREADS");
  CHECK((f1 - f4).norm() == 0.0);
}

TEST_CASE("STEP on a polynomial system is exact") {
  std::mt19937 rng(37);
  const FeModel fe(small_beam(ElementKind::Tet10), silicon_mems(), {"clamped"});
  auto [mass, k] = fe.assemble_linear();
  const auto modes = spectral::solve_modes(mass, k, spectral::ModeSelector::lowest(2));
  std::vector<Vec> phis{modes.vectors.col(0), modes.vectors.col(1)};
  auto full = [&](const Vec& u) { return fe.full_internal_force(u); };
  // Peak imposed displacement of one strip thickness keeps the cubic part well above round-off.
  const double amp = 5.0 / phis[0].cwiseAbs().maxCoeff();
  const auto step = step_extract(full, phis, amp, k, true);
  const auto no_k = step_extract(full, phis, amp);
  for (int i = 0; i < 2; ++i) {
    const Vec g = fe.quadratic_force(phis[i], phis[i]);
    const Vec h = fe.cubic_force(phis[i], phis[i], phis[i]);
    CHECK(relative_difference(step.quadratic.at({i, i}), g) < 1e-8);
    CHECK(relative_difference(step.cubic.at({i, i, i}), h) < 1e-8);
    CHECK(relative_difference(no_k.cubic.at({i, i, i}), h) < 1e-8);
  }
  CHECK(relative_difference(step.quadratic.at({0, 1}), fe.quadratic_force(phis[0], phis[1])) < 1e-8);
  CHECK(relative_difference(step.cubic.at({0, 0, 1}), fe.cubic_force(phis[0], phis[0], phis[1])) < 1e-8);
  CHECK(relative_difference(step.cubic.at({0, 1, 1}), fe.cubic_force(phis[0], phis[1], phis[1])) < 1e-8);
  CHECK_THROWS_AS(step_extract(full, phis, 0.0), ConfigError);
  CHECK_THROWS_AS(step_extract(full, phis, 1.0, std::nullopt, true), ConfigError);
}

TEST_CASE("STEP on a linear system returns zero vectors") {
  const FeModel fe(small_beam(ElementKind::Hex8), silicon_mems(), {"clamped"});
  auto [mass, k] = fe.assemble_linear();
  const auto modes = spectral::solve_modes(mass, k, spectral::ModeSelector::lowest(1));
  const Vec phi = modes.vectors.col(0);
  const double lam = 2.0;
  const auto step = step_extract([&](const Vec& u) { return k.multiply(u); }, {phi}, lam, k);
  CHECK(step.quadratic.at({0, 0}).norm() < 1e-12 * k.max_abs() * lam);
  CHECK(step.cubic.at({0, 0, 0}).norm() < 1e-12 * k.max_abs() * lam);
}
