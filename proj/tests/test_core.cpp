#include "dnf/core/error.hpp"
#include "dnf/core/linalg.hpp"
#include "dnf/core/parallel.hpp"

#include <doctest.h>

#include <cstdlib>
#include <random>

using namespace dnf;

namespace {

SparseSymmetricMatrix laplacian(Index n, double shift) {
  std::vector<Triplet> t;
  for (Index i = 0; i < n; ++i) {
    t.emplace_back(static_cast<int>(i), static_cast<int>(i), 2.0 + shift);
    if (i + 1 < n) t.emplace_back(static_cast<int>(i), static_cast<int>(i + 1), -1.0);
  }
  return SparseSymmetricMatrix::from_triplets(n, t);
}

}  // namespace

TEST_CASE("symmetric storage reflects lower-triangle entries") {
  std::vector<Triplet> t{{0, 0, 1.0}, {1, 0, 2.0}, {0, 1, 3.0}, {1, 1, 4.0}};
  const auto a = SparseSymmetricMatrix::from_triplets(2, t);
  CHECK(a.coeff(0, 1) == 5.0);
  CHECK(a.coeff(1, 0) == 5.0);
  const Mat d = a.dense();
  CHECK((d - d.transpose()).norm() == 0.0);
  CHECK(a.multiply(Vec(Vec::Ones(2)))(0) == doctest::Approx(6.0));
}

TEST_CASE("reduced keeps the listed rows and columns") {
  Mat d(3, 3);
  d << 4, 1, 2, 1, 5, 3, 2, 3, 6;
  const auto a = SparseSymmetricMatrix::from_dense(d);
  const auto r = a.reduced({0, 2});
  CHECK(r.dim() == 2);
  CHECK(r.coeff(0, 1) == 2.0);
  CHECK(r.coeff(1, 1) == 6.0);
}

TEST_CASE("dense and sparse solvers agree") {
  for (Index n : {50, 800}) {
    const auto a = laplacian(n, 0.1);
    Vec b = Vec::LinSpaced(n, -1.0, 2.0);
    const SymmetricSolver spd(a, Definiteness::Positive);
    const SymmetricSolver ind(a.combine(1.0, SparseSymmetricMatrix::identity(n), -1.5), Definiteness::Indefinite);
    CHECK((a.multiply(spd.solve(b)) - b).norm() < 1e-10 * b.norm());
    const Vec x = ind.solve(b);
    CHECK((a.multiply(x) - 1.5 * x - b).norm() < 1e-9 * b.norm());
    CHECK(ind.rcond() > 0.0);
  }
}

TEST_CASE("Cholesky rejects an indefinite matrix") {
  const auto a = laplacian(20, -3.0);
  CHECK_THROWS_AS(SymmetricSolver(a, Definiteness::Positive), NumericalError);
}

TEST_CASE("bordered solve handles a singular leading block") {
  for (Index n : {40, 700}) {
    // A = K - w^2 I has a null vector when w^2 is an eigenvalue of the Laplacian.
    const double pi = 3.14159265358979323846;
    const double lam = 2.0 - 2.0 * std::cos(pi / static_cast<double>(n + 1));
    const auto a = laplacian(n, 0.0).combine(1.0, SparseSymmetricMatrix::identity(n), -lam);
    Vec v(n);
    for (Index i = 0; i < n; ++i) v(i) = std::sin(pi * static_cast<double>(i + 1) / static_cast<double>(n + 1));
    v.normalize();
    Vec f = Vec::LinSpaced(n, 1.0, -1.0).array().square();
    const BorderedSolution s = solve_bordered(a, v, f, Vec::Zero(1));
    CHECK(std::abs(v.dot(s.x)) < 1e-10);
    CHECK((a.multiply(s.x) + v * s.y(0) - f).norm() < 1e-9 * f.norm());
    CHECK(s.y(0) == doctest::Approx(v.dot(f)).epsilon(1e-9));
  }
}

TEST_CASE("parallel_for visits every index once") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK(configured_thread_count() >= 1);
}
