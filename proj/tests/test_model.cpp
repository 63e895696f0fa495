#include "dnf/core/error.hpp"
#include "dnf/model/discrete_system.hpp"

#include <doctest.h>

#include <random>

using namespace dnf;
using namespace dnf::model;

namespace {

DiscreteCoefficients one_two_toy() {
  DiscreteCoefficients c;
  c.frequencies = {1.0, 1.989};
  set_symmetric_g(c, 1, 0, 0, 0.3);
  set_symmetric_g(c, 0, 0, 1, 0.3);
  return c;
}

// Brute-force dense contraction used as an independent oracle.
Vec contract_g(const DiscreteCoefficients& c, const Vec& a, const Vec& b) {
  const int n = static_cast<int>(c.frequencies.size());
  Vec out = Vec::Zero(n);
  for (int s = 0; s < n; ++s)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        auto it = c.g.find({s, k, l});
        if (it != c.g.end()) out(s) += it->second * a(k) * b(l);
      }
  return out;
}

}  // namespace

TEST_CASE("zero coefficients give a linear oscillator") {
  DiscreteCoefficients c;
  c.frequencies = {1.0};
  const auto sys = build_discrete_system(c);
  Vec u(1);
  u << 0.7;
  CHECK(sys.eval_quadratic(u, u).norm() == 0.0);
  CHECK(sys.full_internal_force(u)(0) == doctest::Approx(0.7));
}

TEST_CASE("Duffing system force law") {
  DiscreteCoefficients c;
  c.frequencies = {1.0};
  set_symmetric_h(c, 0, 0, 0, 0, 0.5);
  const auto sys = build_discrete_system(c);
  Vec u(1);
  u << 2.0;
  CHECK(sys.eval_cubic(u, u, u)(0) == doctest::Approx(4.0));
  CHECK(sys.full_internal_force(u)(0) == doctest::Approx(2.0 + 0.5 * 8.0));
  Vec zero = Vec::Zero(1);
  CHECK(sys.full_internal_force(zero).norm() == 0.0);
}

TEST_CASE("1:2 toy quadratic evaluation matches the dense contraction") {
  const auto c = one_two_toy();
  const auto sys = build_discrete_system(c);
  Vec e1(2);
  e1 << 1.0, 0.0;
  const Vec g = sys.eval_quadratic(e1, e1);
  CHECK(g(0) == 0.0);
  CHECK(g(1) == doctest::Approx(0.3));
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 10; ++trial) {
    Vec a(2), b(2);
    a << u(rng), u(rng);
    b << u(rng), u(rng);
    CHECK(relative_difference(sys.eval_quadratic(a, b), contract_g(c, a, b)) < 1e-14);
    CHECK(relative_difference(sys.eval_quadratic(a, b), sys.eval_quadratic(b, a)) < 1e-14);
    CHECK(sys.eval_quadratic(Vec::Zero(2), b).norm() == 0.0);
  }
}

TEST_CASE("multilinearity and permutation symmetry of the operators") {
  DiscreteCoefficients c;
  c.frequencies = {1.0, 1.7, 2.9};
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int s = 0; s < 3; ++s)
    for (int k = 0; k < 3; ++k)
      for (int l = k; l < 3; ++l) {
        set_symmetric_g(c, s, k, l, u(rng));
        for (int m = l; m < 3; ++m) set_symmetric_h(c, s, k, l, m, u(rng));
      }
  const auto sys = build_discrete_system(c);
  auto rnd = [&] {
    Vec v(3);
    v << u(rng), u(rng), u(rng);
    return v;
  };
  const Vec a = rnd(), b = rnd(), d = rnd();
  const double alpha = 0.37;
  CHECK(relative_difference(sys.eval_quadratic(alpha * a + b, d),
                            alpha * sys.eval_quadratic(a, d) + sys.eval_quadratic(b, d)) < 1e-14);
  CHECK(relative_difference(sys.eval_cubic(a, alpha * b + d, d),
                            alpha * sys.eval_cubic(a, b, d) + sys.eval_cubic(a, d, d)) < 1e-14);
  const Vec h = sys.eval_cubic(a, b, d);
  CHECK(relative_difference(sys.eval_cubic(b, a, d), h) < 1e-14);
  CHECK(relative_difference(sys.eval_cubic(d, b, a), h) < 1e-14);
  CHECK(relative_difference(sys.eval_cubic(b, d, a), h) < 1e-14);
  const Vec x = rnd();
  const Vec expected = sys.stiffness().multiply(x) + sys.eval_quadratic(x, x) + sys.eval_cubic(x, x, x);
  CHECK(relative_difference(sys.full_internal_force(x), expected) < 1e-10);
  CHECK(x.dot(sys.mass().multiply(x)) > 0.0);
}

TEST_CASE("asymmetric tables are rejected") {
  DiscreteCoefficients c;
  c.frequencies = {1.0, 2.0};
  c.g[{0, 0, 1}] = 0.3;  // missing the (0,1,0) partner
  CHECK_THROWS_AS(build_discrete_system(c), ConfigError);
  DiscreteCoefficients bad_index;
  bad_index.frequencies = {1.0};
  bad_index.g[{0, 0, 3}] = 1.0;
  CHECK_THROWS_AS(build_discrete_system(bad_index), DimensionError);
}

TEST_CASE("length mismatches raise DimensionError") {
  const auto sys = build_discrete_system(one_two_toy());
  CHECK_THROWS_AS(sys.eval_quadratic(Vec::Zero(3), Vec::Zero(2)), DimensionError);
  CHECK_THROWS_AS(sys.full_internal_force(Vec::Zero(1)), DimensionError);
}

TEST_CASE("JSON round trip uses 1-based indices") {
  const std::string text = R"({"frequencies":[1.0,1.989],"g":[[2,1,1,0.3],[1,1,2,0.3],[1,2,1,0.3]]})";
  const auto c = parse_discrete_json(text);
  CHECK(c.g.at({1, 0, 0}) == 0.3);
  const auto again = parse_discrete_json(to_discrete_json(c));
  CHECK(again.g == c.g);
  CHECK(again.frequencies == c.frequencies);
  CHECK_THROWS_AS(parse_discrete_json("{\"frequencies\":[1.0],\"g\":[[1,1]]}"), ConfigError);
  CHECK_THROWS_AS(parse_discrete_json("not json"), ConfigError);
}
