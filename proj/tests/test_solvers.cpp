#include "dnf/core/error.hpp"
#include "dnf/solvers/harmonic_balance.hpp"
#include "dnf/solvers/time_integration.hpp"
#include "dnf/model/discrete_system.hpp"
#include "support/toy_systems.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace dnf;
using namespace dnf::solvers;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

SecondOrderOde duffing(double c, double k3, double load) {
  SecondOrderOde ode;
  ode.dim = 1;
  ode.load = Vec::Constant(1, load);
  ode.force = [c, k3](const Vec& x, const Vec& v, Vec& f, Mat* dfdx, Mat* dfdv) {
    f = Vec::Constant(1, c * v(0) + x(0) + k3 * x(0) * x(0) * x(0));
    if (dfdx) *dfdx = Mat::Constant(1, 1, 1.0 + 3.0 * k3 * x(0) * x(0));
    if (dfdv) *dfdv = Mat::Constant(1, 1, c);
  };
  return ode;
}

SecondOrderOde linear(double c, double w0, double load) {
  SecondOrderOde ode;
  ode.dim = 1;
  ode.load = Vec::Constant(1, load);
  ode.force = [c, w0](const Vec& x, const Vec& v, Vec& f, Mat* dfdx, Mat* dfdv) {
    f = Vec::Constant(1, c * v(0) + w0 * w0 * x(0));
    if (dfdx) *dfdx = Mat::Constant(1, 1, w0 * w0);
    if (dfdv) *dfdv = Mat::Constant(1, 1, c);
  };
  return ode;
}

ContinuationConfig range(double a, double b) {
  ContinuationConfig c;
  c.omega_start = a;
  c.omega_end = b;
  return c;
}

std::size_t peak_index(const Branch& b) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < b.points.size(); ++i)
    if (b.points[i].amplitude(0) > b.points[best].amplitude(0)) best = i;
  return best;
}

}  // namespace

TEST_CASE("linear oscillator FRF is exact along the branch") {
  const double c = 0.05, w0 = 1.3, f = 0.02;
  const Branch b = hb_continue(linear(c, w0, f), HBConfig{}, range(0.5, 2.0));
  REQUIRE(b.completed);
  REQUIRE(b.points.size() > 20);
  double worst = 0.0;
  for (const auto& p : b.points) {
    const double w = p.omega;
    const double exact = f / std::sqrt((w0 * w0 - w * w) * (w0 * w0 - w * w) + c * c * w * w);
    worst = std::max(worst, std::abs(p.amplitude(0) - exact) / exact);
    CHECK(p.stable);
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("damped linear oscillator multipliers have modulus exp(-cT/2)") {
  const double c = 0.1, w0 = 1.0, w = 0.8;
  const HarmonicBalance hb(linear(c, w0, 0.01), 5);
  Vec x = hb.linear_guess(w);
  REQUIRE(hb.solve(x, w, HBConfig{}));
  const auto fr = floquet_stability(hb, x, w);
  const double period = kTwoPi / w;
  const double wd = std::sqrt(w0 * w0 - 0.25 * c * c);
  REQUIRE(fr.multipliers.size() == 2);
  for (const auto& m : fr.multipliers) {
    CHECK(std::abs(m) == doctest::Approx(std::exp(-0.5 * c * period)).epsilon(1e-9));
    CHECK(std::abs(std::abs(std::arg(m)) - std::abs(std::remainder(wd * period, kTwoPi))) < 1e-8);
  }
  CHECK(fr.stable);
}

TEST_CASE("Duffing FRF peak follows the backbone and folds at saddle-nodes") {
  const Branch b = hb_continue(duffing(0.02, 0.5, 0.01), HBConfig{}, range(0.8, 1.3));
  REQUIRE(b.completed);
  const auto& peak = b.points[peak_index(b)];
  const double a = peak.amplitude(0);
  const double backbone = 1.0 + 3.0 * 0.5 / 8.0 * a * a;
  MESSAGE("peak a = " << a << " at " << peak.omega << ", backbone " << backbone);
  CHECK(std::abs(peak.omega - backbone) < 0.01 * backbone);

  std::vector<std::size_t> sn;
  for (std::size_t i = 0; i < b.points.size(); ++i)
    if (b.points[i].marker == Bifurcation::SaddleNode) sn.push_back(i);
  REQUIRE(sn.size() == 2);
  // Each saddle-node lies next to a sign change of the frequency increment.
  auto step = [&](std::size_t j) { return b.points[j].omega - b.points[j - 1].omega; };
  for (std::size_t i : sn) {
    REQUIRE(i >= 2);
    REQUIRE(i + 1 < b.points.size());
    CHECK((step(i) * step(i + 1) < 0.0 || step(i - 1) * step(i) < 0.0));
  }
  for (std::size_t i = 0; i < b.points.size(); ++i) {
    const bool between = i >= sn[0] && i < sn[1];
    CHECK(b.points[i].stable == !between);
  }
}

TEST_CASE("doubling the harmonic order leaves Duffing amplitudes unchanged") {
  const auto ode = duffing(0.02, 0.5, 0.01);
  const HarmonicBalance h9(ode, 9), h18(ode, 18);
  for (double w : {0.9, 1.0, 1.02, 1.05, 1.2}) {
    Vec x9 = h9.linear_guess(w);
    REQUIRE(h9.solve(x9, w, HBConfig{}));
    Vec x18 = Vec::Zero(h18.unknowns());
    x18.head(h9.unknowns()) = x9;
    REQUIRE(h18.solve(x18, w, HBConfig{18}));
    const double a9 = h9.peak_amplitude(x9)(0), a18 = h18.peak_amplitude(x18)(0);
    CHECK(std::abs(a9 - a18) < 1e-3 * a18);
  }
}

TEST_CASE("HB amplitude matches time integration on the Duffing branch") {
  const auto ode = duffing(0.02, 0.5, 0.01);
  const HarmonicBalance hb(ode, 9);
  for (double w : {0.95, 1.0, 1.03}) {
    Vec x = hb.linear_guess(w);
    REQUIRE(hb.solve(x, w, HBConfig{}));
    const double amp = hb.peak_amplitude(x)(0);
    const double period = kTwoPi / w;
    GenAlphaOptions opt;
    opt.dt = period / 512.0;
    opt.t_end = 400.0 * period;
    const auto traj = integrate_generalized_alpha(ode, w, hb.displacement(x, 0.0), hb.velocity(x, w, 0.0), opt);
    const double ga = steady_amplitude(traj, 399.0 * period)(0);
    const auto ref = integrate_reference(ode, w, Vec::Zero(1), Vec::Zero(1), 600.0 * period, period / 128.0);
    const double rk = steady_amplitude(ref, 599.0 * period)(0);
    MESSAGE("w " << w << " hb " << amp << " gen-alpha " << ga << " dopri " << rk);
    CHECK(std::abs(ga - amp) < 5e-3 * amp);
    CHECK(std::abs(rk - amp) < 5e-3 * amp);
  }
}

TEST_CASE("generalized-alpha conserves the energy of an undamped linear oscillator") {
  const double w0 = 1.0, period = kTwoPi / w0;
  GenAlphaOptions opt;
  opt.dt = period / 400.0;
  opt.t_end = 100.0 * period;
  const auto traj = integrate_generalized_alpha(linear(0.0, w0, 0.0), 1.0, Vec::Ones(1), Vec::Zero(1), opt);
  double drift = 0.0;
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    const double e = 0.5 * traj.v[i](0) * traj.v[i](0) + 0.5 * w0 * w0 * traj.x[i](0) * traj.x[i](0);
    drift = std::max(drift, std::abs(e - 0.5) / 0.5);
  }
  MESSAGE("energy drift over 100 periods: " << drift);
  CHECK(drift < 1e-6);
}

TEST_CASE("generalized-alpha converges at second order under step halving") {
  const auto ode = duffing(0.05, 0.5, 0.1);
  auto final_state = [&](double dt) {
    GenAlphaOptions opt;
    opt.dt = dt;
    opt.t_end = 10.0;
    return integrate_generalized_alpha(ode, 1.1, Vec::Constant(1, 0.3), Vec::Zero(1), opt).x.back()(0);
  };
  const auto ref = integrate_reference(ode, 1.1, Vec::Constant(1, 0.3), Vec::Zero(1), 10.0, 0.5);
  const double exact = ref.x.back()(0);
  const double e1 = std::abs(final_state(0.02) - exact), e2 = std::abs(final_state(0.01) - exact);
  MESSAGE("halving ratio " << e1 / e2);
  CHECK(e1 / e2 > 3.5);
  CHECK(e1 / e2 < 4.5);
}

TEST_CASE("mass-proportional damping gives the exp(-w t / 2Q) decay envelope") {
  const double w0 = 1.0, period = kTwoPi / w0, quality = 25.0;
  const int per_period = 400;
  GenAlphaOptions opt;
  opt.dt = period / per_period;
  opt.t_end = 61.0 * period;
  const auto decay = integrate_generalized_alpha(linear(w0 / quality, w0, 0.0), 1.0, Vec::Ones(1), Vec::Zero(1), opt);
  const double zeta = 0.5 / quality;
  const double wd = w0 * std::sqrt(1.0 - zeta * zeta);
  const double phase = std::atan(zeta / std::sqrt(1.0 - zeta * zeta));
  const double scale = 1.0 / std::sqrt(1.0 - zeta * zeta);
  double worst = 0.0;
  for (int k = 10; k <= 60; k += 10) {
    const double t_peak = (phase + kTwoPi * k) / wd;
    double peak = 0.0;
    for (std::size_t i = 0; i < decay.t.size(); ++i)
      if (std::abs(decay.t[i] - t_peak) < 0.25 * period) peak = std::max(peak, decay.x[i](0));
    const double envelope = scale * std::exp(-zeta * w0 * t_peak);
    worst = std::max(worst, std::abs(peak - envelope) / envelope);
  }
  MESSAGE("decay envelope error " << worst);
  CHECK(worst < 0.01);
}

TEST_CASE("full-order integrator agrees with the reference on a discrete system") {
  model::DiscreteCoefficients c;
  c.frequencies = {1.0, 2.3};
  model::set_symmetric_g(c, 1, 0, 0, 0.4);
  model::set_symmetric_g(c, 0, 0, 1, 0.4);
  c.h[{0, 0, 0, 0}] = 0.3;
  const auto sys = model::build_discrete_system(c);
  const double damping = 0.02, w = 0.9, kappa = 0.05;
  Vec load = Vec::Zero(2);
  load(0) = kappa;
  Vec u = (Vec(2) << 0.2, 0.0).finished(), v = Vec::Zero(2);
  const Vec u0 = u;
  GenAlphaOptions opt;
  opt.dt = 0.002;
  opt.t_end = 20.0;
  int calls = 0;
  integrate_generalized_alpha(sys, damping, load, w, u, v, opt, [&](double, const Vec&, const Vec&) { ++calls; });
  CHECK(calls == 10000);
  const auto ref = integrate_reference(toys::discrete_ode(c, damping, 0, kappa), w, u0, Vec::Zero(2), 20.0, 20.0);
  CHECK((u - ref.x.back()).norm() < 1e-4 * ref.x.back().norm());
  CHECK((v - ref.v.back()).norm() < 1e-4 * ref.v.back().norm());
}

TEST_CASE("norm blow-up is reported as a numerical failure") {
  SecondOrderOde ode;
  ode.dim = 1;
  ode.load = Vec::Zero(1);
  ode.force = [](const Vec& x, const Vec&, Vec& f, Mat* dfdx, Mat* dfdv) {
    f = Vec::Constant(1, -x(0));
    if (dfdx) *dfdx = Mat::Constant(1, 1, -1.0);
    if (dfdv) *dfdv = Mat::Zero(1, 1);
  };
  GenAlphaOptions opt;
  opt.dt = 0.05;
  opt.t_end = 100.0;
  CHECK_THROWS_AS(integrate_generalized_alpha(ode, 1.0, Vec::Ones(1), Vec::Zero(1), opt), NumericalError);
  opt.dt = 0.0;
  CHECK_THROWS_AS(integrate_generalized_alpha(ode, 1.0, Vec::Ones(1), Vec::Zero(1), opt), ConfigError);
}

TEST_CASE("continuation rejects malformed ranges and steps") {
  const auto ode = linear(0.1, 1.0, 0.01);
  CHECK_THROWS_AS(hb_continue(ode, HBConfig{}, range(1.0, 1.0)), ConfigError);
  CHECK_THROWS_AS(hb_continue(ode, HBConfig{}, range(-1.0, 1.0)), ConfigError);
  auto bad = range(0.5, 1.5);
  bad.min_step = 0.1;
  bad.max_step = 0.01;
  CHECK_THROWS_AS(hb_continue(ode, HBConfig{}, bad), ConfigError);
  CHECK_THROWS_AS(HarmonicBalance(ode, 0), ConfigError);
}

TEST_CASE("downward sweeps and branch CSV output are deterministic") {
  const auto ode = duffing(0.02, 0.5, 0.01);
  auto cfg = range(1.3, 0.8);
  cfg.stability = true;
  const Branch a = hb_continue(ode, HBConfig{}, cfg);
  const Branch b = hb_continue(ode, HBConfig{}, cfg);
  REQUIRE(a.completed);
  CHECK(a.points.front().omega > a.points.back().omega);
  std::ostringstream sa, sb;
  write_branch_csv(sa, a);
  write_branch_csv(sb, b);
  CHECK(sa.str() == sb.str());
  const std::string text = sa.str();
  CHECK(text.rfind("omega,amp_r1,stable,bifurcation\n", 0) == 0);
  CHECK(text.find(",SN\n") != std::string::npos);

  std::vector<double> physical(a.points.size(), 1.0);
  std::ostringstream sc;
  write_branch_csv(sc, a, &physical);
  CHECK(sc.str().rfind("omega,amp_r1,max_physical_amp,stable,bifurcation\n", 0) == 0);
  physical.pop_back();
  CHECK_THROWS_AS(write_branch_csv(sc, a, &physical), DimensionError);
}

TEST_CASE("Floquet stability agrees with perturbed long-time integration") {
  const auto ode = duffing(0.02, 0.5, 0.01);
  const Branch b = hb_continue(ode, HBConfig{}, range(0.8, 1.3));
  REQUIRE(b.completed);
  const HarmonicBalance hb(ode, 9);
  const int samples = 20;
  int checked_unstable = 0;
  for (int s = 0; s < samples; ++s) {
    const auto& p = b.points[static_cast<std::size_t>(s) * (b.points.size() - 1) / (samples - 1)];
    const double period = kTwoPi / p.omega;
    const Vec x0 = hb.displacement(p.coefficients, 0.0) * 1.01;
    const Vec v0 = hb.velocity(p.coefficients, p.omega, 0.0) * 1.01;
    const auto traj = integrate_reference(ode, p.omega, x0, v0, 500.0 * period, period / 64.0);
    const double amp = steady_amplitude(traj, 499.0 * period)(0);
    const bool stays = std::abs(amp - p.amplitude(0)) < 1e-3 * p.amplitude(0);
    CHECK(stays == p.stable);
    if (!p.stable) ++checked_unstable;
  }
  MESSAGE("unstable samples " << checked_unstable);
}
