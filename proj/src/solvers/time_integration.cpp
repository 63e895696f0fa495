#include "dnf/solvers/time_integration.hpp"

#include "dnf/core/error.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace dnf::solvers {

namespace {

struct AlphaParams {
  double am, af, beta, gamma;
};

AlphaParams alpha_params(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("generalized-alpha spectral radius must lie in [0, 1]");
  const double am = (2.0 * rho - 1.0) / (rho + 1.0);
  const double af = rho / (rho + 1.0);
  const double gamma = 0.5 - am + af;
  const double beta = 0.25 * (1.0 - am + af) * (1.0 - am + af);
  return {am, af, beta, gamma};
}

void check_options(const GenAlphaOptions& o) {
  if (!(o.dt > 0.0) || !(o.t_end > 0.0)) throw ConfigError("time step and end time must be positive");
}

[[noreturn]] void diverged(double t) {
  throw NumericalError("time integration diverged at t = " + std::to_string(t));
}

}  // namespace

Trajectory integrate_generalized_alpha(const SecondOrderOde& ode, double omega, const Vec& x0, const Vec& v0,
                                       const GenAlphaOptions& options, int record_every) {
  check_options(options);
  const AlphaParams p = alpha_params(options.rho_inf);
  const int d = ode.dim;
  const double dt = options.dt;
  const long steps = std::lround(std::ceil(options.t_end / dt - 1e-9));
  Vec x = x0, v = v0, f, fn;
  Mat dfdx, dfdv;
  ode.force(x, v, fn, nullptr, nullptr);
  Vec a = ode.load - fn;
  const double scale = std::max({ode.load.norm(), fn.norm(), 1e-300});
  const double blowup = 1e12 * std::max({x0.norm(), v0.norm(), ode.load.norm(), 1.0});

  Trajectory traj;
  auto record = [&](double t) {
    traj.t.push_back(t);
    traj.x.push_back(x);
    traj.v.push_back(v);
  };
  record(0.0);
  for (long n = 0; n < steps; ++n) {
    const double t1 = (n + 1) * dt;
    const double tf = t1 - p.af * dt;
    const Vec fext = ode.load * std::cos(omega * tf);
    Vec an = a;
    Vec xn, vn;
    bool ok = false;
    for (int it = 0; it < options.max_iterations; ++it) {
      xn = x + dt * v + dt * dt * ((0.5 - p.beta) * a + p.beta * an);
      vn = v + dt * ((1.0 - p.gamma) * a + p.gamma * an);
      ode.force(xn, vn, f, &dfdx, &dfdv);
      const Vec inertia = (1.0 - p.am) * an + p.am * a;
      const Vec r = inertia + (1.0 - p.af) * f + p.af * fn - fext;
      if (r.norm() <= options.newton_tolerance * std::max({scale, inertia.norm(), f.norm()})) {
        ok = true;
        break;
      }
      const Mat jac = (1.0 - p.am) * Mat::Identity(d, d) + (1.0 - p.af) * (p.beta * dt * dt * dfdx + p.gamma * dt * dfdv);
      an -= jac.partialPivLu().solve(r);
    }
    if (!ok) {
      xn = x + dt * v + dt * dt * ((0.5 - p.beta) * a + p.beta * an);
      vn = v + dt * ((1.0 - p.gamma) * a + p.gamma * an);
      ode.force(xn, vn, f, nullptr, nullptr);
      const Vec r = (1.0 - p.am) * an + p.am * a + (1.0 - p.af) * f + p.af * fn - fext;
      if (!(r.norm() <= 1e3 * options.newton_tolerance * scale)) diverged(t1);
    }
    x = xn;
    v = vn;
    a = an;
    fn = f;
    if (!x.allFinite() || x.norm() > blowup) diverged(t1);
    if ((n + 1) % record_every == 0 || n + 1 == steps) record(t1);
  }
  return traj;
}

void integrate_generalized_alpha(const model::MechanicalSystem& system, double damping, const Vec& load, double omega,
                                 Vec& u, Vec& v, const GenAlphaOptions& options, const Observer& observe) {
  check_options(options);
  const Index n = system.dof_count();
  if (u.size() != n || v.size() != n || load.size() != n) throw DimensionError("full-order state length mismatch");
  const AlphaParams p = alpha_params(options.rho_inf);
  const double dt = options.dt;
  const long steps = std::lround(std::ceil(options.t_end / dt - 1e-9));
  const auto& mass = system.mass();

  auto force = [&](const Vec& uu, const Vec& vv) {
    return Vec(system.full_internal_force(uu) + damping * mass.multiply(vv));
  };
  Vec fn = force(u, v);
  const SymmetricSolver mass_solver(mass, Definiteness::Positive);
  Vec a = mass_solver.solve(Vec(load - fn));
  const double c_m = (1.0 - p.am) + (1.0 - p.af) * p.gamma * dt * damping;
  const double c_k = (1.0 - p.af) * p.beta * dt * dt;
  const SymmetricSolver iteration(mass.combine(c_m, system.stiffness(), c_k), Definiteness::Positive);
  const double scale = std::max({load.norm(), fn.norm(), system.stiffness().multiply(u).norm(), 1e-300});
  const double blowup = 1e12 * std::max({u.norm(), v.norm(), 1.0});
  const double k_max = system.stiffness().max_abs();

  for (long s = 0; s < steps; ++s) {
    const double t1 = (s + 1) * dt;
    const double tf = t1 - p.af * dt;
    const Vec fext = load * std::cos(omega * tf);
    Vec an = a, un, vn, f;
    bool ok = false;
    double previous = std::numeric_limits<double>::infinity();
    for (int it = 0; it < options.max_iterations; ++it) {
      un = u + dt * v + dt * dt * ((0.5 - p.beta) * a + p.beta * an);
      vn = v + dt * ((1.0 - p.gamma) * a + p.gamma * an);
      f = force(un, vn);
      const Vec inertia = mass.multiply(Vec((1.0 - p.am) * an + p.am * a));
      const Vec r = inertia + (1.0 - p.af) * f + p.af * fn - fext;
      const double size = std::max({scale, inertia.norm(), f.norm()});
      const double rn = r.norm();
      const double roundoff = 1e4 * std::numeric_limits<double>::epsilon() * k_max * (u.norm() + dt * v.norm() + un.norm());
      if (rn <= options.newton_tolerance * size || (rn > 0.5 * previous && rn <= std::max(1.5e-8 * size, roundoff))) {
        ok = true;
        break;
      }
      previous = rn;
      an -= iteration.solve(r);
    }
    if (!ok) diverged(t1);
    u = un;
    v = vn;
    a = an;
    fn = f;
    if (!u.allFinite() || u.norm() > blowup) diverged(t1);
    if (observe) observe(t1, u, v);
  }
}

Trajectory integrate_reference(const SecondOrderOde& ode, double omega, const Vec& x0, const Vec& v0, double t_end,
                               double sample_dt, double rel_tol, double abs_tol) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<double>;
  const int d = ode.dim;
  if (!(t_end > 0.0) || !(sample_dt > 0.0)) throw ConfigError("reference integration needs positive times");
  State y(static_cast<std::size_t>(2 * d));
  for (int i = 0; i < d; ++i) {
    y[static_cast<std::size_t>(i)] = x0(i);
    y[static_cast<std::size_t>(d + i)] = v0(i);
  }
  Vec xs(d), vs(d), f;
  auto rhs = [&](const State& s, State& dy, double t) {
    for (int i = 0; i < d; ++i) {
      xs(i) = s[static_cast<std::size_t>(i)];
      vs(i) = s[static_cast<std::size_t>(d + i)];
    }
    ode.force(xs, vs, f, nullptr, nullptr);
    const double c = std::cos(omega * t);
    for (int i = 0; i < d; ++i) {
      dy[static_cast<std::size_t>(i)] = vs(i);
      dy[static_cast<std::size_t>(d + i)] = ode.load(i) * c - f(i);
    }
  };
  Trajectory traj;
  auto observer = [&](const State& s, double t) {
    Vec x(d), v(d);
    for (int i = 0; i < d; ++i) {
      x(i) = s[static_cast<std::size_t>(i)];
      v(i) = s[static_cast<std::size_t>(d + i)];
    }
    if (!x.allFinite()) diverged(t);
    traj.t.push_back(t);
    traj.x.push_back(std::move(x));
    traj.v.push_back(std::move(v));
  };
  auto stepper = odeint::make_dense_output(abs_tol, rel_tol, odeint::runge_kutta_dopri5<State>());
  const long samples = std::lround(std::floor(t_end / sample_dt + 1e-9));
  std::vector<double> times;
  for (long i = 0; i <= samples; ++i) times.push_back(i * sample_dt);
  odeint::integrate_times(stepper, rhs, y, times.begin(), times.end(), sample_dt, observer);
  return traj;
}

Vec steady_amplitude(const Trajectory& traj, double from_time) {
  if (traj.x.empty()) throw ConfigError("empty trajectory");
  const Index d = traj.x.front().size();
  Vec out = Vec::Zero(d);
  for (Index j = 0; j < d; ++j) {
    for (std::size_t i = 1; i + 1 < traj.x.size(); ++i) {
      if (traj.t[i] < from_time) continue;
      const double y0 = std::abs(traj.x[i - 1](j)), y1 = std::abs(traj.x[i](j)), y2 = std::abs(traj.x[i + 1](j));
      double peak = y1;
      // Parabolic refinement through a local maximum of equally spaced samples.
      if (y1 >= y0 && y1 >= y2) {
        const double den = y0 - 2.0 * y1 + y2;
        if (den < 0.0) peak = y1 - 0.125 * (y2 - y0) * (y2 - y0) / den;
      }
      out(j) = std::max(out(j), peak);
    }
  }
  return out;
}

}  // namespace dnf::solvers
