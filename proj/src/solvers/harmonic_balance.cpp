#include "dnf/solvers/harmonic_balance.hpp"

#include "dnf/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

namespace dnf::solvers {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double load_scale(const SecondOrderOde& ode) { return std::max(ode.load.norm(), 1e-300); }

}  // namespace

std::string to_string(Bifurcation b) {
  switch (b) {
    case Bifurcation::SaddleNode: return "SN";
    case Bifurcation::NeimarkSacker: return "NS";
    default: return "none";
  }
}

HarmonicBalance::HarmonicBalance(SecondOrderOde ode, int harmonics) : ode_(std::move(ode)), h_(harmonics) {
  if (h_ < 1) throw ConfigError("harmonic balance needs at least one harmonic");
  if (ode_.dim < 1 || ode_.load.size() != ode_.dim || !ode_.force) throw ConfigError("harmonic balance: malformed ODE");
  nt_ = 4 * h_ + 1;
  const int b = block();
  synth_.resize(nt_, b);
  project_.resize(b, nt_);
  dtau_ = Mat::Zero(b, b);
  for (int i = 0; i < nt_; ++i) {
    const double tau = kTwoPi * i / nt_;
    synth_(i, 0) = 1.0;
    project_(0, i) = 1.0 / nt_;
    for (int h = 1; h <= h_; ++h) {
      synth_(i, 2 * h - 1) = std::cos(h * tau);
      synth_(i, 2 * h) = std::sin(h * tau);
      project_(2 * h - 1, i) = 2.0 * std::cos(h * tau) / nt_;
      project_(2 * h, i) = 2.0 * std::sin(h * tau) / nt_;
    }
  }
  for (int h = 1; h <= h_; ++h) {
    dtau_(2 * h - 1, 2 * h) = h;
    dtau_(2 * h, 2 * h - 1) = -h;
  }
}

Vec HarmonicBalance::residual(const Vec& x, double omega, Mat* jac, Vec* d_omega) const {
  const int d = dim(), b = block();
  if (x.size() != unknowns()) throw DimensionError("harmonic balance: coefficient vector length");
  Mat xs(nt_, d), vs(nt_, d), vtau(b, d);
  for (int j = 0; j < d; ++j) {
    const auto xj = x.segment(static_cast<Index>(j) * b, b);
    xs.col(j) = synth_ * xj;
    vtau.col(j) = dtau_ * xj;
    vs.col(j) = omega * (synth_ * vtau.col(j));
  }
  Mat fs(nt_, d);
  std::vector<Mat> dfdx, dfdv;
  if (jac || d_omega) {
    dfdx.resize(static_cast<std::size_t>(nt_));
    dfdv.resize(static_cast<std::size_t>(nt_));
  }
  for (int i = 0; i < nt_; ++i) {
    Vec f;
    const bool want = jac || d_omega;
    ode_.force(xs.row(i).transpose(), vs.row(i).transpose(), f, want ? &dfdx[static_cast<std::size_t>(i)] : nullptr,
               want ? &dfdv[static_cast<std::size_t>(i)] : nullptr);
    fs.row(i) = f.transpose();
  }
  const Mat d2 = dtau_ * dtau_;
  Vec r(unknowns());
  for (int j = 0; j < d; ++j) {
    const auto xj = x.segment(static_cast<Index>(j) * b, b);
    Vec rj = omega * omega * (d2 * xj) + project_ * fs.col(j);
    rj(1) -= ode_.load(j);
    r.segment(static_cast<Index>(j) * b, b) = rj;
  }
  if (jac) {
    jac->setZero(unknowns(), unknowns());
    const Mat cd = synth_ * dtau_;
    for (int j = 0; j < d; ++j) {
      for (int k = 0; k < d; ++k) {
        Mat wx(nt_, b), wv(nt_, b);
        for (int i = 0; i < nt_; ++i) {
          wx.row(i) = dfdx[static_cast<std::size_t>(i)](j, k) * synth_.row(i);
          wv.row(i) = (omega * dfdv[static_cast<std::size_t>(i)](j, k)) * cd.row(i);
        }
        auto blk = jac->block(static_cast<Index>(j) * b, static_cast<Index>(k) * b, b, b);
        blk = project_ * (wx + wv);
        if (j == k) blk += omega * omega * d2;
      }
    }
  }
  if (d_omega) {
    d_omega->resize(unknowns());
    for (int j = 0; j < d; ++j) {
      const auto xj = x.segment(static_cast<Index>(j) * b, b);
      Vec s = Vec::Zero(nt_);
      for (int i = 0; i < nt_; ++i)
        for (int k = 0; k < d; ++k) s(i) += dfdv[static_cast<std::size_t>(i)](j, k) * synth_.row(i).dot(vtau.col(k));
      d_omega->segment(static_cast<Index>(j) * b, b) = 2.0 * omega * (d2 * xj) + project_ * s;
    }
  }
  return r;
}

Vec HarmonicBalance::linear_guess(double omega) const {
  Mat jac;
  const Vec zero = Vec::Zero(unknowns());
  const Vec r = residual(zero, omega, &jac);
  return jac.fullPivLu().solve(-r);
}

bool HarmonicBalance::solve(Vec& x, double omega, const HBConfig& cfg, int* iterations, double* residual_out) const {
  const double scale = load_scale(ode_);
  Mat jac;
  for (int it = 0; it <= cfg.max_iterations; ++it) {
    const Vec r = residual(x, omega, &jac);
    const double res = r.norm() / scale;
    if (iterations) *iterations = it;
    if (residual_out) *residual_out = res;
    if (!std::isfinite(res)) return false;
    if (res < cfg.tolerance) return true;
    if (it == cfg.max_iterations) break;
    x -= jac.partialPivLu().solve(r);
  }
  return false;
}

Vec HarmonicBalance::displacement(const Vec& x, double tau) const {
  Vec out(dim());
  for (int j = 0; j < dim(); ++j) {
    const auto xj = x.segment(static_cast<Index>(j) * block(), block());
    double v = xj(0);
    for (int h = 1; h <= h_; ++h) v += xj(2 * h - 1) * std::cos(h * tau) + xj(2 * h) * std::sin(h * tau);
    out(j) = v;
  }
  return out;
}

Vec HarmonicBalance::velocity(const Vec& x, double omega, double tau) const {
  Vec out(dim());
  for (int j = 0; j < dim(); ++j) {
    const auto xj = x.segment(static_cast<Index>(j) * block(), block());
    double v = 0.0;
    for (int h = 1; h <= h_; ++h) v += h * (-xj(2 * h - 1) * std::sin(h * tau) + xj(2 * h) * std::cos(h * tau));
    out(j) = omega * v;
  }
  return out;
}

Vec HarmonicBalance::peak_amplitude(const Vec& x) const {
  Vec out(dim());
  const int samples = 32 * block();
  for (int j = 0; j < dim(); ++j) {
    const auto xj = x.segment(static_cast<Index>(j) * block(), block());
    auto eval = [&](double tau, double& d1, double& d2) {
      double v = xj(0);
      d1 = d2 = 0.0;
      for (int h = 1; h <= h_; ++h) {
        const double c = std::cos(h * tau), s = std::sin(h * tau);
        v += xj(2 * h - 1) * c + xj(2 * h) * s;
        d1 += h * (-xj(2 * h - 1) * s + xj(2 * h) * c);
        d2 -= h * h * (xj(2 * h - 1) * c + xj(2 * h) * s);
      }
      return v;
    };
    double best = 0.0, best_tau = 0.0, d1 = 0.0, d2 = 0.0;
    for (int i = 0; i < samples; ++i) {
      const double tau = kTwoPi * i / samples;
      const double v = std::abs(eval(tau, d1, d2));
      if (v > best) {
        best = v;
        best_tau = tau;
      }
    }
    double tau = best_tau;
    for (int it = 0; it < 30; ++it) {
      eval(tau, d1, d2);
      if (d2 == 0.0) break;
      const double step = d1 / d2;
      if (std::abs(step) > kTwoPi / samples) break;
      tau -= step;
      if (std::abs(step) < 1e-15) break;
    }
    out(j) = std::max(best, std::abs(eval(tau, d1, d2)));
  }
  return out;
}

FloquetResult floquet_stability(const HarmonicBalance& hb, const Vec& x, double omega, int steps) {
  const int d = hb.dim();
  if (steps <= 0) steps = std::max(400, 100 * hb.harmonics());
  const double period = kTwoPi / omega;
  const double dt = period / steps;
  auto system_matrix = [&](double t) {
    const double tau = omega * t;
    Vec f;
    Mat dfdx, dfdv;
    hb.ode().force(hb.displacement(x, tau), hb.velocity(x, omega, tau), f, &dfdx, &dfdv);
    Mat a = Mat::Zero(2 * d, 2 * d);
    a.topRightCorner(d, d).setIdentity();
    a.bottomLeftCorner(d, d) = -dfdx;
    a.bottomRightCorner(d, d) = -dfdv;
    return a;
  };
  Mat phi = Mat::Identity(2 * d, 2 * d);
  for (int i = 0; i < steps; ++i) {
    const double t = i * dt;
    const Mat a0 = system_matrix(t);
    const Mat a1 = system_matrix(t + 0.5 * dt);
    const Mat a2 = system_matrix(t + dt);
    const Mat k1 = a0 * phi;
    const Mat k2 = a1 * (phi + 0.5 * dt * k1);
    const Mat k3 = a1 * (phi + 0.5 * dt * k2);
    const Mat k4 = a2 * (phi + dt * k3);
    phi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  Eigen::EigenSolver<Mat> es(phi);
  if (es.info() != Eigen::Success) throw NumericalError("monodromy eigenvalues did not converge");
  FloquetResult out;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) out.multipliers.push_back(es.eigenvalues()(i));
  std::sort(out.multipliers.begin(), out.multipliers.end(),
            [](const auto& a, const auto& b) { return std::abs(a) > std::abs(b); });
  out.stable = std::abs(out.multipliers.front()) <= 1.0 + 1e-6;
  return out;
}

void mark_bifurcations(Branch& branch) {
  auto det_sign = [](const BranchPoint& p) {
    std::complex<double> prod = 1.0;
    for (const auto& m : p.multipliers) prod *= 1.0 - m;
    return prod.real() >= 0.0 ? 1 : -1;
  };
  auto unstable_complex = [](const BranchPoint& p) {
    int count = 0;
    for (const auto& m : p.multipliers)
      if (std::abs(m.imag()) > 1e-7 && std::abs(m) > 1.0 + 1e-6) ++count;
    return count;
  };
  for (std::size_t i = 1; i < branch.points.size(); ++i) {
    BranchPoint& p = branch.points[i];
    const BranchPoint& q = branch.points[i - 1];
    p.marker = Bifurcation::None;
    if (p.multipliers.empty() || q.multipliers.empty()) continue;
    if (det_sign(p) != det_sign(q))
      p.marker = Bifurcation::SaddleNode;
    else if (unstable_complex(p) != unstable_complex(q))
      p.marker = Bifurcation::NeimarkSacker;
  }
}

Branch hb_continue(const SecondOrderOde& ode, const HBConfig& hbc, const ContinuationConfig& cont) {
  if (!(cont.omega_start > 0.0) || !(cont.omega_end > 0.0) || cont.omega_start == cont.omega_end)
    throw ConfigError("continuation needs a nonempty positive frequency range");
  if (!(cont.initial_step > 0.0) || !(cont.min_step > 0.0) || !(cont.max_step >= cont.min_step))
    throw ConfigError("continuation steps must be positive with min <= max");
  const HarmonicBalance hb(ode, hbc.harmonics);
  Branch branch;
  branch.dim = hb.dim();
  branch.harmonics = hb.harmonics();
  const Index nx = hb.unknowns();
  const double lo = std::min(cont.omega_start, cont.omega_end);
  const double hi = std::max(cont.omega_start, cont.omega_end);
  const double direction = cont.omega_end > cont.omega_start ? 1.0 : -1.0;

  double sx = cont.amplitude_scale;
  if (!(sx > 0.0)) {
    for (int i = 0; i <= 200; ++i) sx = std::max(sx, hb.linear_guess(lo + (hi - lo) * i / 200.0).norm());
    if (!(sx > 0.0) || !std::isfinite(sx)) sx = 1.0;
  }
  const double sw = hi - lo;

  auto add_point = [&](const Vec& x, double omega, int iterations, double res) {
    BranchPoint p;
    p.omega = omega;
    p.coefficients = x;
    p.amplitude = hb.peak_amplitude(x);
    p.iterations = iterations;
    p.residual = res;
    if (cont.stability) {
      const FloquetResult fr = floquet_stability(hb, x, omega);
      p.multipliers = fr.multipliers;
      p.stable = fr.stable;
    }
    branch.points.push_back(std::move(p));
  };

  // Scaled unknowns y = (x / sx, omega / sw).
  Vec x = hb.linear_guess(cont.omega_start);
  double omega = cont.omega_start;
  int iters = 0;
  double res = 0.0;
  if (!hb.solve(x, omega, hbc, &iters, &res)) {
    branch.diagnostic = "Newton did not converge at the start frequency";
    return branch;
  }
  add_point(x, omega, iters, res);

  Mat jac;
  Vec dw;
  Vec tangent(nx + 1);
  {
    hb.residual(x, omega, &jac, &dw);
    const Vec z = jac.partialPivLu().solve(-dw);
    tangent << z / sx, 1.0 / sw;
    tangent *= direction / tangent.norm();
  }

  double step = cont.initial_step;
  const double scale = load_scale(ode);
  while (static_cast<int>(branch.points.size()) < cont.max_points) {
    bool converged = false;
    Vec xn;
    double wn = 0.0;
    int it = 0;
    while (!converged) {
      Vec y(nx + 1);
      y << x / sx, omega / sw;
      const Vec yp = y + step * tangent;
      xn = yp.head(nx) * sx;
      wn = yp(nx) * sw;
      for (it = 0; it <= hbc.max_iterations; ++it) {
        const Vec r = hb.residual(xn, wn, &jac, &dw);
        Vec yc(nx + 1);
        yc << xn / sx, wn / sw;
        const double arc = tangent.dot(yc - yp);
        res = r.norm() / scale;
        if (!std::isfinite(res)) break;
        if (res < hbc.tolerance && std::abs(arc) < 1e-10) {
          converged = true;
          break;
        }
        if (it == hbc.max_iterations) break;
        Mat aug(nx + 1, nx + 1);
        aug.topLeftCorner(nx, nx) = jac * sx;
        aug.topRightCorner(nx, 1) = dw * sw;
        aug.bottomRows(1) = tangent.transpose();
        Vec rhs(nx + 1);
        rhs << -r, -arc;
        const Vec delta = aug.partialPivLu().solve(rhs);
        xn += delta.head(nx) * sx;
        wn += delta(nx) * sw;
      }
      if (!converged) {
        step *= cont.shrink;
        if (step < cont.min_step) {
          branch.diagnostic = "step size fell below the minimum near omega = " + std::to_string(omega);
          mark_bifurcations(branch);
          return branch;
        }
      }
    }
    // New tangent from the bordered Jacobian, oriented along the previous one.
    hb.residual(xn, wn, &jac, &dw);
    Mat aug(nx + 1, nx + 1);
    aug.topLeftCorner(nx, nx) = jac * sx;
    aug.topRightCorner(nx, 1) = dw * sw;
    aug.bottomRows(1) = tangent.transpose();
    Vec e = Vec::Zero(nx + 1);
    e(nx) = 1.0;
    Vec t = aug.partialPivLu().solve(e);
    tangent = t / t.norm();

    x = xn;
    omega = wn;
    if (omega < lo || omega > hi) {
      branch.completed = true;
      break;
    }
    add_point(x, omega, it, res);
    if (it <= 3)
      step = std::min(step * cont.grow, cont.max_step);
    else if (it > 6)
      step = std::max(step * cont.shrink, cont.min_step);
  }
  if (!branch.completed && branch.diagnostic.empty()) branch.diagnostic = "maximum number of points reached";
  mark_bifurcations(branch);
  return branch;
}

void write_branch_csv(std::ostream& os, const Branch& branch, const std::vector<double>* physical) {
  if (physical && physical->size() != branch.points.size())
    throw DimensionError("physical amplitude list must have one entry per branch point");
  os << "omega";
  for (int p = 0; p < branch.dim; ++p) os << ",amp_r" << p + 1;
  if (physical) os << ",max_physical_amp";
  os << ",stable,bifurcation\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < branch.points.size(); ++i) {
    const BranchPoint& p = branch.points[i];
    os << p.omega;
    for (Index j = 0; j < p.amplitude.size(); ++j) os << ',' << p.amplitude(j);
    if (physical) os << ',' << (*physical)[i];
    os << ',' << (p.stable ? 1 : 0) << ',' << to_string(p.marker) << "\n";
  }
}

}  // namespace dnf::solvers
