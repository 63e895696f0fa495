#include "dnf/core/error.hpp"
#include "dnf/core/parallel.hpp"
#include "dnf/nf/normal_form.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace dnf::nf {

namespace {

int pair_slot(int k, int l, int n) {
  if (k > l) std::swap(k, l);
  return k * n - k * (k - 1) / 2 + (l - k);
}

int triple_slot(int a, int b, int c, int n) {
  std::array<int, 3> t{a, b, c};
  std::sort(t.begin(), t.end());
  return (t[0] * n + t[1]) * n + t[2];
}

/// Master projections of every operator evaluation the cubic terms need.
struct Projections {
  int n = 0;
  std::vector<Vec> g_psi;   // [(cls * slots + slot) * n + m] -> Phi^T G(Psi^cls_slot, phi_m)
  std::vector<Vec> h_phi;   // [triple_slot] -> Phi^T H(phi_a, phi_b, phi_c), sorted triples only
  std::vector<Vec> m_psi;   // [cls * slots + slot] -> Phi^T M Psi^cls_slot
  int slots = 0;

  const Vec& g(int cls, int k, int l, int m) const {
    return g_psi[static_cast<std::size_t>((cls * slots + pair_slot(k, l, n)) * n + m)];
  }
  const Vec& h(int a, int b, int c) const { return h_phi[static_cast<std::size_t>(triple_slot(a, b, c, n))]; }
  const Vec& mpsi(int cls, int k, int l) const {
    return m_psi[static_cast<std::size_t>(cls * slots + pair_slot(k, l, n))];
  }
};

Projections project(const model::MechanicalSystem& system, const spectral::ModeSet& masters,
                    const QuadraticMapSet& maps) {
  const int n = masters.size();
  const Mat& phi = masters.vectors;
  Projections pr;
  pr.n = n;
  pr.slots = n * (n + 1) / 2;
  pr.g_psi.resize(static_cast<std::size_t>(2 * pr.slots * n));
  parallel_for(pr.g_psi.size(), [&](std::size_t i) {
    const int m = static_cast<int>(i) % n;
    const int rest = static_cast<int>(i) / n;
    const int cls = rest / pr.slots;
    const PairSolution& p = maps.pairs[static_cast<std::size_t>(rest % pr.slots)];
    const Vec& psi = cls == 0 ? p.psi_p : p.psi_n;
    pr.g_psi[i] = phi.transpose() * system.eval_quadratic(psi, phi.col(m));
  });

  pr.h_phi.assign(static_cast<std::size_t>(n * n * n), Vec());
  std::vector<int> sorted;
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b)
      for (int c = b; c < n; ++c) sorted.push_back((a * n + b) * n + c);
  parallel_for(sorted.size(), [&](std::size_t i) {
    const int t = sorted[i];
    const int a = t / (n * n), b = (t / n) % n, c = t % n;
    pr.h_phi[static_cast<std::size_t>(t)] = phi.transpose() * system.eval_cubic(phi.col(a), phi.col(b), phi.col(c));
  });

  const Mat mphi = system.mass().multiply_block(phi);
  pr.m_psi.resize(static_cast<std::size_t>(2 * pr.slots));
  for (int s = 0; s < pr.slots; ++s) {
    pr.m_psi[static_cast<std::size_t>(s)] = mphi.transpose() * maps.pairs[static_cast<std::size_t>(s)].psi_p;
    pr.m_psi[static_cast<std::size_t>(pr.slots + s)] = mphi.transpose() * maps.pairs[static_cast<std::size_t>(s)].psi_n;
  }
  return pr;
}

/// Class of the state pair: 0 for equal signs (sum of frequencies), 1 otherwise.
int pair_class(int a, int b, int n) { return (a < n) == (b < n) ? 0 : 1; }

void symmetrize_trailing3(Tensor4& t) {
  const int n = t.extent();
  Tensor4 out(n);
  for (int p = 0; p < n; ++p)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m)
          out(p, k, l, m) = (t(p, k, l, m) + t(p, k, m, l) + t(p, l, k, m) + t(p, l, m, k) + t(p, m, k, l) +
                             t(p, m, l, k)) / 6.0;
  t = std::move(out);
}

void symmetrize_last2(Tensor4& t) {
  const int n = t.extent();
  Tensor4 out(n);
  for (int p = 0; p < n; ++p)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m) out(p, k, l, m) = 0.5 * (t(p, k, l, m) + t(p, k, m, l));
  t = std::move(out);
}

double max_abs(const Tensor4& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

CubicCoefficients compute_cubic_coefficients(const model::MechanicalSystem& system, const spectral::ModeSet& masters,
                                             const QuadraticMapSet& maps, const ResonanceTable& table) {
  const int n = masters.size();
  if (maps.n != n || static_cast<int>(maps.pairs.size()) != n * (n + 1) / 2)
    throw ConfigError("cubic coefficients: quadratic maps missing for some master pairs");
  const int states = 2 * n;
  const spectral::ComplexSpectrum spec = spectral::build_spectrum(masters.frequencies);
  const Vec& omega = masters.frequencies;
  const Projections pr = project(system, masters, maps);
  const Tensor3& f2 = maps.f2;

  CubicCoefficients out;
  out.n = n;
  out.f3 = Tensor4(states);
  for (auto* t : {&out.h, &out.A, &out.B, &out.P, &out.Q, &out.vel_rrv, &out.vel_vvv}) *t = Tensor4(n);

  // Real expansion of the cubic reduced dynamics in (r, rdot); odd parts are accumulated for the check.
  Tensor4 rrr(n), rvv(n), odd_rrv(n), odd_vvv(n), even_rrr(n), even_rvv(n);
  double scale = 0.0;

  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < states; ++a) {
      for (int b = 0; b < states; ++b) {
        for (int c = 0; c < states; ++c) {
          const int ma = spec.master(a), mb = spec.master(b), mc = spec.master(c);
          const double xi = pr.g(pair_class(a, b, n), ma, mb, mc)(s) + pr.g(pair_class(b, c, n), mb, mc, ma)(s) +
                            pr.h(ma, mb, mc)(s);
          double ca = -xi;
          double cb = 0.0;
          for (int p = 0; p < states; ++p) {
            const double fab = f2(p, a, b);
            const double fbc = f2(p, b, c);
            if (fab != 0.0) {
              const double m_pc = pr.mpsi(pair_class(p, c, n), spec.master(p), mc)(s);
              ca += (spec.imag(p) + spec.imag(c)) * m_pc * fab;
              cb -= m_pc * fab;
            }
            if (fbc != 0.0) {
              const double m_ap = pr.mpsi(pair_class(a, p, n), ma, spec.master(p))(s);
              ca += (spec.imag(a) + spec.imag(p)) * m_ap * fbc;
              cb -= m_ap * fbc;
            }
          }
          const double fp = 0.5 * (cb - ca / omega(s));
          out.f3(s, a, b, c) = fp;
          out.f3(s + n, a, b, c) = cb - fp;

          // E z_a z_b z_c with z = r/2 + i w rdot, w = -sign/(2 omega).
          const double e = -ca + (spec.imag(a) + spec.imag(b) + spec.imag(c)) * cb;
          scale = std::max(scale, std::abs(e));
          const std::array<double, 3> w{-spec.sign(a) / (2.0 * omega(ma)), -spec.sign(b) / (2.0 * omega(mb)),
                                        -spec.sign(c) / (2.0 * omega(mc))};
          rrr(s, ma, mb, mc) += e / 8.0;
          rvv(s, ma, mb, mc) -= e * w[1] * w[2] / 2.0;
          rvv(s, mb, ma, mc) -= e * w[0] * w[2] / 2.0;
          rvv(s, mc, ma, mb) -= e * w[0] * w[1] / 2.0;
          odd_rrv(s, mb, mc, ma) += e * w[0] / 4.0;
          odd_rrv(s, ma, mc, mb) += e * w[1] / 4.0;
          odd_rrv(s, ma, mb, mc) += e * w[2] / 4.0;
          odd_vvv(s, ma, mb, mc) -= e * w[0] * w[1] * w[2];

          // rdot - s = i cb z_a z_b z_c; only odd powers of rdot survive.
          out.vel_rrv(s, mb, mc, ma) -= cb * w[0] / 4.0;
          out.vel_rrv(s, ma, mc, mb) -= cb * w[1] / 4.0;
          out.vel_rrv(s, ma, mb, mc) -= cb * w[2] / 4.0;
          out.vel_vvv(s, ma, mb, mc) += cb * w[0] * w[1] * w[2];
          even_rrr(s, ma, mb, mc) += cb / 8.0;
          even_rvv(s, ma, mb, mc) -= cb * w[1] * w[2] / 2.0;
          even_rvv(s, mb, ma, mc) -= cb * w[0] * w[2] / 2.0;
          even_rvv(s, mc, ma, mb) -= cb * w[0] * w[1] / 2.0;
        }
      }
    }
  }

  for (int p = 0; p < n; ++p) {
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) {
        for (int m = 0; m < n; ++m) {
          out.h(p, k, l, m) = pr.h(k, l, m)(p);
          const double gp = pr.g(0, l, m, k)(p);
          const double gn = pr.g(1, l, m, k)(p);
          out.A(p, k, l, m) = gp + gn;
          out.B(p, k, l, m) = (gn - gp) / (omega(l) * omega(m));
        }
      }
    }
  }

  symmetrize_last2(even_rvv);
  for (Tensor4* t : {&odd_vvv, &even_rrr}) symmetrize_trailing3(*t);
  Tensor4 rrv_kl(n);
  for (int p = 0; p < n; ++p)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m) rrv_kl(p, k, l, m) = 0.5 * (odd_rrv(p, k, l, m) + odd_rrv(p, l, k, m));
  const double odd = std::max({max_abs(rrv_kl), max_abs(odd_vvv), max_abs(even_rrr), max_abs(even_rvv)});
  out.max_odd_residual = scale > 0.0 ? odd / scale : odd;

  if (!table.empty()) {
    Tensor4 ha(n);
    for (std::size_t i = 0; i < ha.data().size(); ++i) ha.data()[i] = out.h.data()[i] + out.A.data()[i];
    symmetrize_trailing3(ha);
    symmetrize_trailing3(rrr);
    symmetrize_last2(rvv);
    for (std::size_t i = 0; i < ha.data().size(); ++i) {
      out.P.data()[i] = rrr.data()[i] - ha.data()[i];
      out.Q.data()[i] = rvv.data()[i] - out.B.data()[i];
    }
  } else {
    out.vel_rrv = Tensor4(n);
    out.vel_vvv = Tensor4(n);
  }
  return out;
}

double resonant_sum_relation(const model::MechanicalSystem& system, const spectral::ModeSet& masters,
                             const QuadraticMapSet& maps, int s, int a, int b, int c) {
  const int n = masters.size();
  const Vec mphi = system.mass().multiply(Vec(masters.vectors.col(s)));
  double sum = 0.0;
  for (int p = 0; p < 2 * n; ++p) {
    if (maps.f2(p, a, b) != 0.0) sum -= mphi.dot(maps.psi(p, c)) * maps.f2(p, a, b);
    if (maps.f2(p, b, c) != 0.0) sum -= mphi.dot(maps.psi(a, p)) * maps.f2(p, b, c);
  }
  return sum;
}

}  // namespace dnf::nf
