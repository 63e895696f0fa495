#pragma once

// Dense normal form computed entirely in modal coordinates with complex
// arithmetic. Every slave mode is eliminated by its own scalar division,
// so no linear solve or bordered system is involved.

#include "dnf/model/discrete_system.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

struct ModalSystem {
  std::vector<double> omega;
  std::vector<double> g;  // N^3, g[(j * N + k) * N + l]
  std::vector<double> h;  // N^4

  int size() const { return static_cast<int>(omega.size()); }
  double G(int j, int k, int l) const { return g[static_cast<std::size_t>((j * size() + k) * size() + l)]; }
  double H(int j, int k, int l, int m) const {
    return h[static_cast<std::size_t>(((j * size() + k) * size() + l) * size() + m)];
  }

  dnf::model::DiscreteCoefficients coefficients() const {
    dnf::model::DiscreteCoefficients c;
    c.frequencies = omega;
    const int n = size();
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          if (G(j, k, l) != 0.0) c.g[{j, k, l}] = G(j, k, l);
          for (int m = 0; m < n; ++m)
            if (H(j, k, l, m) != 0.0) c.h[{j, k, l, m}] = H(j, k, l, m);
        }
    return c;
  }
};

/// Random tables symmetric in the trailing indices.
inline ModalSystem random_system(std::vector<double> omega, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  ModalSystem s;
  s.omega = std::move(omega);
  const int n = s.size();
  s.g.assign(static_cast<std::size_t>(n * n * n), 0.0);
  s.h.assign(static_cast<std::size_t>(n * n * n * n), 0.0);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int l = k; l < n; ++l) {
        const double v = nd(rng);
        s.g[static_cast<std::size_t>((j * n + k) * n + l)] = v;
        s.g[static_cast<std::size_t>((j * n + l) * n + k)] = v;
      }
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int l = k; l < n; ++l)
        for (int m = l; m < n; ++m) {
          const double v = nd(rng);
          int idx[3] = {k, l, m};
          std::sort(idx, idx + 3);
          do {
            s.h[static_cast<std::size_t>(((j * n + idx[0]) * n + idx[1]) * n + idx[2])] = v;
          } while (std::next_permutation(idx, idx + 3));
        }
  return s;
}

struct NormalForm {
  int n = 0;                   // masters
  int N = 0;                   // system size
  std::vector<int> masters;
  std::vector<double> mw;      // master frequencies
  std::vector<cplx> lam;       // 2n
  std::vector<double> psi;     // (2n)^2 x N
  std::vector<cplx> f2;        // (2n)^3
  std::vector<cplx> f3;        // (2n)^4

  int S() const { return 2 * n; }
  double Psi(int a, int b, int j) const { return psi[static_cast<std::size_t>((a * S() + b) * N + j)]; }
  cplx F2(int s, int a, int b) const { return f2[static_cast<std::size_t>((s * S() + a) * S() + b)]; }
  cplx F3(int s, int a, int b, int c) const {
    return f3[static_cast<std::size_t>(((s * S() + a) * S() + b) * S() + c)];
  }
};

inline NormalForm modal_normal_form(const ModalSystem& sys, const std::vector<int>& masters, double eps) {
  NormalForm nf;
  const int N = sys.size();
  const int n = static_cast<int>(masters.size());
  const int S = 2 * n;
  nf.n = n;
  nf.N = N;
  nf.masters = masters;
  for (int m : masters) nf.mw.push_back(sys.omega[static_cast<std::size_t>(m)]);
  nf.lam.resize(static_cast<std::size_t>(S));
  for (int s = 0; s < n; ++s) {
    nf.lam[static_cast<std::size_t>(s)] = cplx(0.0, nf.mw[static_cast<std::size_t>(s)]);
    nf.lam[static_cast<std::size_t>(s + n)] = cplx(0.0, -nf.mw[static_cast<std::size_t>(s)]);
  }
  auto mode = [&](int a) { return masters[static_cast<std::size_t>(a % n)]; };
  auto om = [&](int j) { return sys.omega[static_cast<std::size_t>(j)]; };
  auto res_set = [&](int a, int b) {
    std::vector<int> R;
    const int k = mode(a), l = mode(b);
    for (int r = 0; r < n; ++r) {
      const double w = om(masters[static_cast<std::size_t>(r)]);
      for (double c : {om(k) + om(l), std::abs(om(k) - om(l))})
        if (std::abs(c - w) / w < eps) {
          R.push_back(r);
          break;
        }
    }
    return R;
  };

  nf.psi.assign(static_cast<std::size_t>(S * S * N), 0.0);
  nf.f2.assign(static_cast<std::size_t>(S * S * S), 0.0);
  for (int a = 0; a < S; ++a) {
    for (int b = 0; b < S; ++b) {
      const cplx sig = nf.lam[static_cast<std::size_t>(a)] + nf.lam[static_cast<std::size_t>(b)];
      const int k = mode(a), l = mode(b);
      const auto R = res_set(a, b);
      for (int j = 0; j < N; ++j) {
        bool skip = false;
        for (int r : R) skip = skip || masters[static_cast<std::size_t>(r)] == j;
        if (skip) continue;
        nf.psi[static_cast<std::size_t>((a * S + b) * N + j)] = (-sys.G(j, k, l) / (sig * sig + om(j) * om(j))).real();
      }
      for (int r : R) {
        const cplx val = -sys.G(masters[static_cast<std::size_t>(r)], k, l) /
                         (nf.lam[static_cast<std::size_t>(r)] - nf.lam[static_cast<std::size_t>(r + n)]);
        nf.f2[static_cast<std::size_t>((r * S + a) * S + b)] = val;
        nf.f2[static_cast<std::size_t>(((r + n) * S + a) * S + b)] = -val;
      }
    }
  }

  auto G = [&](const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> out(static_cast<std::size_t>(N), 0.0);
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        for (int l = 0; l < N; ++l) out[static_cast<std::size_t>(j)] += sys.G(j, k, l) * x[static_cast<std::size_t>(k)] * y[static_cast<std::size_t>(l)];
    return out;
  };
  auto unit = [&](int a) {
    std::vector<double> e(static_cast<std::size_t>(N), 0.0);
    e[static_cast<std::size_t>(mode(a))] = 1.0;
    return e;
  };
  auto psi_vec = [&](int a, int b) {
    return std::vector<double>(nf.psi.begin() + (a * S + b) * N, nf.psi.begin() + (a * S + b + 1) * N);
  };

  nf.f3.assign(static_cast<std::size_t>(S * S * S * S), 0.0);
  for (int a = 0; a < S; ++a) {
    for (int b = 0; b < S; ++b) {
      for (int c = 0; c < S; ++c) {
        const auto g1 = G(psi_vec(a, b), unit(c));
        const auto g2 = G(unit(a), psi_vec(b, c));
        for (int s = 0; s < n; ++s) {
          const int ms = masters[static_cast<std::size_t>(s)];
          const double xi = g1[static_cast<std::size_t>(ms)] + g2[static_cast<std::size_t>(ms)] +
                            sys.H(ms, mode(a), mode(b), mode(c));
          cplx ca = -xi, cb = 0.0;
          for (int p = 0; p < S; ++p) {
            const cplx fab = nf.F2(p, a, b), fbc = nf.F2(p, b, c);
            const cplx lp = nf.lam[static_cast<std::size_t>(p)];
            ca += -(lp + nf.lam[static_cast<std::size_t>(c)]) * nf.Psi(p, c, ms) * fab -
                  (nf.lam[static_cast<std::size_t>(a)] + lp) * nf.Psi(a, p, ms) * fbc;
            cb += -nf.Psi(p, c, ms) * fab - nf.Psi(a, p, ms) * fbc;
          }
          const cplx fp = 0.5 * (cb + ca / nf.lam[static_cast<std::size_t>(s)]);
          nf.f3[static_cast<std::size_t>(((s * S + a) * S + b) * S + c)] = fp;
          nf.f3[static_cast<std::size_t>((((s + n) * S + a) * S + b) * S + c)] = cb - fp;
        }
      }
    }
  }
  return nf;
}

/// Polynomial part of r'' + w^2 r evaluated through the complex reduced dynamics (r'' = -w^2 r - out).
inline std::vector<double> real_force(const NormalForm& nf, const std::vector<double>& r, const std::vector<double>& rd,
                                      double* max_imag = nullptr) {
  const int n = nf.n, S = nf.S();
  std::vector<cplx> z(static_cast<std::size_t>(S));
  for (int k = 0; k < n; ++k) {
    const double w = nf.mw[static_cast<std::size_t>(k)];
    z[static_cast<std::size_t>(k)] = 0.5 * cplx(r[static_cast<std::size_t>(k)], -rd[static_cast<std::size_t>(k)] / w);
    z[static_cast<std::size_t>(k + n)] = std::conj(z[static_cast<std::size_t>(k)]);
  }
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) {
    const double w = nf.mw[static_cast<std::size_t>(p)];
    cplx q2 = 0.0, c3 = 0.0;
    for (int a = 0; a < S; ++a)
      for (int b = 0; b < S; ++b)
        q2 += cplx(0.0, w) * (nf.F2(p, a, b) - nf.F2(p + n, a, b)) * z[static_cast<std::size_t>(a)] * z[static_cast<std::size_t>(b)];
    for (int a = 0; a < S; ++a)
      for (int b = 0; b < S; ++b)
        for (int c = 0; c < S; ++c) {
          const cplx ca = nf.lam[static_cast<std::size_t>(p)] * nf.F3(p, a, b, c) +
                          nf.lam[static_cast<std::size_t>(p + n)] * nf.F3(p + n, a, b, c);
          const cplx cb = nf.F3(p, a, b, c) + nf.F3(p + n, a, b, c);
          const cplx ls = nf.lam[static_cast<std::size_t>(a)] + nf.lam[static_cast<std::size_t>(b)] + nf.lam[static_cast<std::size_t>(c)];
          c3 += (ca + ls * cb) * z[static_cast<std::size_t>(a)] * z[static_cast<std::size_t>(b)] * z[static_cast<std::size_t>(c)];
        }
    out[static_cast<std::size_t>(p)] = -(q2 + c3).real();
    if (max_imag) *max_imag = std::max(*max_imag, std::abs((q2 + c3).imag()));
  }
  return out;
}

}  // namespace oracle
