#include "dnf/spectral/modes.hpp"

#include "dnf/core/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <string>

namespace dnf::spectral {

ModeSelector ModeSelector::lowest(int n) {
  ModeSelector s;
  s.kind = Kind::Count;
  s.count = n;
  return s;
}

ModeSelector ModeSelector::mode_numbers(std::vector<int> numbers) {
  ModeSelector s;
  s.kind = Kind::Indices;
  s.indices = std::move(numbers);
  return s;
}

ModeSelector ModeSelector::frequency_window(double lo, double hi) {
  ModeSelector s;
  s.kind = Kind::Window;
  s.omega_min = lo;
  s.omega_max = hi;
  return s;
}

ModeSet ModeSet::subset(const std::vector<int>& positions) const {
  ModeSet out;
  out.frequencies.resize(static_cast<Index>(positions.size()));
  out.vectors.resize(vectors.rows(), static_cast<Index>(positions.size()));
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const int p = positions[i];
    if (p < 0 || p >= size()) throw DimensionError("mode subset position out of range");
    out.mode_numbers.push_back(mode_numbers[static_cast<std::size_t>(p)]);
    out.frequencies(static_cast<Index>(i)) = frequencies(p);
    out.vectors.col(static_cast<Index>(i)) = vectors.col(p);
  }
  return out;
}

namespace {

void fix_sign(Eigen::Ref<Vec> v) {
  const double peak = v.cwiseAbs().maxCoeff();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= (1.0 - 1e-6) * peak) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

struct Eigenpairs {
  Vec lambda;  // ascending
  Mat vectors;
};

Eigenpairs dense_pairs(const SparseSymmetricMatrix& mass, const SparseSymmetricMatrix& stiffness) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(stiffness.dense(), mass.dense());
  if (es.info() != Eigen::Success) throw NumericalError("dense generalized eigensolver failed (is M positive definite?)");
  return {es.eigenvalues(), es.eigenvectors()};
}

Eigenpairs lanczos_pairs(const SparseSymmetricMatrix& mass, const SparseSymmetricMatrix& stiffness, int count,
                         const LanczosOptions& opt) {
  const Index n = mass.dim();
  if (count > n) throw ConfigError("requested " + std::to_string(count) + " modes from a system of size " + std::to_string(n));
  const SparseSymmetricMatrix shifted = stiffness.combine(1.0, mass, -opt.shift);
  const SymmetricSolver op(shifted, opt.shift <= 0.0 ? Definiteness::Positive : Definiteness::Indefinite);

  Index m = std::min<Index>(n, std::max<Index>(2 * count + 20, count + 40));
  for (;;) {
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal;
    auto random_vector = [&] {
      Vec v(n);
      for (Index i = 0; i < n; ++i) v(i) = normal(rng);
      return v;
    };
    Mat q(n, m);
    Mat mq(n, m);  // M times basis
    Vec alpha = Vec::Zero(m), beta = Vec::Zero(m);
    Vec v = random_vector();
    Index steps = 0;
    for (Index j = 0; j < m; ++j) {
      // M-orthogonalize the incoming vector against the basis (twice).
      for (int pass = 0; pass < 2; ++pass)
        if (j > 0) v -= q.leftCols(j) * (mq.leftCols(j).transpose() * v);
      Vec mv = mass.multiply(v);
      double nrm = std::sqrt(std::max(0.0, v.dot(mv)));
      if (j > 0 && nrm <= 1e-12 * std::abs(beta(j - 1) == 0.0 ? 1.0 : beta(j - 1))) {
        // Invariant subspace reached: continue with a fresh direction.
        v = random_vector();
        for (int pass = 0; pass < 2; ++pass) v -= q.leftCols(j) * (mq.leftCols(j).transpose() * v);
        mv = mass.multiply(v);
        nrm = std::sqrt(v.dot(mv));
        beta(j - 1) = 0.0;
      }
      q.col(j) = v / nrm;
      mq.col(j) = mv / nrm;
      Vec w = op.solve(Vec(mq.col(j)));
      alpha(j) = mq.col(j).dot(w);
      w -= alpha(j) * q.col(j);
      if (j > 0) w -= beta(j - 1) * q.col(j - 1);
      for (int pass = 0; pass < 2; ++pass) w -= q.leftCols(j + 1) * (mq.leftCols(j + 1).transpose() * w);
      beta(j) = std::sqrt(std::max(0.0, w.dot(mass.multiply(w))));
      v = w;
      steps = j + 1;
    }
    Mat t = Mat::Zero(steps, steps);
    for (Index j = 0; j < steps; ++j) {
      t(j, j) = alpha(j);
      if (j + 1 < steps) t(j, j + 1) = t(j + 1, j) = beta(j);
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(t);
    // Largest theta corresponds to the eigenvalue closest to the shift from above.
    Eigenpairs out;
    out.lambda.resize(count);
    out.vectors.resize(n, count);
    bool converged = true;
    for (int k = 0; k < count; ++k) {
      const Index col = steps - 1 - k;
      const double theta = es.eigenvalues()(col);
      const double lambda = opt.shift + 1.0 / theta;
      Vec x = q.leftCols(steps) * es.eigenvectors().col(col);
      const Vec mx = mass.multiply(x);
      x /= std::sqrt(x.dot(mx));
      // Ritz estimate of ||OP x - theta x||_M; the physical residual has a round-off floor near eps*cond(K).
      const double estimate = std::abs(beta(steps - 1) * es.eigenvectors()(steps - 1, col));
      if (!(estimate <= opt.tolerance * std::abs(theta))) converged = false;
      out.lambda(k) = lambda;
      out.vectors.col(k) = x;
    }
    if (converged) return out;
    if (m == n) throw NumericalError("Lanczos iteration did not converge for the requested modes");
    m = std::min<Index>(n, 2 * m);
  }
}

ModeSet finish(const Eigenpairs& pairs, const std::vector<int>& numbers) {
  ModeSet out;
  out.frequencies.resize(static_cast<Index>(numbers.size()));
  out.vectors.resize(pairs.vectors.rows(), static_cast<Index>(numbers.size()));
  for (std::size_t i = 0; i < numbers.size(); ++i) {
    const Index k = numbers[i] - 1;
    const double lam = pairs.lambda(k);
    if (!(lam > 0.0)) throw NumericalError("non-positive eigenvalue " + std::to_string(lam) + " for mode " + std::to_string(numbers[i]) + " (unconstrained rigid motion?)");
    out.frequencies(static_cast<Index>(i)) = std::sqrt(lam);
    out.vectors.col(static_cast<Index>(i)) = pairs.vectors.col(k);
    fix_sign(out.vectors.col(static_cast<Index>(i)));
    out.mode_numbers.push_back(numbers[i]);
  }
  return out;
}

Eigenpairs lowest_pairs(const SparseSymmetricMatrix& mass, const SparseSymmetricMatrix& stiffness, int count,
                        const LanczosOptions& opt) {
  if (mass.dim() <= kDenseThreshold) return dense_pairs(mass, stiffness);
  return lanczos_pairs(mass, stiffness, count, opt);
}

}  // namespace

ModeSet solve_modes(const SparseSymmetricMatrix& mass, const SparseSymmetricMatrix& stiffness,
                    const ModeSelector& selector, const LanczosOptions& options) {
  if (mass.dim() != stiffness.dim()) throw DimensionError("mass and stiffness dimensions differ");
  const int n = static_cast<int>(mass.dim());
  switch (selector.kind) {
    case ModeSelector::Kind::Count: {
      if (selector.count < 1 || selector.count > n)
        throw ConfigError("mode count " + std::to_string(selector.count) + " outside 1.." + std::to_string(n));
      std::vector<int> numbers(static_cast<std::size_t>(selector.count));
      for (int i = 0; i < selector.count; ++i) numbers[static_cast<std::size_t>(i)] = i + 1;
      return finish(lowest_pairs(mass, stiffness, selector.count, options), numbers);
    }
    case ModeSelector::Kind::Indices: {
      if (selector.indices.empty()) throw ConfigError("empty mode index list");
      const int top = *std::max_element(selector.indices.begin(), selector.indices.end());
      const int bottom = *std::min_element(selector.indices.begin(), selector.indices.end());
      if (bottom < 1 || top > n) throw ConfigError("mode number " + std::to_string(bottom < 1 ? bottom : top) + " beyond the spectrum");
      return finish(lowest_pairs(mass, stiffness, top, options), selector.indices);
    }
    case ModeSelector::Kind::Window: {
      if (!(selector.omega_max > selector.omega_min)) throw ConfigError("empty frequency window");
      int count = std::min(n, 8);
      for (;;) {
        const Eigenpairs pairs = lowest_pairs(mass, stiffness, count, options);
        const Index have = std::min<Index>(pairs.lambda.size(), n);
        const double top = std::sqrt(std::max(0.0, pairs.lambda(have - 1)));
        if (top > selector.omega_max || have == n) {
          std::vector<int> numbers;
          for (Index k = 0; k < have; ++k) {
            const double w = std::sqrt(std::max(0.0, pairs.lambda(k)));
            if (w >= selector.omega_min && w <= selector.omega_max) numbers.push_back(static_cast<int>(k) + 1);
          }
          if (numbers.empty()) throw ConfigError("no modes inside the frequency window");
          return finish(pairs, numbers);
        }
        count = std::min(n, 2 * count);
      }
    }
  }
  throw ConfigError("unknown mode selector");
}

ModeSet solve_modes_lanczos(const SparseSymmetricMatrix& mass, const SparseSymmetricMatrix& stiffness, int count,
                            const LanczosOptions& options) {
  std::vector<int> numbers(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) numbers[static_cast<std::size_t>(i)] = i + 1;
  return finish(lanczos_pairs(mass, stiffness, count, options), numbers);
}

double max_eigen_residual(const SparseSymmetricMatrix& mass, const SparseSymmetricMatrix& stiffness,
                          const ModeSet& modes) {
  double worst = 0.0;
  for (int k = 0; k < modes.size(); ++k) {
    const Vec phi = modes.vectors.col(k);
    const double w2 = modes.frequencies(k) * modes.frequencies(k);
    const Vec mphi = mass.multiply(phi);
    worst = std::max(worst, (stiffness.multiply(phi) - w2 * mphi).norm() / (w2 * mphi.norm()));
  }
  return worst;
}

double orthonormality_error(const SparseSymmetricMatrix& mass, const ModeSet& modes) {
  const Mat g = modes.vectors.transpose() * mass.multiply_block(modes.vectors);
  return (g - Mat::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

ComplexSpectrum::ComplexSpectrum(Vec omega) : omega_(std::move(omega)) {}

double ComplexSpectrum::imag(int s) const {
  if (s < 0 || s >= state_count()) throw DimensionError("state index out of range");
  return sign(s) * omega_(master(s));
}

ComplexSpectrum build_spectrum(const Vec& omega) {
  if (omega.size() == 0) throw ConfigError("empty mode set");
  const double scale = omega.cwiseAbs().maxCoeff();
  for (Index i = 0; i < omega.size(); ++i) {
    if (!(omega(i) > 1e-12 * scale) || !std::isfinite(omega(i)))
      throw NumericalError("zero or invalid frequency at master " + std::to_string(i + 1) + " (rigid mode present)");
    for (Index j = 0; j < i; ++j)
      if (std::abs(omega(i) - omega(j)) <= 1e-12 * scale)
        throw NumericalError("masters " + std::to_string(j + 1) + " and " + std::to_string(i + 1) + " share the same frequency");
  }
  return ComplexSpectrum(omega);
}

ComplexSpectrum build_spectrum(const ModeSet& modes) { return build_spectrum(modes.frequencies); }

std::vector<std::complex<double>> to_normal(const Vec& r, const Vec& s, const Vec& omega) {
  const Index n = omega.size();
  if (r.size() != n || s.size() != n) throw DimensionError("to_normal: length mismatch");
  std::vector<std::complex<double>> z(static_cast<std::size_t>(2 * n));
  for (Index k = 0; k < n; ++k) {
    z[static_cast<std::size_t>(k)] = 0.5 * std::complex<double>(r(k), -s(k) / omega(k));
    z[static_cast<std::size_t>(k + n)] = std::conj(z[static_cast<std::size_t>(k)]);
  }
  return z;
}

std::array<Vec, 2> from_normal(const std::vector<std::complex<double>>& z, const Vec& omega) {
  const Index n = omega.size();
  if (static_cast<Index>(z.size()) != 2 * n) throw DimensionError("from_normal: length mismatch");
  Vec r(n), s(n);
  const std::complex<double> i(0.0, 1.0);
  for (Index k = 0; k < n; ++k) {
    const auto zp = z[static_cast<std::size_t>(k)];
    const auto zm = z[static_cast<std::size_t>(k + n)];
    r(k) = (zp + zm).real();
    s(k) = (i * omega(k) * (zp - zm)).real();
  }
  return {r, s};
}

void write_modes_csv(std::ostream& os, const ModeSet& modes, const Mat& expanded,
                     const std::vector<std::array<double, 3>>* nodes) {
  os << std::setprecision(17);
  if (nodes) {
    if (expanded.rows() != 3 * static_cast<Index>(nodes->size())) throw DimensionError("mode CSV: node count mismatch");
    os << "node,x,y,z";
    for (int k = 0; k < modes.size(); ++k) {
      const int m = modes.mode_numbers[static_cast<std::size_t>(k)];
      os << ",mode" << m << "_ux,mode" << m << "_uy,mode" << m << "_uz";
    }
    os << "\n";
    for (std::size_t n = 0; n < nodes->size(); ++n) {
      os << n + 1 << ',' << (*nodes)[n][0] << ',' << (*nodes)[n][1] << ',' << (*nodes)[n][2];
      for (int k = 0; k < modes.size(); ++k)
        for (int c = 0; c < 3; ++c) os << ',' << expanded(static_cast<Index>(3 * n + c), k);
      os << "\n";
    }
    return;
  }
  os << "dof";
  for (int k = 0; k < modes.size(); ++k) os << ",mode" << modes.mode_numbers[static_cast<std::size_t>(k)];
  os << "\n";
  for (Index i = 0; i < expanded.rows(); ++i) {
    os << i + 1;
    for (int k = 0; k < modes.size(); ++k) os << ',' << expanded(i, k);
    os << "\n";
  }
}

}  // namespace dnf::spectral
