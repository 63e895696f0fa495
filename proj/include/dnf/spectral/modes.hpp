#pragma once

#include "dnf/core/linalg.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace dnf::spectral {

/// Which eigenpairs to return. Mode numbers are 1-based in ascending frequency.
struct ModeSelector {
  enum class Kind { Count, Indices, Window } kind = Kind::Count;
  int count = 1;
  std::vector<int> indices;
  double omega_min = 0.0;
  double omega_max = 0.0;

  static ModeSelector lowest(int n);
  static ModeSelector mode_numbers(std::vector<int> numbers);
  static ModeSelector frequency_window(double lo, double hi);
};

struct LanczosOptions {
  std::uint64_t seed = 20240611;  ///< start-vector seed
  double shift = 0.0;             ///< factorization shift, below the lowest wanted eigenvalue
  double tolerance = 1e-12;       ///< relative Ritz estimate for convergence
};

/// Mass-normalized eigenpairs of K phi = omega^2 M phi.
struct ModeSet {
  std::vector<int> mode_numbers;  ///< 1-based position in the ascending spectrum
  Vec frequencies;                ///< angular frequencies omega
  Mat vectors;                    ///< one column per mode

  int size() const { return static_cast<int>(frequencies.size()); }
  /// Keeps the listed positions (0-based into this set) in the given order.
  ModeSet subset(const std::vector<int>& positions) const;
};

/**
 * Generalized symmetric eigenproblem for the lowest part of the spectrum.
 *
 * Dense for N <= kDenseThreshold; shift-invert Lanczos with full
 * reorthogonalization in the M inner product above. Each returned vector
 * has its first entry of (near-)largest magnitude made positive.
 */
ModeSet solve_modes(const SparseSymmetricMatrix& mass, const SparseSymmetricMatrix& stiffness,
                    const ModeSelector& selector, const LanczosOptions& options = {});

/// Lanczos path regardless of size (exposed for cross-checks against the dense path).
ModeSet solve_modes_lanczos(const SparseSymmetricMatrix& mass, const SparseSymmetricMatrix& stiffness, int count,
                            const LanczosOptions& options = {});

/// Max over modes of ||K phi - w^2 M phi|| / (w^2 ||M phi||).
double max_eigen_residual(const SparseSymmetricMatrix& mass, const SparseSymmetricMatrix& stiffness,
                          const ModeSet& modes);

/// Max entry of |Phi^T M Phi - I|.
double orthonormality_error(const SparseSymmetricMatrix& mass, const ModeSet& modes);

/**
 * Eigenvalues of the first-order form for n masters: lambda_s = +i omega_s
 * for s < n and lambda_{s+n} = -i omega_s. Only imaginary parts are stored.
 */
class ComplexSpectrum {
 public:
  explicit ComplexSpectrum(Vec omega);
  int master_count() const { return static_cast<int>(omega_.size()); }
  int state_count() const { return 2 * master_count(); }
  /// Imaginary part of lambda_s.
  double imag(int s) const;
  /// Master index (0..n-1) of state s.
  int master(int s) const { return s % master_count(); }
  /// +1 for the positive-frequency half, -1 for the conjugate half.
  int sign(int s) const { return s < master_count() ? 1 : -1; }
  int conjugate(int s) const { return s < master_count() ? s + master_count() : s - master_count(); }
  const Vec& omega() const { return omega_; }

 private:
  Vec omega_;
};

/// Throws NumericalError on a zero or repeated frequency.
ComplexSpectrum build_spectrum(const ModeSet& modes);
ComplexSpectrum build_spectrum(const Vec& omega);

/// z_s = (r - i s / omega) / 2 and its conjugate, ordered (z_1..z_n, conj z_1..conj z_n).
std::vector<std::complex<double>> to_normal(const Vec& r, const Vec& s, const Vec& omega);
/// Inverse of to_normal: r = z + conj z, s = i omega (z - conj z).
std::array<Vec, 2> from_normal(const std::vector<std::complex<double>>& z, const Vec& omega);

/**
 * Writes mode shapes as CSV. With node coordinates the rows are nodes and
 * `expanded` holds 3 components per node (clamped DOFs included as zeros);
 * otherwise the rows are DOFs.
 */
void write_modes_csv(std::ostream& os, const ModeSet& modes, const Mat& expanded,
                     const std::vector<std::array<double, 3>>* nodes);

}  // namespace dnf::spectral
