#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <vector>

namespace dnf {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

/// Systems at or below this size are factorized with dense LAPACK-style kernels.
inline constexpr Index kDenseThreshold = 500;

/**
 * Symmetric sparse matrix holding only its upper triangle.
 *
 * Symmetry is exact because the lower triangle is never stored. Entries
 * supplied for the lower triangle are reflected into the upper one.
 */
class SparseSymmetricMatrix {
 public:
  SparseSymmetricMatrix() = default;
  explicit SparseSymmetricMatrix(Index n);

  /// Builds from triplets; (i,j) and (j,i) contributions land in the same slot.
  static SparseSymmetricMatrix from_triplets(Index n, const std::vector<Triplet>& entries);
  static SparseSymmetricMatrix from_dense(const Mat& dense);
  static SparseSymmetricMatrix identity(Index n);
  static SparseSymmetricMatrix diagonal(const Vec& d);

  Index dim() const { return upper_.rows(); }
  const SpMat& upper() const { return upper_; }
  SpMat full() const;
  Mat dense() const;
  double coeff(Index i, Index j) const;

  Vec multiply(const Vec& x) const;
  Mat multiply_block(const Mat& x) const;

  /// Returns a*this + b*other; both operands must share the dimension.
  SparseSymmetricMatrix combine(double a, const SparseSymmetricMatrix& other, double b) const;

  /// Keeps the rows and columns listed in `keep`, renumbered in that order.
  SparseSymmetricMatrix reduced(const std::vector<Index>& keep) const;

  double max_abs() const;
  bool all_finite() const;

 private:
  explicit SparseSymmetricMatrix(SpMat upper) : upper_(std::move(upper)) {}
  SpMat upper_;
};

/// Definiteness hint used to pick a factorization.
enum class Definiteness { Positive, Indefinite };

/**
 * Factorization of a symmetric matrix with repeated solves.
 *
 * Positive definite sparse matrices use supernodal Cholesky; indefinite sparse
 * matrices use a pivoting LU. Small systems go through dense kernels.
 */
class SymmetricSolver {
 public:
  SymmetricSolver(const SparseSymmetricMatrix& a, Definiteness kind);
  ~SymmetricSolver();
  SymmetricSolver(SymmetricSolver&&) noexcept;
  SymmetricSolver& operator=(SymmetricSolver&&) noexcept;

  Vec solve(const Vec& b) const;
  Mat solve(const Mat& b) const;
  Index dim() const { return n_; }
  /// Reciprocal condition estimate (1 for exact Cholesky paths without estimate).
  double rcond() const { return rcond_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Index n_ = 0;
  double rcond_ = 1.0;
};

/**
 * Solves the bordered saddle system
 *   [ A   B ] [x]   [f]
 *   [ B^T 0 ] [y] = [g]
 * with A symmetric (possibly singular) and B a thin dense block.
 */
struct BorderedSolution {
  Vec x;
  Vec y;
};
BorderedSolution solve_bordered(const SparseSymmetricMatrix& a, const Mat& b, const Vec& f,
                                const Vec& g);

/// Relative difference ||a-b|| / max(||b||, tiny).
double relative_difference(const Vec& a, const Vec& b);

}  // namespace dnf
