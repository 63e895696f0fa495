#include "dnf/core/linalg.hpp"

#include "dnf/core/error.hpp"

#include <Eigen/CholmodSupport>
#include <umfpack.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dnf {

SparseSymmetricMatrix::SparseSymmetricMatrix(Index n) : upper_(n, n) {}

SparseSymmetricMatrix SparseSymmetricMatrix::from_triplets(Index n,
                                                           const std::vector<Triplet>& entries) {
  std::vector<Triplet> up;
  up.reserve(entries.size());
  for (const auto& t : entries) {
    if (t.row() < 0 || t.col() < 0 || t.row() >= n || t.col() >= n) {
      throw DimensionError("symmetric matrix entry (" + std::to_string(t.row()) + "," +
                           std::to_string(t.col()) + ") outside dimension " + std::to_string(n));
    }
    if (t.row() <= t.col()) {
      up.push_back(t);
    } else {
      up.emplace_back(t.col(), t.row(), t.value());
    }
  }
  SpMat m(n, n);
  m.setFromTriplets(up.begin(), up.end());
  m.makeCompressed();
  return SparseSymmetricMatrix(std::move(m));
}

SparseSymmetricMatrix SparseSymmetricMatrix::from_dense(const Mat& dense) {
  if (dense.rows() != dense.cols()) throw DimensionError("from_dense: matrix not square");
  std::vector<Triplet> t;
  for (Index j = 0; j < dense.cols(); ++j) {
    for (Index i = 0; i <= j; ++i) {
      if (dense(i, j) != 0.0) t.emplace_back(static_cast<int>(i), static_cast<int>(j), dense(i, j));
    }
  }
  return from_triplets(dense.rows(), t);
}

SparseSymmetricMatrix SparseSymmetricMatrix::identity(Index n) {
  return diagonal(Vec::Ones(n));
}

SparseSymmetricMatrix SparseSymmetricMatrix::diagonal(const Vec& d) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(d.size()));
  for (Index i = 0; i < d.size(); ++i) t.emplace_back(static_cast<int>(i), static_cast<int>(i), d(i));
  return from_triplets(d.size(), t);
}

SpMat SparseSymmetricMatrix::full() const {
  SpMat f = upper_.selfadjointView<Eigen::Upper>();
  f.makeCompressed();
  return f;
}

Mat SparseSymmetricMatrix::dense() const { return Mat(full()); }

double SparseSymmetricMatrix::coeff(Index i, Index j) const {
  return i <= j ? upper_.coeff(i, j) : upper_.coeff(j, i);
}

Vec SparseSymmetricMatrix::multiply(const Vec& x) const {
  if (x.size() != dim()) throw DimensionError("symmetric multiply: length mismatch");
  Vec y = upper_.selfadjointView<Eigen::Upper>() * x;
  return y;
}

Mat SparseSymmetricMatrix::multiply_block(const Mat& x) const {
  if (x.rows() != dim()) throw DimensionError("symmetric multiply: row mismatch");
  Mat y = upper_.selfadjointView<Eigen::Upper>() * x;
  return y;
}

SparseSymmetricMatrix SparseSymmetricMatrix::combine(double a, const SparseSymmetricMatrix& other,
                                                     double b) const {
  if (other.dim() != dim()) throw DimensionError("symmetric combine: dimension mismatch");
  SpMat m = a * upper_ + b * other.upper_;
  m.makeCompressed();
  return SparseSymmetricMatrix(std::move(m));
}

SparseSymmetricMatrix SparseSymmetricMatrix::reduced(const std::vector<Index>& keep) const {
  std::vector<int> map(static_cast<std::size_t>(dim()), -1);
  for (std::size_t k = 0; k < keep.size(); ++k) map[static_cast<std::size_t>(keep[k])] = static_cast<int>(k);
  std::vector<Triplet> t;
  for (int j = 0; j < upper_.outerSize(); ++j) {
    for (SpMat::InnerIterator it(upper_, j); it; ++it) {
      const int r = map[static_cast<std::size_t>(it.row())];
      const int c = map[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
    }
  }
  return from_triplets(static_cast<Index>(keep.size()), t);
}

double SparseSymmetricMatrix::max_abs() const {
  double m = 0.0;
  for (int j = 0; j < upper_.outerSize(); ++j)
    for (SpMat::InnerIterator it(upper_, j); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

bool SparseSymmetricMatrix::all_finite() const {
  for (int j = 0; j < upper_.outerSize(); ++j)
    for (SpMat::InnerIterator it(upper_, j); it; ++it)
      if (!std::isfinite(it.value())) return false;
  return true;
}

namespace {

/// Thin RAII wrapper over UMFPACK's real/int interface.
class UmfpackLU {
 public:
  explicit UmfpackLU(SpMat a) : a_(std::move(a)) {
    a_.makeCompressed();
    umfpack_di_defaults(control_);
    control_[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_SYMMETRIC;
    control_[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;
    const int n = static_cast<int>(a_.rows());
    int status = umfpack_di_symbolic(n, n, a_.outerIndexPtr(), a_.innerIndexPtr(), a_.valuePtr(),
                                     &symbolic_, control_, info_);
    if (status != UMFPACK_OK) throw NumericalError("sparse LU symbolic analysis failed, status " + std::to_string(status));
    status = umfpack_di_numeric(a_.outerIndexPtr(), a_.innerIndexPtr(), a_.valuePtr(), symbolic_,
                                &numeric_, control_, info_);
    if (status == UMFPACK_WARNING_singular_matrix) {
      singular_ = true;
    } else if (status != UMFPACK_OK) {
      throw NumericalError("sparse LU factorization failed, status " + std::to_string(status));
    }
    rcond_ = info_[UMFPACK_RCOND];
  }
  ~UmfpackLU() {
    if (numeric_) umfpack_di_free_numeric(&numeric_);
    if (symbolic_) umfpack_di_free_symbolic(&symbolic_);
  }
  UmfpackLU(const UmfpackLU&) = delete;
  UmfpackLU& operator=(const UmfpackLU&) = delete;

  bool singular() const { return singular_; }
  double rcond() const { return rcond_; }

  Vec solve(const Vec& b) const {
    Vec x(b.size());
    double info[UMFPACK_INFO];
    const int status = umfpack_di_solve(UMFPACK_A, a_.outerIndexPtr(), a_.innerIndexPtr(),
                                        a_.valuePtr(), x.data(), b.data(), numeric_, control_, info);
    if (status != UMFPACK_OK) throw NumericalError("sparse LU solve failed, status " + std::to_string(status));
    return x;
  }

 private:
  SpMat a_;
  void* symbolic_ = nullptr;
  void* numeric_ = nullptr;
  double control_[UMFPACK_CONTROL];
  double info_[UMFPACK_INFO];
  bool singular_ = false;
  double rcond_ = 0.0;
};

}  // namespace

struct SymmetricSolver::Impl {
  Eigen::LLT<Mat> dense_llt;
  Eigen::PartialPivLU<Mat> dense_lu;
  std::unique_ptr<Eigen::CholmodSupernodalLLT<SpMat, Eigen::Upper>> cholmod;
  std::unique_ptr<UmfpackLU> umf;
  enum class Path { DenseLLT, DenseLU, Cholmod, Umfpack } path = Path::DenseLLT;
};

SymmetricSolver::SymmetricSolver(const SparseSymmetricMatrix& a, Definiteness kind)
    : impl_(std::make_unique<Impl>()), n_(a.dim()) {
  if (!a.all_finite()) throw NumericalError("matrix to factorize has non-finite entries");
  if (n_ <= kDenseThreshold) {
    const Mat d = a.dense();
    if (kind == Definiteness::Positive) {
      impl_->dense_llt.compute(d);
      if (impl_->dense_llt.info() != Eigen::Success)
        throw NumericalError("dense Cholesky failed: matrix not positive definite");
      impl_->path = Impl::Path::DenseLLT;
      rcond_ = impl_->dense_llt.rcond();
    } else {
      impl_->dense_lu.compute(d);
      impl_->path = Impl::Path::DenseLU;
      rcond_ = impl_->dense_lu.rcond();
    }
    return;
  }
  if (kind == Definiteness::Positive) {
    impl_->cholmod = std::make_unique<Eigen::CholmodSupernodalLLT<SpMat, Eigen::Upper>>();
    impl_->cholmod->compute(a.upper());
    if (impl_->cholmod->info() != Eigen::Success)
      throw NumericalError("sparse Cholesky failed: matrix not positive definite");
    impl_->path = Impl::Path::Cholmod;
  } else {
    impl_->umf = std::make_unique<UmfpackLU>(a.full());
    impl_->path = Impl::Path::Umfpack;
    rcond_ = impl_->umf->singular() ? 0.0 : impl_->umf->rcond();
  }
}

SymmetricSolver::~SymmetricSolver() = default;
SymmetricSolver::SymmetricSolver(SymmetricSolver&&) noexcept = default;
SymmetricSolver& SymmetricSolver::operator=(SymmetricSolver&&) noexcept = default;

Vec SymmetricSolver::solve(const Vec& b) const {
  if (b.size() != n_) throw DimensionError("solve: right-hand side length mismatch");
  switch (impl_->path) {
    case Impl::Path::DenseLLT:
      return impl_->dense_llt.solve(b);
    case Impl::Path::DenseLU:
      return impl_->dense_lu.solve(b);
    case Impl::Path::Cholmod: {
      Vec x = impl_->cholmod->solve(b);
      return x;
    }
    case Impl::Path::Umfpack:
      return impl_->umf->solve(b);
  }
  return {};
}

Mat SymmetricSolver::solve(const Mat& b) const {
  Mat x(b.rows(), b.cols());
  for (Index j = 0; j < b.cols(); ++j) x.col(j) = solve(Vec(b.col(j)));
  return x;
}

BorderedSolution solve_bordered(const SparseSymmetricMatrix& a, const Mat& b, const Vec& f,
                                const Vec& g) {
  const Index n = a.dim();
  const Index m = b.cols();
  if (b.rows() != n || f.size() != n || g.size() != m)
    throw DimensionError("bordered solve: block sizes disagree");
  Vec rhs(n + m);
  rhs << f, g;
  Vec sol;
  if (n + m <= kDenseThreshold) {
    Mat d = Mat::Zero(n + m, n + m);
    d.topLeftCorner(n, n) = a.dense();
    d.topRightCorner(n, m) = b;
    d.bottomLeftCorner(m, n) = b.transpose();
    Eigen::FullPivLU<Mat> lu(d);
    if (!lu.isInvertible()) throw NumericalError("bordered system is singular");
    sol = lu.solve(rhs);
  } else {
    std::vector<Triplet> t;
    const SpMat full = a.full();
    t.reserve(static_cast<std::size_t>(full.nonZeros() + 2 * n * m));
    for (int j = 0; j < full.outerSize(); ++j)
      for (SpMat::InnerIterator it(full, j); it; ++it) t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (Index c = 0; c < m; ++c) {
      for (Index i = 0; i < n; ++i) {
        if (b(i, c) == 0.0) continue;
        t.emplace_back(static_cast<int>(i), static_cast<int>(n + c), b(i, c));
        t.emplace_back(static_cast<int>(n + c), static_cast<int>(i), b(i, c));
      }
    }
    SpMat d(n + m, n + m);
    d.setFromTriplets(t.begin(), t.end());
    UmfpackLU lu(std::move(d));
    if (lu.singular()) throw NumericalError("bordered system is singular");
    sol = lu.solve(rhs);
  }
  return {sol.head(n), sol.tail(m)};
}

double relative_difference(const Vec& a, const Vec& b) {
  const double den = std::max(b.norm(), std::numeric_limits<double>::min());
  return (a - b).norm() / den;
}

}  // namespace dnf
