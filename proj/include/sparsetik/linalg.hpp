#pragma once

// Dense vectors, a CSR sparse matrix and a conjugate-gradient solver.
//
// Dense quantities are plain Eigen column vectors; the sparse forward operator
// is stored once in compressed-row form and its transpose is only ever applied
// through a scatter pass.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sparsetik/errors.hpp"

namespace sparsetik {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using DiagonalOperator = Eigen::DiagonalMatrix<Scalar, Eigen::Dynamic>;

using VectorXd = Vector<double>;

template <typename Scalar>
class CsrMatrix {
public:
  CsrMatrix() : row_offsets_(1, 0) {}

  /// All-zero matrix of the given shape.
  CsrMatrix(Index rows, Index cols)
      : rows_(rows), cols_(cols), row_offsets_(static_cast<std::size_t>(rows) + 1, 0) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("CsrMatrix: negative dimension");
  }

  CsrMatrix(Index rows, Index cols, std::vector<Index> row_offsets,
            std::vector<Index> col_indices, std::vector<Scalar> values)
      : rows_(rows), cols_(cols), row_offsets_(std::move(row_offsets)),
        col_indices_(std::move(col_indices)), values_(std::move(values)) {
    validate();
  }

  static CsrMatrix identity(Index n) {
    std::vector<Index> offsets(static_cast<std::size_t>(n) + 1);
    std::vector<Index> cols(static_cast<std::size_t>(n));
    for (Index i = 0; i <= n; ++i) offsets[i] = i;
    for (Index i = 0; i < n; ++i) cols[i] = i;
    return CsrMatrix(n, n, std::move(offsets), std::move(cols),
                     std::vector<Scalar>(static_cast<std::size_t>(n), Scalar(1)));
  }

  /// Keeps the exact nonzeros of a dense matrix.
  template <typename Derived>
  static CsrMatrix from_dense(const Eigen::MatrixBase<Derived>& dense) {
    CsrMatrix out(dense.rows(), dense.cols());
    for (Index i = 0; i < dense.rows(); ++i) {
      for (Index j = 0; j < dense.cols(); ++j) {
        if (dense(i, j) != Scalar(0)) {
          out.col_indices_.push_back(j);
          out.values_.push_back(dense(i, j));
        }
      }
      out.row_offsets_[i + 1] = static_cast<Index>(out.values_.size());
    }
    return out;
  }

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index nnz() const noexcept { return static_cast<Index>(values_.size()); }

  std::span<const Index> row_offsets() const noexcept { return row_offsets_; }
  std::span<const Index> col_indices() const noexcept { return col_indices_; }
  std::span<const Scalar> values() const noexcept { return values_; }

  std::span<const Index> row_cols(Index i) const noexcept {
    return std::span<const Index>(col_indices_).subspan(row_offsets_[i],
                                                        row_offsets_[i + 1] - row_offsets_[i]);
  }
  std::span<const Scalar> row_values(Index i) const noexcept {
    return std::span<const Scalar>(values_).subspan(row_offsets_[i],
                                                    row_offsets_[i + 1] - row_offsets_[i]);
  }

  DenseMatrix<Scalar> to_dense() const {
    DenseMatrix<Scalar> out = DenseMatrix<Scalar>::Zero(rows_, cols_);
    for (Index i = 0; i < rows_; ++i)
      for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
        out(i, col_indices_[k]) += values_[k];
    return out;
  }

  Scalar frobenius_norm() const {
    Scalar s(0);
    for (const Scalar& v : values_) s += v * v;
    return std::sqrt(s);
  }

private:
  void validate() const {
    if (rows_ < 0 || cols_ < 0) throw std::invalid_argument("CsrMatrix: negative dimension");
    if (row_offsets_.size() != static_cast<std::size_t>(rows_) + 1)
      throw DimensionError("CsrMatrix: row_offsets length", static_cast<std::size_t>(rows_) + 1,
                           row_offsets_.size());
    if (row_offsets_.front() != 0) throw std::invalid_argument("CsrMatrix: row_offsets[0] != 0");
    for (std::size_t i = 1; i < row_offsets_.size(); ++i)
      if (row_offsets_[i] < row_offsets_[i - 1])
        throw std::invalid_argument("CsrMatrix: row_offsets must be nondecreasing");
    if (col_indices_.size() != values_.size() ||
        static_cast<Index>(values_.size()) != row_offsets_.back())
      throw std::invalid_argument("CsrMatrix: inconsistent nonzero counts");
    for (Index c : col_indices_)
      if (c < 0 || c >= cols_)
        throw std::out_of_range("CsrMatrix: column index " + std::to_string(c) +
                                " out of range for " + std::to_string(cols_) + " columns");
    for (const Scalar& v : values_)
      if (!std::isfinite(v)) throw std::invalid_argument("CsrMatrix: non-finite value");
  }

  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_offsets_;
  std::vector<Index> col_indices_;
  std::vector<Scalar> values_;
};

/// Incremental row-by-row assembly.
template <typename Scalar>
class CsrRowBuilder {
public:
  CsrRowBuilder(Index rows, Index cols) : rows_(rows), cols_(cols) { offsets_.push_back(0); }

  void append_row(std::span<const Index> cols, std::span<const Scalar> vals) {
    check_dimension("CsrRowBuilder::append_row", cols.size(), vals.size());
    col_indices_.insert(col_indices_.end(), cols.begin(), cols.end());
    values_.insert(values_.end(), vals.begin(), vals.end());
    offsets_.push_back(static_cast<Index>(values_.size()));
  }

  CsrMatrix<Scalar> finish() && {
    check_dimension("CsrRowBuilder::finish rows", static_cast<std::size_t>(rows_),
                    offsets_.size() - 1);
    return CsrMatrix<Scalar>(rows_, cols_, std::move(offsets_), std::move(col_indices_),
                             std::move(values_));
  }

private:
  Index rows_;
  Index cols_;
  std::vector<Index> offsets_;
  std::vector<Index> col_indices_;
  std::vector<Scalar> values_;
};

template <typename Scalar, typename Derived>
Vector<Scalar> matvec(const CsrMatrix<Scalar>& A, const Eigen::MatrixBase<Derived>& x) {
  check_dimension("matvec", static_cast<std::size_t>(A.cols()), static_cast<std::size_t>(x.size()));
  const auto offsets = A.row_offsets();
  const auto cols = A.col_indices();
  const auto vals = A.values();
  Vector<Scalar> y(A.rows());
  for (Index i = 0; i < A.rows(); ++i) {
    Scalar acc(0);
    for (Index k = offsets[i]; k < offsets[i + 1]; ++k) acc += vals[k] * x(cols[k]);
    y(i) = acc;
  }
  return y;
}

/// A^T y by scattering each row; the transpose is never stored.
template <typename Scalar, typename Derived>
Vector<Scalar> transpose_matvec(const CsrMatrix<Scalar>& A, const Eigen::MatrixBase<Derived>& y) {
  check_dimension("transpose_matvec", static_cast<std::size_t>(A.rows()),
                  static_cast<std::size_t>(y.size()));
  const auto offsets = A.row_offsets();
  const auto cols = A.col_indices();
  const auto vals = A.values();
  Vector<Scalar> x = Vector<Scalar>::Zero(A.cols());
  for (Index i = 0; i < A.rows(); ++i) {
    const Scalar yi = y(i);
    if (yi == Scalar(0)) continue;
    for (Index k = offsets[i]; k < offsets[i + 1]; ++k) x(cols[k]) += vals[k] * yi;
  }
  return x;
}

/// Power iteration on A^T A; returns an estimate of the largest singular value.
template <typename Scalar>
Scalar estimate_spectral_norm(const CsrMatrix<Scalar>& A, int iterations = 100,
                              std::uint64_t seed = 0x5eed) {
  if (A.nnz() == 0) return Scalar(0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.5, 1.5);
  Vector<Scalar> v(A.cols());
  for (Index i = 0; i < v.size(); ++i) v(i) = Scalar(uni(rng));
  v.normalize();
  Scalar sigma2(0);
  for (int it = 0; it < iterations; ++it) {
    Vector<Scalar> w = transpose_matvec(A, matvec(A, v));
    sigma2 = w.norm();
    if (sigma2 == Scalar(0)) return Scalar(0);
    v = w / sigma2;
  }
  return std::sqrt(sigma2);
}

template <typename Scalar>
struct CgResult {
  Vector<Scalar> x;
  std::size_t iterations = 0;
  bool converged = false;
  /// Best residual norm seen so far after each iteration (entry 0 is ||b||).
  std::vector<Scalar> residual_history;
};

/// Conjugate gradients for apply(x) = b, apply symmetric positive definite.
///
/// Starts from zero. The recursively updated residual is replaced by b - apply(x)
/// every 50 iterations. Returns the iterate with the smallest residual seen; on
/// success that is the final one. Throws NonPositiveCurvature when p'Ap <= 0.
template <typename Scalar, typename Apply>
CgResult<Scalar> cg_solve(Apply&& apply, const Vector<Scalar>& b, Scalar tol,
                          std::size_t max_iter) {
  constexpr std::size_t kRecomputeEvery = 50;
  if (!(tol >= Scalar(0))) throw std::invalid_argument("cg_solve: tol must be nonnegative");

  CgResult<Scalar> res;
  const Index n = b.size();
  Vector<Scalar> x = Vector<Scalar>::Zero(n);
  Vector<Scalar> r = b;
  const Scalar bnorm = b.norm();
  Scalar rho = r.squaredNorm();
  Scalar best = std::sqrt(rho);
  res.x = x;
  res.residual_history.push_back(best);
  if (bnorm == Scalar(0) || best <= tol * bnorm) {
    res.converged = true;
    return res;
  }
  Vector<Scalar> p = r;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    const Vector<Scalar> Ap = apply(p);
    check_dimension("cg_solve: operator output", static_cast<std::size_t>(n),
                    static_cast<std::size_t>(Ap.size()));
    const Scalar pAp = p.dot(Ap);
    if (!(pAp > Scalar(0))) throw NonPositiveCurvature(it);
    const Scalar step = rho / pAp;
    x.noalias() += step * p;
    if (it % kRecomputeEvery == 0) {
      r = b - apply(x);
    } else {
      r.noalias() -= step * Ap;
    }
    const Scalar rho_next = r.squaredNorm();
    const Scalar rnorm = std::sqrt(rho_next);
    res.iterations = it;
    if (rnorm < best) {
      best = rnorm;
      res.x = x;
    }
    res.residual_history.push_back(best);
    if (rnorm <= tol * bnorm || rho_next == Scalar(0)) {
      res.converged = true;
      res.x = x;
      return res;
    }
    p = r + (rho_next / rho) * p;
    rho = rho_next;
  }
  return res;
}

}  // namespace sparsetik
