#pragma once

// Tikhonov functionals for y = A x with an l1 penalty, in the original variable
// and in the transformed variable x = N(x_tilde):
//
//   T(x)            = ||A x - y||^2 + alpha ||x||_1
//   J(x_tilde)      = ||A N(x_tilde) - y||^2 + alpha ||x_tilde||^2
//   J_eps(x_tilde)  = ||A N_eps(x_tilde) - y||^2 + alpha ||x_tilde||^2
//
// Gradients and Hessian products carry the leading factor 2 of the squared norms.

#include <stdexcept>

#include "sparsetik/linalg.hpp"
#include "sparsetik/transform.hpp"

namespace sparsetik {

template <typename Scalar>
struct ProblemData {
  const CsrMatrix<Scalar>* A = nullptr;
  Vector<Scalar> y_delta;
  Scalar alpha = Scalar(1);

  ProblemData() = default;
  ProblemData(const CsrMatrix<Scalar>& op, Vector<Scalar> data, Scalar reg)
      : A(&op), y_delta(std::move(data)), alpha(reg) {
    if (!(reg > Scalar(0))) throw std::invalid_argument("ProblemData: alpha must be positive");
    check_dimension("ProblemData: y_delta", static_cast<std::size_t>(op.rows()),
                    static_cast<std::size_t>(y_delta.size()));
  }

  const CsrMatrix<Scalar>& op() const { return *A; }
  Index n() const { return A->cols(); }
};

namespace detail {
template <typename Scalar, typename Derived>
void check_coefficients(const ProblemData<Scalar>& p, const Eigen::MatrixBase<Derived>& x) {
  check_dimension("coefficient vector", static_cast<std::size_t>(p.n()),
                  static_cast<std::size_t>(x.size()));
}
}  // namespace detail

/// Transformed-variable forward map: A N(x) (epsilon 0) or A N_eps(x).
template <typename Scalar, typename Derived>
Vector<Scalar> forward(const ProblemData<Scalar>& p, const Eigen::MatrixBase<Derived>& x,
                       const TransformSpec& spec) {
  detail::check_coefficients(p, x);
  return matvec(p.op(), apply_N_eps(spec, x));
}

template <typename Scalar, typename Derived>
Scalar eval_T(const ProblemData<Scalar>& p, const Eigen::MatrixBase<Derived>& x) {
  detail::check_coefficients(p, x);
  return (matvec(p.op(), x) - p.y_delta).squaredNorm() + p.alpha * x.template lpNorm<1>();
}

template <typename Scalar, typename Derived>
Scalar eval_J(const ProblemData<Scalar>& p, const Eigen::MatrixBase<Derived>& x,
              const TransformSpec& spec) {
  return (forward(p, x, spec) - p.y_delta).squaredNorm() + p.alpha * x.squaredNorm();
}

/// 2 G(x) A^T (A N(x) - y) + 2 alpha x, with G and N smoothed when epsilon > 0.
template <typename Scalar, typename Derived>
Vector<Scalar> grad_J(const ProblemData<Scalar>& p, const Eigen::MatrixBase<Derived>& x,
                      const TransformSpec& spec) {
  const Vector<Scalar> r = forward(p, x, spec) - p.y_delta;
  return Scalar(2) * (gradient_diag(spec, x) * transpose_matvec(p.op(), r)) + Scalar(2) * p.alpha * x;
}

/// Hessian of J_eps applied to w:
///   2 H_eps(x, A^T r) w + 2 G_eps A^T A G_eps w + 2 alpha w,   r = A N_eps(x) - y.
/// Only the product is formed; A^T A is never assembled.
template <typename Scalar>
class HessianOperator {
public:
  HessianOperator(const ProblemData<Scalar>& p, const Vector<Scalar>& x, const TransformSpec& spec)
      : p_(&p) {
    if (spec.exact()) throw std::domain_error("exact transform is not twice differentiable");
    detail::check_coefficients(p, x);
    const Vector<Scalar> r = forward(p, x, spec) - p.y_delta;
    g_ = gradient_diag(spec, x).diagonal();
    h_ = hessian_diag(spec, x, transpose_matvec(p.op(), r)).diagonal();
  }

  template <typename Derived>
  Vector<Scalar> operator()(const Eigen::MatrixBase<Derived>& w) const {
    detail::check_coefficients(*p_, w);
    const Vector<Scalar> Aw = matvec(p_->op(), g_.cwiseProduct(w));
    return Scalar(2) * (h_.cwiseProduct(w) + g_.cwiseProduct(transpose_matvec(p_->op(), Aw)) +
                        p_->alpha * w);
  }

  /// Diagonal of H_eps(x, A^T r).
  const Vector<Scalar>& curvature_term() const noexcept { return h_; }
  const Vector<Scalar>& gradient_term() const noexcept { return g_; }

private:
  const ProblemData<Scalar>* p_;
  Vector<Scalar> g_;
  Vector<Scalar> h_;
};

template <typename Scalar, typename DerivedX, typename DerivedW>
Vector<Scalar> hess_J_eps_matvec(const ProblemData<Scalar>& p, const Eigen::MatrixBase<DerivedX>& x,
                                 const TransformSpec& spec, const Eigen::MatrixBase<DerivedW>& w) {
  return HessianOperator<Scalar>(p, Vector<Scalar>(x), spec)(w);
}

/// Maps a transformed-variable iterate to the reconstruction: N(x) or N_eps(x).
template <typename Derived>
auto back_transform(const Eigen::MatrixBase<Derived>& x_tilde, const TransformSpec& spec) {
  return apply_N_eps(spec, x_tilde);
}

}  // namespace sparsetik
