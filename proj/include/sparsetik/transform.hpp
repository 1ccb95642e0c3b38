#pragma once

// Componentwise transform tau -> sgn(tau) tau^2 and its C^2 smoothed family.
//
// The smoothed function eta_eps replaces the kink of the exact derivative at 0
// by a cubic on [-eps, eps]:
//
//   eta_eps(tau) = sgn(tau) (tau^2 + eps^2/3)        |tau| > eps
//                = tau^3 / (3 eps) + eps tau          |tau| <= eps
//
// Every evaluation below works on |tau| and restores the sign with copysign, so
// the odd/even symmetries hold bit for bit.

#include <cmath>
#include <stdexcept>

#include "sparsetik/linalg.hpp"

namespace sparsetik {

/// Smoothing parameter. epsilon == 0 selects the exact (non-smoothed) transform.
struct TransformSpec {
  double epsilon = 0.0;

  constexpr TransformSpec() = default;
  explicit TransformSpec(double eps) : epsilon(eps) {
    if (!(eps >= 0.0) || !std::isfinite(eps))
      throw std::invalid_argument("TransformSpec: epsilon must be finite and >= 0");
  }

  bool exact() const noexcept { return epsilon == 0.0; }
};

template <typename Scalar>
Scalar eta(Scalar tau) {
  return std::copysign(tau * tau, tau);
}

/// Falls back to the exact eta when spec.epsilon == 0.
template <typename Scalar>
Scalar eta_eps(const TransformSpec& spec, Scalar tau) {
  const Scalar eps(spec.epsilon);
  const Scalar a = std::abs(tau);
  if (eps == Scalar(0)) return eta(tau);
  const Scalar v = a > eps ? a * a + eps * eps / Scalar(3) : a * a * a / (Scalar(3) * eps) + eps * a;
  return std::copysign(v, tau);
}

/// First derivative; with epsilon == 0 this is 2|tau|.
template <typename Scalar>
Scalar eta_eps_d1(const TransformSpec& spec, Scalar tau) {
  const Scalar eps(spec.epsilon);
  const Scalar a = std::abs(tau);
  if (eps == Scalar(0) || a > eps) return Scalar(2) * a;
  return a * a / eps + eps;
}

template <typename Scalar>
Scalar eta_eps_d2(const TransformSpec& spec, Scalar tau) {
  if (spec.exact())
    throw std::domain_error("exact transform is not twice differentiable");
  const Scalar eps(spec.epsilon);
  const Scalar a = std::abs(tau);
  const Scalar v = a > eps ? Scalar(2) : Scalar(2) * a / eps;
  return std::copysign(v, tau);
}

template <typename Derived>
auto apply_N(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return Vector<Scalar>(x.unaryExpr([](Scalar t) { return eta(t); }));
}

template <typename Derived>
auto apply_N_eps(const TransformSpec& spec, const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return Vector<Scalar>(x.unaryExpr([&spec](Scalar t) { return eta_eps(spec, t); }));
}

/// Inverse of the exact transform: sgn(z) sqrt(|z|).
template <typename Derived>
auto apply_N_inverse(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  return Vector<Scalar>(z.unaryExpr([](Scalar t) { return std::copysign(std::sqrt(std::abs(t)), t); }));
}

/// Inverse of eta_eps. On the cubic branch a^3 + 3 eps^2 a - 3 eps |z| = 0 has a
/// single real root (Cardano).
template <typename Scalar>
Scalar eta_eps_inverse(const TransformSpec& spec, Scalar z) {
  const Scalar eps(spec.epsilon);
  const Scalar a = std::abs(z);
  if (eps == Scalar(0)) return std::copysign(std::sqrt(a), z);
  const Scalar knot = Scalar(4) * eps * eps / Scalar(3);
  Scalar root;
  if (a > knot) {
    root = std::sqrt(a - eps * eps / Scalar(3));
  } else {
    // root = u - eps^2 / u with u^3 = h + d, rearranged to avoid cancellation.
    const Scalar h = Scalar(1.5) * eps * a;
    const Scalar e3 = eps * eps * eps;
    const Scalar d = std::sqrt(h * h + e3 * e3);
    const Scalar u = std::cbrt(h + d);
    const Scalar u3_minus_e3 = h + h * h / (d + e3);
    root = u3_minus_e3 * (u + eps) / ((u * u + u * eps + eps * eps) * u);
  }
  return std::copysign(root, z);
}

template <typename Derived>
auto apply_N_eps_inverse(const TransformSpec& spec, const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  return Vector<Scalar>(z.unaryExpr([&spec](Scalar t) { return eta_eps_inverse(spec, t); }));
}

/// G(x) = diag(2|x_k|) for the exact transform, G_eps(x) = diag(eta_eps'(x_k)) otherwise.
template <typename Derived>
auto gradient_diag(const TransformSpec& spec, const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return DiagonalOperator<Scalar>(
      Vector<Scalar>(x.unaryExpr([&spec](Scalar t) { return eta_eps_d1(spec, t); })));
}

/// H_eps(x, w) = diag(eta_eps''(x_k) w_k). Requires epsilon > 0.
template <typename DerivedX, typename DerivedW>
auto hessian_diag(const TransformSpec& spec, const Eigen::MatrixBase<DerivedX>& x,
                  const Eigen::MatrixBase<DerivedW>& w) {
  using Scalar = typename DerivedX::Scalar;
  if (spec.exact()) throw std::domain_error("exact transform is not twice differentiable");
  check_dimension("hessian_diag", static_cast<std::size_t>(x.size()),
                  static_cast<std::size_t>(w.size()));
  Vector<Scalar> d(x.size());
  for (Index k = 0; k < x.size(); ++k) d(k) = eta_eps_d2(spec, x(k)) * w(k);
  return DiagonalOperator<Scalar>(d);
}

}  // namespace sparsetik
