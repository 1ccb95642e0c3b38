#pragma once

// Iterative minimizers for the l1 Tikhonov problem.
//
// Original variable (functional T):     ISTA, FISTA (Nesterov t-sequence or beta momentum)
// Transformed variable (J or J_eps):    Armijo gradient descent, Levenberg-Marquardt, Newton
//
// Every method stops the first time the data residual drops to tau * delta.
// Original-variable methods measure ||A x - y||, transformed-variable methods
// measure ||A N(x) - y|| (or with N_eps when epsilon > 0).

#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sparsetik/functionals.hpp"
#include "sparsetik/linalg.hpp"
#include "sparsetik/transform.hpp"

namespace sparsetik {

enum class StopReason { discrepancy, max_iter, stagnation, gradient_tol };

inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::discrepancy: return "discrepancy";
    case StopReason::max_iter: return "max_iter";
    case StopReason::stagnation: return "stagnation";
    case StopReason::gradient_tol: return "gradient_tol";
  }
  return "unknown";
}

enum class FistaMomentum { nesterov, beta };

struct ArmijoRule {
  double initial_step = 1.0;
  double shrink = 0.5;  // sigma in (0, 1)
  double slope = 1e-4;  // c in (0, 1)
  int max_backtracks = 60;
};

template <typename Scalar>
struct SolverConfig {
  double epsilon = 0.0;
  double tau = 1.1;
  std::optional<double> omega;  // empty: 0.9 / (2 ||A||^2)
  FistaMomentum momentum = FistaMomentum::nesterov;
  double beta = 3.0;
  ArmijoRule armijo;
  std::optional<double> lm_alpha0;  // empty: delta (or 1 when delta == 0)
  double lm_decay = 0.6;
  double lm_floor = 1e-14;
  std::size_t max_iter = 1000;
  double inner_tol = 1e-10;
  std::size_t inner_max_iter = 0;  // 0: 2 n
  double grad_tol = 1e-12;
  bool warm_start = false;
  std::size_t warm_start_iters = 5;
  std::optional<Vector<Scalar>> x0;
  bool record_iterates = false;

  void validate() const {
    if (!(epsilon >= 0)) throw std::invalid_argument("epsilon must be nonnegative");
    if (!(tau > 1)) throw std::invalid_argument("tau must exceed 1");
    if (omega && !(*omega > 0)) throw std::invalid_argument("omega must be positive");
    if (!(beta >= 3)) throw std::invalid_argument("beta must be at least 3");
    if (!(armijo.shrink > 0 && armijo.shrink < 1))
      throw std::invalid_argument("armijo shrink must lie in (0, 1)");
    if (!(armijo.slope > 0 && armijo.slope < 1))
      throw std::invalid_argument("armijo slope must lie in (0, 1)");
    if (!(armijo.initial_step > 0)) throw std::invalid_argument("armijo initial step must be positive");
    if (lm_alpha0 && !(*lm_alpha0 > 0)) throw std::invalid_argument("lm_alpha0 must be positive");
    if (!(lm_decay > 0 && lm_decay < 1)) throw std::invalid_argument("lm_decay must lie in (0, 1)");
    if (!(inner_tol > 0)) throw std::invalid_argument("inner_tol must be positive");
  }
};

struct TraceRow {
  std::size_t iter = 0;
  double residual = 0;
  double functional = 0;
  double rel_error = std::numeric_limits<double>::quiet_NaN();
  double wall_s = 0;
};

struct IterationTrace {
  std::vector<TraceRow> rows;
  StopReason stop_reason = StopReason::max_iter;
  std::size_t n_star = 0;

  double final_residual() const { return rows.empty() ? 0.0 : rows.back().residual; }
  double final_functional() const { return rows.empty() ? 0.0 : rows.back().functional; }
};

template <typename Scalar>
struct SolveResult {
  Vector<Scalar> x;               // iterate in the method's own variable
  Vector<Scalar> reconstruction;  // original-variable image
  IterationTrace trace;
  std::vector<Vector<Scalar>> iterates;  // filled when record_iterates is set
};

inline bool check_discrepancy(double residual_norm, double tau, double delta) {
  return residual_norm <= tau * delta;
}

template <typename Derived>
auto soft_threshold(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar theta) {
  using Scalar = typename Derived::Scalar;
  if (!(theta >= Scalar(0))) throw std::invalid_argument("soft_threshold: theta must be >= 0");
  return Vector<Scalar>(x.unaryExpr([theta](Scalar v) {
    const Scalar m = std::abs(v) - theta;
    return m > Scalar(0) ? std::copysign(m, v) : Scalar(0);
  }));
}

/// t_k = (1 + sqrt(1 + 4 t_{k-1}^2)) / 2
inline double fista_t_next(double t) { return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t)); }

/// (k - 1) / (k + beta - 1)
inline double fista_beta_coefficient(std::size_t k, double beta) {
  return (static_cast<double>(k) - 1.0) / (static_cast<double>(k) + beta - 1.0);
}

/// Step size for the proximal-gradient methods. Auto: 0.9 / (2 ||A||_2^2), which
/// keeps omega below the inverse Lipschitz constant of the gradient of ||Ax - y||^2.
template <typename Scalar>
double resolve_omega(const CsrMatrix<Scalar>& A, const SolverConfig<Scalar>& cfg) {
  if (cfg.omega) return *cfg.omega;
  const double norm = static_cast<double>(estimate_spectral_norm(A, 100));
  if (norm == 0.0) return 1.0;
  return 0.9 / (2.0 * norm * norm);
}

/// Default smoothing: 1e-4 delta, or 1e-8 ||y|| for noise-free data.
inline double default_epsilon(double delta, double y_norm) {
  return delta > 0 ? 1e-4 * delta : 1e-8 * y_norm;
}

namespace detail {

class StagnationMonitor {
public:
  static constexpr double kRelTol = 1e-14;
  static constexpr int kWindow = 10;

  bool update(double previous, double current) {
    const double scale = std::max(std::abs(previous), std::numeric_limits<double>::min());
    if (std::abs(previous - current) / scale < kRelTol) {
      ++count_;
    } else {
      count_ = 0;
    }
    return count_ >= kWindow;
  }

private:
  int count_ = 0;
};

template <typename Scalar>
class TraceRecorder {
public:
  TraceRecorder(const Vector<Scalar>* truth, bool keep_iterates)
      : keep_(keep_iterates), truth_(truth), truth_norm_(truth ? static_cast<double>(truth->norm()) : 0.0),
        start_(std::chrono::steady_clock::now()) {}

  void record(std::size_t iter, double residual, double functional, const Vector<Scalar>& recon,
              const Vector<Scalar>& x) {
    if (keep_) history_.push_back(x);
    TraceRow row;
    row.iter = iter;
    row.residual = residual;
    row.functional = functional;
    if (truth_ && truth_norm_ > 0)
      row.rel_error = static_cast<double>((recon - *truth_).norm()) / truth_norm_;
    row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    if (!trace_.rows.empty() && row.wall_s < trace_.rows.back().wall_s)
      row.wall_s = trace_.rows.back().wall_s;
    trace_.rows.push_back(row);
    trace_.n_star = iter;
  }

  SolveResult<Scalar> finish(StopReason reason, Vector<Scalar> x, Vector<Scalar> recon) {
    trace_.stop_reason = reason;
    return {std::move(x), std::move(recon), std::move(trace_), std::move(history_)};
  }

private:
  bool keep_;
  std::vector<Vector<Scalar>> history_;
  const Vector<Scalar>* truth_;
  double truth_norm_;
  std::chrono::steady_clock::time_point start_;
  IterationTrace trace_;
};

template <typename Scalar>
Vector<Scalar> initial_iterate(const ProblemData<Scalar>& p, const SolverConfig<Scalar>& cfg) {
  if (cfg.x0) {
    check_dimension("x0", static_cast<std::size_t>(p.n()), static_cast<std::size_t>(cfg.x0->size()));
    return *cfg.x0;
  }
  return Vector<Scalar>::Zero(p.n());
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& x) {
  if (!x.allFinite()) throw DivergenceError();
}

template <typename Scalar>
std::size_t inner_cap(const SolverConfig<Scalar>& cfg, Index n) {
  return cfg.inner_max_iter ? cfg.inner_max_iter : static_cast<std::size_t>(2 * n);
}

template <typename Scalar>
double lm_shift(const SolverConfig<Scalar>& cfg, double delta, std::size_t n) {
  const double a0 = cfg.lm_alpha0 ? *cfg.lm_alpha0 : (delta > 0 ? delta : 1.0);
  return std::max(a0 * std::pow(cfg.lm_decay, static_cast<double>(n)), cfg.lm_floor);
}

}  // namespace detail

/// Proximal-gradient iterations on T. One Aᵀ and one A product per step: A x is
/// carried along, and for FISTA A z is formed from the two most recent A x.
template <typename Scalar>
SolveResult<Scalar> run_fista(const ProblemData<Scalar>& p, const SolverConfig<Scalar>& cfg,
                              double delta, FistaMomentum momentum,
                              const Vector<Scalar>* ground_truth = nullptr,
                              bool accelerate = true) {
  cfg.validate();
  const auto& A = p.op();
  const Scalar omega = static_cast<Scalar>(resolve_omega(A, cfg));
  const Scalar theta = p.alpha * omega;

  detail::TraceRecorder<Scalar> rec(ground_truth, cfg.record_iterates);
  Vector<Scalar> x = detail::initial_iterate(p, cfg);
  Vector<Scalar> Ax = matvec(A, x);
  Vector<Scalar> x_prev = x;
  Vector<Scalar> Ax_prev = Ax;
  Vector<Scalar> z = x;
  Vector<Scalar> Az = Ax;
  double t = 1.0;

  auto objective = [&](const Vector<Scalar>& xv, const Vector<Scalar>& Axv) {
    return static_cast<double>((Axv - p.y_delta).squaredNorm() + p.alpha * xv.template lpNorm<1>());
  };

  double residual = static_cast<double>((Ax - p.y_delta).norm());
  double value = objective(x, Ax);
  rec.record(0, residual, value, x, x);
  if (check_discrepancy(residual, cfg.tau, delta)) return rec.finish(StopReason::discrepancy, x, x);

  detail::StagnationMonitor stagnation;
  for (std::size_t k = 1; k <= cfg.max_iter; ++k) {
    x_prev.swap(x);
    Ax_prev.swap(Ax);
    x = soft_threshold(Vector<Scalar>(z - Scalar(2) * omega * transpose_matvec(A, Az - p.y_delta)), theta);
    detail::require_finite(x);
    Ax = matvec(A, x);

    if (accelerate) {
      Scalar coeff;
      if (momentum == FistaMomentum::nesterov) {
        const double t_next = fista_t_next(t);
        coeff = static_cast<Scalar>((t - 1.0) / t_next);
        t = t_next;
      } else {
        coeff = static_cast<Scalar>(fista_beta_coefficient(k, cfg.beta));
      }
      z = x + coeff * (x - x_prev);
      Az = Ax + coeff * (Ax - Ax_prev);
    } else {
      z = x;
      Az = Ax;
    }

    const double previous = value;
    residual = static_cast<double>((Ax - p.y_delta).norm());
    value = objective(x, Ax);
    rec.record(k, residual, value, x, x);
    if (check_discrepancy(residual, cfg.tau, delta)) return rec.finish(StopReason::discrepancy, x, x);
    if (stagnation.update(previous, value)) return rec.finish(StopReason::stagnation, x, x);
  }
  return rec.finish(StopReason::max_iter, x, x);
}

template <typename Scalar>
SolveResult<Scalar> run_fista(const ProblemData<Scalar>& p, const SolverConfig<Scalar>& cfg,
                              double delta, const Vector<Scalar>* ground_truth = nullptr) {
  return run_fista(p, cfg, delta, cfg.momentum, ground_truth);
}

/// x_{k+1} = S_{alpha omega}(x_k - 2 omega Aᵀ(A x_k - y)).
template <typename Scalar>
SolveResult<Scalar> run_ista(const ProblemData<Scalar>& p, const SolverConfig<Scalar>& cfg,
                             double delta, const Vector<Scalar>* ground_truth = nullptr) {
  return run_fista(p, cfg, delta, FistaMomentum::nesterov, ground_truth, false);
}

/// Residual of the shrinkage fixed-point equation; zero exactly at minimizers of T.
template <typename Scalar>
Scalar ista_fixed_point_residual(const ProblemData<Scalar>& p, const Vector<Scalar>& x, double omega) {
  const Scalar w = static_cast<Scalar>(omega);
  const Vector<Scalar> step =
      x - Scalar(2) * w * transpose_matvec(p.op(), Vector<Scalar>(matvec(p.op(), x) - p.y_delta));
  return (x - soft_threshold(step, p.alpha * w)).norm();
}

namespace detail {

/// Original-variable warm start, mapped into the transformed variable so that
/// back_transform reproduces the FISTA iterate exactly.
template <typename Scalar>
Vector<Scalar> warm_start_iterate(const ProblemData<Scalar>& p, const SolverConfig<Scalar>& cfg,
                                  const TransformSpec& spec) {
  SolverConfig<Scalar> warm = cfg;
  warm.max_iter = cfg.warm_start_iters;
  warm.momentum = FistaMomentum::nesterov;
  const Vector<Scalar> x = run_fista(p, warm, 0.0, FistaMomentum::nesterov).x;
  return apply_N_eps_inverse(spec, x);
}

template <typename Scalar>
Vector<Scalar> transformed_start(const ProblemData<Scalar>& p, const SolverConfig<Scalar>& cfg,
                                 const TransformSpec& spec) {
  if (cfg.warm_start) return warm_start_iterate(p, cfg, spec);
  return initial_iterate(p, cfg);
}

}  // namespace detail

/// Gradient descent on J (epsilon 0) or J_eps with Armijo backtracking.
///
/// The trial steps are initial_step * shrink^m. The search starts one grid point
/// above the step accepted in the previous iteration instead of at m = 0.
template <typename Scalar>
SolveResult<Scalar> run_gradient_descent(const ProblemData<Scalar>& p, const SolverConfig<Scalar>& cfg,
                                         double delta, const Vector<Scalar>* ground_truth = nullptr) {
  cfg.validate();
  const TransformSpec spec(cfg.epsilon);
  detail::TraceRecorder<Scalar> rec(ground_truth, cfg.record_iterates);

  Vector<Scalar> x = detail::transformed_start(p, cfg, spec);
  auto residual_of = [&](const Vector<Scalar>& v) {
    return static_cast<double>((forward(p, v, spec) - p.y_delta).norm());
  };
  double value = static_cast<double>(eval_J(p, x, spec));
  double residual = residual_of(x);
  rec.record(0, residual, value, back_transform(x, spec), x);
  auto done = [&](StopReason why) { return rec.finish(why, x, back_transform(x, spec)); };
  if (check_discrepancy(residual, cfg.tau, delta)) return done(StopReason::discrepancy);

  detail::StagnationMonitor stagnation;
  int m_start = 0;
  for (std::size_t k = 1; k <= cfg.max_iter; ++k) {
    const Vector<Scalar> g = grad_J(p, x, spec);
    const double g2 = static_cast<double>(g.squaredNorm());
    if (g2 == 0.0) return done(StopReason::stagnation);

    bool accepted = false;
    Vector<Scalar> x_try;
    double trial_value = value;
    for (int m = m_start; m <= m_start + cfg.armijo.max_backtracks; ++m) {
      const double t = cfg.armijo.initial_step * std::pow(cfg.armijo.shrink, m);
      x_try = x - static_cast<Scalar>(t) * g;
      trial_value = static_cast<double>(eval_J(p, x_try, spec));
      if (std::isfinite(trial_value) && trial_value < value &&
          trial_value <= value - cfg.armijo.slope * t * g2) {
        accepted = true;
        m_start = std::max(0, m - 1);
        break;
      }
    }
    if (!accepted) return done(StopReason::stagnation);

    x = std::move(x_try);
    const double previous = value;
    value = trial_value;
    residual = residual_of(x);
    rec.record(k, residual, value, back_transform(x, spec), x);
    if (check_discrepancy(residual, cfg.tau, delta)) return done(StopReason::discrepancy);
    if (stagnation.update(previous, value)) return done(StopReason::stagnation);
  }
  return done(StopReason::max_iter);
}

/// Levenberg-Marquardt for F(x) = A N(x) (or A N_eps(x)):
///   x <- x + (G Aᵀ A G + alpha_n I)^{-1} G Aᵀ (y - F(x)),   alpha_n = alpha0 q^n.
/// The inner system is solved with CG; on failure the step is retried once with
/// 2 alpha_n before giving up with reason "stagnation".
template <typename Scalar>
SolveResult<Scalar> run_levenberg_marquardt(const ProblemData<Scalar>& p, const SolverConfig<Scalar>& cfg,
                                            double delta, const Vector<Scalar>* ground_truth = nullptr) {
  cfg.validate();
  const TransformSpec spec(cfg.epsilon);
  const auto& A = p.op();
  detail::TraceRecorder<Scalar> rec(ground_truth, cfg.record_iterates);

  Vector<Scalar> x = detail::transformed_start(p, cfg, spec);
  Vector<Scalar> r = p.y_delta - forward(p, x, spec);
  double residual = static_cast<double>(r.norm());
  rec.record(0, residual, static_cast<double>(eval_J(p, x, spec)), back_transform(x, spec), x);
  auto done = [&](StopReason why) { return rec.finish(why, x, back_transform(x, spec)); };
  if (check_discrepancy(residual, cfg.tau, delta)) return done(StopReason::discrepancy);

  const std::size_t cap = detail::inner_cap(cfg, p.n());
  detail::StagnationMonitor stagnation;
  for (std::size_t n = 0; n < cfg.max_iter; ++n) {
    const Vector<Scalar> g = gradient_diag(spec, x).diagonal();
    const Vector<Scalar> rhs = g.cwiseProduct(transpose_matvec(A, r));

    std::optional<Vector<Scalar>> step;
    double shift = detail::lm_shift(cfg, delta, n);
    for (int attempt = 0; attempt < 2 && !step; ++attempt, shift *= 2.0) {
      const Scalar mu = static_cast<Scalar>(shift);
      auto apply = [&](const Vector<Scalar>& w) -> Vector<Scalar> {
        return g.cwiseProduct(transpose_matvec(A, matvec(A, g.cwiseProduct(w)))) + mu * w;
      };
      try {
        auto cg = cg_solve<Scalar>(apply, rhs, static_cast<Scalar>(cfg.inner_tol), cap);
        if (cg.converged) step = std::move(cg.x);
      } catch (const NonPositiveCurvature&) {
      }
    }
    if (!step) return done(StopReason::stagnation);

    x += *step;
    detail::require_finite(x);
    r = p.y_delta - forward(p, x, spec);
    const double previous = residual * residual;
    residual = static_cast<double>(r.norm());
    rec.record(n + 1, residual, static_cast<double>(eval_J(p, x, spec)), back_transform(x, spec), x);
    if (check_discrepancy(residual, cfg.tau, delta)) return done(StopReason::discrepancy);
    if (stagnation.update(previous, residual * residual)) return done(StopReason::stagnation);
  }
  return done(StopReason::max_iter);
}

/// Damped Newton on J_eps (epsilon > 0).
///
/// The Newton system H s = -grad is solved by CG on the Hessian product. If CG
/// meets non-positive curvature, fails to converge, or returns a non-descent
/// direction, the step of this iteration is taken from the shifted Gauss-Newton
/// system (2 G Aᵀ A G + 2 alpha I + alpha_n I) s = -grad instead, which is
/// always positive definite. Step lengths come from Armijo backtracking with the
/// unit step tried first.
template <typename Scalar>
SolveResult<Scalar> run_newton(const ProblemData<Scalar>& p, const SolverConfig<Scalar>& cfg,
                               double delta, const Vector<Scalar>* ground_truth = nullptr) {
  cfg.validate();
  if (!(cfg.epsilon > 0))
    throw std::invalid_argument("run_newton: epsilon must be positive (exact transform is not twice differentiable)");
  const TransformSpec spec(cfg.epsilon);
  const auto& A = p.op();
  detail::TraceRecorder<Scalar> rec(ground_truth, cfg.record_iterates);

  Vector<Scalar> x = detail::transformed_start(p, cfg, spec);
  auto residual_of = [&](const Vector<Scalar>& v) {
    return static_cast<double>((forward(p, v, spec) - p.y_delta).norm());
  };
  double value = static_cast<double>(eval_J(p, x, spec));
  double residual = residual_of(x);
  Vector<Scalar> g = grad_J(p, x, spec);
  rec.record(0, residual, value, back_transform(x, spec), x);
  auto done = [&](StopReason why) { return rec.finish(why, x, back_transform(x, spec)); };
  if (check_discrepancy(residual, cfg.tau, delta)) return done(StopReason::discrepancy);
  if (g.norm() <= cfg.grad_tol) return done(StopReason::gradient_tol);

  const std::size_t cap = detail::inner_cap(cfg, p.n());
  const Scalar tol = static_cast<Scalar>(cfg.inner_tol);
  detail::StagnationMonitor stagnation;

  auto newton_direction = [&](const Vector<Scalar>& grad) -> std::optional<Vector<Scalar>> {
    const HessianOperator<Scalar> H(p, x, spec);
    try {
      auto cg = cg_solve<Scalar>(H, Vector<Scalar>(-grad), tol, cap);
      if (cg.converged && cg.x.dot(grad) < Scalar(0)) return std::move(cg.x);
    } catch (const NonPositiveCurvature&) {
    }
    return std::nullopt;
  };
  auto shifted_direction = [&](const Vector<Scalar>& grad, std::size_t n) -> std::optional<Vector<Scalar>> {
    const Vector<Scalar> gd = gradient_diag(spec, x).diagonal();
    const Scalar shift = static_cast<Scalar>(detail::lm_shift(cfg, delta, n)) + Scalar(2) * p.alpha;
    auto apply = [&](const Vector<Scalar>& w) -> Vector<Scalar> {
      return Scalar(2) * gd.cwiseProduct(transpose_matvec(A, matvec(A, gd.cwiseProduct(w)))) + shift * w;
    };
    try {
      auto cg = cg_solve<Scalar>(apply, Vector<Scalar>(-grad), tol, cap);
      if (cg.x.dot(grad) < Scalar(0)) return std::move(cg.x);
    } catch (const NonPositiveCurvature&) {
    }
    return std::nullopt;
  };
  auto line_search = [&](const Vector<Scalar>& s, Vector<Scalar>& x_new, double& v_new) {
    const double slope = static_cast<double>(g.dot(s));
    double lambda = 1.0;
    for (int m = 0; m <= cfg.armijo.max_backtracks; ++m, lambda *= cfg.armijo.shrink) {
      x_new = x + static_cast<Scalar>(lambda) * s;
      v_new = static_cast<double>(eval_J(p, x_new, spec));
      if (std::isfinite(v_new) && v_new < value && v_new <= value + cfg.armijo.slope * lambda * slope)
        return true;
    }
    return false;
  };

  for (std::size_t n = 0; n < cfg.max_iter; ++n) {
    Vector<Scalar> x_new;
    double v_new = value;
    bool moved = false;
    if (auto s = newton_direction(g)) moved = line_search(*s, x_new, v_new);
    if (!moved) {
      if (auto s = shifted_direction(g, n)) moved = line_search(*s, x_new, v_new);
    }
    if (!moved) return done(StopReason::stagnation);

    x = std::move(x_new);
    const double previous = value;
    value = v_new;
    residual = residual_of(x);
    g = grad_J(p, x, spec);
    rec.record(n + 1, residual, value, back_transform(x, spec), x);
    if (check_discrepancy(residual, cfg.tau, delta)) return done(StopReason::discrepancy);
    if (g.norm() <= cfg.grad_tol) return done(StopReason::gradient_tol);
    if (stagnation.update(previous, value)) return done(StopReason::stagnation);
  }
  return done(StopReason::max_iter);
}

/// Shrinkage applied to the transformed-variable gradient step:
///   x <- S_{alpha omega}(x - 2 omega G(x) Aᵀ(A N(x) - y)).
/// Kept as an experimental variant; no convergence guarantee is claimed.
template <typename Scalar>
SolveResult<Scalar> run_transformed_ista(const ProblemData<Scalar>& p, const SolverConfig<Scalar>& cfg,
                                         double delta, const Vector<Scalar>* ground_truth = nullptr) {
  cfg.validate();
  const TransformSpec spec(cfg.epsilon);
  const Scalar omega = static_cast<Scalar>(resolve_omega(p.op(), cfg));
  detail::TraceRecorder<Scalar> rec(ground_truth, cfg.record_iterates);

  Vector<Scalar> x = detail::transformed_start(p, cfg, spec);
  Vector<Scalar> r = forward(p, x, spec) - p.y_delta;
  double residual = static_cast<double>(r.norm());
  double value = static_cast<double>(eval_J(p, x, spec));
  rec.record(0, residual, value, back_transform(x, spec), x);
  auto done = [&](StopReason why) { return rec.finish(why, x, back_transform(x, spec)); };
  if (check_discrepancy(residual, cfg.tau, delta)) return done(StopReason::discrepancy);

  detail::StagnationMonitor stagnation;
  for (std::size_t k = 1; k <= cfg.max_iter; ++k) {
    const Vector<Scalar> step =
        x - Scalar(2) * omega * (gradient_diag(spec, x) * transpose_matvec(p.op(), r));
    x = soft_threshold(step, p.alpha * omega);
    detail::require_finite(x);
    r = forward(p, x, spec) - p.y_delta;
    const double previous = value;
    residual = static_cast<double>(r.norm());
    value = static_cast<double>(eval_J(p, x, spec));
    rec.record(k, residual, value, back_transform(x, spec), x);
    if (check_discrepancy(residual, cfg.tau, delta)) return done(StopReason::discrepancy);
    if (stagnation.update(previous, value)) return done(StopReason::stagnation);
  }
  return done(StopReason::max_iter);
}

}  // namespace sparsetik
