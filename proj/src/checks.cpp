#include "sparsetik/checks.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "sparsetik/functionals.hpp"
#include "sparsetik/solvers.hpp"
#include "sparsetik/tomo.hpp"

namespace sparsetik::checks {

namespace {

using Clock = std::chrono::steady_clock;

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

VectorXd normal_vector(std::mt19937_64& rng, Index n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

template <typename F>
CheckResult timed(int id, std::string name, F&& body) {
  const auto t0 = Clock::now();
  CheckResult r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.id = id;
  r.name = std::move(name);
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::pair<std::string, double>, const SummaryRow*> index_rows(const Summary& s) {
  std::map<std::pair<std::string, double>, const SummaryRow*> out;
  for (const auto& r : s.rows) out.emplace(std::make_pair(r.solver, r.noise_rel), &r);
  return out;
}

}  // namespace

RandomInstance random_instance(std::uint64_t seed, int n, bool sparse_truth) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix<double> D = DenseMatrix<double>::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) D(i, j) += 0.2 * normal(rng) / std::sqrt(static_cast<double>(n));
  RandomInstance inst{CsrMatrix<double>::from_dense(D), VectorXd::Zero(n), VectorXd()};
  if (sparse_truth) {
    for (int k = 0; k < 5 && 4 * k < n; ++k) inst.x_true(4 * k) = (k % 2 ? -1.0 : 1.0) * (1.0 + 0.2 * k);
  } else {
    for (int k = 0; k < n; ++k) inst.x_true(k) = (k % 2 ? -1.0 : 1.0) * (1.0 + 0.05 * k);
  }
  inst.y = matvec(inst.A, inst.x_true);
  for (int i = 0; i < n; ++i) inst.y(i) += 0.01 * normal(rng);
  return inst;
}

CheckResult check_derivatives(std::uint64_t seed) {
  return timed(1, "derivatives match finite differences", [&] {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dim(2, 40);
    double worst_grad = 0, worst_hess = 0;
    for (int trial = 0; trial < 50; ++trial) {
      const int n = dim(rng);
      const int rows = dim(rng);
      DenseMatrix<double> D(rows, n);
      for (int i = 0; i < rows; ++i) D.row(i) = normal_vector(rng, n).transpose() / std::sqrt(double(n));
      const auto A = CsrMatrix<double>::from_dense(D);
      const double eps = log_uniform(rng, 1e-4, 1.0);
      const ProblemData<double> p(A, normal_vector(rng, rows), log_uniform(rng, 1e-3, 1.0));
      const TransformSpec spec(eps);
      const VectorXd x = normal_vector(rng, n);
      const VectorXd w = normal_vector(rng, n);

      const VectorXd g = grad_J(p, x, spec);
      VectorXd g_fd(n);
      for (int k = 0; k < n; ++k) {
        const double h = 1e-6 * std::max(1.0, std::abs(x(k)));
        VectorXd xp = x, xm = x;
        xp(k) += h;
        xm(k) -= h;
        g_fd(k) = (eval_J(p, xp, spec) - eval_J(p, xm, spec)) / (2 * h);
      }
      worst_grad = std::max(worst_grad, (g_fd - g).norm() / std::max(g.norm(), 1e-300));

      const VectorXd Hw = hess_J_eps_matvec(p, x, spec, w);
      const double h = std::min(1e-6, 1e-3 * eps);
      const VectorXd Hw_fd = (grad_J(p, VectorXd(x + h * w), spec) - grad_J(p, VectorXd(x - h * w), spec)) / (2 * h);
      worst_hess = std::max(worst_hess, (Hw_fd - Hw).norm() / std::max(Hw.norm(), 1e-300));
    }
    CheckResult r;
    r.passed = worst_grad <= 1e-5 && worst_hess <= 1e-4;
    r.detail = "50 instances, worst gradient rel " + sci(worst_grad) + " (<= 1e-05), worst Hessian rel " +
               sci(worst_hess) + " (<= 1e-04)";
    return r;
  });
}

CheckResult check_transform_bounds(std::uint64_t seed) {
  return timed(2, "approximation and growth bounds", [&] {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dim(1, 50);
    int approx_violations = 0, growth_violations = 0;
    double worst_approx = 0, worst_growth = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const double eps = log_uniform(rng, 1e-6, 10.0);
      const VectorXd x = normal_vector(rng, dim(rng), log_uniform(rng, 1e-4, 1e2));
      const TransformSpec spec(eps);
      const double xn = x.norm();
      const double approx = (apply_N(x) - apply_N_eps(spec, x)).norm();
      const double approx_bound = 7.0 / 3.0 * eps * xn;
      const double growth = apply_N_eps(spec, x).norm();
      const double growth_bound = xn * std::sqrt(16.0 * eps * eps / 9.0 + 2.0 * xn * xn);
      if (approx > approx_bound) ++approx_violations;
      if (growth > growth_bound) ++growth_violations;
      worst_approx = std::max(worst_approx, approx / approx_bound);
      worst_growth = std::max(worst_growth, growth / growth_bound);
    }
    CheckResult r;
    r.passed = approx_violations == 0 && growth_violations == 0;
    r.detail = "1000 samples, violations " + std::to_string(approx_violations) + " + " +
               std::to_string(growth_violations) + ", max ratio to bound " + sci(worst_approx) + " / " +
               sci(worst_growth);
    return r;
  });
}

CheckResult check_smoothness(std::uint64_t seed) {
  return timed(3, "C2 smoothness across the knots", [&] {
    std::mt19937_64 rng(seed);
    double worst1 = 0, worst2 = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const double eps = log_uniform(rng, 1e-4, 1e2);
      const TransformSpec spec(eps);
      for (double knot : {eps, -eps}) {
        const double h1 = 1e-5 * eps;
        const double d1 = (eta_eps(spec, knot + h1) - eta_eps(spec, knot - h1)) / (2 * h1);
        worst1 = std::max(worst1, std::abs(d1 - eta_eps_d1(spec, knot)) / std::abs(eta_eps_d1(spec, knot)));
        const double h2 = 1e-7 * eps;
        const double d2 = (eta_eps_d1(spec, knot + h2) - eta_eps_d1(spec, knot - h2)) / (2 * h2);
        worst2 = std::max(worst2, std::abs(d2 - eta_eps_d2(spec, knot)) / std::abs(eta_eps_d2(spec, knot)));
      }
    }
    CheckResult r;
    r.passed = worst1 <= 1e-6 && worst2 <= 1e-6;
    r.detail = "100 epsilons, worst rel error first " + sci(worst1) + ", second " + sci(worst2) + " (<= 1e-06)";
    return r;
  });
}

CheckResult check_l1_optimality() {
  return timed(4, "ISTA fixed point and FISTA agreement", [&] {
    double worst_fp = 0, worst_t = 0;
    std::size_t max_iters = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto inst = random_instance(seed, 20, true);
      const ProblemData<double> p(inst.A, inst.y, 0.1);
      SolverConfig<double> cfg;
      cfg.max_iter = 100000;
      const auto ista = run_ista(p, cfg, 0.0);
      const auto fista = run_fista(p, cfg, 0.0);
      const double omega = resolve_omega(inst.A, cfg);
      worst_fp = std::max(worst_fp, ista_fixed_point_residual(p, ista.x, omega));
      const double t_ista = eval_T(p, ista.x);
      worst_t = std::max(worst_t, std::abs(eval_T(p, fista.x) - t_ista) / t_ista);
      max_iters = std::max(max_iters, ista.trace.n_star);
      if (ista.trace.stop_reason != StopReason::stagnation) {
        CheckResult r;
        r.detail = "ISTA did not stagnate on seed " + std::to_string(seed);
        return r;
      }
    }
    CheckResult r;
    r.passed = worst_fp <= 1e-8 && worst_t <= 1e-6;
    r.detail = "10 instances, worst fixed-point residual " + sci(worst_fp) + " (<= 1e-08), worst T rel diff " +
               sci(worst_t) + " (<= 1e-06), ISTA iterations <= " + std::to_string(max_iters);
    return r;
  });
}

CheckResult check_transform_equivalence() {
  return timed(5, "back-transformed Newton matches ISTA", [&] {
    double worst = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto inst = random_instance(seed, 20, true);
      const ProblemData<double> p(inst.A, inst.y, 0.1);
      SolverConfig<double> ci;
      ci.max_iter = 100000;
      const auto ista = run_ista(p, ci, 0.0);
      SolverConfig<double> cn;
      cn.epsilon = 1e-6 * inst.y.norm();
      cn.max_iter = 200;
      cn.grad_tol = 1e-13;
      const auto newton = run_newton(p, cn, 0.0);
      worst = std::max(worst, (newton.reconstruction - ista.x).norm() / ista.x.norm());
    }
    CheckResult r;
    r.passed = worst <= 1e-3;
    r.detail = "5 instances, worst distance / ||x_ista|| = " + sci(worst) + " (<= 1e-03)";
    return r;
  });
}

CheckResult check_newton_order() {
  return timed(6, "Newton superlinear convergence", [&] {
    const auto inst = random_instance(2, 20, false);
    const ProblemData<double> p(inst.A, inst.y, 0.01);
    SolverConfig<double> cfg;
    cfg.epsilon = 1e-3;
    cfg.max_iter = 200;
    cfg.grad_tol = 1e-6;
    cfg.record_iterates = true;
    const auto run = run_newton(p, cfg, 0.0);

    SolverConfig<double> ref = cfg;
    ref.grad_tol = 0;
    ref.max_iter = 300;
    ref.record_iterates = false;
    const VectorXd x_star = run_newton(p, ref, 0.0).x;

    CheckResult r;
    if (run.trace.stop_reason != StopReason::gradient_tol || run.iterates.size() < 4) {
      r.detail = "Newton stopped by " + std::string(to_string(run.trace.stop_reason)) + " after " +
                 std::to_string(run.trace.n_star) + " steps";
      return r;
    }
    const std::size_t last = run.iterates.size() - 1;
    std::vector<double> ratios;
    for (std::size_t k = last - 2; k <= last; ++k)
      ratios.push_back((run.iterates[k] - x_star).norm() / (run.iterates[k - 1] - x_star).norm());
    r.passed = ratios[1] < ratios[0] && ratios[2] < ratios[1] && ratios[0] < 1.0 && ratios[2] < 0.1;
    r.detail = "last three error ratios " + sci(ratios[0]) + ", " + sci(ratios[1]) + ", " + sci(ratios[2]) +
               " after " + std::to_string(run.trace.n_star) + " steps";
    return r;
  });
}

CheckResult check_paper_shape() {
  return timed(9, "m=50, 180 angles, 70 beams gives 12600 x 2500", [&] {
    const auto A = tomo::build_parallel_tomo(tomo::TomoGeometry::parallel(50, 180, 70));
    CheckResult r;
    r.passed = A.rows() == 12600 && A.cols() == 2500;
    r.detail = "shape " + std::to_string(A.rows()) + " x " + std::to_string(A.cols()) + ", nnz " +
               std::to_string(A.nnz());
    return r;
  });
}

std::vector<CheckResult> run_property_checks(std::uint64_t seed) {
  return {check_derivatives(seed),   check_transform_bounds(seed + 1), check_smoothness(seed + 2),
          check_l1_optimality(),     check_transform_equivalence(),    check_newton_order(),
          check_paper_shape()};
}

ExperimentConfig desk_sweep_config(const std::filesystem::path& out_dir) {
  ExperimentConfig cfg;
  cfg.geometry.m = 32;
  cfg.geometry.angles = 60;
  cfg.geometry.beams = 45;
  cfg.noise_levels = {0.05, 0.10, 0.20};
  for (const char* name : {"ista", "fista", "gd", "lm", "newton"}) {
    auto s = SolverSettings::defaults_for(name);
    s.tau = 1.1;
    s.max_iter = 20000;
    cfg.solvers.push_back(s);
  }
  cfg.out_dir = out_dir;
  cfg.seed = 42;
  cfg.repetitions = 1;
  cfg.threads = 1;
  return cfg;
}

CheckResult check_iteration_trends(const Summary& summary, double sweep_seconds) {
  return timed(7, "desk-scale iteration trends", [&] {
    const auto rows = index_rows(summary);
    CheckResult r;
    r.passed = sweep_seconds < 120.0;
    std::ostringstream detail;
    for (double noise : {0.05, 0.10, 0.20}) {
      auto get = [&](const char* name) -> const SummaryRow* {
        auto it = rows.find({name, noise});
        return it == rows.end() ? nullptr : it->second;
      };
      const auto *ista = get("ista"), *fista = get("fista"), *lm = get("lm"), *newton = get("newton");
      if (!ista || !fista || !lm || !newton) {
        r.passed = false;
        detail << "missing rows at noise " << noise;
        break;
      }
      const bool ok = newton->stop_reason == "discrepancy" && lm->stop_reason == "discrepancy" &&
                      ista->stop_reason == "discrepancy" && fista->stop_reason == "discrepancy" &&
                      newton->n_star <= 25 && lm->n_star <= 25 && ista->n_star >= 5 * lm->n_star &&
                      fista->n_star < ista->n_star;
      r.passed = r.passed && ok;
      detail << format_noise(noise) << ": ista " << ista->n_star << ", fista " << fista->n_star << ", lm "
             << lm->n_star << ", newton " << newton->n_star;
      if (lm->n_star > 0) {
        char ratio[32];
        std::snprintf(ratio, sizeof ratio, "%.1f", double(ista->n_star) / double(lm->n_star));
        detail << " (ista/lm " << ratio << ", need >= 5)";
      }
      detail << "; ";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", sweep_seconds);
    detail << "sweep " << buf << " s";
    r.detail = detail.str();
    return r;
  });
}

CheckResult check_error_parity(const Summary& summary) {
  return timed(8, "relative error parity at 10% noise", [&] {
    const auto rows = index_rows(summary);
    CheckResult r;
    double best_gradient = std::numeric_limits<double>::infinity();
    for (const char* name : {"ista", "fista", "gd"}) {
      auto it = rows.find({name, 0.10});
      if (it != rows.end() && std::isfinite(it->second->rel_error))
        best_gradient = std::min(best_gradient, it->second->rel_error);
    }
    auto lm = rows.find({"lm", 0.10});
    auto newton = rows.find({"newton", 0.10});
    if (lm == rows.end() || newton == rows.end() || !std::isfinite(best_gradient)) {
      r.detail = "missing rows at noise 0.1";
      return r;
    }
    const double limit = best_gradient + 0.02;
    r.passed = newton->second->rel_error <= limit && lm->second->rel_error <= limit;
    r.detail = "newton " + sci(newton->second->rel_error) + ", lm " + sci(lm->second->rel_error) +
               ", best gradient-based " + sci(best_gradient) + " (+0.02)";
    return r;
  });
}

std::string strip_wall_time(const std::string& summary_text) {
  std::istringstream in(summary_text);
  std::string line, out;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') {
      out += line + "\n";
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i == 4) continue;
      out += fields[i];
      out += i + 1 < fields.size() ? "," : "";
    }
    out += "\n";
  }
  return out;
}

CheckResult check_determinism(const ExperimentConfig& cfg, const std::filesystem::path& second_out) {
  return timed(10, "sweep determinism", [&] {
    ExperimentConfig second = cfg;
    second.out_dir = second_out;
    run_experiment(cfg);
    run_experiment(second);
    const std::string a = read_file(cfg.out_dir / "summary.csv");
    const std::string b = read_file(second.out_dir / "summary.csv");
    CheckResult r;
    r.passed = !a.empty() && strip_wall_time(a) == strip_wall_time(b);
    r.detail = std::string(r.passed ? "summary CSVs identical" : "summary CSVs differ") +
               " apart from the wall_s column (" + std::string(a == b ? "wall_s also equal" : "wall_s differs") + ")";
    return r;
  });
}

std::string format_result(const CheckResult& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "[%s] %2d ", r.passed ? "PASS" : "FAIL", r.id);
  char tail[32];
  std::snprintf(tail, sizeof tail, " (%.3f s)", r.seconds);
  return buf + r.name + ": " + r.detail + tail;
}

}  // namespace sparsetik::checks
