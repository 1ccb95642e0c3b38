#pragma once

// Property checks against independent oracles (finite differences, analytic
// bounds, optimality conditions) and the desk-scale CT trend checks. Shared by
// `sparsetik verify` and the acceptance test.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sparsetik/experiment.hpp"

namespace sparsetik::checks {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

/// Random dense-in-CSR test problem: A = I + 0.2 G / sqrt(n), y = A x_true + noise.
struct RandomInstance {
  CsrMatrix<double> A;
  VectorXd x_true;
  VectorXd y;
};

/// sparse_truth: five nonzeros of alternating sign; otherwise every entry nonzero.
RandomInstance random_instance(std::uint64_t seed, int n, bool sparse_truth);

CheckResult check_derivatives(std::uint64_t seed);
CheckResult check_transform_bounds(std::uint64_t seed);
CheckResult check_smoothness(std::uint64_t seed);
CheckResult check_l1_optimality();
CheckResult check_transform_equivalence();
CheckResult check_newton_order();
CheckResult check_paper_shape();

/// Criteria 1-6 and 9; none of them touches the file system.
std::vector<CheckResult> run_property_checks(std::uint64_t seed);

/// 32 x 32 problem, 60 angles, 45 beams, noise 5/10/20%, tau 1.1, Newton with
/// epsilon = 1e-4 delta.
ExperimentConfig desk_sweep_config(const std::filesystem::path& out_dir);

CheckResult check_iteration_trends(const Summary& summary, double sweep_seconds);
CheckResult check_error_parity(const Summary& summary);

/// Runs the sweep twice into separate directories and compares summary.csv.
/// The wall_s column is excluded from the comparison.
CheckResult check_determinism(const ExperimentConfig& cfg, const std::filesystem::path& second_out);

/// Summary CSV text with the wall_s column removed.
std::string strip_wall_time(const std::string& summary_text);

std::string format_result(const CheckResult& r);

}  // namespace sparsetik::checks
