#pragma once

// Experiment harness: configuration, single runs and noise-level sweeps over the
// parallel-beam CT problem.
//
// Config files are line oriented:
//
//   # comment
//   [geometry]
//   m = 32
//   angles = 60
//   beams = 45
//
//   [experiment]
//   solvers = ista, fista, lm, newton
//   noise = 0.05, 0.10
//
//   [solver]            # applies to every solver
//   tau = 1.1
//
//   [solver.newton]     # applies to one solver, after [solver]
//   inner_tol = 1e-8
//
// Unknown sections or keys, duplicate keys and malformed lines are errors.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sparsetik/solvers.hpp"
#include "sparsetik/tomo.hpp"

namespace sparsetik {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Names accepted in `solvers = ...` and by `solve --solver`.
const std::vector<std::string>& available_solvers();

struct GeometrySettings {
  int m = 0;
  int angles = 180;
  int beams = 70;
  std::optional<double> spacing;

  tomo::TomoGeometry build() const;
};

/// Solver parameters before the noise level is known. Quantities tied to the
/// noise level (alpha, epsilon, LM shifts) are resolved per run.
struct SolverSettings {
  std::string name;
  double tau = 1.1;
  double alpha_scale = 0.01;       // alpha = alpha_scale * delta
  std::optional<double> alpha;     // absolute, overrides alpha_scale
  double epsilon_scale = 0.0;      // epsilon = epsilon_scale * delta
  std::optional<double> epsilon;   // absolute, overrides epsilon_scale
  std::optional<double> omega;     // empty: auto
  double beta = 3.0;
  ArmijoRule armijo;
  std::optional<double> lm_alpha0; // empty: delta
  double lm_decay = 0.6;
  std::size_t max_iter = 10000;
  double inner_tol = 1e-10;
  std::size_t inner_max_iter = 0;
  double grad_tol = 1e-12;
  bool warm_start = false;
  std::size_t warm_start_iters = 5;

  /// Defaults for a named solver: the transformed-variable methods smooth with
  /// epsilon = 1e-4 delta and start from zero. With epsilon = 0 they cannot leave
  /// zero (G(0) = 0); set warm_start = true in that case.
  static SolverSettings defaults_for(std::string_view name);

  struct Resolved {
    SolverConfig<double> config;
    double alpha = 0;
  };
  Resolved resolve(double delta, double y_norm) const;
};

struct ExperimentConfig {
  GeometrySettings geometry;
  std::vector<double> noise_levels{0.1};
  std::vector<SolverSettings> solvers;
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 42;
  int repetitions = 1;
  int threads = 1;
};

/// With require_solvers = false a missing `solvers` key yields an empty solver
/// list (used by commands that only need the geometry).
ExperimentConfig parse_config(const std::filesystem::path& path, bool require_solvers = true);
ExperimentConfig parse_config_string(std::string_view text, const std::string& source = "<config>",
                                     bool require_solvers = true);

/// Seed of the noise vector for (noise level index, repetition).
std::uint64_t noise_seed(std::uint64_t seed, std::size_t level_index, int repetition);

/// Runs one solver by name on the given data.
SolveResult<double> run_solver(const SolverSettings& settings, const CsrMatrix<double>& A,
                               const VectorXd& y_delta, double delta,
                               const VectorXd* ground_truth = nullptr);

struct SummaryRow {
  std::string solver;
  double noise_rel = 0;
  std::size_t n_star = 0;
  std::string stop_reason;
  double wall_s = 0;
  double residual = 0;
  double rel_error = 0;
};

struct Summary {
  std::vector<SummaryRow> rows;
};

inline constexpr std::string_view kSchemaLine = "# schema=1";
inline constexpr std::string_view kSummaryHeader = "solver,noise_rel,n_star,stop_reason,wall_s,residual,rel_error";
inline constexpr std::string_view kTraceHeader = "iter,residual,functional,rel_error,wall_s";

std::string format_noise(double noise_rel);
std::string summary_csv(const Summary& summary);
std::string trace_csv(const IterationTrace& trace);

/// Writes summary.csv plus one trace CSV and one reconstruction PGM per run.
/// Runs that throw are reported with stop_reason "error".
Summary run_experiment(const ExperimentConfig& cfg);

}  // namespace sparsetik
