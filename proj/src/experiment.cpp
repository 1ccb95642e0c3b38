#include "sparsetik/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include "sparsetik/io.hpp"

namespace sparsetik {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

struct Cell {
  std::size_t level = 0;
  std::size_t solver = 0;
  int rep = 0;
};

}  // namespace

std::uint64_t noise_seed(std::uint64_t seed, std::size_t level_index, int repetition) {
  return splitmix64(seed ^ splitmix64((static_cast<std::uint64_t>(level_index) << 32) ^
                                      static_cast<std::uint64_t>(repetition)));
}

SolveResult<double> run_solver(const SolverSettings& settings, const CsrMatrix<double>& A,
                               const VectorXd& y_delta, double delta, const VectorXd* ground_truth) {
  const auto resolved = settings.resolve(delta, y_delta.norm());
  const ProblemData<double> p(A, y_delta, resolved.alpha);
  const auto& cfg = resolved.config;
  const auto& name = settings.name;
  if (name == "ista") return run_ista(p, cfg, delta, ground_truth);
  if (name == "fista") return run_fista(p, cfg, delta, FistaMomentum::nesterov, ground_truth);
  if (name == "fista-beta") return run_fista(p, cfg, delta, FistaMomentum::beta, ground_truth);
  if (name == "gd") return run_gradient_descent(p, cfg, delta, ground_truth);
  if (name == "lm") return run_levenberg_marquardt(p, cfg, delta, ground_truth);
  if (name == "newton") return run_newton(p, cfg, delta, ground_truth);
  if (name == "transformed-ista") return run_transformed_ista(p, cfg, delta, ground_truth);
  std::string msg = "unknown solver '" + name + "'; available solvers:";
  for (const auto& s : available_solvers()) msg += " " + s;
  throw ConfigError(msg);
}

std::string format_noise(double noise_rel) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", noise_rel);
  return buf;
}

std::string summary_csv(const Summary& summary) {
  std::string out;
  out += kSchemaLine;
  out += '\n';
  out += kSummaryHeader;
  out += '\n';
  for (const auto& r : summary.rows) {
    out += r.solver + "," + format_noise(r.noise_rel) + "," + std::to_string(r.n_star) + "," + r.stop_reason +
           "," + fmt(r.wall_s) + "," + fmt(r.residual) + "," + fmt(r.rel_error) + "\n";
  }
  return out;
}

std::string trace_csv(const IterationTrace& trace) {
  std::string out;
  out += kSchemaLine;
  out += '\n';
  out += kTraceHeader;
  out += '\n';
  for (const auto& r : trace.rows) {
    out += std::to_string(r.iter) + "," + fmt(r.residual) + "," + fmt(r.functional) + "," + fmt(r.rel_error) +
           "," + fmt(r.wall_s) + "\n";
  }
  return out;
}

Summary run_experiment(const ExperimentConfig& cfg) {
  if (cfg.solvers.empty()) throw ConfigError("at least one solver is required");
  if (cfg.noise_levels.empty()) throw ConfigError("at least one noise level is required");
  for (const auto& s : cfg.solvers) {
    const auto& known = available_solvers();
    if (std::find(known.begin(), known.end(), s.name) == known.end()) {
      std::string msg = "unknown solver '" + s.name + "'; available solvers:";
      for (const auto& k : known) msg += " " + k;
      throw ConfigError(msg);
    }
  }

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec || !std::filesystem::is_directory(cfg.out_dir))
    throw std::runtime_error("cannot create output directory " + cfg.out_dir.string());

  Summary summary;
  if (cfg.repetitions <= 0) {
    write_text(cfg.out_dir / "summary.csv", summary_csv(summary));
    return summary;
  }

  const auto geom = cfg.geometry.build();
  const CsrMatrix<double> A = tomo::build_parallel_tomo(geom);
  const VectorXd x_true = tomo::shepp_logan(geom.m);
  const VectorXd y = matvec(A, x_true);

  std::vector<std::vector<tomo::NoisyData>> data(cfg.noise_levels.size());
  for (std::size_t l = 0; l < cfg.noise_levels.size(); ++l)
    for (int rep = 0; rep < cfg.repetitions; ++rep)
      data[l].push_back(tomo::add_noise(y, {cfg.noise_levels[l], noise_seed(cfg.seed, l, rep)}));

  std::vector<Cell> cells;
  for (std::size_t l = 0; l < cfg.noise_levels.size(); ++l)
    for (std::size_t s = 0; s < cfg.solvers.size(); ++s)
      for (int rep = 0; rep < cfg.repetitions; ++rep) cells.push_back({l, s, rep});

  summary.rows.resize(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex io_error_mutex;
  std::string io_error;

  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& c = cells[i];
      const auto& settings = cfg.solvers[c.solver];
      const auto& nd = data[c.level][static_cast<std::size_t>(c.rep)];
      SummaryRow row;
      row.solver = settings.name;
      row.noise_rel = cfg.noise_levels[c.level];
      const std::string tag = settings.name + "_" + format_noise(row.noise_rel) + "_" + std::to_string(c.rep);
      try {
        const auto result = run_solver(settings, A, nd.y_delta, nd.delta, &x_true);
        const auto& t = result.trace;
        row.n_star = t.n_star;
        row.stop_reason = std::string(to_string(t.stop_reason));
        row.wall_s = t.rows.empty() ? 0.0 : t.rows.back().wall_s;
        row.residual = t.final_residual();
        row.rel_error = t.rows.empty() ? std::nan("") : t.rows.back().rel_error;
        try {
          write_text(cfg.out_dir / ("trace_" + tag + ".csv"), trace_csv(t));
          io::write_pgm(cfg.out_dir / ("recon_" + tag + ".pgm"), result.reconstruction, geom.m, geom.m);
        } catch (const std::exception& e) {
          std::lock_guard lock(io_error_mutex);
          if (io_error.empty()) io_error = e.what();
        }
      } catch (const std::exception&) {
        row.stop_reason = "error";
        row.residual = std::nan("");
        row.rel_error = std::nan("");
      }
      summary.rows[i] = std::move(row);
    }
  };

  const int threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(cells.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (!io_error.empty()) throw std::runtime_error(io_error);

  write_text(cfg.out_dir / "summary.csv", summary_csv(summary));
  return summary;
}

}  // namespace sparsetik
