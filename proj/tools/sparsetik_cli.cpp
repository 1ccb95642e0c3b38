// sparsetik: generate CT problems, run solvers, sweep noise levels, verify.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sparsetik/checks.hpp"
#include "sparsetik/experiment.hpp"
#include "sparsetik/io.hpp"
#include "sparsetik/tomo.hpp"

namespace fs = std::filesystem;
using namespace sparsetik;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string solver;
  std::optional<double> noise;
  std::string problem;
};

ExperimentConfig load(const Options& o, bool need_solvers) {
  if (o.config.empty()) throw ConfigError("--config is required");
  ExperimentConfig cfg = parse_config(o.config, need_solvers);
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.seed) cfg.seed = *o.seed;
  if (o.noise) cfg.noise_levels = {*o.noise};
  cfg.threads = o.threads;
  return cfg;
}

void write_meta(const fs::path& path, const ExperimentConfig& cfg, double noise, double delta) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", delta);
  out << "# schema=1\n"
      << "m = " << cfg.geometry.m << "\nangles = " << cfg.geometry.angles << "\nbeams = " << cfg.geometry.beams
      << "\nnoise = " << format_noise(noise) << "\nseed = " << cfg.seed << "\ndelta = " << buf << "\n";
}

struct Meta {
  int m = 0;
  double noise = 0;
  double delta = 0;
};

Meta read_meta(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Meta meta;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, line.find_last_not_of(' ', eq - 1) + 1);
    const std::string value = line.substr(line.find_first_not_of(' ', eq + 1));
    if (key == "m") meta.m = std::stoi(value);
    if (key == "noise") meta.noise = std::stod(value);
    if (key == "delta") meta.delta = std::stod(value);
  }
  if (meta.m <= 0) throw std::runtime_error(path.string() + ": missing m");
  return meta;
}

int cmd_generate(const Options& o) {
  const auto cfg = load(o, false);
  const double noise = cfg.noise_levels.front();
  const auto inst = tomo::make_problem(cfg.geometry.build(), {noise, noise_seed(cfg.seed, 0, 0)});
  fs::create_directories(cfg.out_dir);
  io::write_matrix_market(cfg.out_dir / "A.mtx", inst.A);
  io::write_values_csv(cfg.out_dir / "x_true.csv", inst.x_true);
  io::write_values_csv(cfg.out_dir / "y.csv", inst.y);
  io::write_values_csv(cfg.out_dir / "y_delta.csv", inst.y_delta);
  io::write_pgm(cfg.out_dir / "phantom.pgm", inst.x_true, inst.geometry.m, inst.geometry.m);
  write_meta(cfg.out_dir / "problem.txt", cfg, noise, inst.delta);
  std::cout << "wrote " << inst.A.rows() << " x " << inst.A.cols() << " problem (nnz " << inst.A.nnz()
            << ", delta " << inst.delta << ") to " << cfg.out_dir.string() << "\n";
  return 0;
}

int cmd_solve(const Options& o) {
  ExperimentConfig cfg;
  if (!o.config.empty()) cfg = load(o, false);
  if (!o.out.empty()) cfg.out_dir = o.out;

  SolverSettings settings = SolverSettings::defaults_for(o.solver);
  for (const auto& s : cfg.solvers)
    if (s.name == o.solver) settings = s;
  {
    const auto& known = available_solvers();
    if (std::find(known.begin(), known.end(), o.solver) == known.end()) {
      std::string msg = "unknown solver '" + o.solver + "'; available solvers:";
      for (const auto& k : known) msg += " " + k;
      throw ConfigError(msg);
    }
  }

  CsrMatrix<double> A;
  VectorXd truth, y_delta;
  double delta = 0, noise = 0;
  int m = 0;
  if (!o.problem.empty()) {
    const fs::path dir = o.problem;
    const Meta meta = read_meta(dir / "problem.txt");
    A = io::read_matrix_market(dir / "A.mtx");
    truth = io::read_values_csv(dir / "x_true.csv");
    y_delta = io::read_values_csv(dir / "y_delta.csv");
    delta = meta.delta;
    noise = meta.noise;
    m = meta.m;
  } else {
    if (o.config.empty()) throw ConfigError("solve needs --config or --problem");
    noise = cfg.noise_levels.front();
    auto inst = tomo::make_problem(cfg.geometry.build(), {noise, noise_seed(cfg.seed, 0, 0)});
    A = std::move(inst.A);
    truth = std::move(inst.x_true);
    y_delta = std::move(inst.y_delta);
    delta = inst.delta;
    m = inst.geometry.m;
  }

  const auto result = run_solver(settings, A, y_delta, delta, &truth);
  fs::create_directories(cfg.out_dir);
  const std::string tag = settings.name + "_" + format_noise(noise) + "_0";
  {
    std::ofstream out(cfg.out_dir / ("trace_" + tag + ".csv"), std::ios::binary);
    out << trace_csv(result.trace);
  }
  io::write_pgm(cfg.out_dir / ("recon_" + tag + ".pgm"), result.reconstruction, m, m);
  Summary summary;
  const auto& t = result.trace;
  summary.rows.push_back({settings.name, noise, t.n_star, std::string(to_string(t.stop_reason)),
                          t.rows.back().wall_s, t.final_residual(), t.rows.back().rel_error});
  {
    std::ofstream out(cfg.out_dir / "summary.csv", std::ios::binary);
    out << summary_csv(summary);
  }
  std::cout << summary_csv(summary);
  return 0;
}

int cmd_sweep(const Options& o) {
  const auto cfg = load(o, true);
  const auto summary = run_experiment(cfg);
  std::cout << summary_csv(summary);
  return 0;
}

int cmd_verify(const Options& o) {
  const auto results = checks::run_property_checks(o.seed.value_or(12345));
  bool ok = true;
  for (const auto& r : results) {
    std::cout << checks::format_result(r) << "\n";
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse l1 Tikhonov reconstruction via the squared-sign transform"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "RNG seed (u64)");
  };

  auto* gen = app.add_subcommand("generate", "build a CT problem and cache it to --out");
  gen->add_option("--config", o.config, "config file ([geometry] section)")->required();
  gen->add_option("--out", o.out, "output directory");
  gen->add_option("--noise", o.noise, "relative noise level");
  add_common(gen);

  auto* solve = app.add_subcommand("solve", "run one solver");
  solve->add_option("--config", o.config, "config file");
  solve->add_option("--problem", o.problem, "directory written by generate");
  solve->add_option("--solver", o.solver, "solver name")->required();
  solve->add_option("--out", o.out, "output directory");
  solve->add_option("--noise", o.noise, "relative noise level");
  add_common(solve);

  auto* sweep = app.add_subcommand("sweep", "run every solver at every noise level");
  sweep->add_option("--config", o.config, "config file")->required();
  sweep->add_option("--out", o.out, "output directory");
  sweep->add_option("--threads", o.threads, "worker threads")->default_val(1)->check(CLI::PositiveNumber);
  sweep->add_option("--noise", o.noise, "single relative noise level, overrides the config");
  add_common(sweep);

  auto* verify = app.add_subcommand("verify", "run the property checks");
  add_common(verify);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_generate(o);
    if (*solve) return cmd_solve(o);
    if (*sweep) return cmd_sweep(o);
    if (*verify) return cmd_verify(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
