#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sparsetik/checks.hpp"
#include "sparsetik/experiment.hpp"

using namespace sparsetik;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sparsetik_experiment_test" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config(const fs::path& out) {
  return parse_config_string("[geometry]\nm = 16\nangles = 30\nbeams = 23\n"
                             "[experiment]\nsolvers = ista, fista, newton, lm\nnoise = 0.05, 0.1\nout = " +
                             out.string() + "\n");
}

}  // namespace

TEST_CASE("zero repetitions gives an empty summary") {
  auto cfg = small_config(fresh_dir("empty"));
  cfg.repetitions = 0;
  const auto s = run_experiment(cfg);
  CHECK(s.rows.empty());
  CHECK(slurp(cfg.out_dir / "summary.csv") ==
        std::string(kSchemaLine) + "\n" + std::string(kSummaryHeader) + "\n");
}

TEST_CASE("sweep writes one row, trace and image per cell") {
  const auto cfg = small_config(fresh_dir("sweep"));
  const auto s = run_experiment(cfg);
  REQUIRE(s.rows.size() == 8);
  const std::vector<std::string> order{"ista", "fista", "newton", "lm"};
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const auto& r = s.rows[i];
    CHECK(r.solver == order[i % 4]);
    CHECK(r.noise_rel == (i < 4 ? 0.05 : 0.1));
    CHECK(r.stop_reason == "discrepancy");
    const std::string tag = r.solver + "_" + format_noise(r.noise_rel) + "_0";
    const std::string trace = slurp(cfg.out_dir / ("trace_" + tag + ".csv"));
    CHECK(trace.rfind("# schema=1\niter,residual,functional,rel_error,wall_s\n", 0) == 0);
    const std::string pgm = slurp(cfg.out_dir / ("recon_" + tag + ".pgm"));
    CHECK(pgm.rfind("P2\n16 16\n255\n", 0) == 0);
  }
  const std::string summary = slurp(cfg.out_dir / "summary.csv");
  CHECK(summary.rfind("# schema=1\nsolver,noise_rel,n_star,stop_reason,wall_s,residual,rel_error\n", 0) == 0);
}

TEST_CASE("sweep is deterministic and independent of the thread count") {
  auto a = small_config(fresh_dir("det_a"));
  auto b = small_config(fresh_dir("det_b"));
  b.threads = 3;
  run_experiment(a);
  run_experiment(b);
  CHECK(checks::strip_wall_time(slurp(a.out_dir / "summary.csv")) ==
        checks::strip_wall_time(slurp(b.out_dir / "summary.csv")));
}

TEST_CASE("failing runs are recorded, not dropped") {
  auto cfg = small_config(fresh_dir("error"));
  cfg.solvers = {SolverSettings::defaults_for("fista"), SolverSettings::defaults_for("newton")};
  cfg.solvers[1].epsilon = 0.0;
  const auto s = run_experiment(cfg);
  REQUIRE(s.rows.size() == 4);
  CHECK(s.rows[1].stop_reason == "error");
  CHECK(s.rows[3].stop_reason == "error");
  CHECK(s.rows[0].stop_reason == "discrepancy");
}

TEST_CASE("unknown solvers and unwritable output are errors") {
  auto cfg = small_config(fresh_dir("bad"));
  cfg.solvers[0].name = "cgls";
  CHECK_THROWS_WITH_AS(run_experiment(cfg), doctest::Contains("available solvers"), ConfigError);

  auto blocked = small_config(fresh_dir("blocked"));
  fs::create_directories(blocked.out_dir.parent_path());
  std::ofstream(blocked.out_dir) << "file in the way";
  CHECK_THROWS(run_experiment(blocked));
}

TEST_CASE("noise seeds differ per cell") {
  CHECK(noise_seed(42, 0, 0) != noise_seed(42, 1, 0));
  CHECK(noise_seed(42, 0, 0) != noise_seed(42, 0, 1));
  CHECK(noise_seed(42, 0, 0) != noise_seed(43, 0, 0));
  CHECK(noise_seed(42, 2, 3) == noise_seed(42, 2, 3));
}

TEST_CASE("CSV formatting") {
  Summary s;
  s.rows.push_back({"lm", 0.05, 3, "discrepancy", 0.25, 1.5, 0.125});
  CHECK(summary_csv(s) == "# schema=1\nsolver,noise_rel,n_star,stop_reason,wall_s,residual,rel_error\n"
                          "lm,0.05,3,discrepancy,0.25,1.5,0.125\n");
  CHECK(checks::strip_wall_time(summary_csv(s)) ==
        "# schema=1\nsolver,noise_rel,n_star,stop_reason,residual,rel_error\nlm,0.05,3,discrepancy,1.5,0.125\n");
  IterationTrace t;
  t.rows.push_back({0, 2.0, 4.0, 0.5, 0.0});
  CHECK(trace_csv(t) == "# schema=1\niter,residual,functional,rel_error,wall_s\n0,2,4,0.5,0\n");
}
