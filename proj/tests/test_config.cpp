#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "sparsetik/experiment.hpp"

using namespace sparsetik;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config_string(text, "test.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("minimal config gets defaults") {
  const auto cfg = parse_config_string("[geometry]\nm = 16\n[experiment]\nsolvers = fista\n");
  CHECK(cfg.geometry.m == 16);
  CHECK(cfg.geometry.angles == 180);
  CHECK(cfg.geometry.beams == 70);
  CHECK(cfg.noise_levels == std::vector<double>{0.1});
  CHECK(cfg.repetitions == 1);
  CHECK(cfg.seed == 42);
  CHECK(cfg.threads == 1);
  CHECK(cfg.out_dir == "out");
  REQUIRE(cfg.solvers.size() == 1);
  CHECK(cfg.solvers[0].name == "fista");
  CHECK(cfg.solvers[0].tau == 1.1);
}

TEST_CASE("full config with per-solver overrides") {
  const auto cfg = parse_config_string(R"(
# desk sweep
[geometry]
m = 32          # pixels per side
angles = 60
beams = 45

[experiment]
solvers = ista, fista, newton, lm
noise = 0.05, 0.10
repetitions = 2
seed = 7
out = results

[solver]
tau = 1.2

[solver.newton]
inner_tol = 1e-8
tau = 1.5
)");
  CHECK(cfg.geometry.angles == 60);
  CHECK(cfg.noise_levels == std::vector<double>{0.05, 0.10});
  CHECK(cfg.repetitions == 2);
  CHECK(cfg.seed == 7);
  CHECK(cfg.out_dir == "results");
  REQUIRE(cfg.solvers.size() == 4);
  CHECK(cfg.solvers[0].tau == 1.2);
  CHECK(cfg.solvers[2].name == "newton");
  CHECK(cfg.solvers[2].tau == 1.5);
  CHECK(cfg.solvers[2].inner_tol == 1e-8);
  CHECK(cfg.solvers[2].epsilon_scale == 1e-4);
}

TEST_CASE("tau must exceed 1") {
  const auto e = error_of("[geometry]\nm = 16\n[experiment]\nsolvers = lm\n[solver]\ntau=0.9\n");
  CHECK(contains(e, "tau must exceed 1"));
  CHECK(contains(e, "test.cfg:6"));
}

TEST_CASE("duplicate key reports both lines") {
  const auto e = error_of("[geometry]\nm = 16\nangles = 10\nm = 20\n[experiment]\nsolvers = lm\n");
  CHECK(contains(e, "duplicate key 'm'"));
  CHECK(contains(e, "line 2"));
  CHECK(contains(e, "line 4"));
}

TEST_CASE("malformed lines carry line numbers") {
  CHECK(contains(error_of("[geometry]\nm = 16\nthis is wrong\n"), "test.cfg:3"));
  CHECK(contains(error_of("[geometry\nm = 16\n"), "test.cfg:1"));
  CHECK(contains(error_of("m = 16\n"), "outside of any section"));
  CHECK(contains(error_of("[geometry]\nm =\n"), "missing value"));
  CHECK(contains(error_of("[geometry]\nm = 1x\n"), "test.cfg:2"));
}

TEST_CASE("missing required keys are named") {
  CHECK(contains(error_of("[experiment]\nsolvers = lm\n"), "'m'"));
  CHECK(contains(error_of("[geometry]\nm = 16\n"), "'solvers'"));
}

TEST_CASE("unknown names are rejected") {
  CHECK(contains(error_of("[geometry]\nm = 16\ncolour = red\n[experiment]\nsolvers = lm\n"), "unknown key 'colour'"));
  CHECK(contains(error_of("[plot]\n"), "unknown section"));
  const auto e = error_of("[geometry]\nm = 16\n[experiment]\nsolvers = lm, cgls\n");
  CHECK(contains(e, "unknown solver 'cgls'"));
  CHECK(contains(e, "available solvers: ista, fista"));
  CHECK(contains(error_of("[geometry]\nm = 16\n[experiment]\nsolvers = lm\n[solver.cgls]\ntau = 2\n"),
                 "unknown solver section"));
  CHECK(contains(error_of("[geometry]\nm = 16\n[experiment]\nsolvers = lm\n[solver]\nspeed = 2\n"),
                 "unknown key 'speed'"));
}

TEST_CASE("value ranges") {
  const std::string head = "[geometry]\nm = 16\n[experiment]\nsolvers = lm\n";
  CHECK(contains(error_of(head + "noise = -0.1\n"), "nonnegative"));
  CHECK(contains(error_of(head + "repetitions = -1\n"), "nonnegative"));
  CHECK(contains(error_of(head + "threads = 0\n"), "positive"));
  CHECK(contains(error_of(head + "[solver]\nlm_decay = 1.5\n"), "lm_decay"));
  CHECK(contains(error_of("[geometry]\nm = 4\n[experiment]\nsolvers = lm\n"), "at least 8"));
  CHECK(parse_config_string(head + "repetitions = 0\n").repetitions == 0);
}

TEST_CASE("geometry-only parsing") {
  const auto cfg = parse_config_string("[geometry]\nm = 16\n", "g.cfg", false);
  CHECK(cfg.solvers.empty());
  CHECK(cfg.geometry.m == 16);
}

TEST_CASE("parse_config reads files") {
  CHECK_THROWS_AS(parse_config("/nonexistent/config.cfg"), ConfigError);
}

TEST_CASE("resolved solver parameters") {
  auto s = SolverSettings::defaults_for("newton");
  auto r = s.resolve(2.0, 10.0);
  CHECK(r.alpha == doctest::Approx(0.02));
  CHECK(r.config.epsilon == doctest::Approx(2e-4));
  CHECK(r.config.tau == 1.1);

  auto f = SolverSettings::defaults_for("fista-beta");
  CHECK(f.resolve(1.0, 1.0).config.momentum == FistaMomentum::beta);
  CHECK(f.resolve(1.0, 1.0).config.epsilon == 0.0);

  s.alpha = 0.5;
  s.epsilon = 1e-3;
  r = s.resolve(2.0, 10.0);
  CHECK(r.alpha == 0.5);
  CHECK(r.config.epsilon == 1e-3);

  auto z = SolverSettings::defaults_for("lm").resolve(0.0, 100.0);
  CHECK(z.alpha > 0);
  CHECK(z.config.epsilon > 0);
}
