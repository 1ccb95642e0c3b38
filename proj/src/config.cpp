#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>

#include "sparsetik/experiment.hpp"

namespace sparsetik {

namespace {

struct Entry {
  std::string value;
  std::size_t line = 0;
};

using Section = std::map<std::string, Entry>;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

class Parser {
public:
  explicit Parser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(std::size_t line, const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(source_ + ": " + msg); }

  double to_double(const Entry& e, const std::string& key) const {
    double v = 0;
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    auto [ptr, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || ptr != end) fail(e.line, "'" + key + "' expects a number, got '" + e.value + "'");
    return v;
  }

  long long to_int(const Entry& e, const std::string& key) const {
    long long v = 0;
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    auto [ptr, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || ptr != end) fail(e.line, "'" + key + "' expects an integer, got '" + e.value + "'");
    return v;
  }

  std::size_t to_count(const Entry& e, const std::string& key) const {
    const long long v = to_int(e, key);
    if (v < 0) fail(e.line, "'" + key + "' must be nonnegative");
    return static_cast<std::size_t>(v);
  }

  bool to_bool(const Entry& e, const std::string& key) const {
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    fail(e.line, "'" + key + "' expects true or false, got '" + e.value + "'");
  }

  std::vector<std::string> to_list(const Entry& e) const {
    std::vector<std::string> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(e.line, "empty list item");
      out.push_back(item);
    }
    return out;
  }

  std::map<std::string, Section> sections(std::string_view text) const {
    std::map<std::string, Section> out;
    std::string current;
    std::size_t lineno = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
      ++lineno;
      const auto hash = raw.find('#');
      const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3) fail(lineno, "malformed section header '" + line + "'");
        current = trim(line.substr(1, line.size() - 2));
        if (!is_known_section(current)) fail(lineno, "unknown section [" + current + "]");
        out[current];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail(lineno, "expected 'key = value', got '" + line + "'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) fail(lineno, "missing key before '='");
      if (value.empty()) fail(lineno, "missing value for '" + key + "'");
      if (current.empty()) fail(lineno, "key '" + key + "' outside of any section");
      auto& sec = out[current];
      if (auto it = sec.find(key); it != sec.end())
        fail(lineno, "duplicate key '" + key + "' in [" + current + "] (first defined on line " +
                         std::to_string(it->second.line) + ", again on line " + std::to_string(lineno) + ")");
      sec.emplace(key, Entry{value, lineno});
    }
    return out;
  }

  void apply_solver_key(SolverSettings& s, const std::string& key, const Entry& e) const {
    auto positive = [&](double v) {
      if (!(v > 0)) fail(e.line, "'" + key + "' must be positive");
      return v;
    };
    if (key == "tau") {
      s.tau = to_double(e, key);
      if (!(s.tau > 1)) fail(e.line, "tau must exceed 1");
    } else if (key == "alpha") {
      s.alpha = positive(to_double(e, key));
    } else if (key == "alpha_scale") {
      s.alpha_scale = positive(to_double(e, key));
    } else if (key == "epsilon") {
      s.epsilon = to_double(e, key);
      if (!(*s.epsilon >= 0)) fail(e.line, "epsilon must be nonnegative");
    } else if (key == "epsilon_scale") {
      s.epsilon_scale = to_double(e, key);
      if (!(s.epsilon_scale >= 0)) fail(e.line, "epsilon_scale must be nonnegative");
    } else if (key == "omega") {
      if (e.value == "auto") {
        s.omega.reset();
      } else {
        s.omega = positive(to_double(e, key));
      }
    } else if (key == "beta") {
      s.beta = to_double(e, key);
      if (!(s.beta >= 3)) fail(e.line, "beta must be at least 3");
    } else if (key == "armijo_step") {
      s.armijo.initial_step = positive(to_double(e, key));
    } else if (key == "armijo_shrink") {
      s.armijo.shrink = to_double(e, key);
      if (!(s.armijo.shrink > 0 && s.armijo.shrink < 1)) fail(e.line, "armijo_shrink must lie in (0, 1)");
    } else if (key == "armijo_slope") {
      s.armijo.slope = to_double(e, key);
      if (!(s.armijo.slope > 0 && s.armijo.slope < 1)) fail(e.line, "armijo_slope must lie in (0, 1)");
    } else if (key == "lm_alpha0") {
      s.lm_alpha0 = positive(to_double(e, key));
    } else if (key == "lm_decay") {
      s.lm_decay = to_double(e, key);
      if (!(s.lm_decay > 0 && s.lm_decay < 1)) fail(e.line, "lm_decay must lie in (0, 1)");
    } else if (key == "max_iter") {
      s.max_iter = to_count(e, key);
    } else if (key == "inner_tol") {
      s.inner_tol = positive(to_double(e, key));
    } else if (key == "inner_max_iter") {
      s.inner_max_iter = to_count(e, key);
    } else if (key == "grad_tol") {
      s.grad_tol = to_double(e, key);
    } else if (key == "warm_start") {
      s.warm_start = to_bool(e, key);
    } else if (key == "warm_start_iters") {
      s.warm_start_iters = to_count(e, key);
    } else {
      fail(e.line, "unknown key '" + key + "' in solver section");
    }
  }

private:
  static bool is_known_section(const std::string& name) {
    if (name == "geometry" || name == "experiment" || name == "solver") return true;
    if (name.rfind("solver.", 0) == 0) return true;
    return false;
  }

  std::string source_;
};

std::string solver_list_message() {
  std::string msg = "available solvers: ";
  const auto& names = available_solvers();
  for (std::size_t i = 0; i < names.size(); ++i) msg += (i ? ", " : "") + names[i];
  return msg;
}

}  // namespace

const std::vector<std::string>& available_solvers() {
  static const std::vector<std::string> names{"ista",   "fista", "fista-beta",      "gd",
                                              "lm",     "newton", "transformed-ista"};
  return names;
}

tomo::TomoGeometry GeometrySettings::build() const {
  auto g = tomo::TomoGeometry::parallel(m, angles, beams);
  if (spacing) g.detector_spacing = *spacing;
  g.validate();
  return g;
}

SolverSettings SolverSettings::defaults_for(std::string_view name) {
  SolverSettings s;
  s.name = std::string(name);
  if (name == "newton" || name == "gd" || name == "lm" || name == "transformed-ista") s.epsilon_scale = 1e-4;
  return s;
}

SolverSettings::Resolved SolverSettings::resolve(double delta, double y_norm) const {
  Resolved r;
  const double scale = delta > 0 ? delta : 1e-8 * y_norm;
  r.alpha = alpha ? *alpha : alpha_scale * scale;
  if (!(r.alpha > 0)) r.alpha = alpha_scale;

  auto& c = r.config;
  c.tau = tau;
  if (epsilon) {
    c.epsilon = *epsilon;
  } else if (epsilon_scale > 0) {
    c.epsilon = delta > 0 ? epsilon_scale * delta : default_epsilon(0.0, y_norm);
  }
  c.omega = omega;
  c.momentum = name == "fista-beta" ? FistaMomentum::beta : FistaMomentum::nesterov;
  c.beta = beta;
  c.armijo = armijo;
  c.lm_alpha0 = lm_alpha0;
  c.lm_decay = lm_decay;
  c.max_iter = max_iter;
  c.inner_tol = inner_tol;
  c.inner_max_iter = inner_max_iter;
  c.grad_tol = grad_tol;
  c.warm_start = warm_start;
  c.warm_start_iters = warm_start_iters;
  return r;
}

ExperimentConfig parse_config_string(std::string_view text, const std::string& source, bool require_solvers) {
  const Parser parser(source);
  auto sections = parser.sections(text);
  ExperimentConfig cfg;

  auto take = [](Section& sec, const std::string& key) -> std::optional<Entry> {
    auto it = sec.find(key);
    if (it == sec.end()) return std::nullopt;
    Entry e = it->second;
    sec.erase(it);
    return e;
  };
  auto reject_rest = [&](const Section& sec, const std::string& name) {
    if (!sec.empty()) {
      const auto& [key, e] = *sec.begin();
      parser.fail(e.line, "unknown key '" + key + "' in [" + name + "]");
    }
  };

  auto& geom = sections["geometry"];
  if (auto e = take(geom, "m")) {
    cfg.geometry.m = static_cast<int>(parser.to_int(*e, "m"));
    if (cfg.geometry.m < 8) parser.fail(e->line, "m must be at least 8");
  } else {
    parser.fail("missing required key 'm' in [geometry]");
  }
  if (auto e = take(geom, "angles")) {
    cfg.geometry.angles = static_cast<int>(parser.to_int(*e, "angles"));
    if (cfg.geometry.angles < 1) parser.fail(e->line, "angles must be positive");
  }
  if (auto e = take(geom, "beams")) {
    cfg.geometry.beams = static_cast<int>(parser.to_int(*e, "beams"));
    if (cfg.geometry.beams < 1) parser.fail(e->line, "beams must be positive");
  }
  if (auto e = take(geom, "spacing")) {
    cfg.geometry.spacing = parser.to_double(*e, "spacing");
    if (!(*cfg.geometry.spacing > 0)) parser.fail(e->line, "spacing must be positive");
  }
  reject_rest(geom, "geometry");

  auto& exp = sections["experiment"];
  std::vector<std::string> names;
  std::size_t solvers_line = 0;
  if (auto e = take(exp, "solvers")) {
    names = parser.to_list(*e);
    solvers_line = e->line;
  } else if (require_solvers) {
    parser.fail("missing required key 'solvers' in [experiment]");
  }
  if (auto e = take(exp, "noise")) {
    cfg.noise_levels.clear();
    for (const auto& item : parser.to_list(*e)) {
      const double v = parser.to_double(Entry{item, e->line}, "noise");
      if (!(v >= 0)) parser.fail(e->line, "noise levels must be nonnegative");
      cfg.noise_levels.push_back(v);
    }
  }
  if (auto e = take(exp, "repetitions")) {
    const long long r = parser.to_int(*e, "repetitions");
    if (r < 0) parser.fail(e->line, "repetitions must be nonnegative");
    cfg.repetitions = static_cast<int>(r);
  }
  if (auto e = take(exp, "seed")) cfg.seed = static_cast<std::uint64_t>(parser.to_count(*e, "seed"));
  if (auto e = take(exp, "out")) cfg.out_dir = e->value;
  if (auto e = take(exp, "threads")) {
    cfg.threads = static_cast<int>(parser.to_int(*e, "threads"));
    if (cfg.threads < 1) parser.fail(e->line, "threads must be positive");
  }
  reject_rest(exp, "experiment");

  const auto& known = available_solvers();
  for (const auto& name : names) {
    if (std::find(known.begin(), known.end(), name) == known.end())
      parser.fail(solvers_line, "unknown solver '" + name + "'; " + solver_list_message());
  }
  for (const auto& [section, entries] : sections) {
    if (section.rfind("solver.", 0) != 0) continue;
    const std::string name = section.substr(7);
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      const std::size_t line = entries.empty() ? 0 : entries.begin()->second.line;
      parser.fail(line, "unknown solver section [" + section + "]; " + solver_list_message());
    }
  }

  for (const auto& name : names) {
    SolverSettings s = SolverSettings::defaults_for(name);
    for (const auto& [key, e] : sections["solver"]) parser.apply_solver_key(s, key, e);
    if (auto it = sections.find("solver." + name); it != sections.end())
      for (const auto& [key, e] : it->second) parser.apply_solver_key(s, key, e);
    cfg.solvers.push_back(std::move(s));
  }
  if (cfg.solvers.empty() && require_solvers) parser.fail(solvers_line, "at least one solver is required");
  if (cfg.noise_levels.empty()) parser.fail("at least one noise level is required");
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path, bool require_solvers) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str(), path.string(), require_solvers);
}

}  // namespace sparsetik
