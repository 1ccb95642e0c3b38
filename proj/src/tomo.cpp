#include "sparsetik/tomo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace sparsetik::tomo {

namespace {

constexpr Ellipse kSheppLogan[] = {
#include "shepp_logan_v1.inc"
};

// Segments shorter than this (in pixel units) come from coincident grid
// crossings and are dropped.
constexpr double kMinSegment = 1e-12;

}  // namespace

TomoGeometry TomoGeometry::parallel(int m, int n_angles, int n_beams) {
  TomoGeometry g;
  g.m = m;
  g.n_beams = n_beams;
  g.detector_spacing = n_beams > 0 ? static_cast<double>(m) / n_beams : 1.0;
  g.angles_deg.reserve(static_cast<std::size_t>(std::max(n_angles, 0)));
  for (int k = 0; k < n_angles; ++k) g.angles_deg.push_back(180.0 * k / n_angles);
  g.validate();
  return g;
}

void TomoGeometry::validate() const {
  if (m < 1) throw std::invalid_argument("TomoGeometry: m must be positive");
  if (n_beams < 1) throw std::invalid_argument("TomoGeometry: n_beams must be positive");
  if (angles_deg.empty()) throw std::invalid_argument("TomoGeometry: at least one angle required");
  if (!(detector_spacing > 0)) throw std::invalid_argument("TomoGeometry: detector spacing must be positive");
}

std::vector<RaySegment> trace_ray(int m, const Eigen::Vector2d& point, const Eigen::Vector2d& dir) {
  const double h = 0.5 * m;
  const double dnorm = dir.norm();
  if (!(dnorm > 0)) throw std::invalid_argument("trace_ray: zero direction");
  const Eigen::Vector2d d = dir / dnorm;

  // Clip the line against the image square (slab test).
  double t_lo = -std::numeric_limits<double>::infinity();
  double t_hi = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 2; ++axis) {
    if (d(axis) == 0.0) {
      if (point(axis) <= -h || point(axis) >= h) return {};
      continue;
    }
    double t0 = (-h - point(axis)) / d(axis);
    double t1 = (h - point(axis)) / d(axis);
    if (t0 > t1) std::swap(t0, t1);
    t_lo = std::max(t_lo, t0);
    t_hi = std::min(t_hi, t1);
  }
  if (!(t_hi - t_lo > kMinSegment)) return {};

  std::vector<double> ts{t_lo, t_hi};
  for (int axis = 0; axis < 2; ++axis) {
    if (d(axis) == 0.0) continue;
    for (int k = 0; k <= m; ++k) {
      const double t = (-h + k - point(axis)) / d(axis);
      if (t > t_lo && t < t_hi) ts.push_back(t);
    }
  }
  std::sort(ts.begin(), ts.end());

  std::vector<RaySegment> segs;
  segs.reserve(ts.size());
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const double len = ts[i + 1] - ts[i];
    if (len <= kMinSegment) continue;
    const double tm = 0.5 * (ts[i] + ts[i + 1]);
    const double x = point(0) + tm * d(0);
    const double y = point(1) + tm * d(1);
    const int col = std::clamp(static_cast<int>(std::floor(x + h)), 0, m - 1);
    const int row = std::clamp(static_cast<int>(std::floor(h - y)), 0, m - 1);
    segs.push_back({static_cast<Index>(row) * m + col, len});
  }
  std::sort(segs.begin(), segs.end(), [](const RaySegment& a, const RaySegment& b) { return a.cell < b.cell; });

  // A cell can only be entered once by a straight line; this merges the
  // pieces split by a crossing that lies exactly on a cell corner.
  std::vector<RaySegment> merged;
  for (const auto& s : segs) {
    if (!merged.empty() && merged.back().cell == s.cell) {
      merged.back().length += s.length;
    } else {
      merged.push_back(s);
    }
  }
  return merged;
}

CsrMatrix<double> build_parallel_tomo(const TomoGeometry& geom) {
  geom.validate();
  CsrRowBuilder<double> builder(geom.rows(), geom.cols());
  std::vector<Index> cols;
  std::vector<double> vals;
  for (double angle : geom.angles_deg) {
    const double th = angle * std::numbers::pi / 180.0;
    const Eigen::Vector2d normal(std::cos(th), std::sin(th));
    const Eigen::Vector2d dir(-std::sin(th), std::cos(th));
    for (int b = 0; b < geom.n_beams; ++b) {
      const auto segs = trace_ray(geom.m, geom.beam_offset(b) * normal, dir);
      cols.clear();
      vals.clear();
      for (const auto& s : segs) {
        cols.push_back(s.cell);
        vals.push_back(s.length);
      }
      builder.append_row(cols, vals);
    }
  }
  return std::move(builder).finish();
}

bool Ellipse::contains(double x, double y) const {
  const double phi = phi_deg * std::numbers::pi / 180.0;
  const double dx = x - center_x;
  const double dy = y - center_y;
  const double u = dx * std::cos(phi) + dy * std::sin(phi);
  const double v = -dx * std::sin(phi) + dy * std::cos(phi);
  return (u * u) / (semi_x * semi_x) + (v * v) / (semi_y * semi_y) <= 1.0;
}

std::span<const Ellipse> shepp_logan_table() { return kSheppLogan; }

double shepp_logan_value(double x, double y) {
  double v = 0.0;
  for (const auto& e : kSheppLogan)
    if (e.contains(x, y)) v += e.intensity;
  return v;
}

VectorXd shepp_logan(int m) {
  if (m < 8) throw std::invalid_argument("shepp_logan: m must be at least 8, got " + std::to_string(m));
  VectorXd img(static_cast<Index>(m) * m);
  for (int r = 0; r < m; ++r) {
    const double y = 1.0 - (2.0 * r + 1.0) / m;
    for (int c = 0; c < m; ++c) {
      const double x = -1.0 + (2.0 * c + 1.0) / m;
      img(static_cast<Index>(r) * m + c) = shepp_logan_value(x, y);
    }
  }
  return img;
}

NoisyData add_noise(const VectorXd& y, const NoiseModel& model) {
  if (!(model.rel_level >= 0)) throw std::invalid_argument("add_noise: rel_level must be >= 0");
  const double ynorm = y.norm();
  if (model.rel_level == 0.0 || ynorm == 0.0) return {y, 0.0};
  std::mt19937_64 rng(model.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd r(y.size());
  for (Index i = 0; i < r.size(); ++i) r(i) = normal(rng);
  r.normalize();
  const double delta = model.rel_level * ynorm;
  return {y + delta * r, delta};
}

ProblemInstance make_problem(const TomoGeometry& geom, const NoiseModel& noise) {
  ProblemInstance inst;
  inst.geometry = geom;
  inst.A = build_parallel_tomo(geom);
  inst.x_true = shepp_logan(geom.m);
  inst.y = matvec(inst.A, inst.x_true);
  auto noisy = add_noise(inst.y, noise);
  inst.y_delta = std::move(noisy.y_delta);
  inst.delta = noisy.delta;
  return inst;
}

}  // namespace sparsetik::tomo
