#pragma once

// Parallel-beam CT test problems: Shepp-Logan phantom, exact ray/pixel
// intersection matrix, and relative Gaussian noise.
//
// Image convention: an m x m grid of unit pixels covering [-m/2, m/2]^2, stored
// row-major with row 0 at the top (largest y). Pixel (r, c) has index r * m + c.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sparsetik/linalg.hpp"

namespace sparsetik::tomo {

struct TomoGeometry {
  int m = 0;
  std::vector<double> angles_deg;
  int n_beams = 0;
  double detector_spacing = 1.0;  // pixel units

  /// n_angles equally spaced angles in [0, 180) and spacing m / n_beams.
  static TomoGeometry parallel(int m, int n_angles, int n_beams);

  Index rows() const { return static_cast<Index>(angles_deg.size()) * n_beams; }
  Index cols() const { return static_cast<Index>(m) * m; }

  /// Signed distance of beam j from the rotation center; beams are centered.
  double beam_offset(int j) const { return (j - 0.5 * (n_beams - 1)) * detector_spacing; }

  void validate() const;
};

struct RaySegment {
  Index cell = 0;
  double length = 0;
};

/// Exact intersection lengths of the line {point + t dir} with the pixel cells,
/// sorted by cell index. Empty when the line misses the image.
std::vector<RaySegment> trace_ray(int m, const Eigen::Vector2d& point, const Eigen::Vector2d& dir);

/// Row (a * n_beams + b) holds the chord lengths of beam b at angle a. The ray at
/// angle theta and offset s is the line {x : <x, (cos theta, sin theta)> = s}.
CsrMatrix<double> build_parallel_tomo(const TomoGeometry& geom);

struct Ellipse {
  double intensity;
  double semi_x;
  double semi_y;
  double center_x;
  double center_y;
  double phi_deg;

  bool contains(double x, double y) const;
};

/// Ten-ellipse Shepp-Logan table (original intensities) on [-1, 1]^2.
std::span<const Ellipse> shepp_logan_table();

/// Phantom density at (x, y) in the normalized [-1, 1]^2 frame.
double shepp_logan_value(double x, double y);

/// m x m phantom sampled at pixel centers. Requires m >= 8.
VectorXd shepp_logan(int m);

struct NoiseModel {
  double rel_level = 0;
  std::uint64_t seed = 0;
};

struct NoisyData {
  VectorXd y_delta;
  double delta = 0;  // == ||y - y_delta||
};

/// y + rel_level ||y|| r with r standard normal, normalized to ||r|| = 1.
NoisyData add_noise(const VectorXd& y, const NoiseModel& model);

struct ProblemInstance {
  TomoGeometry geometry;
  CsrMatrix<double> A;
  VectorXd x_true;
  VectorXd y;
  VectorXd y_delta;
  double delta = 0;
};

ProblemInstance make_problem(const TomoGeometry& geom, const NoiseModel& noise);

}  // namespace sparsetik::tomo
