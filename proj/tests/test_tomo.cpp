#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sparsetik/tomo.hpp"

using namespace sparsetik;
using namespace sparsetik::tomo;
using doctest::Approx;

TEST_CASE("matrix shape") {
  const auto A = build_parallel_tomo(TomoGeometry::parallel(50, 180, 70));
  CHECK(A.rows() == 12600);
  CHECK(A.cols() == 2500);
  const auto B = build_parallel_tomo(TomoGeometry::parallel(32, 60, 45));
  CHECK(B.rows() == 2700);
  CHECK(B.cols() == 1024);
}

TEST_CASE("horizontal ray through the middle of a row") {
  const int m = 8;
  const auto segs = trace_ray(m, Eigen::Vector2d(0.0, 0.5), Eigen::Vector2d(1.0, 0.0));
  REQUIRE(segs.size() == m);
  for (int c = 0; c < m; ++c) {
    CHECK(segs[c].cell == 3 * m + c);
    CHECK(segs[c].length == Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("diagonal ray through cell corners") {
  const int m = 6;
  const auto segs = trace_ray(m, Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, 1.0));
  REQUIRE(segs.size() == m);
  for (int k = 0; k < m; ++k) {
    // Top row holds the rightmost cell of the diagonal.
    CHECK(segs[k].cell == k * m + (m - 1 - k));
    CHECK(segs[k].length == Approx(std::sqrt(2.0)).epsilon(1e-13));
  }
}

TEST_CASE("rays missing the image give empty rows") {
  CHECK(trace_ray(4, Eigen::Vector2d(0.0, 3.0), Eigen::Vector2d(1.0, 0.0)).empty());
  CHECK(trace_ray(4, Eigen::Vector2d(0.0, 2.0), Eigen::Vector2d(1.0, 0.0)).empty());
  TomoGeometry g = TomoGeometry::parallel(4, 1, 3);
  g.detector_spacing = 10.0;
  const auto A = build_parallel_tomo(g);
  CHECK(A.row_cols(0).empty());
  CHECK(A.row_cols(2).empty());
  CHECK(A.row_cols(1).size() == 4);
}

TEST_CASE("entry and row-sum bounds") {
  const int m = 20;
  const auto A = build_parallel_tomo(TomoGeometry::parallel(m, 37, 29));
  for (double v : A.values()) {
    CHECK(v > 0);
    CHECK(v <= std::sqrt(2.0) + 1e-12);
  }
  for (Index i = 0; i < A.rows(); ++i) {
    double sum = 0;
    for (double v : A.row_values(i)) sum += v;
    CHECK(sum <= m * std::sqrt(2.0) + 1e-9);
  }
}

TEST_CASE("chord length equals the clipped line length") {
  const int m = 10;
  const auto A = build_parallel_tomo(TomoGeometry::parallel(m, 7, 5));
  const auto g = TomoGeometry::parallel(m, 7, 5);
  for (std::size_t a = 0; a < g.angles_deg.size(); ++a) {
    const double th = g.angles_deg[a] * std::numbers::pi / 180.0;
    for (int b = 0; b < g.n_beams; ++b) {
      const double s = g.beam_offset(b);
      // Chord of the line <x, n> = s through the square [-m/2, m/2]^2, by clipping
      // the direction parameter against both slabs.
      const double c = std::cos(th), sn = std::sin(th);
      double lo = -1e300, hi = 1e300;
      const double px = s * c, py = s * sn, dx = -sn, dy = c;
      for (auto [p, d] : {std::pair{px, dx}, std::pair{py, dy}}) {
        if (std::abs(d) < 1e-15) continue;
        double t0 = (-m / 2.0 - p) / d, t1 = (m / 2.0 - p) / d;
        if (t0 > t1) std::swap(t0, t1);
        lo = std::max(lo, t0);
        hi = std::min(hi, t1);
      }
      double sum = 0;
      for (double v : A.row_values(static_cast<Index>(a) * g.n_beams + b)) sum += v;
      CHECK(sum == Approx(std::max(0.0, hi - lo)).epsilon(1e-12));
    }
  }
}

TEST_CASE("opposite angles give mirrored projections") {
  const int m = 24;
  TomoGeometry g = TomoGeometry::parallel(m, 1, 31);
  g.angles_deg = {23.0, 203.0};
  const auto A = build_parallel_tomo(g);
  const VectorXd y = matvec(A, shepp_logan(m));
  for (int b = 0; b < g.n_beams; ++b) CHECK(std::abs(y(b) - y(2 * g.n_beams - 1 - b)) <= 1e-10);
}

TEST_CASE("projection mass matches image mass") {
  const int m = 50;
  const VectorXd x = shepp_logan(m);
  for (double angle : {0.0, 30.0, 77.0}) {
    TomoGeometry g = TomoGeometry::parallel(m, 1, 141);
    g.angles_deg = {angle};
    const VectorXd y = matvec(build_parallel_tomo(g), x);
    CHECK(g.detector_spacing * y.sum() == Approx(x.sum()).epsilon(0.02));
  }
}

TEST_CASE("adjoint identity on the assembled matrix") {
  const auto A = build_parallel_tomo(TomoGeometry::parallel(16, 20, 23));
  const VectorXd x = VectorXd::LinSpaced(A.cols(), -1, 2);
  const VectorXd y = VectorXd::LinSpaced(A.rows(), 3, -1);
  CHECK(std::abs(matvec(A, x).dot(y) - x.dot(transpose_matvec(A, y))) <=
        1e-12 * A.frobenius_norm() * x.norm() * y.norm());
}

TEST_CASE("geometry validation") {
  CHECK_THROWS(TomoGeometry::parallel(0, 10, 10));
  CHECK_THROWS(TomoGeometry::parallel(8, 0, 10));
  CHECK_THROWS(TomoGeometry::parallel(8, 10, 0));
  const auto g = TomoGeometry::parallel(8, 4, 4);
  CHECK(g.angles_deg == std::vector<double>{0.0, 45.0, 90.0, 135.0});
  CHECK(g.detector_spacing == 2.0);
  CHECK(g.beam_offset(0) == -3.0);
  CHECK(g.beam_offset(3) == 3.0);
}

TEST_CASE("Shepp-Logan phantom") {
  CHECK_THROWS(shepp_logan(7));
  CHECK(shepp_logan_table().size() == 10);
  CHECK(shepp_logan_value(0.0, 0.0) == Approx(2.0 - 0.98));

  for (int m : {8, 32, 50}) {
    const VectorXd x = shepp_logan(m);
    CHECK(x(0) == 0.0);
    CHECK(x(m - 1) == 0.0);
    CHECK(x(static_cast<Index>(m) * m - 1) == 0.0);
    CHECK(x.minCoeff() >= 0.0);
    CHECK(x.maxCoeff() <= 2.0);
  }
  const VectorXd x = shepp_logan(50);
  const auto nonzero = (x.array() != 0.0).count();
  CHECK(nonzero == 1244);
  CHECK(nonzero > 0.40 * 2500);
  CHECK(nonzero < 0.75 * 2500);
}

TEST_CASE("noise model") {
  const VectorXd y = VectorXd::LinSpaced(100, -3, 7);
  const auto clean = add_noise(y, {0.0, 1});
  CHECK(clean.y_delta == y);
  CHECK(clean.delta == 0.0);
  for (double level : {1e-3, 0.05, 0.1, 0.5}) {
    const auto nd = add_noise(y, {level, 9});
    CHECK(std::abs((y - nd.y_delta).norm() / y.norm() - level) <= 1e-12);
    CHECK(nd.delta == Approx(level * y.norm()).epsilon(1e-15));
  }
  CHECK_THROWS(add_noise(y, {-0.1, 1}));
}

TEST_CASE("noisy data is reproducible") {
  const auto g = TomoGeometry::parallel(32, 60, 45);
  const auto a = make_problem(g, {0.1, 42});
  const auto b = make_problem(g, {0.1, 42});
  CHECK(a.y_delta == b.y_delta);
  CHECK(a.y.norm() == Approx(1051.3543115000773).epsilon(1e-12));
  CHECK(a.y_delta(0) == Approx(1.4057492728954752).epsilon(1e-12));
  CHECK(a.y_delta.sum() == Approx(48073.660001677017).epsilon(1e-12));
  const auto c = make_problem(g, {0.1, 43});
  CHECK(c.y_delta != a.y_delta);
}
