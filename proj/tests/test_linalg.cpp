#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "sparsetik/linalg.hpp"

using namespace sparsetik;

namespace {

CsrMatrix<double> small_upper() {
  DenseMatrix<double> D(2, 2);
  D << 1, 2, 0, 3;
  return CsrMatrix<double>::from_dense(D);
}

DenseMatrix<double> random_sparse_dense(std::mt19937_64& rng, Index rows, Index cols, double density) {
  std::uniform_real_distribution<double> u(0, 1);
  std::normal_distribution<double> n(0, 1);
  DenseMatrix<double> D = DenseMatrix<double>::Zero(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      if (u(rng) < density) D(i, j) = n(rng);
  return D;
}

VectorXd random_vector(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> normal(0, 1);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

}  // namespace

TEST_CASE("matvec on small matrices") {
  VectorXd x(2);
  x << 3, -1;
  CHECK(matvec(CsrMatrix<double>::identity(2), x) == x);

  const auto A = small_upper();
  const VectorXd y = matvec(A, VectorXd::Ones(2));
  CHECK(y(0) == 3);
  CHECK(y(1) == 3);
}

TEST_CASE("transpose_matvec on small matrices") {
  VectorXd five(1);
  five << 5;
  CHECK(transpose_matvec(CsrMatrix<double>::identity(1), five)(0) == 5);

  const VectorXd x = transpose_matvec(small_upper(), VectorXd::Ones(2));
  CHECK(x(0) == 1);
  CHECK(x(1) == 5);
}

TEST_CASE("dimension mismatch names both sizes") {
  const auto A = small_upper();
  try {
    matvec(A, VectorXd::Ones(3));
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    CHECK(e.expected() == 2);
    CHECK(e.actual() == 3);
    CHECK(std::string(e.what()).find("expected dimension 2, got 3") != std::string::npos);
  }
  CHECK_THROWS_AS(transpose_matvec(A, VectorXd::Ones(5)), DimensionError);
}

TEST_CASE("CSR validation rejects malformed structure") {
  CHECK_THROWS(CsrMatrix<double>(2, 2, {0, 1}, {0}, {1.0}));
  CHECK_THROWS(CsrMatrix<double>(1, 2, {0, 1}, {2}, {1.0}));
  CHECK_THROWS(CsrMatrix<double>(2, 2, {0, 1, 0}, {0}, {1.0}));
  CHECK_THROWS(CsrMatrix<double>(1, 1, {0, 1}, {0}, {std::nan("")}));
  CHECK_NOTHROW(CsrMatrix<double>(2, 2, {0, 0, 1}, {1}, {2.0}));
}

TEST_CASE("row builder matches dense assembly") {
  CsrRowBuilder<double> b(3, 4);
  const std::vector<Index> c0{1, 3};
  const std::vector<double> v0{2.0, -1.0};
  b.append_row(c0, v0);
  b.append_row({}, {});
  const std::vector<Index> c2{0};
  const std::vector<double> v2{4.0};
  b.append_row(c2, v2);
  const auto A = std::move(b).finish();
  DenseMatrix<double> D = DenseMatrix<double>::Zero(3, 4);
  D(0, 1) = 2;
  D(0, 3) = -1;
  D(2, 0) = 4;
  CHECK(A.to_dense() == D);
  CHECK(A.nnz() == 3);
  CHECK(A.frobenius_norm() == doctest::Approx(std::sqrt(21.0)));
}

TEST_CASE("products match a dense oracle") {
  std::mt19937_64 rng(7);
  const DenseMatrix<double> D = random_sparse_dense(rng, 50, 30, 0.2);
  const auto A = CsrMatrix<double>::from_dense(D);
  const VectorXd x = random_vector(rng, 30);
  const VectorXd y = random_vector(rng, 50);
  CHECK((matvec(A, x) - D * x).norm() <= 1e-12 * (D * x).norm());
  CHECK((transpose_matvec(A, y) - D.transpose() * y).norm() <= 1e-12 * (D.transpose() * y).norm());
}

TEST_CASE("adjoint identity on random instances") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(1, 40);
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = dim(rng), n = dim(rng);
    const auto A = CsrMatrix<double>::from_dense(random_sparse_dense(rng, m, n, 0.3));
    const VectorXd x = random_vector(rng, n);
    const VectorXd y = random_vector(rng, m);
    const double lhs = matvec(A, x).dot(y);
    const double rhs = x.dot(transpose_matvec(A, y));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1e-300, A.frobenius_norm() * x.norm() * y.norm()));
  }
}

TEST_CASE("spectral norm estimate matches the SVD") {
  std::mt19937_64 rng(3);
  const DenseMatrix<double> D = random_sparse_dense(rng, 40, 25, 0.5);
  const double sigma = Eigen::JacobiSVD<DenseMatrix<double>>(D).singularValues()(0);
  CHECK(estimate_spectral_norm(CsrMatrix<double>::from_dense(D)) == doctest::Approx(sigma).epsilon(1e-6));
  CHECK(estimate_spectral_norm(CsrMatrix<double>(3, 3)) == 0.0);
}

TEST_CASE("cg_solve small systems") {
  VectorXd b(3);
  b << 1, 2, 3;
  auto identity = [](const VectorXd& v) -> VectorXd { return v; };
  const auto r1 = cg_solve<double>(identity, b, 1e-10, 10);
  CHECK(r1.converged);
  CHECK(r1.iterations == 1);
  CHECK((r1.x - b).norm() < 1e-14);

  VectorXd d(2), rhs(2);
  d << 1, 4;
  rhs << 1, 4;
  auto diag = [&](const VectorXd& v) -> VectorXd { return d.cwiseProduct(v); };
  const auto r2 = cg_solve<double>(diag, rhs, 1e-12, 10);
  CHECK(r2.x(0) == doctest::Approx(1.0));
  CHECK(r2.x(1) == doctest::Approx(1.0));
}

TEST_CASE("cg_solve matches a dense solve and is monotone") {
  std::mt19937_64 rng(5);
  for (int n : {5, 20, 30}) {
    const DenseMatrix<double> D = random_sparse_dense(rng, n, n, 1.0);
    const auto A = CsrMatrix<double>::from_dense(D);
    const VectorXd g = random_vector(rng, n).cwiseAbs();
    const double alpha = 0.1;
    auto apply = [&](const VectorXd& w) -> VectorXd {
      return g.cwiseProduct(transpose_matvec(A, matvec(A, g.cwiseProduct(w)))) + alpha * w;
    };
    const DenseMatrix<double> M =
        g.asDiagonal() * D.transpose() * D * g.asDiagonal() + alpha * DenseMatrix<double>::Identity(n, n);
    const VectorXd b = random_vector(rng, n);
    const VectorXd x_ref = M.ldlt().solve(b);

    const auto res = cg_solve<double>(apply, b, 1e-12, 10 * n);
    CHECK(res.converged);
    CHECK((res.x - x_ref).norm() <= 1e-8 * x_ref.norm());
    for (std::size_t k = 1; k < res.residual_history.size(); ++k)
      CHECK(res.residual_history[k] <= res.residual_history[k - 1]);
  }
}

TEST_CASE("cg_solve terminates within n iterations on well-conditioned systems") {
  std::mt19937_64 rng(6);
  for (int n : {3, 10, 30}) {
    const DenseMatrix<double> B = random_sparse_dense(rng, n, n, 1.0) / std::sqrt(double(n));
    const DenseMatrix<double> M = B.transpose() * B + DenseMatrix<double>::Identity(n, n);
    const VectorXd b = random_vector(rng, n);
    const VectorXd x_ref = M.ldlt().solve(b);
    auto apply = [&](const VectorXd& v) -> VectorXd { return M * v; };
    const auto res = cg_solve<double>(apply, b, 0.0, static_cast<std::size_t>(n));
    CHECK((res.x - x_ref).norm() <= 1e-10 * x_ref.norm());
  }
}

TEST_CASE("cg_solve reports non-positive curvature with the iteration") {
  VectorXd b(2);
  b << 1, 1;
  auto negative = [](const VectorXd& v) -> VectorXd { return -v; };
  try {
    cg_solve<double>(negative, b, 1e-10, 10);
    FAIL("expected NonPositiveCurvature");
  } catch (const NonPositiveCurvature& e) {
    CHECK(e.iteration() == 1);
    CHECK(std::string(e.what()).find("iteration 1") != std::string::npos);
  }
}

TEST_CASE("float instantiation") {
  Eigen::MatrixXf D(2, 2);
  D << 1, 2, 0, 3;
  const auto A = CsrMatrix<float>::from_dense(D);
  const Eigen::VectorXf y = matvec(A, Eigen::VectorXf::Ones(2));
  CHECK(y(0) == 3.0f);
}
