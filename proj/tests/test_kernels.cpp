#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "lossdepth/kernels.hpp"
#include "oracles.hpp"

using namespace lossdepth;

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

}  // namespace

TEST_CASE("kernel values") {
  const std::vector<double> x{0.3, -1.2}, y{1.3, -1.2};
  const auto g = KernelSpec::gaussian(1.0);
  CHECK(kernel_eval(g, x, x) == 1.0);
  CHECK(kernel_eval(g, x, y) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(kernel_eval(g, x, y) == doctest::Approx(0.367879).epsilon(1e-6));

  const std::vector<double> a{0.0, 0.0, 0.0}, b{1.0, 1.0, 1.0};
  CHECK(kernel_eval(KernelSpec::imq(1.0, -0.5), a, b) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(kernel_eval(KernelSpec::laplacian(2.0), a, b) == doctest::Approx(std::exp(-1.5)).epsilon(1e-15));
  CHECK(kernel_eval(KernelSpec::linear(), b, b) == 3.0);
  CHECK_THROWS_AS(kernel_eval(g, x, a), DimensionMismatch);
}

TEST_CASE("kernel parameters are validated") {
  CHECK_THROWS_AS(KernelSpec::gaussian(0.0), InvalidArgument);
  CHECK_THROWS_AS(KernelSpec::gaussian(-1.0), InvalidArgument);
  CHECK_THROWS_AS(KernelSpec::laplacian(0.0), InvalidArgument);
  CHECK_THROWS_AS(KernelSpec::imq(0.0, -0.5), InvalidArgument);
  CHECK_THROWS_AS(KernelSpec::imq(1.0, 0.5), InvalidArgument);
}

TEST_CASE("kernel bounds") {
  CHECK(KernelSpec::gaussian(2.0).bound() == 1.0);
  CHECK(KernelSpec::laplacian(2.0).bound() == 1.0);
  CHECK(KernelSpec::imq(2.0, -0.5).bound() == doctest::Approx(0.5));
  CHECK_FALSE(KernelSpec::linear().bounded());
  CHECK_THROWS_AS(KernelSpec::linear().bound(), InvalidArgument);

  Rng rng(21);
  for (int t = 0; t < 500; ++t) {
    const auto x = oracle::random_vector(rng, 3, 3.0), y = oracle::random_vector(rng, 3, 3.0);
    for (const auto& k : {KernelSpec::gaussian(0.7), KernelSpec::laplacian(1.5), KernelSpec::imq(1.3, -0.8)}) {
      const double v = k(x, y);
      CHECK(v > 0.0);
      CHECK(v <= k.bound());
      CHECK(v == k(y, x));
    }
  }
}

TEST_CASE("gaussian feature distance is bounded by sqrt(2 gamma) times the distance") {
  Rng rng(22);
  for (int t = 0; t < 500; ++t) {
    const double gamma = 0.01 + 3.0 * rng.uniform();
    const auto k = KernelSpec::gaussian(gamma);
    const auto x = oracle::random_vector(rng, 4), y = oracle::random_vector(rng, 4);
    const double dphi2 = 2.0 * (1.0 - k(x, y));
    CHECK(dphi2 <= 2.0 * gamma * squared_distance(x, y) + 1e-15);
  }
}

TEST_CASE("gram matrices") {
  const auto pts = Matrix::from_rows({{0.0}, {1.0}});
  const auto g = gram(KernelSpec::gaussian(1.0), pts, pts);
  CHECK(g(0, 0) == 1.0);
  CHECK(g(1, 1) == 1.0);
  CHECK(g(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(g(1, 0) == g(0, 1));

  Rng rng(4);
  const auto a = oracle::random_matrix(rng, 5, 3);
  for (const auto& k : {KernelSpec::gaussian(0.5), KernelSpec::laplacian(1.0), KernelSpec::imq(1.0, -0.5)}) {
    const auto m = gram(k, a, a);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) CHECK(m(i, j) == doctest::Approx(kernel_eval(k, a.row(i), a.row(j))));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(m));
    CHECK(es.eigenvalues().minCoeff() >= -1e-8 * es.eigenvalues().maxCoeff());
  }

  const auto big = oracle::random_matrix(rng, 120, 4);
  const auto seq = gram(KernelSpec::gaussian(0.3), big, big, 1);
  const auto par = gram(KernelSpec::gaussian(0.3), big, big, 8);
  CHECK(seq == par);
  for (std::size_t i = 0; i < 120; ++i) CHECK(seq(i, i) == 1.0);

  const auto other = oracle::random_matrix(rng, 7, 4);
  const auto rect = gram(KernelSpec::gaussian(0.3), big, other, 3);
  CHECK(rect.rows() == 120);
  CHECK(rect.cols() == 7);
  CHECK(rect(5, 6) == kernel_eval(KernelSpec::gaussian(0.3), big.row(5), other.row(6)));
  CHECK_THROWS_AS(gram(KernelSpec::gaussian(1.0), big, pts), DimensionMismatch);
}

TEST_CASE("median heuristic") {
  CHECK(median_heuristic(Matrix::from_rows({{0.0}, {1.0}, {2.0}})) == 1.0);
  CHECK(median_heuristic(Matrix::from_rows({{0.0, 0.0}, {2.0, 0.0}})) == 0.25);
  // Even count: squared distances {1, 1, 4, 4, 9, 1}: sorted 1 1 1 4 4 9, lower middle 1.
  CHECK(median_heuristic(Matrix::from_rows({{0.0}, {1.0}, {2.0}, {3.0}})) == 1.0);
  CHECK_THROWS_AS(median_heuristic(Matrix::from_rows({{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}})), DegenerateBandwidth);
  CHECK_THROWS_AS(median_heuristic(Matrix::from_rows({{1.0}})), InvalidArgument);
}

TEST_CASE("quartile heuristic") {
  CHECK(quartile_heuristic(Matrix::from_rows({{0.0, 0.0}, {2.0, 0.0}})) == 0.125);
  CHECK(quartile_heuristic(Matrix::from_rows({{0.0}, {1.0}, {2.0}})) == 0.5);
  CHECK_THROWS_AS(quartile_heuristic(Matrix::from_rows({{3.0}, {3.0}})), DegenerateBandwidth);
}

TEST_CASE("heuristics subsample large inputs deterministically") {
  Rng rng(8);
  const auto big = oracle::random_matrix(rng, kHeuristicSampleLimit + 500, 2);
  const double a = median_heuristic(big, 1), b = median_heuristic(big, 1), c = median_heuristic(big, 2);
  CHECK(a == b);
  // Two independent subsamples of a Gaussian: both near 1 / (2 * 2 * median(chi2_2)/2) = 1 / (4 ln 2).
  CHECK(a == doctest::Approx(1.0 / (4.0 * std::log(2.0))).epsilon(0.05));
  CHECK(c == doctest::Approx(a).epsilon(0.05));
}

TEST_CASE("describe is stable") {
  CHECK(KernelSpec::gaussian(0.5).describe() == "gaussian(gamma=0.5)");
  CHECK(KernelSpec::linear().describe() == "linear");
}
