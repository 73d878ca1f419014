#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "lossdepth/core.hpp"
#include "lossdepth/random.hpp"
#include "oracles.hpp"

using namespace lossdepth;

TEST_CASE("matrix rejects non-finite entries and wrong sizes") {
  CHECK_THROWS_AS(Matrix(1, 2, {1.0, NAN}), InvalidArgument);
  CHECK_THROWS_AS(Matrix(1, 2, {1.0, INFINITY}), InvalidArgument);
  CHECK_THROWS_AS(Matrix(2, 2, {1.0, 2.0, 3.0}), DimensionMismatch);
  CHECK_THROWS_AS(Matrix::from_rows({{1.0, 2.0}, {3.0}}), DimensionMismatch);
  const auto m = Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}});
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 2);
  CHECK(m(2, 1) == 6.0);
  const std::vector<std::size_t> idx{2, 0};
  CHECK(m.select_rows(idx) == Matrix::from_rows({{5.0, 6.0}, {1.0, 2.0}}));
}

TEST_CASE("weighted expectation examples") {
  const std::vector<double> zeros{0.0, 0.0};
  CHECK(weighted_expectation(zeros, 0.0) == 0.0);

  const double l2 = std::numbers::ln2;
  const std::vector<double> logs{l2, l2};
  CHECK(weighted_expectation(logs, l2) == doctest::Approx(l2).epsilon(1e-15));
  CHECK(l2 == doctest::Approx(0.6931).epsilon(1e-4));

  const std::vector<double> pos{1.0, 3.0};
  CHECK(weighted_expectation(pos, 2.0) == doctest::Approx(2.0).epsilon(1e-15));

  CHECK_THROWS_AS(weighted_expectation(std::vector<double>{}, 1.0), InvalidArgument);
}

TEST_CASE("weight scheme conserves mass") {
  for (std::size_t n = 1; n <= 1000; n += 37) {
    CHECK(static_cast<double>(n) * WeightScheme::positive_weight(n) + WeightScheme::negative_weight ==
          doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("weighted expectation is linear and permutation invariant") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(20);
    auto a = oracle::random_vector(rng, n), b = oracle::random_vector(rng, n);
    const double na = rng.normal(), nb = rng.normal(), s = rng.normal(), t = rng.normal();
    std::vector<double> mix(n);
    for (std::size_t i = 0; i < n; ++i) mix[i] = s * a[i] + t * b[i];
    CHECK(weighted_expectation(mix, s * na + t * nb) ==
          doctest::Approx(s * weighted_expectation(a, na) + t * weighted_expectation(b, nb)).epsilon(1e-12));
    auto shuffled = a;
    rng.shuffle(shuffled);
    CHECK(weighted_expectation(shuffled, na) == doctest::Approx(weighted_expectation(a, na)).epsilon(1e-13));
  }
}

TEST_CASE("constant zero classifier gives log 2 and 1") {
  for (std::size_t n : {1u, 2u, 7u, 100u}) {
    std::vector<double> logistic(n, loss_value(LossKind::Logistic, 0.0, 1));
    std::vector<double> hinge(n, loss_value(LossKind::Hinge, 0.0, 1));
    CHECK(weighted_expectation(logistic, loss_value(LossKind::Logistic, 0.0, -1)) ==
          doctest::Approx(std::numbers::ln2).epsilon(1e-15));
    CHECK(weighted_expectation(hinge, loss_value(LossKind::Hinge, 0.0, -1)) == 1.0);
  }
}

TEST_CASE("loss definitions") {
  CHECK(loss_value(LossKind::ZeroOne, -0.5, 1) == 1.0);
  CHECK(loss_value(LossKind::ZeroOne, 0.0, 1) == 0.0);
  CHECK(loss_value(LossKind::ZeroOne, 0.5, -1) == 1.0);
  CHECK(loss_value(LossKind::Hinge, 0.25, 1) == 0.75);
  CHECK(loss_value(LossKind::Hinge, 3.0, 1) == 0.0);
  CHECK(loss_value(LossKind::Hinge, 3.0, -1) == 4.0);
  CHECK(loss_value(LossKind::Logistic, 2.0, -1) == doctest::Approx(std::log(1.0 + std::exp(2.0))));
}

TEST_CASE("logistic loss and sigmoid are stable in the tails") {
  CHECK(logistic_loss(800.0) == 0.0);
  CHECK(logistic_loss(-800.0) == doctest::Approx(800.0));
  CHECK(std::isfinite(logistic_loss(-1e300)));
  CHECK(sigmoid(-800.0) == 0.0);
  CHECK(sigmoid(800.0) == 1.0);
  for (double m = -30.0; m <= 30.0; m += 0.7) {
    CHECK(logistic_loss(m) == doctest::Approx(oracle::naive_logistic(-m)).epsilon(1e-13));
    CHECK(sigmoid(m) + sigmoid(-m) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("validation reports violations") {
  const auto q = Matrix::from_rows({{0.0, 0.0}, {1.0, 1.0}});
  const std::vector<double> z3{0.0, 0.0, 0.0};
  const std::vector<double> z2{0.5, 0.5};

  SUBCASE("dimension mismatch") {
    auto r = validate_problem({q, z3, {}});
    CHECK(r.has(ViolationKind::DimensionMismatch));
    CHECK(r.summary().find("dimension mismatch") != std::string::npos);
    CHECK_THROWS_AS(require_valid({q, z3, {}}), DimensionMismatch);
  }
  SUBCASE("zero lambda") {
    DepthOptions o;
    o.lambda = 0.0;
    auto r = validate_problem({q, z2, o});
    CHECK(r.has(ViolationKind::UnboundedMinimizer));
    CHECK(r.summary().find("minimizer may be unbounded") != std::string::npos);
    CHECK_THROWS_AS(require_valid({q, z2, o}), InvalidArgument);
  }
  SUBCASE("well formed gaussian problem") {
    DepthOptions o;
    o.loss = LossKind::Hinge;
    o.kernel = KernelSpec::gaussian(1.0);
    CHECK(validate_problem({q, z2, o}).ok());
  }
  SUBCASE("hinge without kernel, unbounded kernel") {
    DepthOptions o;
    o.loss = LossKind::Hinge;
    CHECK(validate_problem({q, z2, o}).has(ViolationKind::MissingKernel));
    o.kernel = KernelSpec::linear();
    CHECK(validate_problem({q, z2, o}).has(ViolationKind::UnboundedKernel));
  }
  SUBCASE("non-finite query and empty reference") {
    const std::vector<double> bad{0.0, NAN};
    CHECK(validate_problem({q, bad, {}}).has(ViolationKind::NonFiniteQuery));
    const Matrix empty(0, 2);
    CHECK(validate_problem({empty, z2, {}}).has(ViolationKind::EmptyReference));
  }
  SUBCASE("solver config") {
    DepthOptions o;
    o.solver.tolerance = 0.0;
    CHECK(validate_problem({q, z2, o}).has(ViolationKind::InvalidSolverConfig));
    o.solver.tolerance = 1e-8;
    o.solver.step_rule = StepRule::Fixed;
    CHECK(validate_problem({q, z2, o}).has(ViolationKind::InvalidSolverConfig));
  }
}

TEST_CASE("derived seeds are stable and distinct") {
  CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
  CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
  Rng a(5), b(5);
  for (int i = 0; i < 10; ++i) CHECK(a.normal() == b.normal());
}

TEST_CASE("rng draws have the expected moments") {
  Rng rng(3);
  double s = 0.0, s2 = 0.0, u = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
    const double v = rng.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    u += v;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  CHECK(std::abs(u / n - 0.5) < 0.005);
  const auto pick = rng.sample_without_replacement(10, 10);
  std::vector<std::size_t> sorted(pick);
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> all(10);
  std::iota(all.begin(), all.end(), 0);
  CHECK(sorted == all);
}
