#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lossdepth/depths.hpp"
#include "lossdepth/eval.hpp"
#include "oracles.hpp"

using namespace lossdepth;

namespace {

DepthOptions lr(double lambda) {
  DepthOptions o;
  o.lambda = lambda;
  return o;
}

DepthOptions svm(double lambda, double gamma) {
  DepthOptions o;
  o.loss = LossKind::Hinge;
  o.lambda = lambda;
  o.kernel = KernelSpec::gaussian(gamma);
  return o;
}

const HalfspaceConfig exact1d{Exact1D{}};
const HalfspaceConfig exact2d{Exact2D{}};

}  // namespace

TEST_CASE("halfspace depth in 1D") {
  const auto q = Matrix::from_rows({{1.0}, {2.0}, {3.0}});
  const std::vector<double> z{2.0};
  CHECK(halfspace_depth(z, q, exact1d) == doctest::Approx(2.0 / 3.0));
  const std::vector<double> outside{3.5};
  CHECK(halfspace_depth(outside, q, exact1d) == 0.0);

  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const auto m = oracle::random_lattice(rng, 1 + rng.uniform_index(15), 1, 3);
    std::vector<double> xs(m.values().begin(), m.values().end());
    const std::vector<double> zz{static_cast<double>(static_cast<int>(rng.uniform_index(9)) - 4)};
    CHECK(halfspace_depth(zz, m, exact1d) == oracle::halfspace_1d(zz[0], xs));
  }
}

TEST_CASE("halfspace depth in 2D matches the brute-force oracle") {
  Rng rng(2);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng.uniform_index(25);
    const bool lattice = t % 2 == 0;
    const auto q = lattice ? oracle::random_lattice(rng, n, 2, 2) : oracle::random_matrix(rng, n, 2);
    const auto z = lattice ? std::vector<double>{static_cast<double>(rng.uniform_index(3)) - 1.0,
                                                 static_cast<double>(rng.uniform_index(3)) - 1.0}
                           : oracle::random_vector(rng, 2, 0.7);
    const double exact = halfspace_depth(z, q, exact2d);
    CHECK(exact == oracle::halfspace_2d_bruteforce(z, q));
    CHECK(exact <= oracle::halfspace_2d_sweep(z, q, 720) + 1e-15);
    CHECK(exact >= 0.0);
    CHECK(exact <= 1.0);
  }
}

TEST_CASE("halfspace depth outside the convex hull is zero") {
  const auto q = Matrix::from_rows({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}});
  const std::vector<double> z{2.0, 2.0};
  CHECK(halfspace_depth(z, q, exact2d) == 0.0);
  const std::vector<double> corner{0.0, 0.0};
  CHECK(halfspace_depth(corner, q, exact2d) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("halfspace depth rejects mode/dimension mismatch") {
  const auto q = Matrix::from_rows({{0.0, 0.0}, {1.0, 0.0}});
  const std::vector<double> z{0.0, 0.0};
  CHECK_THROWS_AS(halfspace_depth(z, q, exact1d), InvalidArgument);
  CHECK_THROWS_AS(halfspace_depth(z, q, HalfspaceConfig{RandomDirections{0, 0}}), InvalidArgument);
  const std::vector<double> z3{0.0, 0.0, 0.0};
  CHECK_THROWS_AS(halfspace_depth(z3, q, exact2d), DimensionMismatch);
}

TEST_CASE("halfspace depth as zero-one loss") {
  const auto q = Matrix::from_rows({{1.0}, {2.0}, {3.0}});
  const std::vector<double> z{2.0};
  const auto dirs = halfspace_candidate_directions(z, q);
  CHECK(dirs.rows() == 2);
  CHECK(halfspace_depth_as_loss(z, q, dirs) == doctest::Approx(2.0 / 3.0));
  CHECK(halfspace_depth_as_loss(z, q, dirs, BoundaryRule::StrictZeroOne) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(halfspace_depth_as_loss(z, q, Matrix(0, 1)), InvalidArgument);

  const std::vector<double> far{10.0};
  CHECK(halfspace_depth_as_loss(far, q, halfspace_candidate_directions(far, q)) == 0.0);
}

TEST_CASE("closed-rule loss equals halfspace depth; strict rule differs only through ties") {
  Rng rng(3);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng.uniform_index(25);
    const bool lattice = t % 2 == 0;
    const auto q = lattice ? oracle::random_lattice(rng, n, 2, 2) : oracle::random_matrix(rng, n, 2);
    const auto z = oracle::random_vector(rng, 2, lattice ? 0.0 : 0.7);
    const auto dirs = halfspace_candidate_directions(z, q);
    if (dirs.empty()) continue;
    const double depth = halfspace_depth(z, q, exact2d);
    CHECK(halfspace_depth_as_loss(z, q, dirs, BoundaryRule::Closed) == depth);
    const double strict = halfspace_depth_as_loss(z, q, dirs, BoundaryRule::StrictZeroOne);
    CHECK(strict <= depth);
    bool on_some_hyperplane = false;
    for (std::size_t i = 0; i < q.rows(); ++i) {
      for (std::size_t j = 0; j < q.rows(); ++j) {
        const double cross = (q(i, 0) - z[0]) * (q(j, 1) - z[1]) - (q(i, 1) - z[1]) * (q(j, 0) - z[0]);
        if (i != j && cross == 0.0) on_some_hyperplane = true;
      }
      if (q(i, 0) == z[0] && q(i, 1) == z[1]) on_some_hyperplane = true;
    }
    if (!on_some_hyperplane) CHECK(strict == depth);
  }
}

TEST_CASE("random directions give an upper bound") {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const auto q = oracle::random_matrix(rng, 40, 2);
    const auto z = oracle::random_vector(rng, 2, 0.5);
    const double exact = halfspace_depth(z, q, exact2d);
    const double approx = halfspace_depth(z, q, HalfspaceConfig{RandomDirections{200, static_cast<std::uint64_t>(t)}});
    CHECK(approx >= exact);
  }
  const auto q5 = oracle::random_matrix(rng, 100, 5);
  const std::vector<double> z5(5, 0.0);
  const auto cfg = HalfspaceConfig::for_dimension(5, 300, 9);
  CHECK(std::holds_alternative<RandomDirections>(cfg.mode));
  CHECK(halfspace_depth(z5, q5, cfg) == halfspace_depth(z5, q5, cfg));
  CHECK(std::holds_alternative<Exact2D>(HalfspaceConfig::for_dimension(2).mode));
  CHECK(std::holds_alternative<Exact1D>(HalfspaceConfig::for_dimension(1).mode));
}

TEST_CASE("logistic depth far from the data") {
  // For z at distance R -> infinity a weight of norm O(1/R) classifies z at no
  // cost, leaving min_b 1/2 log(1 + e^-b) + lambda b^2 for the (penalized)
  // intercept. Its stationarity condition sigma(-b) = 4 lambda b is solved by
  // bisection.
  auto far_limit = [](double lambda) {
    double lo = 0.0, hi = 50.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (1.0 / (1.0 + std::exp(mid)) > 4.0 * lambda * mid ? lo : hi) = mid;
    }
    return 0.5 * std::log1p(std::exp(-lo)) / std::numbers::ln2;
  };
  // Symmetric sample: by convexity the data directions cannot lower the loss.
  Rng rng(5);
  std::vector<double> pts;
  for (int i = 0; i < 25; ++i) {
    const double a = rng.normal(), b = rng.normal();
    pts.insert(pts.end(), {a, b, -a, -b});
  }
  const Matrix q(50, 2, pts);
  const std::vector<double> z{1e6, -1e6};
  for (double lambda : {1.0, 0.1, 1e-3}) {
    const auto r = logistic_depth(z, q, lr(lambda));
    // Gradient terms scale with |z| = 1e6, so roundoff limits the residual.
    CHECK(r.residual <= 1e-6);
    CHECK(r.value == doctest::Approx(far_limit(lambda)).epsilon(1e-4));
    CHECK(r.coefficients.size() == 3);
  }
  CHECK(logistic_depth(z, q, lr(1e-3)).value <= 0.02);
}

TEST_CASE("logistic depth on the symmetric 1D problem matches grid search") {
  const auto q = Matrix::from_rows({{-1.0}, {1.0}});
  const std::vector<double> z{0.0};
  const auto r = logistic_depth(z, q, lr(1.0));
  REQUIRE(r.converged);
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> arg(2);
  for (int a = -300; a <= 300; ++a) {
    for (int b = -300; b <= 300; ++b) {
      const std::vector<double> w{a * 1e-3, b * 1e-3};
      const double v = oracle::logistic_objective(w, q, z, 1.0, true);
      if (v < best) best = v, arg = w;
    }
  }
  CHECK(std::abs(r.coefficients[0]) <= 1e-6);
  CHECK(std::abs(r.coefficients[0] - arg[0]) <= 1e-3);
  CHECK(std::abs(r.coefficients[1] - arg[1]) <= 1e-3);
  // Loss only: subtract the penalty from the grid optimum.
  const double reg = arg[0] * arg[0] + arg[1] * arg[1];
  CHECK(r.raw_value == doctest::Approx(best - reg).epsilon(1e-3));

  auto plus = lr(1.0);
  plus.reporting = Reporting::LossPlusReg;
  plus.normalized = false;
  CHECK(logistic_depth(z, q, plus).value == doctest::Approx(best).epsilon(1e-6));
}

TEST_CASE("normalized depths are bounded") {
  Rng rng(6);
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = 1 + rng.uniform_index(5), n = 1 + rng.uniform_index(60);
    const auto q = oracle::random_matrix(rng, n, d, 1.0 + 3.0 * rng.uniform());
    const auto z = oracle::random_vector(rng, d, 3.0);
    const double lambda = std::pow(10.0, -2.0 + 3.0 * rng.uniform());
    const auto a = logistic_depth(z, q, lr(lambda));
    CHECK(a.value >= -1e-9);
    CHECK(a.value <= 1.0 + 1e-9);
    const auto b = svm_depth(z, q, svm(lambda, 0.1 + rng.uniform()));
    CHECK(b.value >= -1e-9);
    CHECK(b.value <= 1.0 + 1e-9);
  }
}

TEST_CASE("svm depth of a single reference point at itself") {
  const auto q = Matrix::from_rows({{0.4, 0.1}});
  const std::vector<double> z{0.4, 0.1};
  for (double lambda : {0.01, 0.1, 1.0}) CHECK(svm_depth(z, q, svm(lambda, 1.0)).value == doctest::Approx(1.0));
}

TEST_CASE("svm depth on the bigaussian sample orders centre, midpoint and far point") {
  const auto data = gen_bigaussian(200, bigaussian_centers(), 2, 0);
  auto opts = svm(1.0, median_heuristic(data));
  const auto queries = Matrix::from_rows({{-3.5, -3.5}, {3.5, 3.5}, {0.0, 0.0}, {10.0, 10.0}});
  const auto out = depth_batch({data, queries, SvmDepthMethod{}, opts}, 4);
  for (const auto& e : out) REQUIRE(e.ok());
  CHECK(out[0].result.value > out[2].result.value);
  CHECK(out[1].result.value > out[2].result.value);
  CHECK(out[2].result.value > out[3].result.value);
  CHECK(out[3].result.value < 1.0);
}

TEST_CASE("depth_batch is deterministic across thread counts") {
  Rng rng(7);
  const auto ref = oracle::random_matrix(rng, 80, 2);
  const auto queries = oracle::random_matrix(rng, 64, 2, 2.0);
  const std::vector<DepthMethod> methods{exact2d, LogisticDepthMethod{}, SvmDepthMethod{}};
  for (const auto& method : methods) {
    const auto opts = std::holds_alternative<SvmDepthMethod>(method) ? svm(0.5, 0.8) : lr(0.5);
    const auto a = depth_batch({ref, queries, method, opts}, 1);
    const auto b = depth_batch({ref, queries, method, opts}, 8);
    REQUIRE(a.size() == 64);
    for (std::size_t i = 0; i < 64; ++i) {
      CHECK(a[i].result.value == b[i].result.value);
      CHECK(a[i].result.coefficients == b[i].result.coefficients);
    }
  }
}

TEST_CASE("depth_batch matches single calls and handles edge cases") {
  Rng rng(8);
  const auto ref = oracle::random_matrix(rng, 50, 2);
  std::vector<double> grid;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) grid.insert(grid.end(), {-2.0 + 0.4 * j, -2.0 + 0.4 * i});
  const Matrix queries(100, 2, grid);
  const auto batch_lr = depth_batch({ref, queries, LogisticDepthMethod{}, lr(1.0)}, 3);
  const auto batch_svm = depth_batch({ref, queries, SvmDepthMethod{}, svm(1.0, 0.5)}, 3);
  const auto batch_hs = depth_batch({ref, queries, exact2d, lr(1.0)}, 3);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(batch_lr[i].result.value == logistic_depth(queries.row(i), ref, lr(1.0)).value);
    CHECK(batch_svm[i].result.value == svm_depth(queries.row(i), ref, svm(1.0, 0.5)).value);
    CHECK(batch_hs[i].result.value == halfspace_depth(queries.row(i), ref, exact2d));
  }
  CHECK(depth_batch({ref, Matrix(0, 2), LogisticDepthMethod{}, lr(1.0)}).empty());
  CHECK_THROWS_AS(depth_batch({ref, Matrix(1, 3), LogisticDepthMethod{}, lr(1.0)}), DimensionMismatch);

  const auto bad = depth_batch({ref, queries, LogisticDepthMethod{}, lr(0.0)});
  for (const auto& e : bad) CHECK_FALSE(e.ok());
  const auto one_d = depth_batch({ref, queries, exact1d, lr(1.0)});
  CHECK(one_d[0].error.find("d = 1") != std::string::npos);
}

TEST_CASE("Lipschitz bound in the query") {
  const auto data = gen_bigaussian(100, bigaussian_centers(), 2, 1);
  const double gamma = median_heuristic(data);
  const double lambda = 1.0;
  auto lr_raw = lr(lambda);
  lr_raw.normalized = false;
  Rng rng(9);
  double worst_lr = 0.0, worst_svm = 0.0;
  for (int t = 0; t < 60; ++t) {
    const auto a = oracle::random_vector(rng, 2, 4.0), b = oracle::random_vector(rng, 2, 4.0);
    const double dist = std::sqrt(squared_distance(a, b));
    const double lr_gap = std::abs(logistic_depth(a, data, lr_raw).value - logistic_depth(b, data, lr_raw).value);
    const double lr_bound = 0.5 * std::sqrt(std::numbers::ln2 / lambda) * dist;
    worst_lr = std::max(worst_lr, lr_gap - lr_bound);
    const double svm_gap = std::abs(svm_depth(a, data, svm(lambda, gamma)).value -
                                    svm_depth(b, data, svm(lambda, gamma)).value);
    const double svm_bound = 0.5 * std::sqrt(1.0 / lambda) * std::sqrt(2.0 * gamma) * dist;
    worst_svm = std::max(worst_svm, svm_gap - svm_bound);
  }
  CHECK(worst_lr <= 0.01);
  CHECK(worst_svm <= 0.01);
}

TEST_CASE("loss-plus-penalty logistic depth is quasi-concave along segments") {
  const auto data = gen_bigaussian(50, bigaussian_centers(), 2, 2);
  auto opts = lr(1.0);
  opts.reporting = Reporting::LossPlusReg;
  Rng rng(10);
  for (int t = 0; t < 30; ++t) {
    const auto a = oracle::random_vector(rng, 2, 4.0), b = oracle::random_vector(rng, 2, 4.0);
    const double da = logistic_depth(a, data, opts).value, db = logistic_depth(b, data, opts).value;
    for (int k = 1; k < 10; ++k) {
      const double s = k / 10.0;
      const std::vector<double> m{s * a[0] + (1 - s) * b[0], s * a[1] + (1 - s) * b[1]};
      CHECK(logistic_depth(m, data, opts).value >= std::min(da, db) - 1e-6);
    }
  }
}
