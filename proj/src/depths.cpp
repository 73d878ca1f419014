#include "lossdepth/depths.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "lossdepth/random.hpp"
#include "parallel.hpp"

namespace lossdepth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kHalfPi = 0.5 * std::numbers::pi;

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a -= kTwoPi;
  return a;
}

void require_dims(std::span<const double> z, const DataMatrix& reference) {
  if (reference.empty()) throw InvalidArgument("reference sample is empty");
  if (z.size() != reference.cols()) {
    throw DimensionMismatch("query has d=" + std::to_string(z.size()) + ", reference has d=" +
                            std::to_string(reference.cols()));
  }
}

double projected_offset(std::span<const double> u, std::span<const double> x, std::span<const double> z) {
  double s = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) s += u[j] * (x[j] - z[j]);
  return s;
}

double exact_1d(double z, const DataMatrix& q) {
  std::size_t above = 0, below = 0;
  for (std::size_t i = 0; i < q.rows(); ++i) {
    const double x = q(i, 0);
    if (x >= z) ++above;
    if (x <= z) ++below;
  }
  return static_cast<double>(std::min(above, below)) / static_cast<double>(q.rows());
}

// Points at angle a are counted by direction t when the cyclic distance
// between a and t is at most pi/2. Candidate directions sit 1e-9 rad off the
// critical angles, so no non-coincident point lies on a boundary.
double exact_2d(std::span<const double> z, const DataMatrix& q) {
  std::size_t coincident = 0;
  std::vector<double> angles;
  angles.reserve(q.rows());
  for (std::size_t i = 0; i < q.rows(); ++i) {
    const double dx = q(i, 0) - z[0], dy = q(i, 1) - z[1];
    if (dx == 0.0 && dy == 0.0) {
      ++coincident;
      continue;
    }
    angles.push_back(wrap_angle(std::atan2(dy, dx)));
  }
  std::sort(angles.begin(), angles.end());

  auto count_between = [&](double lo, double hi) {  // closed interval, 0 <= lo <= hi < 2pi
    auto first = std::lower_bound(angles.begin(), angles.end(), lo);
    auto last = std::upper_bound(angles.begin(), angles.end(), hi);
    return static_cast<std::size_t>(last - first);
  };
  auto count_window = [&](double t) {
    const double lo = t - kHalfPi, hi = t + kHalfPi;
    if (lo < 0.0) return count_between(lo + kTwoPi, kTwoPi) + count_between(0.0, hi);
    if (hi >= kTwoPi) return count_between(lo, kTwoPi) + count_between(0.0, hi - kTwoPi);
    return count_between(lo, hi);
  };

  std::size_t best = angles.size();
  for (double a : angles) {
    for (double side : {-kHalfPi, kHalfPi}) {
      for (double eps : {-kCandidateAngleOffset, kCandidateAngleOffset}) {
        best = std::min(best, count_window(wrap_angle(a + side + eps)));
      }
    }
  }
  return static_cast<double>(coincident + best) / static_cast<double>(q.rows());
}

double random_directions(std::span<const double> z, const DataMatrix& q, const RandomDirections& cfg) {
  if (cfg.count < 1) throw InvalidArgument("random-direction halfspace depth needs at least one direction");
  const std::size_t d = q.cols();
  Rng rng(derive_seed(cfg.seed, {0x68616c66ULL}));
  std::vector<double> u(d);
  std::size_t best = q.rows();
  for (std::size_t k = 0; k < cfg.count; ++k) {
    double nrm = 0.0;
    while (nrm == 0.0) {
      for (auto& c : u) c = rng.normal();
      nrm = norm(u);
    }
    for (auto& c : u) c /= nrm;
    std::size_t plus = 0, minus = 0;
    for (std::size_t i = 0; i < q.rows(); ++i) {
      const double p = projected_offset(u, q.row(i), z);
      if (p >= 0.0) ++plus;
      if (p <= 0.0) ++minus;
    }
    best = std::min({best, plus, minus});
  }
  return static_cast<double>(best) / static_cast<double>(q.rows());
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

HalfspaceConfig HalfspaceConfig::for_dimension(std::size_t d, std::size_t directions, std::uint64_t seed) {
  if (d == 1) return {Exact1D{}};
  if (d == 2) return {Exact2D{}};
  return {RandomDirections{directions, seed}};
}

double halfspace_depth(std::span<const double> z, const DataMatrix& reference, const HalfspaceConfig& config) {
  require_dims(z, reference);
  return std::visit(overloaded{
                        [&](const Exact1D&) {
                          if (reference.cols() != 1) throw InvalidArgument("Exact1D halfspace depth needs d = 1");
                          return exact_1d(z[0], reference);
                        },
                        [&](const Exact2D&) {
                          if (reference.cols() != 2) throw InvalidArgument("Exact2D halfspace depth needs d = 2");
                          return exact_2d(z, reference);
                        },
                        [&](const RandomDirections& r) { return random_directions(z, reference, r); },
                    },
                    config.mode);
}

Matrix halfspace_candidate_directions(std::span<const double> z, const DataMatrix& reference) {
  require_dims(z, reference);
  if (reference.cols() == 1) return Matrix(2, 1, {1.0, -1.0});
  if (reference.cols() != 2) throw InvalidArgument("candidate directions are enumerated for d <= 2 only");
  std::vector<double> dirs;
  for (std::size_t i = 0; i < reference.rows(); ++i) {
    const double dx = reference(i, 0) - z[0], dy = reference(i, 1) - z[1];
    if (dx == 0.0 && dy == 0.0) continue;
    const double a = std::atan2(dy, dx);
    for (double side : {-kHalfPi, kHalfPi}) {
      for (double eps : {-kCandidateAngleOffset, kCandidateAngleOffset}) {
        dirs.push_back(std::cos(a + side + eps));
        dirs.push_back(std::sin(a + side + eps));
      }
    }
  }
  if (dirs.empty()) dirs = {1.0, 0.0, -1.0, 0.0};
  const std::size_t rows = dirs.size() / 2;
  return Matrix(rows, 2, std::move(dirs));
}

double halfspace_depth_as_loss(std::span<const double> z, const DataMatrix& reference, const Matrix& directions,
                               BoundaryRule rule) {
  require_dims(z, reference);
  if (directions.empty()) throw InvalidArgument("candidate direction set is empty");
  if (directions.cols() != reference.cols()) throw DimensionMismatch("candidate directions have the wrong dimension");
  std::size_t best = reference.rows();
  for (std::size_t k = 0; k < directions.rows(); ++k) {
    auto u = directions.row(k);
    // f(x) = -<u, x - z>; f(z) = 0 is a correct negative prediction under both rules.
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < reference.rows(); ++i) {
      const double f = -projected_offset(u, reference.row(i), z);
      wrong += rule == BoundaryRule::Closed ? f <= 0.0 : f < 0.0;
    }
    best = std::min(best, wrong);
  }
  // Twice the weighted risk: 2 * wrong / (2n).
  return static_cast<double>(best) / static_cast<double>(reference.rows());
}

DepthResult logistic_depth(std::span<const double> z, const DataMatrix& reference, const DepthOptions& options) {
  DepthOptions opts = options;
  opts.loss = LossKind::Logistic;
  DepthProblem problem{reference, z, opts};
  auto gd = gradient_descent(problem);
  LogisticObjective obj(reference, z, opts.lambda, opts.intercept.value_or(true));

  DepthResult r;
  r.raw_value = obj.loss(gd.w);
  if (opts.reporting == Reporting::LossPlusReg) r.raw_value += obj.regularization(gd.w);
  r.value = opts.normalized ? r.raw_value / std::numbers::ln2 : r.raw_value;
  r.iterations = gd.diagnostics.iterations;
  r.residual = gd.diagnostics.residual;
  r.converged = gd.diagnostics.converged;
  r.coefficients = std::move(gd.w);
  return r;
}

DepthResult svm_depth(std::span<const double> z, const KernelReference& reference, const DepthOptions& options) {
  DepthOptions opts = options;
  opts.loss = LossKind::Hinge;
  opts.kernel = reference.kernel();
  require_valid(DepthProblem{reference.points(), z, opts});
  const bool intercept = opts.intercept.value_or(false);
  auto s = svm_dual_solve(reference, z, opts.lambda, intercept, opts.solver);

  DepthResult r;
  r.raw_value = opts.reporting == Reporting::LossPlusReg ? s.primal : s.loss;
  r.value = r.raw_value;
  r.iterations = s.diagnostics.iterations;
  r.residual = s.diagnostics.residual;
  r.converged = s.diagnostics.converged;
  r.coefficients = std::move(s.alpha);
  if (intercept) r.coefficients.push_back(s.intercept);
  return r;
}

DepthResult svm_depth(std::span<const double> z, const DataMatrix& reference, const DepthOptions& options) {
  if (!options.kernel) throw InvalidArgument("svm depth needs a kernel");
  require_dims(z, reference);
  KernelReference ref(reference, *options.kernel);
  return svm_depth(z, ref, options);
}

std::vector<BatchEntry> depth_batch(const DepthBatchRequest& request, unsigned threads) {
  const auto& ref = request.reference;
  const auto& queries = request.queries;
  if (queries.empty()) return {};
  if (ref.empty()) throw InvalidArgument("reference sample is empty");
  if (queries.cols() != ref.cols()) {
    throw DimensionMismatch("queries have d=" + std::to_string(queries.cols()) + ", reference has d=" +
                            std::to_string(ref.cols()));
  }

  std::optional<KernelReference> kernel_ref;
  if (std::holds_alternative<SvmDepthMethod>(request.method)) {
    if (!request.options.kernel) throw InvalidArgument("svm depth needs a kernel");
    kernel_ref.emplace(ref, *request.options.kernel, threads);
  }

  std::vector<BatchEntry> out(queries.rows());
  detail::parallel_for(queries.rows(), threads, [&](std::size_t i) {
    auto z = queries.row(i);
    try {
      out[i].result = std::visit(overloaded{
                                     [&](const HalfspaceConfig& cfg) {
                                       DepthResult r;
                                       r.value = r.raw_value = halfspace_depth(z, ref, cfg);
                                       r.converged = true;
                                       return r;
                                     },
                                     [&](const LogisticDepthMethod&) { return logistic_depth(z, ref, request.options); },
                                     [&](const SvmDepthMethod&) { return svm_depth(z, *kernel_ref, request.options); },
                                 },
                                 request.method);
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

}  // namespace lossdepth
