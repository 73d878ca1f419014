#include "lossdepth/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lossdepth/random.hpp"

namespace lossdepth {

LogisticObjective::LogisticObjective(const DataMatrix& reference, std::span<const double> query, double lambda,
                                     bool intercept)
    : reference_(&reference),
      query_(query),
      lambda_(lambda),
      intercept_(intercept),
      dim_(reference.cols() + (intercept ? 1 : 0)) {
  if (reference.empty()) throw InvalidArgument("logistic objective needs a non-empty reference");
  if (query.size() != reference.cols()) {
    throw DimensionMismatch("query dimension " + std::to_string(query.size()) + " differs from reference dimension " +
                            std::to_string(reference.cols()));
  }
}

double LogisticObjective::score(std::span<const double> w, std::span<const double> x) const {
  double s = dot(w.first(x.size()), x);
  if (intercept_) s += w[x.size()];
  return s;
}

double LogisticObjective::loss(std::span<const double> w) const {
  const std::size_t n = reference_->rows();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += logistic_loss(score(w, reference_->row(i)));
  return WeightScheme::positive_weight(n) * sum + WeightScheme::negative_weight * logistic_loss(-score(w, query_));
}

double LogisticObjective::value(std::span<const double> w) const { return loss(w) + regularization(w); }

ObjectiveValue LogisticObjective::evaluate(std::span<const double> w) const {
  const std::size_t n = reference_->rows();
  const std::size_t d = reference_->cols();
  const double pw = WeightScheme::positive_weight(n);
  ObjectiveValue out;
  out.gradient.assign(dim_, 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto x = reference_->row(i);
    const double m = score(w, x);
    sum += logistic_loss(m);
    // d/dw log(1 + exp(-m)) = -s(-m) x~
    const double c = -pw * sigmoid(-m);
    for (std::size_t j = 0; j < d; ++j) out.gradient[j] += c * x[j];
    if (intercept_) out.gradient[d] += c;
  }
  const double mz = score(w, query_);
  const double cz = WeightScheme::negative_weight * sigmoid(mz);
  for (std::size_t j = 0; j < d; ++j) out.gradient[j] += cz * query_[j];
  if (intercept_) out.gradient[d] += cz;
  for (std::size_t j = 0; j < dim_; ++j) out.gradient[j] += 2.0 * lambda_ * w[j];
  out.value = pw * sum + WeightScheme::negative_weight * logistic_loss(-mz) + regularization(w);
  return out;
}

void LogisticObjective::second_moment_apply(std::span<const double> v, std::span<double> y) const {
  const std::size_t n = reference_->rows();
  const std::size_t d = reference_->cols();
  const double pw = WeightScheme::positive_weight(n);
  std::fill(y.begin(), y.end(), 0.0);
  auto accumulate = [&](std::span<const double> x, double weight) {
    const double c = weight * score(v, x);
    for (std::size_t j = 0; j < d; ++j) y[j] += c * x[j];
    if (intercept_) y[d] += c;
  };
  for (std::size_t i = 0; i < n; ++i) accumulate(reference_->row(i), pw);
  accumulate(query_, WeightScheme::negative_weight);
}

namespace {

bool logistic_intercept(const DepthOptions& o) { return o.intercept.value_or(true); }

void require_logistic(const DepthProblem& p) {
  require_valid(p);
  if (p.options.loss != LossKind::Logistic) throw InvalidArgument("gradient descent solves the logistic depth only");
}

}  // namespace

ObjectiveValue logistic_objective(std::span<const double> w, const DepthProblem& p) {
  LogisticObjective obj(p.reference, p.query, p.options.lambda, logistic_intercept(p.options));
  if (w.size() != obj.dimension()) throw DimensionMismatch("weight vector has the wrong dimension");
  return obj.evaluate(w);
}

double second_moment_top_eigenvalue(const LogisticObjective& objective) {
  const std::size_t p = objective.dimension();
  // Pseudo-random start so that no structured data set is orthogonal to the top eigenvector.
  Rng rng(0x736d6f6f7468ULL);
  std::vector<double> v(p), y(p);
  for (auto& x : v) x = 1.0 + rng.uniform();
  double nv = norm(v);
  for (auto& x : v) x /= nv;

  double rayleigh = 0.0;
  for (int it = 0; it < 100; ++it) {
    objective.second_moment_apply(v, y);
    const double next = dot(v, y);
    const double ny = norm(y);
    if (ny == 0.0) return 0.0;
    for (std::size_t j = 0; j < p; ++j) v[j] = y[j] / ny;
    const bool settled = it > 0 && std::abs(next - rayleigh) <= 1e-10 * std::abs(next);
    rayleigh = next;
    if (settled) break;
  }
  return std::max(rayleigh, 0.0);
}

SmoothnessEstimate estimate_smoothness(const LogisticObjective& objective) {
  const double top = second_moment_top_eigenvalue(objective);
  return {kSmoothnessInflation * top + 2.0 * objective.lambda(), 2.0 * objective.lambda()};
}

SmoothnessEstimate estimate_smoothness(const DepthProblem& p) {
  require_logistic(p);
  return estimate_smoothness(LogisticObjective(p.reference, p.query, p.options.lambda, logistic_intercept(p.options)));
}

GradientDescentResult minimize_smooth(const SmoothObjective& objective, std::vector<double> start,
                                      const SmoothnessEstimate& smoothness, const SolverConfig& config,
                                      const GradientObserver& observer) {
  if (!(smoothness.L > 0.0)) throw InvalidArgument("smoothness constant must be positive");
  const double base_step = config.step_rule == StepRule::Fixed ? config.fixed_step : 1.0 / smoothness.L;
  if (!(base_step > 0.0)) throw InvalidArgument("step must be positive");

  GradientDescentResult out;
  out.w = std::move(start);
  ObjectiveValue cur = objective(out.w);
  double gnorm = norm(cur.gradient);
  if (observer) observer({0, cur.value, gnorm, 0.0});

  const std::size_t p = out.w.size();
  std::vector<double> trial(p);
  double step = base_step;
  std::size_t it = 0;
  for (; it < config.max_iterations && !(gnorm <= config.tolerance); ++it) {
    ObjectiveValue next;
    if (config.step_rule == StepRule::Adaptive) {
      step = std::max(2.0 * step, base_step);
      for (;;) {
        for (std::size_t j = 0; j < p; ++j) trial[j] = out.w[j] - step * cur.gradient[j];
        next = objective(trial);
        // Sufficient decrease; the 1/L step always satisfies it for an L-smooth objective.
        if (step <= base_step || next.value <= cur.value - 0.5 * step * gnorm * gnorm) break;
        step = std::max(0.5 * step, base_step);
      }
    } else {
      for (std::size_t j = 0; j < p; ++j) trial[j] = out.w[j] - step * cur.gradient[j];
      next = objective(trial);
    }
    out.w.swap(trial);
    cur = std::move(next);
    gnorm = norm(cur.gradient);
    if (observer) observer({it + 1, cur.value, gnorm, step});
  }
  out.objective = cur.value;
  out.diagnostics = {it, gnorm, gnorm <= config.tolerance};
  return out;
}

GradientDescentResult gradient_descent(const DepthProblem& p, const GradientObserver& observer) {
  require_logistic(p);
  LogisticObjective obj(p.reference, p.query, p.options.lambda, logistic_intercept(p.options));
  const auto smooth = estimate_smoothness(obj);
  return minimize_smooth([&](std::span<const double> w) { return obj.evaluate(w); },
                         std::vector<double>(obj.dimension(), 0.0), smooth, p.options.solver, observer);
}

}  // namespace lossdepth
