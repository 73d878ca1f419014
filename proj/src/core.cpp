#include "lossdepth/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lossdepth {

double logistic_loss(double margin) {
  if (margin > 0.0) return std::log1p(std::exp(-margin));
  return -margin + std::log1p(std::exp(margin));
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double loss_value(LossKind kind, double prediction, int label) {
  const double margin = static_cast<double>(label) * prediction;
  switch (kind) {
    case LossKind::ZeroOne:
      return margin < 0.0 ? 1.0 : 0.0;
    case LossKind::Logistic:
      return logistic_loss(margin);
    case LossKind::Hinge:
      return std::max(0.0, 1.0 - margin);
  }
  return 0.0;
}

double weighted_expectation(std::span<const double> positive_losses, double negative_loss) {
  if (positive_losses.empty()) throw InvalidArgument("weighted expectation needs at least one positive loss");
  const double sum = std::accumulate(positive_losses.begin(), positive_losses.end(), 0.0);
  return WeightScheme::positive_weight(positive_losses.size()) * sum + WeightScheme::negative_weight * negative_loss;
}

bool ValidationReport::has(ViolationKind kind) const {
  return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; });
}

std::string ValidationReport::summary() const {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.message;
  }
  return out;
}

ValidationReport validate_problem(const DepthProblem& p) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, std::string msg) { report.violations.push_back({kind, std::move(msg)}); };

  if (p.reference.empty()) add(ViolationKind::EmptyReference, "reference sample is empty");
  if (p.query.size() != p.reference.cols()) {
    add(ViolationKind::DimensionMismatch, "dimension mismatch: reference has d=" + std::to_string(p.reference.cols()) +
                                              ", query has d=" + std::to_string(p.query.size()));
  }
  if (!all_finite(p.query)) add(ViolationKind::NonFiniteQuery, "query has non-finite entries");

  const auto& o = p.options;
  const bool convex_loss = o.loss == LossKind::Logistic || o.loss == LossKind::Hinge;
  if (convex_loss && !(o.lambda > 0.0)) {
    add(ViolationKind::UnboundedMinimizer,
        "minimizer may be unbounded: lambda must be > 0 for a unique regularized minimizer");
  }
  if (o.loss == LossKind::Hinge) {
    if (!o.kernel) {
      add(ViolationKind::MissingKernel, "hinge depth needs a kernel");
    } else if (!o.kernel->bounded()) {
      add(ViolationKind::UnboundedKernel, "hinge depth needs a bounded kernel, got " + o.kernel->describe());
    }
  }
  if (!(o.solver.tolerance > 0.0) || o.solver.max_iterations < 1) {
    add(ViolationKind::InvalidSolverConfig, "solver needs tolerance > 0 and max_iterations >= 1");
  }
  if (o.solver.step_rule == StepRule::Fixed && !(o.solver.fixed_step > 0.0)) {
    add(ViolationKind::InvalidSolverConfig, "fixed step rule needs a positive step");
  }
  return report;
}

void require_valid(const DepthProblem& problem) {
  auto report = validate_problem(problem);
  if (report.has(ViolationKind::DimensionMismatch)) throw DimensionMismatch(report.summary());
  if (!report.ok()) throw InvalidArgument(report.summary());
}

}  // namespace lossdepth
