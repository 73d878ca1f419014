#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lossdepth/kernels.hpp"
#include "lossdepth/matrix.hpp"

namespace lossdepth {

/// Loss on a classifier output `prediction` for a label in {-1, +1}.
enum class LossKind {
  ZeroOne,   // 1[y * prediction < 0]
  Logistic,  // log(1 + exp(-y * prediction))
  Hinge,     // max(0, 1 - y * prediction)
};

/// What the depth reports at the regularized minimizer: the pure weighted
/// loss, or the loss plus the regularization term.
enum class Reporting { LossOnly, LossPlusReg };

/// log(1 + exp(-margin)) without overflow for any finite margin.
double logistic_loss(double margin);
/// 1 / (1 + exp(-t)), stable in both tails.
double sigmoid(double t);
double loss_value(LossKind kind, double prediction, int label);

/// Mass 1/(2n) on each reference point (label +1) and 1/2 on the query (label -1).
struct WeightScheme {
  static constexpr double negative_weight = 0.5;
  static double positive_weight(std::size_t n) { return 0.5 / static_cast<double>(n); }
};

/// (1/(2n)) * sum(positive_losses) + (1/2) * negative_loss
double weighted_expectation(std::span<const double> positive_losses, double negative_loss);

enum class StepRule {
  /// Constant step 1/L from the Hessian bound.
  InverseSmoothness,
  /// Constant user-provided step.
  Fixed,
  /// Starts each iteration from twice the last accepted step and backtracks
  /// on the sufficient-decrease test, never going below 1/L.
  Adaptive,
};

struct SolverConfig {
  std::size_t max_iterations = 10'000;
  /// Gradient norm for gradient descent, max KKT violation for the dual solvers.
  double tolerance = 1e-8;
  StepRule step_rule = StepRule::Adaptive;
  double fixed_step = 0.0;
  /// Seeds the coordinate sweep order of the dual solvers.
  std::uint64_t seed = 0;
};

struct DepthOptions {
  LossKind loss = LossKind::Logistic;
  double lambda = 1.0;
  std::optional<KernelSpec> kernel;
  /// Unset selects the method default: on for logistic depth, off for SVM depth.
  std::optional<bool> intercept;
  Reporting reporting = Reporting::LossOnly;
  /// Divide the logistic depth by log 2 so that it lies in [0, 1].
  bool normalized = true;
  SolverConfig solver;
};

/// One depth evaluation: a query point against a reference sample. Holds
/// references; the sample and query must outlive the problem.
struct DepthProblem {
  const DataMatrix& reference;
  std::span<const double> query;
  DepthOptions options;
};

struct SolverDiagnostics {
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

struct DepthResult {
  /// Reported depth (normalized when requested).
  double value = 0.0;
  /// Depth before normalization.
  double raw_value = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
  /// Logistic depth: augmented weights [w, b]. SVM depth: the n+1 dual
  /// coefficients (query last), followed by the intercept when enabled.
  std::vector<double> coefficients;
};

enum class ViolationKind {
  EmptyReference,
  DimensionMismatch,
  NonFiniteQuery,
  UnboundedMinimizer,
  MissingKernel,
  UnboundedKernel,
  InvalidSolverConfig,
};

struct Violation {
  ViolationKind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  bool has(ViolationKind kind) const;
  std::string summary() const;
};

ValidationReport validate_problem(const DepthProblem& problem);

/// Throws InvalidArgument carrying the summary when validation fails.
void require_valid(const DepthProblem& problem);

}  // namespace lossdepth
