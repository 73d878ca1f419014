#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "lossdepth/core.hpp"

namespace lossdepth {

struct ObjectiveValue {
  double value = 0.0;
  std::vector<double> gradient;
};

/// Regularized logistic objective of the labelled problem
///
///   G(w) = 1/(2n) sum_i log(1 + exp(-<w, x~_i>)) + 1/2 log(1 + exp(<w, z~>)) + lambda ||w||^2
///
/// where x~ = [x, 1] when the intercept is enabled (the intercept weight is
/// regularized like the others) and x~ = x otherwise.
class LogisticObjective {
 public:
  LogisticObjective(const DataMatrix& reference, std::span<const double> query, double lambda, bool intercept);

  std::size_t dimension() const noexcept { return dim_; }
  bool intercept() const noexcept { return intercept_; }
  double lambda() const noexcept { return lambda_; }

  ObjectiveValue evaluate(std::span<const double> w) const;
  double value(std::span<const double> w) const;
  /// Weighted logistic loss without the regularization term.
  double loss(std::span<const double> w) const;
  double regularization(std::span<const double> w) const { return lambda_ * dot(w, w); }

  /// <w, x~> for an arbitrary point x of the data dimension.
  double score(std::span<const double> w, std::span<const double> x) const;

  /// y = M v with M = 1/(2n) sum x~_i x~_i^T + 1/2 z~ z~^T.
  void second_moment_apply(std::span<const double> v, std::span<double> y) const;

 private:
  const DataMatrix* reference_;
  std::span<const double> query_;
  double lambda_;
  bool intercept_;
  std::size_t dim_;
};

ObjectiveValue logistic_objective(std::span<const double> w, const DepthProblem& problem);

struct SmoothnessEstimate {
  double L = 0.0;
  double mu = 0.0;
};

/// Power-iteration bound on the top eigenvalue of the weighted second-moment
/// matrix, inflated by this factor before adding 2 lambda.
inline constexpr double kSmoothnessInflation = 1.01;

/// Largest eigenvalue of 1/2 M^ + 1/2 z~z~^T by power iteration (at most 100
/// iterations, stopping when the Rayleigh quotient changes by < 1e-10).
double second_moment_top_eigenvalue(const LogisticObjective& objective);

/// L = 1.01 * lambda_max(1/2 M^ + 1/2 z~z~^T) + 2 lambda, mu = 2 lambda.
SmoothnessEstimate estimate_smoothness(const DepthProblem& problem);
SmoothnessEstimate estimate_smoothness(const LogisticObjective& objective);

struct GradientStep {
  std::size_t iteration = 0;
  double objective = 0.0;
  double gradient_norm = 0.0;
  double step = 0.0;
};

using GradientObserver = std::function<void(const GradientStep&)>;

struct GradientDescentResult {
  std::vector<double> w;
  double objective = 0.0;
  SolverDiagnostics diagnostics;
};

using SmoothObjective = std::function<ObjectiveValue(std::span<const double>)>;

/// Gradient descent on an L-smooth, mu-strongly convex objective. Stops when
/// ||grad|| <= tolerance or after max_iterations updates; the observer sees
/// the starting point (iteration 0) and every accepted iterate.
GradientDescentResult minimize_smooth(const SmoothObjective& objective, std::vector<double> start,
                                      const SmoothnessEstimate& smoothness, const SolverConfig& config,
                                      const GradientObserver& observer = {});

/// Minimizes the logistic depth objective from w = 0.
GradientDescentResult gradient_descent(const DepthProblem& problem, const GradientObserver& observer = {});

/// Reference sample plus kernel, with the Gram quantities the dual solver
/// reuses across queries: row sums, diagonal, and the dense Gram when the
/// sample is small enough. Kernel columns are recomputed on demand otherwise.
class KernelReference {
 public:
  static constexpr std::size_t kDenseGramLimit = 4096;

  KernelReference(const DataMatrix& points, KernelSpec kernel, unsigned threads = 1,
                  std::size_t dense_limit = kDenseGramLimit);

  const DataMatrix& points() const noexcept { return *points_; }
  const KernelSpec& kernel() const noexcept { return kernel_; }
  std::size_t size() const noexcept { return points_->rows(); }
  bool has_dense_gram() const noexcept { return gram_.has_value(); }

  std::span<const double> row_sums() const noexcept { return row_sums_; }
  double diagonal(std::size_t i) const { return diag_[i]; }
  /// out[i] = k(x_i, x_j)
  void column(std::size_t j, std::span<double> out) const;
  /// out[i] = k(x_i, z)
  std::vector<double> against(std::span<const double> z) const;

 private:
  const DataMatrix* points_;
  KernelSpec kernel_;
  std::vector<double> row_sums_;
  std::vector<double> diag_;
  std::optional<Matrix> gram_;
};

struct SvmDualSolution {
  /// alpha_i for the n reference points, then alpha_z for the query.
  std::vector<double> alpha;
  double intercept = 0.0;
  /// f(x_1), ..., f(x_n), f(z), intercept included.
  std::vector<double> decision;
  /// Weighted hinge loss of f.
  double loss = 0.0;
  /// ||f||_H^2 (intercept excluded).
  double rkhs_norm_squared = 0.0;
  /// loss + lambda ||f||^2
  double primal = 0.0;
  /// sum alpha - 1/2 ||f||^2 ; at the optimum primal = 2 lambda dual.
  double dual = 0.0;
  std::size_t degenerate_coordinates = 0;
  SolverDiagnostics diagnostics;

  double duality_gap(double lambda) const { return primal - 2.0 * lambda * dual; }
};

/// Box upper bounds of the rescaled dual: 1/(4 n lambda) per reference point,
/// 1/(4 lambda) for the query.
double svm_box_positive(std::size_t n, double lambda);
double svm_box_query(double lambda);

/// Weighted hinge-loss SVM through its dual
///
///   max sum_k a_k - 1/2 sum_kl a_k a_l y_k y_l K_kl,  0 <= a_k <= C_k
///
/// with f = sum_k a_k y_k k(x_k, .). Without intercept this runs clipped
/// single-coordinate ascent in seeded random sweep order, starting from the
/// upper box corner; with intercept it runs maximal-violating-pair updates
/// that preserve sum_k y_k a_k = 0. SolverConfig::max_iterations bounds the
/// number of sweeps (pair updates are counted in units of n + 1).
SvmDualSolution svm_dual_solve(const KernelReference& reference, std::span<const double> query, double lambda,
                               bool intercept, const SolverConfig& config);
SvmDualSolution svm_dual_solve(const DepthProblem& problem);

}  // namespace lossdepth
