#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lossdepth/core.hpp"
#include "lossdepth/solvers.hpp"

namespace lossdepth {

struct Exact1D {};
struct Exact2D {};
struct RandomDirections {
  std::size_t count = 1000;
  std::uint64_t seed = 0;
};

/// Halfspace depth settings. The closed upper halfspace <u, X> >= <u, z> is
/// counted, so reference points equal to z count for every direction.
struct HalfspaceConfig {
  std::variant<Exact1D, Exact2D, RandomDirections> mode = Exact1D{};

  /// Exact mode for d = 1 or 2, random directions otherwise.
  static HalfspaceConfig for_dimension(std::size_t d, std::size_t directions = 1000, std::uint64_t seed = 0);
};

/// Angular offset applied on each side of a critical direction.
inline constexpr double kCandidateAngleOffset = 1e-9;

/// inf over unit u of the empirical mass of { x : <u, x> >= <u, z> }.
/// Exact in 1D and 2D (angular sweep, O(n log n)); with random directions
/// the minimum over the sampled +/-u pairs, an upper bound on the depth.
double halfspace_depth(std::span<const double> z, const DataMatrix& reference, const HalfspaceConfig& config);

/// Directions where the halfspace count can be minimal: {+1, -1} in 1D, and
/// in 2D the normals perpendicular to each x_i - z rotated by +/- 1e-9 rad.
Matrix halfspace_candidate_directions(std::span<const double> z, const DataMatrix& reference);

/// How a reference point on the separating hyperplane through z is scored.
enum class BoundaryRule {
  /// Output 0 is read as the negative class, so boundary points count as
  /// misclassified. Agrees with the closed-halfspace depth everywhere.
  Closed,
  /// Zero-one loss 1[y f(x) < 0]: boundary points are never misclassified.
  StrictZeroOne,
};

/// Minimum over the candidate directions u of twice the zero-one risk on the
/// labelled distribution, for the linear classifier f(x) = <-u, x - z>
/// whose hyperplane passes through z.
double halfspace_depth_as_loss(std::span<const double> z, const DataMatrix& reference, const Matrix& directions,
                               BoundaryRule rule = BoundaryRule::Closed);

/// Logistic-regression depth. Runs gradient descent on the regularized
/// objective; reports the weighted loss at the minimizer (plus lambda ||w||^2
/// for LossPlusReg), divided by log 2 when normalized.
DepthResult logistic_depth(std::span<const double> z, const DataMatrix& reference, const DepthOptions& options);

/// Kernel SVM depth: hinge loss on RKHS features, solved in the dual.
DepthResult svm_depth(std::span<const double> z, const DataMatrix& reference, const DepthOptions& options);
/// Same, reusing Gram quantities of a prepared reference.
DepthResult svm_depth(std::span<const double> z, const KernelReference& reference, const DepthOptions& options);

struct LogisticDepthMethod {};
struct SvmDepthMethod {};
using DepthMethod = std::variant<HalfspaceConfig, LogisticDepthMethod, SvmDepthMethod>;

struct DepthBatchRequest {
  const DataMatrix& reference;
  const DataMatrix& queries;
  DepthMethod method;
  DepthOptions options;
};

struct BatchEntry {
  DepthResult result;
  /// Empty on success.
  std::string error;

  bool ok() const noexcept { return error.empty(); }
};

/// Evaluates every query, in parallel across queries. Output order follows
/// the queries and values do not depend on the thread count. Per-query
/// failures are recorded in the entry instead of aborting the batch;
/// non-converged solves are returned with converged = false.
std::vector<BatchEntry> depth_batch(const DepthBatchRequest& request, unsigned threads = 1);

}  // namespace lossdepth
