#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lossdepth/core.hpp"
#include "lossdepth/depths.hpp"

namespace lossdepth {

class UndefinedCorrelation : public Error {
 public:
  using Error::Error;
};

/// Scores where higher means deeper / more normal; labels true = inlier.
struct LabeledScores {
  std::vector<double> scores;
  std::vector<bool> labels;
};

/// Mann-Whitney AUC with ties counted one half:
/// (#{inlier > outlier} + 1/2 #{ties}) / (m+ m-).
double auc_roc(const LabeledScores& ls);

/// Kendall tau-b with tie correction.
double kendall_tau(std::span<const double> a, std::span<const double> b);
/// Pearson correlation of average ranks.
double spearman_rho(std::span<const double> a, std::span<const double> b);

/// Average ranks (1-based), ties share their mean rank.
std::vector<double> average_ranks(std::span<const double> v);

/// n_per_mode standard-normal draws around each center; centers shorter than
/// d are padded with zeros. Rows are grouped by mode in center order.
DataMatrix gen_bigaussian(std::size_t n_per_mode, const std::vector<std::vector<double>>& centers, std::size_t d,
                          std::uint64_t seed);

/// n draws from N(center, I) where the last floor(rate n) rows are replaced
/// by draws from N(contamination_center, I).
DataMatrix gen_contaminated(std::size_t n, const std::vector<double>& center,
                            const std::vector<double>& contamination_center, double rate, std::uint64_t seed);

/// Equal-weight mixture of N(c, I) over the centers (padded with zeros to d).
double mixture_density(std::span<const double> x, const std::vector<std::vector<double>>& centers);

/// The two modes (-3.5, -3.5) and (3.5, 3.5) used throughout the experiments.
std::vector<std::vector<double>> bigaussian_centers();

/// Scores every query against a reference; higher = deeper.
using ScoreFunction = std::function<std::vector<double>(const DataMatrix& reference, const DataMatrix& queries)>;

enum class DepthMethodKind { Halfspace, Logistic, Svm };

struct ScorerSettings {
  DepthMethodKind method = DepthMethodKind::Svm;
  DepthOptions options;
  /// SVM kernel bandwidth from the median heuristic on the reference when
  /// options.kernel is unset.
  std::uint64_t seed = 0;
  std::size_t halfspace_directions = 1000;
  unsigned threads = 1;
  /// Throw NotConverged instead of returning a non-converged depth.
  bool require_convergence = true;
};

/// Kernel used by the SVM scorer: options.kernel, else Gaussian with the
/// median-heuristic bandwidth of the reference.
KernelSpec resolve_kernel(const ScorerSettings& settings, const DataMatrix& reference);

ScoreFunction make_depth_scorer(const ScorerSettings& settings);

struct RankCorrelationRow {
  std::size_t d = 0;
  std::size_t run = 0;
  double kendall = 0.0;
  double spearman = 0.0;
};

struct RankCorrelationConfig {
  std::vector<std::size_t> dimensions{2, 4, 6, 8};
  std::size_t n = 200;
  std::size_t runs = 10;
  std::uint64_t seed = 0;
};

/// Per (d, run): bigaussian sample of n points, depth of every sample point
/// against the sample, and rank correlations with the true mixture density.
std::vector<RankCorrelationRow> rank_correlation_experiment(const RankCorrelationConfig& config,
                                                            const ScoreFunction& depth);

/// Scores the true mixture density itself; a self-consistency scorer.
ScoreFunction true_density_scorer();

/// UniformCube draws from [0, 1]^d.
enum class SampleDistribution { StandardGaussian, UniformCube };

struct ConvergenceConfig {
  std::vector<double> z;
  std::vector<std::size_t> n_grid{50, 100, 200, 400, 800, 1600};
  std::size_t repeats = 20;
  /// 0 selects 50 * max(n_grid).
  std::size_t n_ref = 0;
  SampleDistribution distribution = SampleDistribution::StandardGaussian;
  std::uint64_t seed = 0;
  /// Parallelism over (n, repeat) units.
  unsigned threads = 1;
};

struct ConvergenceRun {
  std::vector<std::size_t> n_grid;
  std::size_t repeats = 0;
  std::size_t n_ref = 0;
  double reference_depth = 0.0;
  /// errors[g][r] = |D(z | Q_n) - D(z | Q_ref)| for n = n_grid[g], repeat r.
  std::vector<std::vector<double>> errors;
  std::vector<double> mean_errors;
  /// Least-squares slope of log(mean error) against log n.
  double slope = 0.0;
};

/// Depth of a fixed point against one sample; the reference depth uses a
/// single draw of n_ref points.
using PointDepth = std::function<double(std::span<const double> z, const DataMatrix& sample)>;

/// The single n_ref-point draw the reference depth is computed on.
DataMatrix convergence_reference_sample(const ConvergenceConfig& config);

ConvergenceRun convergence_experiment(const ConvergenceConfig& config, const PointDepth& depth);

/// Least-squares slope of log(y) on log(x). Needs >= 2 distinct x and y > 0.
double log_log_slope(std::span<const double> x, std::span<const double> y);

struct GridRow {
  double x = 0.0;
  double y = 0.0;
  double score = 0.0;
};

struct GridReport {
  std::vector<GridRow> cells;
  std::vector<double> quantiles;
  /// Score thresholds at the requested quantiles of the scores of the data.
  std::vector<double> thresholds;
  std::vector<double> data_scores;
};

/// Scores a resolution x resolution grid over the bounding box of the 2D
/// data expanded by 1 on every side, plus data-score quantile thresholds.
GridReport contamination_grid(const DataMatrix& data, const ScoreFunction& score, std::size_t resolution,
                              std::vector<double> quantiles);

/// Lower-interpolation empirical quantile.
double empirical_quantile(std::vector<double> values, double q);

/// Number of thresholds at or below the score (the quantile band index).
std::size_t quantile_band(double score, std::span<const double> thresholds);

}  // namespace lossdepth
