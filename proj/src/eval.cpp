#include "lossdepth/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "lossdepth/random.hpp"
#include "parallel.hpp"

namespace lossdepth {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("rank correlation inputs differ in length");
  if (a.size() < 2) throw InvalidArgument("rank correlation needs at least two observations");
}

bool constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

std::vector<double> padded(const std::vector<double>& c, std::size_t d) {
  if (c.size() > d) throw DimensionMismatch("center has more coordinates than d");
  std::vector<double> out(c);
  out.resize(d, 0.0);
  return out;
}

void append_normal_row(std::vector<double>& values, const std::vector<double>& center, Rng& rng) {
  for (double c : center) values.push_back(c + rng.normal());
}

DataMatrix draw_sample(std::size_t n, std::size_t d, SampleDistribution dist, Rng& rng) {
  std::vector<double> values(n * d);
  for (auto& v : values) v = dist == SampleDistribution::StandardGaussian ? rng.normal() : rng.uniform();
  return Matrix(n, d, std::move(values));
}

}  // namespace

double auc_roc(const LabeledScores& ls) {
  if (ls.scores.size() != ls.labels.size()) throw DimensionMismatch("scores and labels differ in length");
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < ls.scores.size(); ++i) (ls.labels[i] ? pos : neg).push_back(ls.scores[i]);
  if (pos.empty() || neg.empty()) throw InvalidArgument("AUC needs both inliers and outliers");
  std::sort(neg.begin(), neg.end());
  double wins = 0.0;
  for (double p : pos) {
    const auto lo = std::lower_bound(neg.begin(), neg.end(), p);
    const auto hi = std::upper_bound(lo, neg.end(), p);
    wins += static_cast<double>(lo - neg.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double kendall_tau(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b);
  if (constant(a) || constant(b)) throw UndefinedCorrelation("Kendall tau is undefined for constant input");
  // O(m^2) pair count; m is at most a few thousand in every experiment.
  double concordant = 0.0, discordant = 0.0, ties_a = 0.0, ties_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double da = a[i] - a[j], db = b[i] - b[j];
      if (da == 0.0 && db == 0.0) continue;
      if (da == 0.0) ties_a += 1.0;
      else if (db == 0.0) ties_b += 1.0;
      else if ((da > 0.0) == (db > 0.0)) concordant += 1.0;
      else discordant += 1.0;
    }
  }
  const double denom = std::sqrt((concordant + discordant + ties_a) * (concordant + discordant + ties_b));
  return (concordant - discordant) / denom;
}

double spearman_rho(std::span<const double> a, std::span<const double> b) {
  require_same_length(a, b);
  if (constant(a) || constant(b)) throw UndefinedCorrelation("Spearman rho is undefined for constant input");
  const auto ra = average_ranks(a), rb = average_ranks(b);
  return pearson(ra, rb);
}

DataMatrix gen_bigaussian(std::size_t n_per_mode, const std::vector<std::vector<double>>& centers, std::size_t d,
                          std::uint64_t seed) {
  if (centers.empty()) throw InvalidArgument("bigaussian generator needs at least one center");
  if (d == 0) throw InvalidArgument("dimension must be positive");
  std::vector<double> values;
  values.reserve(n_per_mode * centers.size() * d);
  Rng rng(derive_seed(seed, {0x6269676175ULL}));
  for (const auto& c : centers) {
    const auto center = padded(c, d);
    for (std::size_t i = 0; i < n_per_mode; ++i) append_normal_row(values, center, rng);
  }
  return Matrix(n_per_mode * centers.size(), d, std::move(values));
}

DataMatrix gen_contaminated(std::size_t n, const std::vector<double>& center,
                            const std::vector<double>& contamination_center, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw InvalidArgument("contamination rate must lie in [0, 1]");
  if (center.empty()) throw InvalidArgument("center must be non-empty");
  if (contamination_center.size() != center.size()) throw DimensionMismatch("centers differ in dimension");
  const auto replaced = static_cast<std::size_t>(std::floor(rate * static_cast<double>(n)));
  std::vector<double> values;
  values.reserve(n * center.size());
  Rng rng(derive_seed(seed, {0x636f6e74ULL}));
  for (std::size_t i = 0; i < n; ++i) append_normal_row(values, i < n - replaced ? center : contamination_center, rng);
  return Matrix(n, center.size(), std::move(values));
}

double mixture_density(std::span<const double> x, const std::vector<std::vector<double>>& centers) {
  if (centers.empty()) throw InvalidArgument("mixture needs at least one center");
  const double d = static_cast<double>(x.size());
  const double norm_const = std::pow(2.0 * std::numbers::pi, -0.5 * d);
  double sum = 0.0;
  for (const auto& c : centers) sum += std::exp(-0.5 * squared_distance(x, padded(c, x.size())));
  return norm_const * sum / static_cast<double>(centers.size());
}

std::vector<std::vector<double>> bigaussian_centers() { return {{-3.5, -3.5}, {3.5, 3.5}}; }

KernelSpec resolve_kernel(const ScorerSettings& settings, const DataMatrix& reference) {
  if (settings.options.kernel) return *settings.options.kernel;
  return KernelSpec::gaussian(median_heuristic(reference, settings.seed));
}

ScoreFunction make_depth_scorer(const ScorerSettings& settings) {
  return [settings](const DataMatrix& reference, const DataMatrix& queries) {
    DepthOptions opts = settings.options;
    DepthMethod method;
    switch (settings.method) {
      case DepthMethodKind::Halfspace:
        method = HalfspaceConfig::for_dimension(reference.cols(), settings.halfspace_directions, settings.seed);
        break;
      case DepthMethodKind::Logistic:
        method = LogisticDepthMethod{};
        break;
      case DepthMethodKind::Svm:
        method = SvmDepthMethod{};
        opts.kernel = resolve_kernel(settings, reference);
        break;
    }
    auto entries = depth_batch({reference, queries, method, opts}, settings.threads);
    std::vector<double> out(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (!entries[i].ok()) throw Error("query " + std::to_string(i) + ": " + entries[i].error);
      if (settings.require_convergence && !entries[i].result.converged) {
        throw NotConverged("query " + std::to_string(i) + " did not converge (residual " +
                           std::to_string(entries[i].result.residual) + ")");
      }
      out[i] = entries[i].result.value;
    }
    return out;
  };
}

ScoreFunction true_density_scorer() {
  return [](const DataMatrix&, const DataMatrix& queries) {
    const auto centers = bigaussian_centers();
    std::vector<double> out(queries.rows());
    for (std::size_t i = 0; i < queries.rows(); ++i) out[i] = mixture_density(queries.row(i), centers);
    return out;
  };
}

std::vector<RankCorrelationRow> rank_correlation_experiment(const RankCorrelationConfig& config,
                                                            const ScoreFunction& depth) {
  if (config.n < 2 || config.n % 2 != 0) throw InvalidArgument("rank correlation needs an even n >= 2");
  const auto centers = bigaussian_centers();
  std::vector<RankCorrelationRow> rows;
  for (std::size_t d : config.dimensions) {
    if (d < 2) throw InvalidArgument("rank correlation dimensions must be >= 2");
    for (std::size_t run = 0; run < config.runs; ++run) {
      const auto data = gen_bigaussian(config.n / 2, centers, d, derive_seed(config.seed, {d, run}));
      std::vector<double> density(data.rows());
      for (std::size_t i = 0; i < data.rows(); ++i) density[i] = mixture_density(data.row(i), centers);
      const auto scores = depth(data, data);
      rows.push_back({d, run, kendall_tau(density, scores), spearman_rho(density, scores)});
    }
  }
  return rows;
}

double log_log_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionMismatch("slope fit inputs differ in length");
  if (x.size() < 2) throw InvalidArgument("slope is undefined for fewer than two sample sizes");
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("log-log slope needs positive values");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) throw InvalidArgument("slope is undefined for a single distinct sample size");
  return sxy / sxx;
}

DataMatrix convergence_reference_sample(const ConvergenceConfig& config) {
  if (config.z.empty()) throw InvalidArgument("convergence experiment needs a query point");
  if (config.n_grid.empty()) throw InvalidArgument("n_grid is empty");
  const std::size_t n_ref = config.n_ref == 0 ? 50 * config.n_grid.back() : config.n_ref;
  Rng rng(derive_seed(config.seed, {0x726566ULL}));
  return draw_sample(n_ref, config.z.size(), config.distribution, rng);
}

ConvergenceRun convergence_experiment(const ConvergenceConfig& config, const PointDepth& depth) {
  if (config.z.empty()) throw InvalidArgument("convergence experiment needs a query point");
  if (config.n_grid.size() < 2) throw InvalidArgument("slope is undefined for fewer than two sample sizes");
  if (config.repeats < 1) throw InvalidArgument("convergence experiment needs at least one repeat");
  for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
    if (config.n_grid[g] == 0 || (g > 0 && config.n_grid[g] <= config.n_grid[g - 1])) {
      throw InvalidArgument("n_grid must be positive and strictly increasing");
    }
  }
  const std::size_t d = config.z.size();

  ConvergenceRun run;
  run.n_grid = config.n_grid;
  run.repeats = config.repeats;
  {
    const auto reference = convergence_reference_sample(config);
    run.n_ref = reference.rows();
    run.reference_depth = depth(config.z, reference);
  }

  const std::size_t units = config.n_grid.size() * config.repeats;
  std::vector<double> flat(units);
  detail::parallel_for(units, config.threads, [&](std::size_t u) {
    const std::size_t g = u / config.repeats, r = u % config.repeats;
    const std::size_t n = config.n_grid[g];
    Rng rng(derive_seed(config.seed, {0x736d706cULL, n, r}));
    flat[u] = std::abs(depth(config.z, draw_sample(n, d, config.distribution, rng)) - run.reference_depth);
  });

  run.errors.resize(config.n_grid.size());
  run.mean_errors.resize(config.n_grid.size());
  std::vector<double> xs(config.n_grid.size());
  for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
    run.errors[g].assign(flat.begin() + static_cast<std::ptrdiff_t>(g * config.repeats),
                         flat.begin() + static_cast<std::ptrdiff_t>((g + 1) * config.repeats));
    run.mean_errors[g] =
        std::accumulate(run.errors[g].begin(), run.errors[g].end(), 0.0) / static_cast<double>(config.repeats);
    xs[g] = static_cast<double>(config.n_grid[g]);
  }
  const double floor = 1e-12 * std::max(1.0, std::abs(run.reference_depth));
  if (std::any_of(run.mean_errors.begin(), run.mean_errors.end(), [&](double e) { return e <= floor; })) {
    throw InvalidArgument("convergence errors vanish; the slope fit is degenerate");
  }
  run.slope = log_log_slope(xs, run.mean_errors);
  return run;
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
  const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(values.size() - 1)));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

std::size_t quantile_band(double score, std::span<const double> thresholds) {
  return static_cast<std::size_t>(std::count_if(thresholds.begin(), thresholds.end(),
                                                [&](double t) { return t <= score; }));
}

GridReport contamination_grid(const DataMatrix& data, const ScoreFunction& score, std::size_t resolution,
                              std::vector<double> quantiles) {
  if (data.cols() != 2) throw InvalidArgument("score grids need 2D data (got d=" + std::to_string(data.cols()) + ")");
  if (data.empty()) throw InvalidArgument("score grid needs data");
  if (resolution < 2) throw InvalidArgument("grid resolution must be at least 2");
  std::sort(quantiles.begin(), quantiles.end());

  double lo[2], hi[2];
  for (std::size_t j = 0; j < 2; ++j) {
    lo[j] = hi[j] = data(0, j);
    for (std::size_t i = 1; i < data.rows(); ++i) {
      lo[j] = std::min(lo[j], data(i, j));
      hi[j] = std::max(hi[j], data(i, j));
    }
    lo[j] -= 1.0;
    hi[j] += 1.0;
  }
  auto coord = [&](std::size_t j, std::size_t k) {
    return lo[j] + (hi[j] - lo[j]) * static_cast<double>(k) / static_cast<double>(resolution - 1);
  };

  std::vector<double> coords;
  coords.reserve(2 * resolution * resolution);
  for (std::size_t iy = 0; iy < resolution; ++iy) {
    for (std::size_t ix = 0; ix < resolution; ++ix) {
      coords.push_back(coord(0, ix));
      coords.push_back(coord(1, iy));
    }
  }
  const Matrix cells(resolution * resolution, 2, std::move(coords));

  GridReport report;
  const auto cell_scores = score(data, cells);
  report.cells.resize(cells.rows());
  for (std::size_t c = 0; c < cells.rows(); ++c) report.cells[c] = {cells(c, 0), cells(c, 1), cell_scores[c]};
  report.data_scores = score(data, data);
  report.quantiles = quantiles;
  for (double q : quantiles) report.thresholds.push_back(empirical_quantile(report.data_scores, q));
  return report;
}

}  // namespace lossdepth
