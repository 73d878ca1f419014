#include "lossdepth/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lossdepth {

namespace {

struct Neighbour {
  double distance;
  std::size_t index;
};

// k nearest training points of x, ordered by (distance, index); `skip` excludes one index.
std::vector<Neighbour> nearest(const DataMatrix& train, std::span<const double> x, std::size_t k, std::size_t skip) {
  std::vector<Neighbour> all;
  all.reserve(train.rows());
  for (std::size_t j = 0; j < train.rows(); ++j) {
    if (j == skip) continue;
    all.push_back({std::sqrt(squared_distance(x, train.row(j))), j});
  }
  auto cmp = [](const Neighbour& a, const Neighbour& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), cmp);
  all.resize(k);
  return all;
}

// Keeps densities finite when a point has k exact duplicates.
constexpr double kReachEpsilon = 1e-10;

double local_reachability_density(const std::vector<Neighbour>& nbrs, std::span<const double> k_distance) {
  double sum = 0.0;
  for (const auto& nb : nbrs) sum += std::max(k_distance[nb.index], nb.distance);
  return 1.0 / (sum / static_cast<double>(nbrs.size()) + kReachEpsilon);
}

}  // namespace

std::vector<double> lof_scores(const DataMatrix& train, const DataMatrix& test, const LofConfig& config) {
  const std::size_t n = train.rows();
  if (config.k < 1 || config.k >= n) {
    throw InvalidArgument("LOF needs 1 <= k < n (k=" + std::to_string(config.k) + ", n=" + std::to_string(n) + ")");
  }
  if (!test.empty() && test.cols() != train.cols()) throw DimensionMismatch("LOF test and train dimensions differ");

  std::vector<std::vector<Neighbour>> train_nbrs(n);
  std::vector<double> k_distance(n);
  for (std::size_t i = 0; i < n; ++i) {
    train_nbrs[i] = nearest(train, train.row(i), config.k, i);
    k_distance[i] = train_nbrs[i].back().distance;
  }
  std::vector<double> lrd(n);
  for (std::size_t i = 0; i < n; ++i) lrd[i] = local_reachability_density(train_nbrs[i], k_distance);

  std::vector<double> out(test.rows());
  for (std::size_t t = 0; t < test.rows(); ++t) {
    auto nbrs = nearest(train, test.row(t), config.k, std::numeric_limits<std::size_t>::max());
    const double own = local_reachability_density(nbrs, k_distance);
    double ratio = 0.0;
    for (const auto& nb : nbrs) ratio += lrd[nb.index];
    out[t] = ratio / static_cast<double>(nbrs.size()) / own;
  }
  return out;
}

OneClassSvm OneClassSvm::fit(const DataMatrix& train, const OcsvmConfig& config) {
  if (!(config.nu > 0.0 && config.nu <= 1.0)) throw InvalidArgument("one-class SVM needs 0 < nu <= 1");
  const std::size_t n = train.rows();
  if (n == 0) throw InvalidArgument("one-class SVM needs training data");

  OneClassSvm model;
  model.train_ = train;
  model.kernel_ = config.kernel;
  const Matrix k = gram(config.kernel, model.train_, model.train_);
  const double upper = 1.0 / (config.nu * static_cast<double>(n));

  auto& a = model.alpha_;
  a.assign(n, 1.0 / static_cast<double>(n));
  std::vector<double> g(n, 0.0);  // g = K a
  for (std::size_t i = 0; i < n; ++i) {
    auto r = k.row(i);
    g[i] = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(n);
  }

  // Increase the coordinate with the smallest gradient among a_i < U,
  // decrease the one with the largest gradient among a_j > 0.
  std::size_t it = 0;
  double violation = 0.0;
  for (;; ++it) {
    std::size_t up = n, down = n;
    double gmin = std::numeric_limits<double>::infinity(), gmax = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (a[t] < upper && g[t] < gmin) gmin = g[t], up = t;
      if (a[t] > 0.0 && g[t] > gmax) gmax = g[t], down = t;
    }
    violation = (up == n || down == n) ? 0.0 : gmax - gmin;
    if (violation <= config.tolerance || it >= config.max_iterations) break;
    double curvature = k(up, up) + k(down, down) - 2.0 * k(up, down);
    if (curvature <= 0.0) curvature = 1e-12;
    const double step = std::min({(gmax - gmin) / curvature, upper - a[up], a[down]});
    a[up] += step;
    a[down] -= step;
    for (std::size_t t = 0; t < n; ++t) g[t] += step * (k(t, up) - k(t, down));
  }
  model.diagnostics_ = {it, violation, violation <= config.tolerance};

  // rho: median gradient over free support vectors, or the midpoint of the
  // KKT bracket when every coefficient sits on a bound.
  std::vector<double> free_g;
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) {
    if (a[t] > 0.0 && a[t] < upper) free_g.push_back(g[t]);
    else if (a[t] <= 0.0) hi = std::min(hi, g[t]);
    else lo = std::max(lo, g[t]);
  }
  if (!free_g.empty()) {
    const std::size_t mid = free_g.size() / 2;
    std::nth_element(free_g.begin(), free_g.begin() + static_cast<std::ptrdiff_t>(mid), free_g.end());
    double med = free_g[mid];
    if (free_g.size() % 2 == 0) {
      const double below = *std::max_element(free_g.begin(), free_g.begin() + static_cast<std::ptrdiff_t>(mid));
      med = 0.5 * (med + below);
    }
    model.rho_ = med;
  } else if (std::isfinite(lo) && std::isfinite(hi)) {
    model.rho_ = 0.5 * (lo + hi);
  } else {
    model.rho_ = std::isfinite(lo) ? lo : hi;
  }

  double quad = 0.0, slack = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    quad += a[t] * g[t];
    slack += std::max(0.0, model.rho_ - g[t]);
  }
  const double primal = 0.5 * quad + upper * slack - model.rho_;
  const double dual = -0.5 * quad;
  model.gap_ = primal - dual;
  return model;
}

double OneClassSvm::score(std::span<const double> x) const {
  if (x.size() != train_.cols()) throw DimensionMismatch("one-class SVM score: wrong dimension");
  double s = 0.0;
  for (std::size_t i = 0; i < train_.rows(); ++i)
    if (alpha_[i] != 0.0) s += alpha_[i] * kernel_(train_.row(i), x);
  return s - rho_;
}

std::vector<double> OneClassSvm::score(const DataMatrix& points) const {
  std::vector<double> out(points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) out[i] = score(points.row(i));
  return out;
}

std::vector<double> ocsvm_fit_score(const DataMatrix& train, const DataMatrix& test, const OcsvmConfig& config) {
  auto model = OneClassSvm::fit(train, config);
  if (!model.diagnostics().converged) {
    throw NotConverged("one-class SVM stopped with KKT violation " + std::to_string(model.diagnostics().residual));
  }
  return model.score(test);
}

}  // namespace lossdepth
