#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lossdepth/random.hpp"
#include "lossdepth/solvers.hpp"
#include "parallel.hpp"

namespace lossdepth {

KernelReference::KernelReference(const DataMatrix& points, KernelSpec kernel, unsigned threads,
                                 std::size_t dense_limit)
    : points_(&points), kernel_(std::move(kernel)) {
  const std::size_t n = points.rows();
  if (n == 0) throw InvalidArgument("kernel reference needs a non-empty sample");
  diag_.resize(n);
  for (std::size_t i = 0; i < n; ++i) diag_[i] = kernel_(points.row(i), points.row(i));
  row_sums_.assign(n, 0.0);
  if (n <= dense_limit) {
    gram_ = gram(kernel_, points, points, threads);
    for (std::size_t i = 0; i < n; ++i) {
      auto r = gram_->row(i);
      row_sums_[i] = std::accumulate(r.begin(), r.end(), 0.0);
    }
  } else {
    // Each row is summed in index order by one worker: thread-count independent.
    detail::parallel_for(n, threads, [&](std::size_t i) {
      auto xi = points.row(i);
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += kernel_(xi, points.row(j));
      row_sums_[i] = s;
    });
  }
}

void KernelReference::column(std::size_t j, std::span<double> out) const {
  if (gram_) {
    auto r = gram_->row(j);
    std::copy(r.begin(), r.end(), out.begin());
    return;
  }
  auto xj = points_->row(j);
  for (std::size_t i = 0; i < points_->rows(); ++i) out[i] = kernel_(points_->row(i), xj);
}

std::vector<double> KernelReference::against(std::span<const double> z) const {
  if (z.size() != points_->cols()) throw DimensionMismatch("query dimension differs from reference dimension");
  std::vector<double> out(points_->rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = kernel_(points_->row(i), z);
  return out;
}

double svm_box_positive(std::size_t n, double lambda) { return 1.0 / (4.0 * static_cast<double>(n) * lambda); }
double svm_box_query(double lambda) { return 1.0 / (4.0 * lambda); }

namespace {

// Index n stands for the query point z. Provides kernel columns over the
// n + 1 labelled points.
struct AugmentedKernel {
  const KernelReference& ref;
  std::span<const double> kz;  // k(x_i, z)
  double kzz;

  std::size_t size() const { return ref.size() + 1; }
  int label(std::size_t k) const { return k < ref.size() ? 1 : -1; }
  double diagonal(std::size_t k) const { return k < ref.size() ? ref.diagonal(k) : kzz; }

  void column(std::size_t k, std::span<double> out) const {
    const std::size_t n = ref.size();
    if (k < n) {
      ref.column(k, out.first(n));
      out[n] = kz[k];
    } else {
      std::copy(kz.begin(), kz.end(), out.begin());
      out[n] = kzz;
    }
  }
};

// Dual gradient 1 - y_k f(x_k) projected on the box, as a violation magnitude.
double box_violation(double grad, double alpha, double upper) {
  if (alpha <= 0.0) return std::max(grad, 0.0);
  if (alpha >= upper) return std::max(-grad, 0.0);
  return std::abs(grad);
}

void finalize(const AugmentedKernel& ak, double lambda, SvmDualSolution& s) {
  const std::size_t m = ak.size();
  const std::size_t n = m - 1;
  // Exact recomputation of f when the Gram is cached; otherwise the decision
  // values maintained by the solver are kept.
  if (ak.ref.has_dense_gram()) {
    std::vector<double> col(m);
    std::vector<double> f(m, s.intercept);
    for (std::size_t k = 0; k < m; ++k) {
      if (s.alpha[k] == 0.0) continue;
      ak.column(k, col);
      const double c = s.alpha[k] * ak.label(k);
      for (std::size_t j = 0; j < m; ++j) f[j] += c * col[j];
    }
    s.decision = std::move(f);
  }
  std::vector<double> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[i] = std::max(0.0, 1.0 - s.decision[i]);
  s.loss = weighted_expectation(pos, std::max(0.0, 1.0 + s.decision[n]));
  double norm2 = 0.0;
  for (std::size_t k = 0; k < m; ++k) norm2 += s.alpha[k] * ak.label(k) * (s.decision[k] - s.intercept);
  s.rkhs_norm_squared = std::max(norm2, 0.0);
  s.primal = s.loss + lambda * s.rkhs_norm_squared;
  s.dual = std::accumulate(s.alpha.begin(), s.alpha.end(), 0.0) - 0.5 * s.rkhs_norm_squared;
}

SvmDualSolution solve_without_intercept(const AugmentedKernel& ak, double lambda, const SolverConfig& config) {
  const std::size_t n = ak.ref.size();
  const std::size_t m = n + 1;
  const double c_pos = svm_box_positive(n, lambda);
  const double c_z = svm_box_query(lambda);
  auto upper = [&](std::size_t k) { return k < n ? c_pos : c_z; };

  SvmDualSolution s;
  s.alpha.assign(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) s.alpha[i] = c_pos;
  s.alpha[n] = c_z;

  // f at the upper corner: c_pos * rowsum_i - c_z * k(x_i, z).
  auto rowsum = ak.ref.row_sums();
  std::vector<double> f(m);
  for (std::size_t i = 0; i < n; ++i) f[i] = c_pos * rowsum[i] - c_z * ak.kz[i];
  f[n] = c_pos * std::accumulate(ak.kz.begin(), ak.kz.end(), 0.0) - c_z * ak.kzz;
  // grad_k = 1 - y_k f_k
  std::vector<double> grad(m);
  for (std::size_t k = 0; k < m; ++k) grad[k] = 1.0 - ak.label(k) * f[k];

  std::vector<char> degenerate(m, 0);
  for (std::size_t k = 0; k < m; ++k) degenerate[k] = ak.diagonal(k) <= 0.0;
  s.degenerate_coordinates = static_cast<std::size_t>(std::count(degenerate.begin(), degenerate.end(), 1));

  auto max_violation = [&] {
    double v = 0.0;
    for (std::size_t k = 0; k < m; ++k)
      if (!degenerate[k]) v = std::max(v, box_violation(grad[k], s.alpha[k], upper(k)));
    return v;
  };

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(config.seed, {0x737666ULL}));
  std::vector<double> col(m);

  double violation = max_violation();
  std::size_t sweeps = 0;
  while (violation > config.tolerance && sweeps < config.max_iterations) {
    rng.shuffle(order);
    for (std::size_t k : order) {
      if (degenerate[k]) continue;
      const double updated = std::clamp(s.alpha[k] + grad[k] / ak.diagonal(k), 0.0, upper(k));
      const double delta = updated - s.alpha[k];
      if (delta == 0.0) continue;
      s.alpha[k] = updated;
      ak.column(k, col);
      const double c = delta * ak.label(k);
      for (std::size_t j = 0; j < m; ++j) grad[j] -= ak.label(j) * c * col[j];
    }
    ++sweeps;
    violation = max_violation();
  }

  s.decision.resize(m);
  for (std::size_t k = 0; k < m; ++k) s.decision[k] = ak.label(k) * (1.0 - grad[k]);
  s.diagnostics = {sweeps, violation, violation <= config.tolerance};
  return s;
}

// Maximal-violating-pair SMO on min 1/2 a'Qa - e'a, y'a = 0, 0 <= a <= C,
// with Q_kl = y_k y_l K_kl.
SvmDualSolution solve_with_intercept(const AugmentedKernel& ak, double lambda, const SolverConfig& config) {
  const std::size_t n = ak.ref.size();
  const std::size_t m = n + 1;
  const double c_pos = svm_box_positive(n, lambda);
  const double c_z = svm_box_query(lambda);
  auto upper = [&](std::size_t k) { return k < n ? c_pos : c_z; };
  auto y = [&](std::size_t k) { return static_cast<double>(ak.label(k)); };
  constexpr double kTau = 1e-12;

  SvmDualSolution s;
  s.alpha.assign(m, 0.0);
  std::vector<double> g(m, -1.0);  // gradient of the minimization form
  std::vector<double> col_i(m), col_j(m);

  auto in_up = [&](std::size_t t) { return y(t) > 0 ? s.alpha[t] < upper(t) : s.alpha[t] > 0.0; };
  auto in_low = [&](std::size_t t) { return y(t) > 0 ? s.alpha[t] > 0.0 : s.alpha[t] < upper(t); };

  const std::size_t limit = config.max_iterations * m;
  std::size_t updates = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (;;) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    std::size_t i = m, j = m;
    for (std::size_t t = 0; t < m; ++t) {
      const double v = -y(t) * g[t];
      if (in_up(t) && v > gmax) gmax = v, i = t;
      if (in_low(t) && v < gmin) gmin = v, j = t;
    }
    gap = (i == m || j == m) ? 0.0 : gmax - gmin;
    if (gap <= config.tolerance || updates >= limit) break;

    ak.column(i, col_i);
    ak.column(j, col_j);
    const double qij = y(i) * y(j) * col_i[j];
    const double qii = ak.diagonal(i), qjj = ak.diagonal(j);
    const double ci = upper(i), cj = upper(j);
    const double old_i = s.alpha[i], old_j = s.alpha[j];
    double& ai = s.alpha[i];
    double& aj = s.alpha[j];
    if (y(i) != y(j)) {
      double quad = qii + qjj + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-g[i] - g[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) aj = 0.0, ai = diff;
      } else if (ai < 0.0) {
        ai = 0.0, aj = -diff;
      }
      if (diff > ci - cj) {
        if (ai > ci) ai = ci, aj = ci - diff;
      } else if (aj > cj) {
        aj = cj, ai = cj + diff;
      }
    } else {
      double quad = qii + qjj - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (g[i] - g[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > ci) {
        if (ai > ci) ai = ci, aj = sum - ci;
      } else if (aj < 0.0) {
        aj = 0.0, ai = sum;
      }
      if (sum > cj) {
        if (aj > cj) aj = cj, ai = sum - cj;
      } else if (ai < 0.0) {
        ai = 0.0, aj = sum;
      }
    }
    const double di = ai - old_i, dj = aj - old_j;
    for (std::size_t t = 0; t < m; ++t)
      g[t] += y(t) * (y(i) * col_i[t] * di + y(j) * col_j[t] * dj);
    ++updates;
  }

  // Intercept from free coordinates, midpoint of the feasible range otherwise.
  double free_sum = 0.0;
  std::size_t free_count = 0;
  double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < m; ++t) {
    const double yg = y(t) * g[t];
    if (s.alpha[t] >= upper(t)) {
      if (y(t) < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (s.alpha[t] <= 0.0) {
      if (y(t) > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (ub + lb);
  s.intercept = std::isfinite(rho) ? -rho : 0.0;

  s.decision.resize(m);
  // y_k g_k = f_k(no intercept) - y_k  =>  f_k = y_k g_k + y_k
  for (std::size_t t = 0; t < m; ++t) s.decision[t] = y(t) * g[t] + y(t) + s.intercept;
  const std::size_t sweeps = (updates + m - 1) / m;
  s.diagnostics = {sweeps, gap, gap <= config.tolerance};
  return s;
}

}  // namespace

SvmDualSolution svm_dual_solve(const KernelReference& reference, std::span<const double> query, double lambda,
                               bool intercept, const SolverConfig& config) {
  if (!(lambda > 0.0)) throw InvalidArgument("svm dual needs lambda > 0");
  const auto kz = reference.against(query);
  AugmentedKernel ak{reference, kz, reference.kernel()(query, query)};
  SvmDualSolution s = intercept ? solve_with_intercept(ak, lambda, config) : solve_without_intercept(ak, lambda, config);
  finalize(ak, lambda, s);
  return s;
}

SvmDualSolution svm_dual_solve(const DepthProblem& p) {
  require_valid(p);
  if (p.options.loss != LossKind::Hinge) throw InvalidArgument("the svm dual solver handles the hinge loss only");
  KernelReference ref(p.reference, *p.options.kernel);
  return svm_dual_solve(ref, p.query, p.options.lambda, p.options.intercept.value_or(false), p.options.solver);
}

}  // namespace lossdepth
