#include "lossdepth/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lossdepth/random.hpp"
#include "parallel.hpp"

namespace lossdepth {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double l1_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

// Squared pairwise distances over i < j, on a seeded subsample when large.
std::vector<double> pairwise_squared_distances(const Matrix& a, std::uint64_t seed) {
  if (a.rows() < 2) throw InvalidArgument("bandwidth heuristic needs at least two points");
  Matrix sample;
  const Matrix* pts = &a;
  if (a.rows() > kHeuristicSampleLimit) {
    Rng rng(derive_seed(seed, {0x6b65726e656cULL}));
    auto idx = rng.sample_without_replacement(a.rows(), kHeuristicSampleLimit);
    std::sort(idx.begin(), idx.end());
    sample = a.select_rows(idx);
    pts = &sample;
  }
  const std::size_t n = pts->rows();
  std::vector<double> d2;
  d2.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d2.push_back(squared_distance(pts->row(i), pts->row(j)));
  return d2;
}

// Lower-interpolation quantile: the element at index floor(q * (m - 1)).
double lower_quantile(std::vector<double>& v, double q) {
  auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(v.size() - 1)));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

}  // namespace

KernelSpec::KernelSpec(Family family) : family_(family) {
  std::visit(overloaded{
                 [](const GaussianKernel& k) {
                   if (!(k.gamma > 0.0) || !std::isfinite(k.gamma))
                     throw InvalidArgument("gaussian kernel needs gamma > 0");
                 },
                 [](const LaplacianKernel& k) {
                   if (!(k.sigma > 0.0) || !std::isfinite(k.sigma))
                     throw InvalidArgument("laplacian kernel needs sigma > 0");
                 },
                 [](const ImqKernel& k) {
                   if (!(k.c > 0.0) || !std::isfinite(k.c)) throw InvalidArgument("imq kernel needs c > 0");
                   if (!(k.beta < 0.0) || !std::isfinite(k.beta))
                     throw InvalidArgument("imq kernel needs beta < 0");
                 },
                 [](const LinearKernel&) {},
             },
             family_);
}

bool KernelSpec::bounded() const noexcept { return !std::holds_alternative<LinearKernel>(family_); }

double KernelSpec::bound() const {
  return std::visit(overloaded{
                        [](const GaussianKernel&) { return 1.0; },
                        [](const LaplacianKernel&) { return 1.0; },
                        [](const ImqKernel& k) { return std::pow(k.c, 2.0 * k.beta); },
                        [](const LinearKernel&) -> double {
                          throw InvalidArgument("linear kernel is unbounded");
                        },
                    },
                    family_);
}

double KernelSpec::operator()(std::span<const double> x, std::span<const double> y) const {
  return std::visit(overloaded{
                        [&](const GaussianKernel& k) { return std::exp(-k.gamma * squared_distance(x, y)); },
                        [&](const LaplacianKernel& k) { return std::exp(-l1_distance(x, y) / k.sigma); },
                        [&](const ImqKernel& k) {
                          return std::pow(k.c * k.c + squared_distance(x, y), k.beta);
                        },
                        [&](const LinearKernel&) { return dot(x, y); },
                    },
                    family_);
}

std::string KernelSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const GaussianKernel& k) { os << "gaussian(gamma=" << k.gamma << ")"; },
                 [&](const LaplacianKernel& k) { os << "laplacian(sigma=" << k.sigma << ")"; },
                 [&](const ImqKernel& k) { os << "imq(c=" << k.c << ",beta=" << k.beta << ")"; },
                 [&](const LinearKernel&) { os << "linear"; },
             },
             family_);
  return os.str();
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DimensionMismatch("kernel arguments have dimensions " + std::to_string(x.size()) + " and " +
                            std::to_string(y.size()));
  }
  return spec(x, y);
}

Matrix gram(const KernelSpec& spec, const Matrix& a, const Matrix& b, unsigned threads) {
  if (a.cols() != b.cols() && !a.empty() && !b.empty()) {
    throw DimensionMismatch("gram operands have dimensions " + std::to_string(a.cols()) + " and " +
                            std::to_string(b.cols()));
  }
  std::vector<double> out(a.rows() * b.rows());
  const bool symmetric = &a == &b;
  detail::parallel_for(a.rows(), threads, [&](std::size_t i) {
    auto xi = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      // Mirror the upper triangle so symmetric Grams are exactly symmetric.
      if (symmetric && j < i) continue;
      out[i * b.rows() + j] = spec(xi, b.row(j));
    }
  });
  if (symmetric) {
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = 0; j < i; ++j) out[i * b.rows() + j] = out[j * b.rows() + i];
  }
  return Matrix(a.rows(), b.rows(), std::move(out));
}

double median_heuristic(const Matrix& a, std::uint64_t seed) {
  auto d2 = pairwise_squared_distances(a, seed);
  const double med = lower_quantile(d2, 0.5);
  if (!(med > 0.0)) throw DegenerateBandwidth("median squared distance is zero; points are (mostly) identical");
  return 1.0 / med;
}

double quartile_heuristic(const Matrix& a, std::uint64_t seed) {
  auto d2 = pairwise_squared_distances(a, seed);
  // sqrt is monotone, so the quartile of distances is sqrt of the quartile of squares.
  const double q = std::sqrt(lower_quantile(d2, 0.25));
  if (!(q > 0.0)) throw DegenerateBandwidth("first quartile of distances is zero");
  return 0.5 / (q * q);
}

}  // namespace lossdepth
