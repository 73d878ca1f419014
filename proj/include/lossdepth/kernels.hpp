#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>

#include "lossdepth/matrix.hpp"

namespace lossdepth {

/// k(x,y) = exp(-gamma ||x-y||^2)
struct GaussianKernel {
  double gamma;
};

/// k(x,y) = exp(-||x-y||_1 / sigma)
struct LaplacianKernel {
  double sigma;
};

/// k(x,y) = (c^2 + ||x-y||^2)^beta, beta < 0
struct ImqKernel {
  double c;
  double beta;
};

/// k(x,y) = <x,y>; unbounded, kept for linear baselines.
struct LinearKernel {};

class KernelSpec {
 public:
  using Family = std::variant<GaussianKernel, LaplacianKernel, ImqKernel, LinearKernel>;

  explicit KernelSpec(Family family);

  static KernelSpec gaussian(double gamma) { return KernelSpec(GaussianKernel{gamma}); }
  static KernelSpec laplacian(double sigma) { return KernelSpec(LaplacianKernel{sigma}); }
  static KernelSpec imq(double c, double beta) { return KernelSpec(ImqKernel{c, beta}); }
  static KernelSpec linear() { return KernelSpec(LinearKernel{}); }

  const Family& family() const noexcept { return family_; }

  /// True when sup_x k(x,x) is finite.
  bool bounded() const noexcept;
  /// sup_x k(x,x): 1 for Gaussian and Laplacian, c^(2 beta) for IMQ.
  double bound() const;

  /// Evaluates without a dimension check; callers guarantee x.size() == y.size().
  double operator()(std::span<const double> x, std::span<const double> y) const;

  std::string describe() const;

 private:
  Family family_;
};

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

/// Dense Gram matrix with entry (i,j) = k(A_i, B_j). Rows may be computed
/// on several threads; every entry is computed independently, so the output
/// does not depend on the thread count.
Matrix gram(const KernelSpec& spec, const Matrix& a, const Matrix& b, unsigned threads = 1);

/// Samples larger than this are subsampled (seeded) before pairwise
/// bandwidth statistics are taken.
inline constexpr std::size_t kHeuristicSampleLimit = 2000;

/// gamma = 1 / median{ ||x_i - x_j||^2 : i < j }, lower middle value for even counts.
double median_heuristic(const Matrix& a, std::uint64_t seed = 0);

/// gamma = 0.5 / q25{ ||x_i - x_j|| }^2 with the lower-interpolation quartile.
double quartile_heuristic(const Matrix& a, std::uint64_t seed = 0);

}  // namespace lossdepth
