#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lossdepth/core.hpp"
#include "lossdepth/kernels.hpp"

namespace lossdepth {

struct LofConfig {
  std::size_t k = 20;
};

/// Local outlier factor of each test point with respect to the training
/// sample (novelty mode: training points keep their train-only
/// neighbourhoods). Higher means more outlying; about 1 inside homogeneous
/// regions. Neighbour ties are broken by training index.
std::vector<double> lof_scores(const DataMatrix& train, const DataMatrix& test, const LofConfig& config);

struct OcsvmConfig {
  double nu = 0.15;
  KernelSpec kernel = KernelSpec::gaussian(1.0);
  /// Max KKT violation at termination.
  double tolerance = 1e-6;
  std::size_t max_iterations = 1'000'000;
};

/// nu-one-class SVM fitted through its dual
///
///   min 1/2 a'Ka  s.t.  0 <= a_i <= 1/(nu n),  sum a_i = 1
///
/// by maximal-violating-pair updates started from the uniform point.
class OneClassSvm {
 public:
  static OneClassSvm fit(const DataMatrix& train, const OcsvmConfig& config);

  /// sum_i a_i k(x_i, x) - rho; negative outside the estimated support.
  double score(std::span<const double> x) const;
  std::vector<double> score(const DataMatrix& points) const;

  const std::vector<double>& alpha() const noexcept { return alpha_; }
  double rho() const noexcept { return rho_; }
  /// Primal objective at (w = sum a_i phi(x_i), rho) minus the dual objective.
  double duality_gap() const noexcept { return gap_; }
  const SolverDiagnostics& diagnostics() const noexcept { return diagnostics_; }

 private:
  DataMatrix train_;
  KernelSpec kernel_ = KernelSpec::gaussian(1.0);
  std::vector<double> alpha_;
  double rho_ = 0.0;
  double gap_ = 0.0;
  SolverDiagnostics diagnostics_;
};

/// Fits on train and scores test; throws NotConverged when the KKT
/// tolerance is not reached.
std::vector<double> ocsvm_fit_score(const DataMatrix& train, const DataMatrix& test, const OcsvmConfig& config);

}  // namespace lossdepth
