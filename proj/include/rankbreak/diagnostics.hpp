#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "rankbreak/likelihood.hpp"
#include "rankbreak/rng.hpp"

namespace rankbreak {

// Dense symmetric eigensolves above this item count are refused.
inline constexpr int kMaxDenseSpectrum = 2048;

// Weighted graph Laplacian of the co-offering structure: each observation adds
// p_j / (kappa_j (kappa_j - 1)) to every (i, i') pair of its offer set, where
// p_j is the observation's retained edge mass (sum of retained top-set sizes).
// Its trace equals the total retained mass sum(p_j).
struct ComparisonLaplacian {
  Eigen::MatrixXd matrix;
};

// include_all_edges = true ignores the dataset's order cap when computing p_j
// (used by the estimation-variance lower bound, which is about the information
// in the complete observations).
ComparisonLaplacian comparison_laplacian(const Dataset& data, bool include_all_edges = false);

// alpha = lambda_2 (d-1) / trace, beta = trace / (lambda_max (d-1)); both 1 on
// the complete, equally-weighted graph. Zero matrices report alpha = beta = 0.
struct SpectralSummary {
  double alpha = 0.0;
  double beta = 0.0;
  Eigen::VectorXd eigenvalues;  // ascending
};
SpectralSummary spectral_quantities(const ComparisonLaplacian& laplacian);

// Worst-case edge-shape constants over retained edges (m top-set size, r edge
// size, kappa the owning observation's offer size):
//   gamma1 = min ((r-m)/kappa)^(2 e^{2b} - 2)
//   gamma2 = min ((r-m)/r)^2
//   gamma3 = 1 - max 4 e^{16 b} m^2 r^2 kappa^2 / (gamma1 (r-m)^5)
//   nu     = max m kappa^2 / (r-m)^2
// gamma3 can be non-positive for heavy edges; the error bound below substitutes
// 1 at order caps M <= 3, where the bound holds unconditionally.
struct TopologyConstants {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma3 = 0.0;
  double nu = 0.0;
};
TopologyConstants topology_constants(const Dataset& data, double bound);

// Per-edge information-loss correction used by the variance lower bound; exact
// finite-sum form. eta(1, r) == 1/r.
double eta_correction(int m, int r);

// Minimax variance lower bound for unbiased estimators, combining a trace form
// over all edges (order cap ignored) with a spectral form over the provided
// all-edge Laplacian: max{ (d-1)^2 / sum(m - eta), (1/mu) sum_{i>=2} 1/lambda_i }
// with mu = max(m - eta). A disconnected graph (lambda_2 ~ 0) yields +infinity.
struct CramerRaoResult {
  double bound = 0.0;
  double mu = 0.0;
  std::vector<double> eta_values;  // per edge, observation order then edge order
};
CramerRaoResult cramer_rao_lower_bound(const Dataset& data, const ComparisonLaplacian& all_edge_laplacian);

// Finite-sample upper bound on the root-mean-square estimation error per item,
//   rhs = 40 e^{7b} / (alpha gamma1 gamma2^{3/2} gamma3) * sqrt(d log d / N),
// plus the sample-size condition
//   N >= 2^14 e^{20b} nu^2 / ((alpha gamma1 gamma2 gamma3)^2 beta) * (p_max/kappa_min) * d log d.
// For order caps M <= 3 gamma3 is replaced by 1 in both formulas. Throws
// NumericError when alpha, gamma1, or gamma2 vanish, or when the effective
// gamma3 is non-positive (the bound is undefined there).
struct ErrorUpperBound {
  double rhs = 0.0;
  bool sample_condition_met = false;
};
ErrorUpperBound error_upper_bound(const Dataset& data, double bound, const SpectralSummary& spectral,
                                  const TopologyConstants& topology);

// Second differences (f(x+hu) - 2f(x) + f(x-hu)) / h^2 of the retained-edge
// log-likelihood along random centered unit directions; all of them should be
// <= 0 up to round-off since the objective is concave.
struct CurvatureCheck {
  double max_curvature = 0.0;
  double min_curvature = 0.0;
  int directions = 0;
};
CurvatureCheck numerical_hessian_check(const Eigen::VectorXd& theta, const Dataset& data, int directions,
                                       double step, RngStream& rng);
double directional_second_difference(const Eigen::VectorXd& theta, const Dataset& data,
                                     const Eigen::VectorXd& direction, double step);

// One-call summary; error_upper_bound_rhs is NaN when the bound is undefined
// (zero alpha or non-positive effective gamma3), mirroring the throwing op.
struct DiagnosticsReport {
  double laplacian_trace = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma3 = 0.0;
  double nu = 0.0;
  std::int64_t effective_sample_size = 0;
  double cramer_rao_bound = 0.0;
  std::vector<double> eta_values;
  double mu = 0.0;
  double error_upper_bound_rhs = 0.0;
  bool sample_condition_met = false;
};
DiagnosticsReport diagnose(const Dataset& data, double bound);

}  // namespace rankbreak
