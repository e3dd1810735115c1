#pragma once

#include <cstdint>
#include <vector>

#include "rankbreak/likelihood.hpp"
#include "rankbreak/model.hpp"

namespace rankbreak {

// Offer-set sizes above this are refused by full_mle_small, which enumerates
// every ranking consistent with an observation.
inline constexpr int kMaxOfferEnumeration = 8;

struct FitOptions {
  double bound = 2.0;
  int max_iters = 5000;
  // Convergence threshold on the normalized projected-gradient norm
  // ||project(theta + grad/N) - theta||, N the effective sample size; the
  // corresponding raw gradient-norm threshold therefore scales with N.
  double grad_tol = 1e-7;
  double initial_step = 1.0;
  double armijo_c = 1e-4;
  double backtrack_shrink = 0.5;
  double step_growth = 2.0;
  int workers = 1;

  void validate() const;  // throws ConfigError
};

struct FitResult {
  Theta theta_hat;
  double final_value = 0.0;
  int iterations = 0;  // accepted ascent steps
  bool converged = false;
  double grad_norm = 0.0;  // normalized projected-gradient norm at exit
  double seconds = 0.0;    // wall time of the fit call
  std::uint64_t permutation_terms_evaluated = 0;
  bool comparison_graph_connected = true;
};

// Hidden within-block orders (best item first) for the non-bottom blocks of each
// observation; orders[j][t] orders partition.blocks[t+1] of observation j.
struct TopBlockOrders {
  std::vector<std::vector<std::vector<int>>> per_observation;
};

// Maximizes the sum of retained-edge log-probabilities over the centered box by
// projected gradient ascent with Armijo backtracking, starting from zero. The
// objective is concave, so with a connected comparison graph the maximizer is
// unique; with a disconnected one the box keeps the problem bounded and the
// result is flagged via comparison_graph_connected. Throws DataError when no
// edges are retained at the dataset's order cap.
FitResult fit_order_M(const Dataset& data, const FitOptions& opts);

// Reference maximum-likelihood route for small offer sets: per observation,
// enumerates every ranking consistent with the partition (all interleavings of
// each block, blocks kept in order) and maximizes the log of the summed ranking
// probabilities. On the first evaluation each observation's enumerated value is
// cross-checked against the sum of its edge log-probabilities; a mismatch beyond
// 1e-8 aborts with NumericError. Offer sets above kMaxOfferEnumeration throw.
FitResult full_mle_small(const Dataset& data, const FitOptions& opts);

// Deliberately naive baseline: every cross-block pair of every observation is
// treated as an independent two-item comparison (the order cap is ignored).
// Kept as a statistical control; it is not consistent for partitions with
// non-singleton top blocks. permutation_terms_evaluated counts aggregated pair
// terms per evaluation.
FitResult pairwise_rb_inconsistent(const Dataset& data, const FitOptions& opts);

// Side-information reference: refines each observation's non-bottom blocks into
// singletons using the provided true within-block orders, then runs the order-1
// fit on the refined dataset. Throws DataError when orders are missing or do
// not match the partitions.
FitResult oracle_mle(const Dataset& data, const TopBlockOrders& orders, const FitOptions& opts);

// Union-find over offer sets: true when every item of [0, d) is linked to every
// other through observations that retain at least one edge.
bool comparison_graph_connected(const Dataset& data);

}  // namespace rankbreak
