#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "rankbreak/model.hpp"
#include "rankbreak/poset.hpp"

namespace rankbreak {

// Top-set sizes above this are refused: the edge probability enumerates m!
// permutation terms, so the cost would explode silently otherwise.
inline constexpr int kMaxTopSetSize = 8;

// A collection of observations over items 0..d-1 together with the order cap M:
// edges with top-set size larger than M are ignored by every likelihood routine.
// Observations keep all their edges; filtering is logical, so the same dataset
// can be analyzed at several orders.
struct Dataset {
  int d = 0;
  int M = kMaxTopSetSize;
  std::vector<Observation> observations;

  // Throws DataError on item ids outside [0, d), malformed partitions, or edges
  // inconsistent with the partition; throws ConfigError on an invalid M.
  void validate() const;

  // Sum of top-set sizes over retained edges (the effective sample size).
  std::int64_t effective_sample_size() const;
  std::int64_t retained_edge_count() const;
};

// Per-edge gradient, sparse over the edge's items.
struct EdgeGradient {
  double log_prob = 0.0;
  std::vector<int> items;       // top items first, then bottom items
  std::vector<double> partials; // d(log_prob)/d(theta[items[k]])
  std::uint64_t permutation_terms = 0;
};

struct GradientResult {
  double value = 0.0;
  Eigen::VectorXd gradient;
  std::uint64_t permutation_terms = 0;
};

// Log-probability that every item of the edge's top set beats every item of its
// bottom set, with the top set internally unordered: a sum over the m!
// orderings of the top set, each a product of sequential-choice factors whose
// denominators also carry the whole bottom set. Permutations are enumerated in
// lexicographic order by item id; everything is max-shifted for stability.
double edge_log_prob(const Eigen::VectorXd& theta, const RankBreakingEdge& edge);
double edge_log_prob(const Theta& theta, const RankBreakingEdge& edge);

// Same enumeration, also accumulating d(log P)/d(theta_i) for every item of the
// edge in the single sweep. Entries for the two sides satisfy: top partials are
// 1 - (weighted occupancy), bottom partials are pure occupancy, and the whole
// vector sums to zero.
EdgeGradient edge_log_prob_gradient(const Eigen::VectorXd& theta, const RankBreakingEdge& edge);
EdgeGradient edge_log_prob_gradient(const Theta& theta, const RankBreakingEdge& edge);

// Sum of edge_log_prob over all retained edges of all observations, plus the
// dense gradient. Observations are split into contiguous stripes across
// `workers` threads and partial sums are combined in stripe order, so results
// are reproducible at a fixed worker count. Gradient entries of items touched
// by no retained edge are exactly zero. Throws DataError when the dataset
// retains no edges. The input need not be centered or box-feasible; the value
// is invariant under theta -> theta + c*1.
GradientResult total_log_likelihood(const Eigen::VectorXd& theta, const Dataset& data, int workers = 1);
GradientResult total_log_likelihood(const Theta& theta, const Dataset& data, int workers = 1);

}  // namespace rankbreak
