#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "rankbreak/estimator.hpp"
#include "rankbreak/likelihood.hpp"

namespace rankbreak {

// A block-coarsened ranking workload: each user is offered kappa items (0 means
// all d), ranks them by the latent model, and reveals only the top block_sizes[0]
// items as an unordered set, then the next block_sizes[1], and so on; whatever
// remains is the unordered bottom block (block_sizes must leave it nonempty).
struct ScenarioConfig {
  int d = 0;
  int n = 0;
  int kappa = 0;                 // 0 = offer every item
  std::vector<int> block_sizes;  // top block first; may be empty (no edges)
  double bound = 2.0;
  std::uint64_t seed = 0;
  std::optional<Eigen::VectorXd> theta_star;  // drawn uniformly in the box when absent
  bool keep_top_orderings = true;

  void validate() const;  // throws ConfigError
};

struct SynthResult {
  Dataset dataset;
  Theta theta_star;
  TopBlockOrders orders;  // empty when keep_top_orderings is false
};

// Deterministic for a fixed config: user j consumes only the seed's substream j,
// and the ground truth (when drawn) consumes a dedicated substream, so datasets
// are reproducible and insensitive to generation order.
SynthResult generate_canonical(const ScenarioConfig& config);

// Budgeted-elicitation workload: every user sees all d items and reveals a
// partition with ell total blocks, ell = floor(sqrt(2c) d^(1/4)), of sizes
// 1, 2, ..., ell-1 from the top with the bottom absorbing the rest. Validates
// that the revealed mass fits the budget (sum of sizes <= c sqrt(d)) and the
// bottom keeps at least d/2 items; throws ConfigError otherwise.
struct TradeoffConfig {
  int d = 0;
  int n = 0;
  double c = 0.5;
  double bound = 2.0;
  std::uint64_t seed = 0;
  std::optional<Eigen::VectorXd> theta_star;
  bool keep_top_orderings = true;
};
SynthResult generate_tradeoff(const TradeoffConfig& config);

// Number of blocks the tradeoff workload reveals for given c and d.
int tradeoff_block_count(double c, int d);

}  // namespace rankbreak
