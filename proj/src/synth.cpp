#include "rankbreak/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rankbreak/errors.hpp"

namespace rankbreak {

namespace {

// Substream index reserved for drawing the ground truth; user j uses substream j.
constexpr std::uint64_t kThetaSubstream = 0xFFFFFFFF00000001ULL;

}  // namespace

void ScenarioConfig::validate() const {
  if (d < 2) throw ConfigError("scenario: need at least 2 items");
  if (n < 1) throw ConfigError("scenario: need at least 1 observation");
  const int k = kappa == 0 ? d : kappa;
  if (k < 2 || k > d) throw ConfigError("scenario: offer size must be in [2, d]");
  int covered = 0;
  for (int s : block_sizes) {
    if (s < 1) throw ConfigError("scenario: block sizes must be positive");
    covered += s;
  }
  if (covered >= k) throw ConfigError("scenario: block sizes must leave a nonempty bottom block");
  if (!(bound > 0.0) || bound > 50.0) throw ConfigError("scenario: bound must be in (0, 50]");
  if (theta_star && theta_star->size() != d) throw ConfigError("scenario: theta_star length != d");
}

SynthResult generate_canonical(const ScenarioConfig& config) {
  config.validate();
  const int k = config.kappa == 0 ? config.d : config.kappa;
  const RngStream base(config.seed);

  SynthResult out;
  if (config.theta_star) {
    out.theta_star = Theta::checked(*config.theta_star, config.bound);
  } else {
    RngStream theta_rng = base.substream(kThetaSubstream);
    Eigen::VectorXd raw(config.d);
    for (int i = 0; i < config.d; ++i) raw[i] = config.bound * (2.0 * theta_rng.uniform01() - 1.0);
    out.theta_star = project_to_omega(raw, config.bound);
  }

  out.dataset.d = config.d;
  out.dataset.M = kMaxTopSetSize;
  out.dataset.observations.reserve(config.n);
  if (config.keep_top_orderings) out.orders.per_observation.reserve(config.n);

  std::vector<int> pool(config.d);
  for (int j = 0; j < config.n; ++j) {
    RngStream rng = base.substream(static_cast<std::uint64_t>(j));

    std::vector<int> offer;
    if (k == config.d) {
      offer.resize(config.d);
      std::iota(offer.begin(), offer.end(), 0);
    } else {
      std::iota(pool.begin(), pool.end(), 0);
      for (int t = 0; t < k; ++t) {
        const int pick = t + static_cast<int>(rng.below(static_cast<std::uint64_t>(config.d - t)));
        std::swap(pool[t], pool[pick]);
      }
      offer.assign(pool.begin(), pool.begin() + k);
      std::sort(offer.begin(), offer.end());
    }

    const Ranking ranking = sample_ranking(out.theta_star, offer, rng);

    // Slice the full ranking from the top; the remainder is the bottom block.
    std::vector<std::vector<int>> slices;  // top block first, in ranked order
    int pos = 0;
    for (int s : config.block_sizes) {
      slices.emplace_back(ranking.order.begin() + pos, ranking.order.begin() + pos + s);
      pos += s;
    }
    std::vector<int> bottom(ranking.order.begin() + pos, ranking.order.end());

    OrderedPartition part;
    std::sort(bottom.begin(), bottom.end());
    part.blocks.push_back(std::move(bottom));
    for (auto it = slices.rbegin(); it != slices.rend(); ++it) {
      std::vector<int> block = *it;
      std::sort(block.begin(), block.end());
      part.blocks.push_back(std::move(block));
    }
    out.dataset.observations.push_back(make_observation(offer, std::move(part)));

    if (config.keep_top_orderings) {
      // Aligned with partition blocks[1..]: deepest non-bottom block first.
      std::vector<std::vector<int>> obs_orders(slices.rbegin(), slices.rend());
      out.orders.per_observation.push_back(std::move(obs_orders));
    }
  }
  return out;
}

int tradeoff_block_count(double c, int d) {
  if (!(c > 0.0)) throw ConfigError("tradeoff: c must be positive");
  if (d < 2) throw ConfigError("tradeoff: need at least 2 items");
  return static_cast<int>(std::floor(std::sqrt(2.0 * c) * std::pow(static_cast<double>(d), 0.25)));
}

SynthResult generate_tradeoff(const TradeoffConfig& config) {
  const int ell = tradeoff_block_count(config.c, config.d);
  if (ell < 2) throw ConfigError("tradeoff: infeasible c/d combination (fewer than 2 blocks)");
  const int revealed = ell * (ell - 1) / 2;
  if (static_cast<double>(revealed) > config.c * std::sqrt(static_cast<double>(config.d))) {
    throw ConfigError("tradeoff: infeasible c/d combination (revealed mass exceeds the budget)");
  }
  if (config.d - revealed < (config.d + 1) / 2) {
    throw ConfigError("tradeoff: infeasible c/d combination (bottom block smaller than d/2)");
  }

  ScenarioConfig canonical;
  canonical.d = config.d;
  canonical.n = config.n;
  canonical.kappa = 0;
  canonical.block_sizes.resize(ell - 1);
  std::iota(canonical.block_sizes.begin(), canonical.block_sizes.end(), 1);
  canonical.bound = config.bound;
  canonical.seed = config.seed;
  canonical.theta_star = config.theta_star;
  canonical.keep_top_orderings = config.keep_top_orderings;
  return generate_canonical(canonical);
}

}  // namespace rankbreak
