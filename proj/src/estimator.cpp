#include "rankbreak/estimator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "rankbreak/errors.hpp"

namespace rankbreak {

void FitOptions::validate() const {
  if (!(bound > 0.0) || bound > 50.0) throw ConfigError("fit: bound must be in (0, 50]");
  if (max_iters < 1) throw ConfigError("fit: max_iters must be >= 1");
  if (!(grad_tol > 0.0)) throw ConfigError("fit: grad_tol must be > 0");
  if (!(initial_step > 0.0)) throw ConfigError("fit: initial_step must be > 0");
  if (!(armijo_c > 0.0) || armijo_c >= 1.0) throw ConfigError("fit: armijo_c must be in (0, 1)");
  if (!(backtrack_shrink > 0.0) || backtrack_shrink >= 1.0) throw ConfigError("fit: backtrack_shrink must be in (0, 1)");
  if (step_growth < 1.0) throw ConfigError("fit: step_growth must be >= 1");
  if (workers < 1) throw ConfigError("fit: workers must be >= 1");
}

bool comparison_graph_connected(const Dataset& data) {
  std::vector<int> parent(data.d);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& obs : data.observations) {
    bool retains = false;
    for (const auto& e : obs.edges) retains = retains || e.m() <= data.M;
    if (!retains || obs.offer_set.empty()) continue;
    int root = find(obs.offer_set.front());
    for (int i : obs.offer_set) parent[find(i)] = root;
  }
  int root0 = find(0);
  for (int i = 1; i < data.d; ++i) {
    if (find(i) != root0) return false;
  }
  return true;
}

namespace {

struct ObjectiveEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
  std::uint64_t terms = 0;
};

using Objective = std::function<ObjectiveEval(const Eigen::VectorXd&)>;

// Projected gradient ascent with Armijo backtracking from theta = 0. The scale
// N normalizes the convergence probe so grad_tol means the same thing whatever
// the dataset size: stop when ||project(theta + grad/N) - theta|| <= grad_tol.
FitResult maximize_projected(int d, double scale, const Objective& f, const FitOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const double inv_scale = 1.0 / std::max(1.0, scale);

  FitResult res;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
  ObjectiveEval cur = f(theta);
  res.permutation_terms_evaluated += cur.terms;

  const auto probe_norm = [&](const Eigen::VectorXd& at, const Eigen::VectorXd& grad) {
    Eigen::VectorXd probe = project_to_omega(at + inv_scale * grad, opts.bound).values;
    return (probe - at).norm();
  };

  double step = opts.initial_step;
  res.grad_norm = probe_norm(theta, cur.gradient);
  while (res.iterations < opts.max_iters) {
    if (res.grad_norm <= opts.grad_tol) {
      res.converged = true;
      break;
    }
    bool accepted = false;
    while (step > 1e-18) {
      Eigen::VectorXd cand = project_to_omega(theta + step * cur.gradient, opts.bound).values;
      ObjectiveEval ceval = f(cand);
      res.permutation_terms_evaluated += ceval.terms;
      if (ceval.value >= cur.value + opts.armijo_c * cur.gradient.dot(cand - theta)) {
        theta = std::move(cand);
        cur = std::move(ceval);
        accepted = true;
        break;
      }
      step *= opts.backtrack_shrink;
    }
    if (!accepted) break;  // line search exhausted: flat to machine precision
    ++res.iterations;
    step *= opts.step_growth;
    res.grad_norm = probe_norm(theta, cur.gradient);
  }
  res.converged = res.converged || res.grad_norm <= opts.grad_tol;

  res.theta_hat = Theta::checked(std::move(theta), opts.bound);
  res.final_value = cur.value;
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace

FitResult fit_order_M(const Dataset& data, const FitOptions& opts) {
  opts.validate();
  data.validate();
  if (data.retained_edge_count() == 0) {
    throw DataError("fit_order_M: no edges retained at order M; lower-order data cannot be fit");
  }
  const double n_eff = static_cast<double>(data.effective_sample_size());
  const bool connected = comparison_graph_connected(data);

  Objective f = [&](const Eigen::VectorXd& theta) {
    GradientResult g = total_log_likelihood(theta, data, opts.workers);
    return ObjectiveEval{g.value, std::move(g.gradient), g.permutation_terms};
  };
  FitResult res = maximize_projected(data.d, n_eff, f, opts);
  res.comparison_graph_connected = connected;
  return res;
}

namespace {

// Per-ranking log-probability and gradient contribution for the enumeration
// route; order holds the full ranking best first.
double full_ranking_logprob_grad(const Eigen::VectorXd& theta, double shift, const std::vector<double>& w,
                                 const std::vector<int>& order, std::vector<double>& occupancy_prefix) {
  const int k = static_cast<int>(order.size());
  occupancy_prefix.assign(k, 0.0);
  std::vector<double> suffix(k);
  double acc = 0.0;
  for (int u = k - 1; u >= 0; --u) {
    acc += w[order[u]];
    suffix[u] = acc;
  }
  double logp = 0.0;
  double run = 0.0;
  for (int u = 0; u < k; ++u) {
    if (u < k - 1) logp += (theta[order[u]] - shift) - std::log(suffix[u]);
    if (u <= k - 2) run += 1.0 / suffix[u];
    occupancy_prefix[u] = run;
  }
  return logp;
}

}  // namespace

FitResult full_mle_small(const Dataset& data, const FitOptions& opts) {
  opts.validate();
  data.validate();
  if (data.observations.empty()) throw DataError("full_mle_small: empty dataset");
  double n_eff = 0.0;
  for (const auto& obs : data.observations) {
    if (static_cast<int>(obs.offer_set.size()) > kMaxOfferEnumeration) {
      throw DataError("full_mle_small: offer set exceeds the enumeration cap");
    }
    for (const auto& e : obs.edges) n_eff += e.m();
  }

  bool first_eval = true;
  Objective f = [&, first = &first_eval](const Eigen::VectorXd& theta) mutable {
    const double shift = theta.maxCoeff();
    std::vector<double> w(theta.size());
    for (int i = 0; i < theta.size(); ++i) w[i] = std::exp(theta[i] - shift);

    ObjectiveEval out;
    out.gradient = Eigen::VectorXd::Zero(theta.size());
    std::vector<double> occ;
    Eigen::VectorXd grad_obs(theta.size());
    for (const auto& obs : data.observations) {
      // Odometer over per-block permutations, blocks concatenated best first.
      std::vector<std::vector<int>> blocks(obs.partition.blocks.rbegin(), obs.partition.blocks.rend());
      for (auto& b : blocks) std::sort(b.begin(), b.end());
      const int k = static_cast<int>(obs.offer_set.size());

      double log_max = -std::numeric_limits<double>::infinity();
      double sum_a = 0.0;
      grad_obs.setZero();
      std::vector<int> order;
      order.reserve(k);
      bool more = true;
      while (more) {
        order.clear();
        for (const auto& b : blocks) order.insert(order.end(), b.begin(), b.end());
        const double logp = full_ranking_logprob_grad(theta, shift, w, order, occ);
        double a;
        if (logp > log_max) {
          const double scale = (sum_a == 0.0) ? 0.0 : std::exp(log_max - logp);
          sum_a *= scale;
          grad_obs *= scale;
          log_max = logp;
          a = 1.0;
        } else {
          a = std::exp(logp - log_max);
        }
        sum_a += a;
        ++out.terms;
        for (int pos = 0; pos < k; ++pos) {
          const int item = order[pos];
          double g = -w[item] * occ[pos];
          if (pos < k - 1) g += 1.0;
          grad_obs[item] += a * g;
        }
        // Advance: first block (best) spins fastest.
        more = false;
        for (auto& b : blocks) {
          if (std::next_permutation(b.begin(), b.end())) {
            more = true;
            break;
          }
        }
      }
      const double value_obs = log_max + std::log(sum_a);
      out.value += value_obs;
      out.gradient += grad_obs / sum_a;

      if (*first) {
        double edge_route = 0.0;
        for (const auto& e : obs.edges) edge_route += edge_log_prob(theta, e);
        if (std::abs(edge_route - value_obs) > 1e-8 * std::max(1.0, std::abs(value_obs))) {
          throw NumericError("full_mle_small: enumeration and edge-product routes disagree");
        }
      }
    }
    *first = false;
    if (!std::isfinite(out.value) || !out.gradient.allFinite()) {
      throw NumericError("full_mle_small: non-finite result");
    }
    return out;
  };

  return maximize_projected(data.d, std::max(1.0, n_eff), f, opts);
}

FitResult pairwise_rb_inconsistent(const Dataset& data, const FitOptions& opts) {
  opts.validate();
  data.validate();

  // Aggregate every cross-block pair (winner, loser); the order cap is ignored
  // by design for this baseline.
  std::unordered_map<std::uint64_t, double> counts;
  double total_pairs = 0.0;
  for (const auto& obs : data.observations) {
    const auto& blocks = obs.partition.blocks;
    for (std::size_t lo = 0; lo < blocks.size(); ++lo) {
      for (std::size_t hi = lo + 1; hi < blocks.size(); ++hi) {
        for (int winner : blocks[hi]) {
          for (int loser : blocks[lo]) {
            counts[static_cast<std::uint64_t>(winner) * data.d + loser] += 1.0;
            total_pairs += 1.0;
          }
        }
      }
    }
  }
  if (counts.empty()) throw DataError("pairwise_rb_inconsistent: dataset implies no pairwise comparisons");

  // Deterministic iteration order regardless of hash layout.
  std::vector<std::pair<std::uint64_t, double>> pairs(counts.begin(), counts.end());
  std::sort(pairs.begin(), pairs.end());

  Objective f = [&, d = data.d](const Eigen::VectorXd& theta) {
    ObjectiveEval out;
    out.gradient = Eigen::VectorXd::Zero(d);
    for (const auto& [key, c] : pairs) {
      const int winner = static_cast<int>(key / d);
      const int loser = static_cast<int>(key % d);
      const double diff = theta[winner] - theta[loser];
      // log sigma(diff), stably
      const double logp = diff >= 0 ? -std::log1p(std::exp(-diff)) : diff - std::log1p(std::exp(diff));
      const double p_win = std::exp(logp);
      out.value += c * logp;
      out.gradient[winner] += c * (1.0 - p_win);
      out.gradient[loser] -= c * (1.0 - p_win);
      ++out.terms;
    }
    return out;
  };

  FitResult res = maximize_projected(data.d, total_pairs, f, opts);
  res.comparison_graph_connected = comparison_graph_connected(data);
  return res;
}

FitResult oracle_mle(const Dataset& data, const TopBlockOrders& orders, const FitOptions& opts) {
  opts.validate();
  data.validate();
  if (orders.per_observation.size() != data.observations.size()) {
    throw DataError("oracle_mle: orders do not align with the dataset");
  }

  Dataset refined;
  refined.d = data.d;
  refined.M = 1;
  refined.observations.reserve(data.observations.size());
  for (std::size_t j = 0; j < data.observations.size(); ++j) {
    const auto& obs = data.observations[j];
    const auto& obs_orders = orders.per_observation[j];
    if (obs.partition.blocks.empty()) throw DataError("oracle_mle: observation without blocks");
    if (obs_orders.size() + 1 != obs.partition.blocks.size()) {
      throw DataError("oracle_mle: order list does not match the non-bottom blocks");
    }
    OrderedPartition refined_part;
    refined_part.blocks.push_back(obs.partition.blocks.front());
    for (std::size_t t = 0; t < obs_orders.size(); ++t) {
      auto sorted_order = obs_orders[t];
      std::sort(sorted_order.begin(), sorted_order.end());
      auto sorted_block = obs.partition.blocks[t + 1];
      std::sort(sorted_block.begin(), sorted_block.end());
      if (sorted_order != sorted_block) {
        throw DataError("oracle_mle: within-block order is not a permutation of the block");
      }
      // Best first in the order; blocks are emitted least preferred first.
      for (auto it = obs_orders[t].rbegin(); it != obs_orders[t].rend(); ++it) {
        refined_part.blocks.push_back({*it});
      }
    }
    refined.observations.push_back(make_observation(obs.offer_set, std::move(refined_part)));
  }
  return fit_order_M(refined, opts);
}

}  // namespace rankbreak
