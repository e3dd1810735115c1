#include "rankbreak/likelihood.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <thread>
#include <unordered_set>

#include "rankbreak/errors.hpp"

namespace rankbreak {

void Dataset::validate() const {
  if (d < 2) throw DataError("dataset: need at least 2 items");
  if (M < 1 || M > kMaxTopSetSize) throw ConfigError("dataset: order cap M out of range");
  for (const auto& obs : observations) {
    std::unordered_set<int> offered;
    for (int i : obs.offer_set) {
      if (i < 0 || i >= d) throw DataError("dataset: item id outside [0, d)");
      if (!offered.insert(i).second) throw DataError("dataset: duplicate item in offer set");
    }
    std::unordered_set<int> covered;
    for (const auto& block : obs.partition.blocks) {
      if (block.empty()) throw DataError("dataset: empty partition block");
      for (int i : block) {
        if (!offered.count(i)) throw DataError("dataset: block item not offered");
        if (!covered.insert(i).second) throw DataError("dataset: item in two blocks");
      }
    }
    if (covered.size() != offered.size()) throw DataError("dataset: blocks do not cover the offer set");

    auto expected = breaking_edges(obs.partition);
    if (expected.size() != obs.edges.size()) throw DataError("dataset: edges inconsistent with partition");
    for (std::size_t a = 0; a < expected.size(); ++a) {
      auto top = obs.edges[a].top_set;
      auto bot = obs.edges[a].bottom_set;
      std::sort(top.begin(), top.end());
      std::sort(bot.begin(), bot.end());
      auto etop = expected[a].top_set;
      std::sort(etop.begin(), etop.end());
      if (top != etop || bot != expected[a].bottom_set) {
        throw DataError("dataset: edges inconsistent with partition");
      }
    }
  }
}

std::int64_t Dataset::effective_sample_size() const {
  std::int64_t n = 0;
  for (const auto& obs : observations) {
    for (const auto& e : obs.edges) {
      if (e.m() <= M) n += e.m();
    }
  }
  return n;
}

std::int64_t Dataset::retained_edge_count() const {
  std::int64_t n = 0;
  for (const auto& obs : observations) {
    for (const auto& e : obs.edges) {
      if (e.m() <= M) ++n;
    }
  }
  return n;
}

namespace {

void validate_edge(const Eigen::VectorXd& theta, const RankBreakingEdge& edge) {
  if (edge.m() < 1) throw DataError("edge: empty top set");
  if (edge.bottom_set.empty()) throw DataError("edge: empty bottom set");
  if (!theta.allFinite()) throw NumericError("edge: non-finite parameters");
  std::unordered_set<int> seen;
  for (const auto* side : {&edge.top_set, &edge.bottom_set}) {
    for (int i : *side) {
      if (i < 0 || i >= theta.size()) throw DataError("edge: item id outside [0, d)");
      if (!seen.insert(i).second) throw DataError("edge: duplicate item");
    }
  }
}

// Shared enumeration for the edge probability and its gradient. `w[i]` must hold
// exp(theta[i] - shift) for every item of the edge; the result is invariant to
// the choice of shift. When `emit` is non-null it is called once per edge item
// with (item, d log_prob / d theta_item), top items first.
//
// Derivation sketch: P = sum over orderings sigma of the top set of
//   A_sigma = prod_{u=1..m} w_{sigma(u)} / S_u,  S_u = sum_{u'=u..m} w_{sigma(u')} + sum_{B} w_i,
// and d log P / d theta_i = 1{i in top} - (sum_sigma A_sigma * O_{sigma,i} * w_i) / P
// where the occupancy O_{sigma,i} sums 1/S_u over the positions u at which item i
// is still in the denominator (all m positions for bottom items, the first
// pos(i) positions for top items).
template <typename Emit>
double eval_edge_core(const Eigen::VectorXd& theta, double shift, const std::vector<double>& w,
                      const RankBreakingEdge& edge, std::uint64_t& permutation_terms, Emit* emit) {
  const int m = edge.m();
  if (m > kMaxTopSetSize) throw ConfigError("edge: top set exceeds the enumeration cap");

  double bottom_mass = 0.0;
  for (int i : edge.bottom_set) bottom_mass += w[i];

  std::array<int, kMaxTopSetSize> tops{};
  std::copy(edge.top_set.begin(), edge.top_set.end(), tops.begin());
  std::sort(tops.begin(), tops.begin() + m);
  const std::array<int, kMaxTopSetSize> tops_sorted = tops;

  std::array<double, kMaxTopSetSize> suffix{}, occupancy_prefix{}, s_top{};
  double log_max = -std::numeric_limits<double>::infinity();
  double sum_a = 0.0;
  double s_bottom = 0.0;

  do {
    double acc = bottom_mass;
    double log_a = 0.0;
    for (int u = m - 1; u >= 0; --u) {
      acc += w[tops[u]];
      suffix[u] = acc;
    }
    for (int u = 0; u < m; ++u) {
      log_a += (theta[tops[u]] - shift) - std::log(suffix[u]);
    }
    double a;
    if (log_a > log_max) {
      const double scale = (sum_a == 0.0) ? 0.0 : std::exp(log_max - log_a);
      sum_a *= scale;
      if (emit) {
        s_bottom *= scale;
        for (int j = 0; j < m; ++j) s_top[j] *= scale;
      }
      log_max = log_a;
      a = 1.0;
    } else {
      a = std::exp(log_a - log_max);
    }
    sum_a += a;
    ++permutation_terms;

    if (emit) {
      double run = 0.0;
      for (int u = 0; u < m; ++u) {
        run += 1.0 / suffix[u];
        occupancy_prefix[u] = run;
      }
      s_bottom += a * run;
      for (int pos = 0; pos < m; ++pos) {
        int idx = 0;
        while (tops_sorted[idx] != tops[pos]) ++idx;
        s_top[idx] += a * occupancy_prefix[pos];
      }
    }
  } while (std::next_permutation(tops.begin(), tops.begin() + m));

  if (emit) {
    for (int j = 0; j < m; ++j) {
      (*emit)(tops_sorted[j], 1.0 - s_top[j] * w[tops_sorted[j]] / sum_a);
    }
    for (int i : edge.bottom_set) {
      (*emit)(i, -s_bottom * w[i] / sum_a);
    }
  }
  return log_max + std::log(sum_a);
}

// Weight table over the full item range; cheap relative to enumeration at desk scale.
std::pair<double, std::vector<double>> local_weights(const Eigen::VectorXd& theta, const RankBreakingEdge& edge) {
  double shift = -std::numeric_limits<double>::infinity();
  for (int i : edge.top_set) shift = std::max(shift, theta[i]);
  for (int i : edge.bottom_set) shift = std::max(shift, theta[i]);
  std::vector<double> w(theta.size(), 0.0);
  for (int i : edge.top_set) w[i] = std::exp(theta[i] - shift);
  for (int i : edge.bottom_set) w[i] = std::exp(theta[i] - shift);
  return {shift, std::move(w)};
}

}  // namespace

double edge_log_prob(const Eigen::VectorXd& theta, const RankBreakingEdge& edge) {
  validate_edge(theta, edge);
  auto [shift, w] = local_weights(theta, edge);
  std::uint64_t terms = 0;
  return eval_edge_core<void (*)(int, double)>(theta, shift, w, edge, terms, nullptr);
}

double edge_log_prob(const Theta& theta, const RankBreakingEdge& edge) {
  return edge_log_prob(theta.values, edge);
}

EdgeGradient edge_log_prob_gradient(const Eigen::VectorXd& theta, const RankBreakingEdge& edge) {
  validate_edge(theta, edge);
  auto [shift, w] = local_weights(theta, edge);
  EdgeGradient out;
  out.items.reserve(edge.r());
  out.partials.reserve(edge.r());
  auto emit = [&](int item, double partial) {
    out.items.push_back(item);
    out.partials.push_back(partial);
  };
  out.log_prob = eval_edge_core(theta, shift, w, edge, out.permutation_terms, &emit);
  return out;
}

EdgeGradient edge_log_prob_gradient(const Theta& theta, const RankBreakingEdge& edge) {
  return edge_log_prob_gradient(theta.values, edge);
}

GradientResult total_log_likelihood(const Eigen::VectorXd& theta, const Dataset& data, int workers) {
  if (theta.size() != data.d) throw DataError("total_log_likelihood: parameter length != d");
  if (!theta.allFinite()) throw NumericError("total_log_likelihood: non-finite parameters");
  if (data.M < 1 || data.M > kMaxTopSetSize) throw ConfigError("total_log_likelihood: order cap M out of range");
  if (data.retained_edge_count() == 0) {
    throw DataError("total_log_likelihood: no edges retained at order M; nothing to evaluate");
  }

  const double shift = theta.maxCoeff();
  std::vector<double> w(theta.size());
  for (int i = 0; i < theta.size(); ++i) w[i] = std::exp(theta[i] - shift);

  const int n = static_cast<int>(data.observations.size());
  const int n_workers = std::clamp(workers, 1, std::max(1, n));

  struct Partial {
    double value = 0.0;
    Eigen::VectorXd grad;
    std::uint64_t terms = 0;
  };
  std::vector<Partial> partials(n_workers);

  auto run_stripe = [&](int stripe) {
    Partial& p = partials[stripe];
    p.grad = Eigen::VectorXd::Zero(data.d);
    const int lo = static_cast<int>(static_cast<std::int64_t>(n) * stripe / n_workers);
    const int hi = static_cast<int>(static_cast<std::int64_t>(n) * (stripe + 1) / n_workers);
    auto emit = [&](int item, double partial) { p.grad[item] += partial; };
    for (int j = lo; j < hi; ++j) {
      for (const auto& e : data.observations[j].edges) {
        if (e.m() > data.M) continue;
        p.value += eval_edge_core(theta, shift, w, e, p.terms, &emit);
      }
    }
  };

  if (n_workers == 1) {
    run_stripe(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int s = 0; s < n_workers; ++s) pool.emplace_back(run_stripe, s);
    for (auto& t : pool) t.join();
  }

  GradientResult out;
  out.gradient = Eigen::VectorXd::Zero(data.d);
  for (const auto& p : partials) {
    out.value += p.value;
    out.gradient += p.grad;
    out.permutation_terms += p.terms;
  }
  if (!std::isfinite(out.value) || !out.gradient.allFinite()) {
    throw NumericError("total_log_likelihood: non-finite result (corrupted input?)");
  }
  return out;
}

GradientResult total_log_likelihood(const Theta& theta, const Dataset& data, int workers) {
  return total_log_likelihood(theta.values, data, workers);
}

}  // namespace rankbreak
