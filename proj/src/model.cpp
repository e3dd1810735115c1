#include "rankbreak/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "rankbreak/errors.hpp"

namespace rankbreak {

Theta Theta::checked(Eigen::VectorXd values, double bound) {
  if (values.size() < 2) throw DataError("Theta: need at least 2 items");
  if (!(bound > 0.0) || !std::isfinite(bound)) throw DataError("Theta: bound must be positive and finite");
  if (!values.allFinite()) throw DataError("Theta: non-finite coordinate");
  if (std::abs(values.sum()) > 1e-9) throw DataError("Theta: coordinates must sum to zero");
  if (values.cwiseAbs().maxCoeff() > bound + 1e-12) throw DataError("Theta: coordinate outside [-bound, bound]");
  return Theta{std::move(values), bound};
}

Theta project_to_omega(const Eigen::VectorXd& raw, double bound) {
  if (raw.size() < 2) throw DataError("project_to_omega: need at least 2 items");
  if (!(bound > 0.0) || !std::isfinite(bound)) throw ConfigError("project_to_omega: bound must be positive and finite");
  if (!raw.allFinite()) throw DataError("project_to_omega: non-finite input");

  const auto clamped_sum = [&](double shift) {
    double s = 0.0;
    for (int i = 0; i < raw.size(); ++i) s += std::clamp(raw[i] - shift, -bound, bound);
    return s;
  };

  // clamped_sum is non-increasing and piecewise linear in the shift; these ends
  // pin it to +d*bound and -d*bound.
  double lo = raw.minCoeff() - bound;
  double hi = raw.maxCoeff() + bound;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi) + std::abs(lo)); ++it) {
    double mid = 0.5 * (lo + hi);
    if (clamped_sum(mid) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double shift = 0.5 * (lo + hi);

  Eigen::VectorXd x(raw.size());
  int interior = 0;
  for (int i = 0; i < raw.size(); ++i) {
    x[i] = std::clamp(raw[i] - shift, -bound, bound);
    if (std::abs(x[i]) < bound) ++interior;
  }
  // Spread the residual over interior coordinates so the sum is zero to round-off,
  // not just to bisection tolerance.
  if (interior > 0) {
    const double res = x.sum() / interior;
    for (int i = 0; i < raw.size(); ++i) {
      if (std::abs(x[i]) < bound) x[i] = std::clamp(x[i] - res, -bound, bound);
    }
  }
  return Theta::checked(std::move(x), bound);
}

namespace {

void validate_ranking(Eigen::Index dim, const Ranking& ranking) {
  if (ranking.offer_set.size() < 2) throw DataError("ranking: offer set needs at least 2 items");
  if (ranking.order.size() != ranking.offer_set.size()) throw DataError("ranking: order must cover the offer set");
  std::unordered_set<int> offered;
  for (int i : ranking.offer_set) {
    if (i < 0 || i >= dim) throw DataError("ranking: item id outside [0, d)");
    if (!offered.insert(i).second) throw DataError("ranking: duplicate item in offer set");
  }
  std::unordered_set<int> seen;
  for (int i : ranking.order) {
    if (!offered.count(i)) throw DataError("ranking: ordered item not offered");
    if (!seen.insert(i).second) throw DataError("ranking: duplicate item in order");
  }
}

}  // namespace

double ranking_log_probability(const Eigen::VectorXd& theta, const Ranking& ranking) {
  validate_ranking(theta.size(), ranking);
  const int k = static_cast<int>(ranking.order.size());

  double shift = -std::numeric_limits<double>::infinity();
  for (int i : ranking.order) shift = std::max(shift, theta[i]);

  // Backward suffix sums of the max-shifted exponentials; position i contributes
  // theta[order[i]] - log(sum over items still available at step i).
  std::vector<double> suffix(k);
  double acc = 0.0;
  for (int i = k - 1; i >= 0; --i) {
    acc += std::exp(theta[ranking.order[i]] - shift);
    suffix[i] = acc;
  }
  double logp = 0.0;
  for (int i = 0; i < k - 1; ++i) {
    logp += (theta[ranking.order[i]] - shift) - std::log(suffix[i]);
  }
  return logp;
}

double ranking_log_probability(const Theta& theta, const Ranking& ranking) {
  return ranking_log_probability(theta.values, ranking);
}

Ranking ranking_from_arrivals(const std::vector<int>& offer_set, const std::vector<double>& arrivals) {
  if (offer_set.size() != arrivals.size()) throw DataError("ranking_from_arrivals: size mismatch");
  std::vector<std::pair<double, int>> keyed;
  keyed.reserve(offer_set.size());
  for (std::size_t i = 0; i < offer_set.size(); ++i) keyed.emplace_back(arrivals[i], offer_set[i]);
  std::sort(keyed.begin(), keyed.end());  // pair ordering breaks ties toward smaller id
  Ranking r;
  r.offer_set = offer_set;
  r.order.reserve(keyed.size());
  for (const auto& [t, i] : keyed) r.order.push_back(i);
  return r;
}

Ranking sample_ranking(const Theta& theta, const std::vector<int>& offer_set, RngStream& rng) {
  if (offer_set.size() < 2) throw DataError("sample_ranking: offer set needs at least 2 items");
  std::unordered_set<int> seen;
  std::vector<double> arrivals;
  arrivals.reserve(offer_set.size());
  for (int i : offer_set) {
    if (i < 0 || i >= theta.dim()) throw DataError("sample_ranking: item id outside [0, d)");
    if (!seen.insert(i).second) throw DataError("sample_ranking: duplicate item in offer set");
    arrivals.push_back(rng.exponential(std::exp(theta.values[i])));
  }
  return ranking_from_arrivals(offer_set, arrivals);
}

}  // namespace rankbreak
