#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rankbreak/rng.hpp"

namespace rankbreak {

// Utility vector constrained to the centered box: sum(values) == 0 and
// |values[i]| <= bound. The zero-sum gauge fixes the shift degeneracy of the
// choice model (all probabilities are invariant under values + c*1).
struct Theta {
  Eigen::VectorXd values;
  double bound = 0.0;

  int dim() const { return static_cast<int>(values.size()); }

  // Throws DataError unless dim >= 2, bound > 0, sum within 1e-9 of zero and
  // every coordinate within bound (+1e-12 slack for round-off).
  static Theta checked(Eigen::VectorXd values, double bound);
};

// A strict total order over an offered subset of items. order[0] is the most
// preferred item; order is a permutation of offer_set.
struct Ranking {
  std::vector<int> offer_set;
  std::vector<int> order;
};

// Euclidean projection of raw onto {x : sum(x) = 0, |x_i| <= bound}, by bisection
// on the scalar shift of the clamped coordinates. Idempotent to 1e-12.
Theta project_to_omega(const Eigen::VectorXd& raw, double bound);

// Log-probability of observing `ranking` under the sequential-choice model:
// each position is chosen from the remaining items proportionally to e^{theta_i}.
// Stabilized with max-shifted exponentials. Throws DataError on malformed rankings
// (duplicates, items outside [0, dim), order not a permutation of offer_set).
double ranking_log_probability(const Theta& theta, const Ranking& ranking);
double ranking_log_probability(const Eigen::VectorXd& theta, const Ranking& ranking);

// Ranks offer_set by increasing arrival time; exact ties go to the smaller item id.
Ranking ranking_from_arrivals(const std::vector<int>& offer_set, const std::vector<double>& arrivals);

// Draws a full ranking of offer_set: each item gets an independent exponential
// arrival time with rate e^{theta_i} (one uniform draw per item, in offer_set
// order); items are ranked by increasing arrival, ties broken by smaller id.
Ranking sample_ranking(const Theta& theta, const std::vector<int>& offer_set, RngStream& rng);

}  // namespace rankbreak
