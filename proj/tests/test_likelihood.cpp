#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rankbreak/errors.hpp"
#include "rankbreak/likelihood.hpp"
#include "rankbreak/rng.hpp"
#include "test_helpers.hpp"

using namespace rankbreak;

namespace {

RankBreakingEdge random_edge(int d, int max_m, int max_r, RngStream& rng) {
  const int r = 2 + static_cast<int>(rng.below(max_r - 1));
  const int m = 1 + static_cast<int>(rng.below(std::min(max_m, r - 1)));
  std::vector<int> pool(d);
  for (int i = 0; i < d; ++i) pool[i] = i;
  for (int i = d - 1; i > 0; --i) std::swap(pool[i], pool[rng.below(i + 1)]);
  RankBreakingEdge edge;
  edge.top_set.assign(pool.begin(), pool.begin() + m);
  edge.bottom_set.assign(pool.begin() + m, pool.begin() + r);
  std::sort(edge.top_set.begin(), edge.top_set.end());
  std::sort(edge.bottom_set.begin(), edge.bottom_set.end());
  return edge;
}

Dataset small_dataset(int d, int n, int kappa, const std::vector<int>& tops, RngStream& rng) {
  // tops lists non-bottom block sizes from the top of each observation
  Dataset data;
  data.d = d;
  for (int j = 0; j < n; ++j) {
    std::vector<int> pool(d);
    for (int i = 0; i < d; ++i) pool[i] = i;
    for (int i = d - 1; i > 0; --i) std::swap(pool[i], pool[rng.below(i + 1)]);
    std::vector<int> offer(pool.begin(), pool.begin() + kappa);

    OrderedPartition part;
    std::size_t used = 0;
    for (int size : tops) used += size;
    std::vector<int> bottom(offer.begin() + used, offer.end());
    std::sort(bottom.begin(), bottom.end());
    part.blocks.push_back(bottom);
    std::size_t pos = used;
    for (auto it = tops.rbegin(); it != tops.rend(); ++it) {
      pos -= *it;
      std::vector<int> block(offer.begin() + pos, offer.begin() + pos + *it);
      std::sort(block.begin(), block.end());
      part.blocks.push_back(block);
    }
    std::sort(offer.begin(), offer.end());
    data.observations.push_back(make_observation(offer, part));
  }
  return data;
}

}  // namespace

TEST_CASE("uniform utilities give the counting probability") {
  // two of three items on top: 2 of the 6 orders qualify under theta = 0
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(3);
  RankBreakingEdge edge{{0, 1}, {2}};
  CHECK(edge_log_prob(theta, edge) == doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("edge probability matches full enumeration on random edges") {
  RngStream rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 8;
    Theta theta = testutil::random_theta(d, 2.0, rng);
    RankBreakingEdge edge = random_edge(d, 3, 6, rng);
    const double expect = testutil::log_prob_top_beats_bottom(theta.values, edge.top_set, edge.bottom_set);
    CHECK(edge_log_prob(theta.values, edge) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("edge probability is invariant under a constant shift") {
  RngStream rng(5);
  Theta theta = testutil::random_theta(7, 2.0, rng);
  RankBreakingEdge edge{{1, 4}, {0, 2, 6}};
  const double base = edge_log_prob(theta.values, edge);
  for (double shift : {-30.0, 2.5, 18.0}) {
    Eigen::VectorXd shifted = theta.values.array() + shift;
    CHECK(edge_log_prob(shifted, edge) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("edge gradient matches central finite differences") {
  RngStream rng(314);
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 8;
    Theta theta = testutil::random_theta(d, 2.0, rng);
    RankBreakingEdge edge = random_edge(d, 3, 6, rng);
    EdgeGradient grad = edge_log_prob_gradient(theta.values, edge);

    CHECK(grad.log_prob == doctest::Approx(edge_log_prob(theta.values, edge)).epsilon(1e-12));
    REQUIRE(grad.items.size() == grad.partials.size());

    double sum = 0.0;
    double norm = 0.0;
    for (double p : grad.partials) {
      sum += p;
      norm = std::max(norm, std::abs(p));
    }
    CHECK(std::abs(sum) <= 1e-9);

    auto f = [&](const Eigen::VectorXd& x) { return edge_log_prob(x, edge); };
    for (std::size_t k = 0; k < grad.items.size(); ++k) {
      const double fd = testutil::central_diff(f, theta.values, grad.items[k], 1e-5);
      CHECK(std::abs(grad.partials[k] - fd) <= 1e-6 * std::max(1.0, norm));
    }
  }
}

TEST_CASE("edge gradient counts every top-set permutation") {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(6);
  RankBreakingEdge edge{{0, 1, 2}, {3, 4, 5}};
  EdgeGradient grad = edge_log_prob_gradient(theta, edge);
  CHECK(grad.permutation_terms == 6);  // 3!
  RankBreakingEdge single{{2}, {0, 1}};
  CHECK(edge_log_prob_gradient(theta, single).permutation_terms == 1);
}

TEST_CASE("oversized top sets are refused") {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(12);
  RankBreakingEdge edge;
  for (int i = 0; i < 9; ++i) edge.top_set.push_back(i);
  edge.bottom_set = {9, 10};
  CHECK_THROWS_AS(edge_log_prob(theta, edge), ConfigError);
}

TEST_CASE("total log likelihood sums the retained edges only") {
  RngStream rng(808);
  Dataset data = small_dataset(7, 12, 6, {1, 2}, rng);
  Theta theta = testutil::random_theta(7, 2.0, rng);

  data.M = 1;
  double manual = 0.0;
  for (const auto& obs : data.observations) {
    for (const auto& edge : obs.edges) {
      if (edge.m() <= 1) manual += edge_log_prob(theta.values, edge);
    }
  }
  GradientResult res = total_log_likelihood(theta, data);
  CHECK(res.value == doctest::Approx(manual).epsilon(1e-12));

  data.M = 2;
  double manual2 = 0.0;
  for (const auto& obs : data.observations) {
    for (const auto& edge : obs.edges) manual2 += edge_log_prob(theta.values, edge);
  }
  CHECK(total_log_likelihood(theta, data).value == doctest::Approx(manual2).epsilon(1e-12));
}

TEST_CASE("total gradient matches finite differences and sums to zero") {
  RngStream rng(4242);
  Dataset data = small_dataset(8, 10, 6, {2, 1}, rng);
  data.M = 2;
  Theta theta = testutil::random_theta(8, 2.0, rng);
  GradientResult res = total_log_likelihood(theta, data);

  CHECK(std::abs(res.gradient.sum()) <= 1e-9);
  auto f = [&](const Eigen::VectorXd& x) { return total_log_likelihood(x, data).value; };
  for (int i = 0; i < 8; ++i) {
    const double fd = testutil::central_diff(f, theta.values, i, 1e-5);
    CHECK(std::abs(res.gradient[i] - fd) <= 1e-6 * std::max(1.0, res.gradient.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("items outside every retained edge get an exactly zero gradient") {
  Dataset data;
  data.d = 6;
  OrderedPartition part;
  part.blocks = {{0, 1}, {2}};  // items 3, 4, 5 never appear
  data.observations.push_back(make_observation({0, 1, 2}, part));
  RngStream rng(1);
  Theta theta = testutil::random_theta(6, 2.0, rng);
  GradientResult res = total_log_likelihood(theta, data);
  CHECK(res.gradient[3] == 0.0);
  CHECK(res.gradient[4] == 0.0);
  CHECK(res.gradient[5] == 0.0);
  CHECK(res.gradient[0] != 0.0);
}

TEST_CASE("worker count does not change value or gradient") {
  RngStream rng(31337);
  Dataset data = small_dataset(9, 40, 7, {1, 2}, rng);
  data.M = 2;
  Theta theta = testutil::random_theta(9, 2.0, rng);
  GradientResult one = total_log_likelihood(theta, data, 1);
  for (int workers : {2, 3, 8}) {
    GradientResult multi = total_log_likelihood(theta, data, workers);
    CHECK(multi.value == doctest::Approx(one.value).epsilon(1e-12));
    CHECK((multi.gradient - one.gradient).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(multi.permutation_terms == one.permutation_terms);
  }
}

TEST_CASE("permutation counter totals m! over retained edges") {
  RngStream rng(99);
  Dataset data = small_dataset(8, 15, 7, {2, 3}, rng);
  auto factorial = [](int m) {
    std::uint64_t f = 1;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
  };
  for (int M : {1, 2, 3}) {
    data.M = M;
    std::uint64_t expect = 0;
    bool any = false;
    for (const auto& obs : data.observations) {
      for (const auto& edge : obs.edges) {
        if (edge.m() <= M) {
          expect += factorial(edge.m());
          any = true;
        }
      }
    }
    if (!any) continue;
    Theta theta = testutil::random_theta(8, 2.0, rng);
    CHECK(total_log_likelihood(theta, data).permutation_terms == expect);
  }
}

TEST_CASE("a dataset retaining no edges is refused") {
  Dataset data;
  data.d = 4;
  OrderedPartition part;
  part.blocks = {{0, 1, 2, 3}};  // single block, no edges
  data.observations.push_back(make_observation({0, 1, 2, 3}, part));
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(4);
  CHECK_THROWS_AS(total_log_likelihood(theta, data), DataError);

  RngStream rng(6);
  Dataset blocked = small_dataset(6, 4, 5, {3}, rng);
  blocked.M = 2;  // the only edge has m = 3
  CHECK_THROWS_AS(total_log_likelihood(theta, blocked), DataError);
}

TEST_CASE("dataset validation catches inconsistent edges") {
  Dataset data;
  data.d = 4;
  OrderedPartition part;
  part.blocks = {{0, 1}, {2, 3}};
  data.observations.push_back(make_observation({0, 1, 2, 3}, part));
  CHECK_NOTHROW(data.validate());

  data.observations[0].edges[0].top_set = {3};  // no longer matches the partition
  CHECK_THROWS_AS(data.validate(), DataError);

  Dataset bad_ids;
  bad_ids.d = 3;
  OrderedPartition part2;
  part2.blocks = {{0, 1}, {5}};
  bad_ids.observations.push_back(make_observation({0, 1, 5}, part2));
  CHECK_THROWS_AS(bad_ids.validate(), DataError);
}

TEST_CASE("effective sample size adds top-set sizes of retained edges") {
  RngStream rng(12);
  Dataset data = small_dataset(8, 6, 7, {2, 3}, rng);
  data.M = 3;
  CHECK(data.effective_sample_size() == 6 * (2 + 3));
  CHECK(data.retained_edge_count() == 12);
  data.M = 2;
  CHECK(data.effective_sample_size() == 6 * 2);
  CHECK(data.retained_edge_count() == 6);
}
