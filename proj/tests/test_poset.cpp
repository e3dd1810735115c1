#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "rankbreak/errors.hpp"
#include "rankbreak/poset.hpp"
#include "rankbreak/rng.hpp"

using namespace rankbreak;

namespace {

std::vector<std::vector<bool>> closure_of(const Poset& poset) {
  std::vector<int> items = poset.offer_set;
  std::sort(items.begin(), items.end());
  auto local = [&](int id) {
    return static_cast<int>(std::lower_bound(items.begin(), items.end(), id) - items.begin());
  };
  const int k = static_cast<int>(items.size());
  std::vector<std::vector<bool>> below(k, std::vector<bool>(k, false));
  for (auto [lo, hi] : poset.relations) below[local(lo)][local(hi)] = true;
  for (bool changed = true; changed;) {
    changed = false;
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        if (!below[a][b]) continue;
        for (int c = 0; c < k; ++c) {
          if (below[b][c] && !below[a][c]) {
            below[a][c] = true;
            changed = true;
          }
        }
      }
    }
  }
  return below;
}

// Largest number of blocks over every ordered partition whose cross-block pairs
// are all implied by the closure, by enumerating permutations and split points.
// Also returns one witness partition (bottom first, blocks sorted).
std::pair<int, std::vector<std::vector<int>>> best_partition_brute_force(const Poset& poset) {
  std::vector<int> items = poset.offer_set;
  std::sort(items.begin(), items.end());
  auto local = [&](int id) {
    return static_cast<int>(std::lower_bound(items.begin(), items.end(), id) - items.begin());
  };
  auto below = closure_of(poset);
  const int k = static_cast<int>(items.size());

  int best = 0;
  std::vector<std::vector<int>> witness;
  std::vector<int> perm = items;
  std::sort(perm.begin(), perm.end());
  do {
    // perm is read bottom first; split masks choose block boundaries
    for (int mask = 0; mask < (1 << (k - 1)); ++mask) {
      std::vector<std::vector<int>> blocks;
      std::vector<int> cur = {perm[0]};
      for (int pos = 1; pos < k; ++pos) {
        if (mask & (1 << (pos - 1))) {
          blocks.push_back(cur);
          cur.clear();
        }
        cur.push_back(perm[pos]);
      }
      blocks.push_back(cur);
      bool ok = true;
      for (std::size_t lo = 0; ok && lo < blocks.size(); ++lo) {
        for (std::size_t hi = lo + 1; ok && hi < blocks.size(); ++hi) {
          for (int i : blocks[lo]) {
            for (int j : blocks[hi]) {
              if (!below[local(i)][local(j)]) {
                ok = false;
                break;
              }
            }
            if (!ok) break;
          }
        }
      }
      if (ok && static_cast<int>(blocks.size()) > best) {
        best = static_cast<int>(blocks.size());
        for (auto& b : blocks) std::sort(b.begin(), b.end());
        witness = blocks;
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {best, witness};
}

Poset random_poset(int k, double edge_prob, RngStream& rng) {
  // relations only point from a higher random rank to a lower one, so acyclic
  Poset poset;
  for (int i = 0; i < k; ++i) poset.offer_set.push_back(i);
  std::vector<int> rank(k);
  for (int i = 0; i < k; ++i) rank[i] = i;
  for (int i = k - 1; i > 0; --i) std::swap(rank[i], rank[rng.below(i + 1)]);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      if (rank[a] < rank[b] && rng.uniform01() < edge_prob) poset.relations.emplace_back(a, b);
    }
  }
  return poset;
}

}  // namespace

TEST_CASE("worked example: two nested cuts give three blocks") {
  Poset poset;
  poset.offer_set = {1, 2, 3, 4, 5, 6};
  poset.relations = {{6, 5}, {6, 4}, {5, 3}, {3, 1}, {3, 2}, {4, 1}, {4, 2}};
  OrderedPartition part = extract_ordered_partition(poset);
  REQUIRE(part.blocks.size() == 3);
  CHECK(part.blocks[0] == std::vector<int>{6});
  CHECK(part.blocks[1] == std::vector<int>{3, 4, 5});
  CHECK(part.blocks[2] == std::vector<int>{1, 2});
}

TEST_CASE("no relations collapse to a single block") {
  Poset poset;
  poset.offer_set = {2, 5, 9};
  OrderedPartition part = extract_ordered_partition(poset);
  REQUIRE(part.blocks.size() == 1);
  CHECK(part.blocks[0] == std::vector<int>{2, 5, 9});
}

TEST_CASE("a full chain yields singleton blocks") {
  Poset poset;
  poset.offer_set = {0, 1, 2, 3};
  poset.relations = {{3, 2}, {2, 1}, {1, 0}};
  OrderedPartition part = extract_ordered_partition(poset);
  REQUIRE(part.blocks.size() == 4);
  CHECK(part.blocks[0] == std::vector<int>{3});
  CHECK(part.blocks[3] == std::vector<int>{0});
}

TEST_CASE("a partial chain only cuts where the comparison is complete") {
  // 0 beats 1 and 2; nothing orders 1 vs 2 against 3, so {1,2,3} stays merged
  Poset poset;
  poset.offer_set = {0, 1, 2, 3};
  poset.relations = {{1, 0}, {2, 0}, {3, 0}};
  OrderedPartition part = extract_ordered_partition(poset);
  REQUIRE(part.blocks.size() == 2);
  CHECK(part.blocks[0] == std::vector<int>{1, 2, 3});
  CHECK(part.blocks[1] == std::vector<int>{0});
}

TEST_CASE("cycles are rejected") {
  Poset poset;
  poset.offer_set = {0, 1, 2};
  poset.relations = {{0, 1}, {1, 2}, {2, 0}};
  CHECK_THROWS_AS(extract_ordered_partition(poset), DataError);
}

TEST_CASE("unknown items and duplicate offers are rejected") {
  Poset unknown;
  unknown.offer_set = {0, 1};
  unknown.relations = {{0, 5}};
  CHECK_THROWS_AS(extract_ordered_partition(unknown), DataError);

  Poset dup;
  dup.offer_set = {0, 1, 1};
  CHECK_THROWS_AS(extract_ordered_partition(dup), DataError);

  Poset wide;
  for (int i = 0; i < 10; ++i) wide.offer_set.push_back(i);
  CHECK_THROWS_AS(extract_ordered_partition(wide, 5), DataError);
}

TEST_CASE("partition to relations and back is the identity") {
  RngStream rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 3 + static_cast<int>(rng.below(4));
    std::vector<int> items;
    for (int i = 0; i < k; ++i) items.push_back(i * 2 + 1);
    for (int i = k - 1; i > 0; --i) std::swap(items[i], items[rng.below(i + 1)]);

    OrderedPartition part;
    std::size_t pos = 0;
    while (pos < items.size()) {
      std::size_t width = 1 + rng.below(items.size() - pos);
      if (part.blocks.empty() && width == items.size()) width = items.size() - 1;
      std::vector<int> block(items.begin() + pos, items.begin() + pos + width);
      std::sort(block.begin(), block.end());
      part.blocks.push_back(block);
      pos += width;
    }

    Poset poset;
    poset.offer_set = items;
    for (std::size_t lo = 0; lo < part.blocks.size(); ++lo) {
      for (std::size_t hi = lo + 1; hi < part.blocks.size(); ++hi) {
        for (int i : part.blocks[lo]) {
          for (int j : part.blocks[hi]) poset.relations.emplace_back(i, j);
        }
      }
    }
    OrderedPartition back = extract_ordered_partition(poset);
    REQUIRE(back.blocks.size() == part.blocks.size());
    for (std::size_t b = 0; b < part.blocks.size(); ++b) CHECK(back.blocks[b] == part.blocks[b]);
  }
}

TEST_CASE("extraction matches the brute-force maximal partition") {
  RngStream rng(123);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(4));  // up to 5 items, 5! * 2^4 cases
    Poset poset = random_poset(k, 0.4, rng);
    auto [best, witness] = best_partition_brute_force(poset);
    OrderedPartition part = extract_ordered_partition(poset);
    REQUIRE(static_cast<int>(part.blocks.size()) == best);
    for (std::size_t b = 0; b < part.blocks.size(); ++b) CHECK(part.blocks[b] == witness[b]);
  }
}

TEST_CASE("edges take each non-bottom block against everything below it") {
  OrderedPartition part;
  part.blocks = {{5, 6}, {3, 4}, {1}};  // bottom first
  auto edges = breaking_edges(part);
  REQUIRE(edges.size() == 2);
  CHECK(edges[0].top_set == std::vector<int>{3, 4});
  CHECK(edges[0].bottom_set == std::vector<int>{5, 6});
  CHECK(edges[1].top_set == std::vector<int>{1});
  CHECK(edges[1].bottom_set == std::vector<int>{3, 4, 5, 6});
  CHECK(edges[0].m() == 2);
  CHECK(edges[0].r() == 4);
  CHECK(edges[1].m() == 1);
  CHECK(edges[1].r() == 5);
}

TEST_CASE("single-block partitions yield no edges") {
  OrderedPartition part;
  part.blocks = {{0, 1, 2}};
  CHECK(breaking_edges(part).empty());
}

TEST_CASE("order filtering keeps edges with small top sets") {
  OrderedPartition part;
  part.blocks = {{0, 1, 2}, {3, 4}, {5}};
  auto edges = breaking_edges(part);
  auto kept = filter_order_M(edges, 1);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].top_set == std::vector<int>{5});
  CHECK(filter_order_M(edges, 2).size() == 2);
  CHECK_THROWS_AS(filter_order_M(edges, 0), ConfigError);
}

TEST_CASE("make_observation validates block coverage") {
  OrderedPartition good;
  good.blocks = {{2, 3}, {1}};
  Observation obs = make_observation({1, 2, 3}, good);
  CHECK(obs.edges.size() == 1);
  CHECK(obs.offer_set == std::vector<int>{1, 2, 3});

  OrderedPartition missing;
  missing.blocks = {{2}, {1}};
  CHECK_THROWS_AS(make_observation({1, 2, 3}, missing), DataError);

  OrderedPartition overlap;
  overlap.blocks = {{2, 3}, {1, 2}};
  CHECK_THROWS_AS(make_observation({1, 2, 3}, overlap), DataError);

  OrderedPartition empty_block;
  empty_block.blocks = {{1, 2, 3}, {}};
  CHECK_THROWS_AS(make_observation({1, 2, 3}, empty_block), DataError);
}
