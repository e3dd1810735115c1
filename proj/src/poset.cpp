#include "rankbreak/poset.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>

#include "rankbreak/errors.hpp"

namespace rankbreak {

std::vector<int> OrderedPartition::items() const {
  std::vector<int> all;
  for (const auto& b : blocks) all.insert(all.end(), b.begin(), b.end());
  return all;
}

OrderedPartition extract_ordered_partition(const Poset& poset, int max_items) {
  const int k = static_cast<int>(poset.offer_set.size());
  if (k < 1) throw DataError("extract_ordered_partition: empty offer set");
  if (k > max_items) throw DataError("extract_ordered_partition: offer set larger than the closure cap");

  std::unordered_map<int, int> local;  // item id -> dense local index
  local.reserve(poset.offer_set.size());
  for (int i = 0; i < k; ++i) {
    if (!local.emplace(poset.offer_set[i], i).second) {
      throw DataError("extract_ordered_partition: duplicate item in offer set");
    }
  }

  // reach[a] bit b set means a is below b. Closure by repeated squaring of the
  // boolean relation; log2(k) rounds suffice.
  using Row = std::vector<std::uint64_t>;
  const int words = (k + 63) / 64;
  std::vector<Row> reach(k, Row(words, 0));
  const auto set_bit = [&](Row& row, int b) { row[b >> 6] |= (1ULL << (b & 63)); };
  const auto get_bit = [&](const Row& row, int b) { return (row[b >> 6] >> (b & 63)) & 1ULL; };

  for (const auto& [lo_item, hi_item] : poset.relations) {
    auto it_lo = local.find(lo_item);
    auto it_hi = local.find(hi_item);
    if (it_lo == local.end() || it_hi == local.end()) {
      throw DataError("extract_ordered_partition: relation mentions an item outside the offer set");
    }
    if (it_lo->second == it_hi->second) throw DataError("extract_ordered_partition: self relation");
    set_bit(reach[it_lo->second], it_hi->second);
  }

  for (bool grew = true; grew;) {
    grew = false;
    std::vector<Row> next = reach;
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        if (!get_bit(reach[a], b)) continue;
        for (int w = 0; w < words; ++w) next[a][w] |= reach[b][w];
      }
    }
    for (int a = 0; a < k && !grew; ++a) {
      grew = next[a] != reach[a];
    }
    reach.swap(next);
  }
  for (int a = 0; a < k; ++a) {
    if (get_bit(reach[a], a)) throw DataError("extract_ordered_partition: cyclic relations");
  }

  std::vector<int> above_count(k, 0);
  for (int a = 0; a < k; ++a) {
    for (int w = 0; w < words; ++w) above_count[a] += __builtin_popcountll(reach[a][w]);
  }

  // A complete cut of size c, if it exists, must be exactly the c items with the
  // most items above them; each of those items must then see the whole complement.
  std::vector<int> by_above(k);
  for (int i = 0; i < k; ++i) by_above[i] = i;
  std::sort(by_above.begin(), by_above.end(), [&](int a, int b) {
    if (above_count[a] != above_count[b]) return above_count[a] > above_count[b];
    return a < b;
  });

  std::vector<int> cut_sizes;
  for (int c = 1; c < k; ++c) {
    // Candidate = first c entries of by_above; valid only if the count threshold
    // separates cleanly and every member has exactly the complement above it.
    if (above_count[by_above[c - 1]] < k - c) continue;
    if (above_count[by_above[c]] >= k - c) continue;
    bool complete = true;
    for (int idx = 0; idx < c && complete; ++idx) {
      int a = by_above[idx];
      int outside_above = 0;
      for (int jdx = c; jdx < k; ++jdx) outside_above += static_cast<int>(get_bit(reach[a], by_above[jdx]));
      complete = outside_above == k - c;
    }
    if (complete) cut_sizes.push_back(c);
  }

  // Nested by construction (prefixes of one sorted order); the differences of
  // consecutive cuts are the blocks, bottom first.
  OrderedPartition part;
  int prev = 0;
  cut_sizes.push_back(k);
  for (int c : cut_sizes) {
    std::vector<int> block(by_above.begin() + prev, by_above.begin() + c);
    for (int& idx : block) idx = poset.offer_set[idx];
    std::sort(block.begin(), block.end());
    part.blocks.push_back(std::move(block));
    prev = c;
  }
  return part;
}

std::vector<RankBreakingEdge> breaking_edges(const OrderedPartition& partition) {
  std::vector<RankBreakingEdge> edges;
  if (partition.blocks.size() < 2) return edges;
  std::vector<int> below;
  for (std::size_t a = 0; a + 1 < partition.blocks.size(); ++a) {
    below.insert(below.end(), partition.blocks[a].begin(), partition.blocks[a].end());
    RankBreakingEdge e;
    e.top_set = partition.blocks[a + 1];
    e.bottom_set = below;
    std::sort(e.bottom_set.begin(), e.bottom_set.end());
    edges.push_back(std::move(e));
  }
  return edges;
}

std::vector<RankBreakingEdge> filter_order_M(const std::vector<RankBreakingEdge>& edges, int M) {
  if (M < 1) throw ConfigError("filter_order_M: M must be >= 1");
  std::vector<RankBreakingEdge> kept;
  for (const auto& e : edges) {
    if (e.m() <= M) kept.push_back(e);
  }
  return kept;
}

Observation make_observation(std::vector<int> offer_set, OrderedPartition partition) {
  std::unordered_set<int> offered(offer_set.begin(), offer_set.end());
  if (offered.size() != offer_set.size()) throw DataError("make_observation: duplicate item in offer set");
  std::unordered_set<int> covered;
  for (const auto& block : partition.blocks) {
    if (block.empty()) throw DataError("make_observation: empty block");
    for (int i : block) {
      if (!offered.count(i)) throw DataError("make_observation: block item not offered");
      if (!covered.insert(i).second) throw DataError("make_observation: item in two blocks");
    }
  }
  if (covered.size() != offered.size()) throw DataError("make_observation: blocks do not cover the offer set");
  Observation obs;
  obs.offer_set = std::move(offer_set);
  obs.edges = breaking_edges(partition);
  obs.partition = std::move(partition);
  return obs;
}

}  // namespace rankbreak
