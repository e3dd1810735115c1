#pragma once

#include <utility>
#include <vector>

namespace rankbreak {

// Partial preference data over one offered subset. relations are (lower, higher)
// pairs: the second item is preferred over the first. The transitive closure of
// relations must be acyclic.
struct Poset {
  std::vector<int> offer_set;
  std::vector<std::pair<int, int>> relations;
};

// Blocks of items, least preferred block first. Every item of a later block is
// preferred over every item of an earlier block; items within a block carry no
// order. A single block means the observation carries no usable comparisons.
struct OrderedPartition {
  std::vector<std::vector<int>> blocks;

  std::vector<int> items() const;
};

// One separator of an ordered partition: every item of top_set beats every item
// of bottom_set, and top_set is internally unordered.
struct RankBreakingEdge {
  std::vector<int> top_set;
  std::vector<int> bottom_set;

  int m() const { return static_cast<int>(top_set.size()); }
  int r() const { return static_cast<int>(top_set.size() + bottom_set.size()); }
};

// A user's offered subset with the partition extracted from their feedback and
// the edges it induces (all of them; order filtering happens downstream).
struct Observation {
  std::vector<int> offer_set;
  OrderedPartition partition;
  std::vector<RankBreakingEdge> edges;
};

// Coarsest-to-finest decomposition of a poset into an ordered partition: finds
// every subset C whose items all sit below the whole complement in the transitive
// closure (these cuts are nested), and emits the differences between consecutive
// cuts as blocks, least preferred first. Relations inside a block are dropped.
// Throws DataError on cyclic relations, unknown items, or |offer_set| > max_items.
OrderedPartition extract_ordered_partition(const Poset& poset, int max_items = 128);

// One edge per non-bottom block: edge a (0-based) has top_set = blocks[a+1] and
// bottom_set = union of blocks[0..a]. A partition with L blocks yields L-1 edges.
std::vector<RankBreakingEdge> breaking_edges(const OrderedPartition& partition);

// Keeps edges with top-set size at most M, preserving order.
std::vector<RankBreakingEdge> filter_order_M(const std::vector<RankBreakingEdge>& edges, int M);

// Bundles a partition with its edges after validating that blocks are nonempty,
// disjoint, and exactly cover offer_set.
Observation make_observation(std::vector<int> offer_set, OrderedPartition partition);

}  // namespace rankbreak
