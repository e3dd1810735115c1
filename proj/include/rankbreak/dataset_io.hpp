#pragma once

#include <string>
#include <vector>

#include "rankbreak/estimator.hpp"
#include "rankbreak/likelihood.hpp"
#include "rankbreak/model.hpp"

namespace rankbreak {

// Dataset files are JSON lines, one observation per line:
//   {"blocks":[[3,6],[0,1]],"offer":[0,1,3,6]}
// blocks are listed least preferred first and written with sorted item lists, so
// write -> read -> write round trips byte-identically. Edges are rebuilt from
// the blocks on read.
void write_dataset_jsonl(const std::string& path, const Dataset& data);

// d_override = 0 infers d as (max item id + 1). M is the order cap to analyze at.
Dataset read_dataset_jsonl(const std::string& path, int M = kMaxTopSetSize, int d_override = 0);

// Ground-truth sidecar: {"b":2.0,"theta":[...]}.
void write_truth_json(const std::string& path, const Theta& theta);
Theta read_truth_json(const std::string& path);

// Hidden within-block orders sidecar, one line per observation:
//   {"orders":[[best,...,worst],...]}  aligned with partition blocks[1..].
void write_orders_jsonl(const std::string& path, const TopBlockOrders& orders);
TopBlockOrders read_orders_jsonl(const std::string& path);

// Label sidecar for ingested data: {"labels":["x","y",...]} indexed by item id.
void write_labels_json(const std::string& path, const std::vector<std::string>& labels);
std::vector<std::string> read_labels_json(const std::string& path);

// Ingests complete rankings (CSV, one ranking per line, best label first) and
// coarsens each row into an ordered partition:
//   protocol "split":  top m items vs the remaining kappa - m (one edge);
//   protocol "blocks": floor(kappa/m) blocks of m from the top, remainder bottom.
// Labels map to dense ids in first-appearance order.
struct IngestOptions {
  std::string protocol = "blocks";
  int m = 1;
};
struct IngestResult {
  Dataset dataset;
  std::vector<std::string> labels;
};
IngestResult ingest_rankings_csv(const std::string& path, const IngestOptions& options);

}  // namespace rankbreak
