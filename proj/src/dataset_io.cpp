#include "rankbreak/dataset_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "rankbreak/errors.hpp"

namespace rankbreak {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for reading: " + path);
  return in;
}

json parse_line(const std::string& line, const std::string& path, std::size_t lineno) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw DataError(path + ":" + std::to_string(lineno) + ": malformed JSON object");
  }
  return j;
}

}  // namespace

void write_dataset_jsonl(const std::string& path, const Dataset& data) {
  data.validate();
  auto out = open_out(path);
  for (const auto& obs : data.observations) {
    json j;
    auto offer = obs.offer_set;
    std::sort(offer.begin(), offer.end());
    j["offer"] = offer;
    json blocks = json::array();
    for (const auto& block : obs.partition.blocks) {
      auto sorted = block;
      std::sort(sorted.begin(), sorted.end());
      blocks.push_back(sorted);
    }
    j["blocks"] = blocks;
    out << j.dump() << '\n';
  }
}

Dataset read_dataset_jsonl(const std::string& path, int M, int d_override) {
  auto in = open_in(path);
  Dataset data;
  data.M = M;
  int max_id = -1;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = parse_line(line, path, lineno);
    if (!j.contains("offer") || !j.contains("blocks")) {
      throw DataError(path + ":" + std::to_string(lineno) + ": missing offer/blocks");
    }
    std::vector<int> offer;
    OrderedPartition part;
    try {
      offer = j["offer"].get<std::vector<int>>();
      part.blocks = j["blocks"].get<std::vector<std::vector<int>>>();
    } catch (const json::exception&) {
      throw DataError(path + ":" + std::to_string(lineno) + ": offer/blocks must be integer arrays");
    }
    for (int i : offer) {
      if (i < 0) throw DataError(path + ":" + std::to_string(lineno) + ": negative item id");
      max_id = std::max(max_id, i);
    }
    try {
      data.observations.push_back(make_observation(std::move(offer), std::move(part)));
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  data.d = d_override > 0 ? d_override : max_id + 1;
  if (data.d < 2) throw DataError(path + ": dataset mentions fewer than 2 items");
  data.validate();
  return data;
}

void write_truth_json(const std::string& path, const Theta& theta) {
  auto out = open_out(path);
  json j;
  j["b"] = theta.bound;
  j["theta"] = std::vector<double>(theta.values.data(), theta.values.data() + theta.values.size());
  out << j.dump() << '\n';
}

Theta read_truth_json(const std::string& path) {
  auto in = open_in(path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("theta") || !j.contains("b")) {
    throw DataError(path + ": malformed ground-truth file");
  }
  std::vector<double> values;
  double b = 0.0;
  try {
    values = j["theta"].get<std::vector<double>>();
    b = j["b"].get<double>();
  } catch (const json::exception&) {
    throw DataError(path + ": malformed ground-truth file");
  }
  Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return Theta::checked(std::move(v), b);
}

void write_orders_jsonl(const std::string& path, const TopBlockOrders& orders) {
  auto out = open_out(path);
  for (const auto& obs_orders : orders.per_observation) {
    json j;
    j["orders"] = obs_orders;
    out << j.dump() << '\n';
  }
}

TopBlockOrders read_orders_jsonl(const std::string& path) {
  auto in = open_in(path);
  TopBlockOrders orders;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = parse_line(line, path, lineno);
    if (!j.contains("orders")) throw DataError(path + ":" + std::to_string(lineno) + ": missing orders");
    try {
      orders.per_observation.push_back(j["orders"].get<std::vector<std::vector<int>>>());
    } catch (const json::exception&) {
      throw DataError(path + ":" + std::to_string(lineno) + ": orders must be arrays of integer arrays");
    }
  }
  return orders;
}

void write_labels_json(const std::string& path, const std::vector<std::string>& labels) {
  auto out = open_out(path);
  json j;
  j["labels"] = labels;
  out << j.dump() << '\n';
}

std::vector<std::string> read_labels_json(const std::string& path) {
  auto in = open_in(path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("labels")) {
    throw DataError(path + ": malformed label file");
  }
  try {
    return j["labels"].get<std::vector<std::string>>();
  } catch (const json::exception&) {
    throw DataError(path + ": malformed label file");
  }
}

IngestResult ingest_rankings_csv(const std::string& path, const IngestOptions& options) {
  if (options.protocol != "split" && options.protocol != "blocks") {
    throw ConfigError("ingest: protocol must be 'split' or 'blocks'");
  }
  if (options.m < 1) throw ConfigError("ingest: m must be >= 1");

  auto in = open_in(path);
  IngestResult result;
  std::unordered_map<std::string, int> id_of;
  std::string line;
  std::size_t lineno = 0;

  const auto trim = [](std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
  };

  std::vector<std::vector<int>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<int> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell = trim(cell);
      if (cell.empty()) throw DataError(path + ":" + std::to_string(lineno) + ": empty label");
      auto [it, inserted] = id_of.emplace(cell, static_cast<int>(result.labels.size()));
      if (inserted) result.labels.push_back(cell);
      row.push_back(it->second);
    }
    if (row.size() < 2) throw DataError(path + ":" + std::to_string(lineno) + ": ranking needs at least 2 items");
    std::vector<int> dedup = row;
    std::sort(dedup.begin(), dedup.end());
    if (std::adjacent_find(dedup.begin(), dedup.end()) != dedup.end()) {
      throw DataError(path + ":" + std::to_string(lineno) + ": duplicate label in ranking");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": no rankings found");

  result.dataset.d = static_cast<int>(result.labels.size());
  result.dataset.M = kMaxTopSetSize;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];  // best first
    const int kappa = static_cast<int>(row.size());
    std::vector<std::vector<int>> slices;  // top slice first
    if (options.protocol == "split") {
      if (options.m >= kappa) {
        throw DataError(path + ": row " + std::to_string(r + 1) + ": split needs m < row length");
      }
      slices.emplace_back(row.begin(), row.begin() + options.m);
      slices.emplace_back(row.begin() + options.m, row.end());
    } else {
      const int full_blocks = kappa / options.m;
      int pos = 0;
      for (int t = 0; t < full_blocks; ++t) {
        slices.emplace_back(row.begin() + pos, row.begin() + pos + options.m);
        pos += options.m;
      }
      if (pos < kappa) slices.emplace_back(row.begin() + pos, row.end());
    }
    OrderedPartition part;
    for (auto it = slices.rbegin(); it != slices.rend(); ++it) {
      auto block = *it;
      std::sort(block.begin(), block.end());
      part.blocks.push_back(std::move(block));
    }
    auto offer = row;
    std::sort(offer.begin(), offer.end());
    result.dataset.observations.push_back(make_observation(std::move(offer), std::move(part)));
  }
  result.dataset.validate();
  return result;
}

}  // namespace rankbreak
