/* Copyright 2026 The refactor-kit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef REFACTOR_DATASET_HPP
#define REFACTOR_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "refactor/expansion.hpp"
#include "refactor/extraction.hpp"

namespace refactor {

inline constexpr int kSchemaVersion = 1;

struct DatasetSpec {
  std::size_t max_nodes = 1000;
  std::size_t max_chars = 512;
  std::size_t train_cap = 100;
  std::size_t eval_cap = 10;
  double train_fraction = 0.90;
  double valid_fraction = 0.05;
  double test_fraction = 0.05;
  std::uint64_t seed = 7;
  // Hosts whose expanded proof exceeds this are not expanded at all.
  std::size_t host_limit = 100000;
  unsigned threads = 1;

  // Throws std::invalid_argument.
  void validate() const;
};

struct GraphRecord {
  std::string graph_id;  // host/target/occurrence
  std::string host;
  std::string target_theorem;
  std::size_t occurrence = 0;
  std::vector<std::string> labels;
  std::vector<std::string> props;
  std::vector<std::uint8_t> target;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;  // parent -> child

  std::size_t size() const { return labels.size(); }
};

// Node feature text: label, a space, then the proposition.
std::string node_feature(const std::string& label, const std::string& prop);

GraphRecord make_record(const Database& db, const ExpansionRecord& e);
std::string record_to_json(const GraphRecord& r);
GraphRecord record_from_json(const std::string& line);

// Rebuilds the proof tree of a record against `db`. Throws
// std::invalid_argument on unknown labels or malformed edges.
ProofTree record_tree(const Database& db, const GraphRecord& r);

enum class Split { Train, Valid, Test };
const char* to_string(Split s);

// Seeded target-wise split assignment.
Split split_of(const DatasetSpec& spec, const std::string& target);

// Picks `k` of `n` indices with a Fisher-Yates prefix driven by mt19937_64;
// result sorted. Deterministic across platforms.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed);

struct Dataset {
  std::vector<GraphRecord> train, valid, test;
  std::string report;  // JSON
};

// Throws std::invalid_argument on an empty database or a bad spec.
Dataset build_dataset(const Database& db, const DatasetSpec& spec);

// train.jsonl, valid.jsonl, test.jsonl, report.json
void write_dataset(const Dataset& d, const std::filesystem::path& dir);

std::vector<GraphRecord> read_records(const std::filesystem::path& path);
std::vector<PredictionMask> read_predictions(const std::filesystem::path& path);

inline constexpr double kLossEpsilon = 1e-7;

// Node-normalized binary cross entropy. Probabilities are clamped to
// [eps, 1 - eps]. Throws std::invalid_argument on length mismatch or an
// empty graph.
double reference_loss(const std::vector<std::uint8_t>& target, const std::vector<double>& probs);

struct Scores {
  double node_accuracy = 0;
  double proof_accuracy = 0;
};

// Node accuracy is pooled over all nodes. Throws std::invalid_argument when a
// record has no mask or a mask has the wrong length.
Scores score_predictions(const std::vector<GraphRecord>& records,
                         const std::unordered_map<std::string, PredictionMask>& masks);

}  // namespace refactor

#endif  // REFACTOR_DATASET_HPP
