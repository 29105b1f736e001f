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

#ifndef REFACTOR_BASELINE_HPP
#define REFACTOR_BASELINE_HPP

#include <map>
#include <string>
#include <vector>

#include "refactor/extraction.hpp"

namespace refactor {

struct FrequencyEntry {
  ExtractedTheorem theorem;  // first extraction seen
  std::size_t count = 0;
};

// dedup_key -> entry. Ordered so merging and iteration are deterministic.
using FrequencyTable = std::map<std::string, FrequencyEntry>;

// Extracts, for every internal node, the theorem made of the whole subtree
// above it, and counts valid extractions by dedup_key.
FrequencyTable mine_node_closures(const Database& db, const std::vector<const ProofTree*>& proofs,
                                  unsigned threads = 1);

// Adds `other` into `table`; the earlier-mined theorem of a key is kept.
void merge_tables(FrequencyTable& table, FrequencyTable other);

// Highest counts first, ties by key.
std::vector<ExtractedTheorem> top_n(const FrequencyTable& table, std::size_t n);

// Fraction of theorems whose statement equals some assertion of the
// database up to renaming. 0 for an empty list.
double match_rate_vs_library(const Database& db, const std::vector<ExtractedTheorem>& theorems);

}  // namespace refactor

#endif  // REFACTOR_BASELINE_HPP
