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

#include "refactor/baseline.hpp"

#include <algorithm>
#include <unordered_set>

#include "refactor/parallel.hpp"

namespace refactor {

FrequencyTable mine_node_closures(const Database& db, const std::vector<const ProofTree*>& proofs,
                                  unsigned threads) {
  std::vector<FrequencyTable> partial(proofs.size());
  parallel_for(proofs.size(), threads, [&](std::size_t i) {
    const ProofTree& tree = *proofs[i];
    auto sizes = subtree_sizes(tree);
    std::vector<bool> selected(tree.size(), false);
    for (NodeId n = 0; n < tree.size(); ++n) {
      // Leaves have no steps; syntax-typed nodes only rebuild a formula.
      if (tree.nodes[n].parents.empty()) continue;
      if (db.is_syntax_typecode(tree.nodes[n].prop[0])) continue;
      const NodeId first = n + 1 - sizes[n];
      std::fill(selected.begin(), selected.end(), false);
      std::fill(selected.begin() + first, selected.begin() + n + 1, true);
      StandardizeResult r = standardize(db, tree, selected);
      if (!r.theorem) continue;
      auto [it, inserted] = partial[i].try_emplace(r.theorem->dedup_key);
      if (inserted) it->second.theorem = std::move(*r.theorem);
      ++it->second.count;
    }
  });
  FrequencyTable table;
  for (auto& p : partial) merge_tables(table, std::move(p));
  return table;
}

void merge_tables(FrequencyTable& table, FrequencyTable other) {
  for (auto& [key, entry] : other) {
    auto [it, inserted] = table.try_emplace(key, std::move(entry));
    if (!inserted) it->second.count += entry.count;
  }
}

std::vector<ExtractedTheorem> top_n(const FrequencyTable& table, std::size_t n) {
  std::vector<const std::pair<const std::string, FrequencyEntry>*> entries;
  entries.reserve(table.size());
  for (const auto& e : table) entries.push_back(&e);
  std::stable_sort(entries.begin(), entries.end(), [](const auto* a, const auto* b) {
    if (a->second.count != b->second.count) return a->second.count > b->second.count;
    return a->first < b->first;
  });
  std::vector<ExtractedTheorem> out;
  for (std::size_t i = 0; i < entries.size() && i < n; ++i) {
    out.push_back(entries[i]->second.theorem);
  }
  return out;
}

double match_rate_vs_library(const Database& db, const std::vector<ExtractedTheorem>& theorems) {
  if (theorems.empty()) return 0.0;
  std::unordered_set<std::string> library;
  for (Label a : db.assertions()) library.insert(statement_key(db, a));
  std::size_t hits = 0;
  for (const auto& t : theorems) hits += library.count(t.dedup_key);
  return static_cast<double>(hits) / static_cast<double>(theorems.size());
}

}  // namespace refactor
