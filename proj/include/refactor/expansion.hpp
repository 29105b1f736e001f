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

#ifndef REFACTOR_EXPANSION_HPP
#define REFACTOR_EXPANSION_HPP

#include <optional>
#include <string>
#include <vector>

#include "refactor/proof_tree.hpp"

namespace refactor {

struct ExpansionRecord {
  ProofTree graph;
  std::vector<bool> target;
  std::string host;
  Label theorem = 0;            // the inlined theorem
  std::size_t occurrence = 0;   // which application of it in the host
  NodeId node = 0;              // the expanded node in the host tree
};

// Label sequence and target mask of the inlined proof, before verification.
struct Inlined {
  std::vector<Label> labels;
  std::vector<bool> target;
};

// Replaces node `c` of `host` by the proof of its theorem with the canonical
// arguments replaced by copies of the contextual argument subtrees.
// Throws std::invalid_argument when node c is not a provable application.
Inlined inline_node(const Database& db, const ProofTree& host, NodeId c,
                    const ProofTree& theorem_tree);

struct ExpansionOutcome {
  std::optional<ExpansionRecord> record;
  std::string discard_reason;  // set when the expanded proof fails to verify
};

// Algorithm of theorem expansion. `host_context` is the host's own proof
// context (its scope's hypotheses and $d).
ExpansionOutcome expand_once(const Database& db, const ProofTree& host, NodeId c,
                             const ProofContext& host_context, TreeCache& trees,
                             std::size_t occurrence = 0);

// Convenience overload for a host that is a database statement.
ExpansionOutcome expand_once(const Database& db, Label host, NodeId c, TreeCache& trees);

// Application nodes of provable theorems, RPN order, with occurrence index
// per theorem.
std::vector<std::pair<NodeId, std::size_t>> expandable_nodes(const Database& db,
                                                            const ProofTree& host);

struct Expansions {
  std::vector<ExpansionRecord> records;
  std::vector<std::pair<NodeId, std::string>> discarded;
};

Expansions enumerate_expansions(const Database& db, Label host, TreeCache& trees);

// Size of the expanded tree computed from counts alone.
std::uint64_t expanded_node_count(const ProofTree& host,
                                  const std::vector<std::uint32_t>& host_sizes, NodeId c,
                                  const ProofTree& theorem_tree,
                                  const std::vector<std::size_t>& hyp_uses);

// Leaf uses of each mandatory hypothesis of `theorem` in its tree.
std::vector<std::size_t> hypothesis_uses(const Database& db, Label theorem,
                                         const ProofTree& theorem_tree);

}  // namespace refactor

#endif  // REFACTOR_EXPANSION_HPP
