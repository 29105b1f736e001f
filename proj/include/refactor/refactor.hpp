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

#ifndef REFACTOR_REFACTOR_HPP
#define REFACTOR_REFACTOR_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "refactor/proof_tree.hpp"
#include "refactor/writer.hpp"

namespace refactor {

// A new theorem as seen by the engine: a provable statement of the
// (extended) database and its proof tree.
struct Pattern {
  Label label = 0;
  std::shared_ptr<const ProofTree> tree;
  std::string key;       // statement_key
  std::size_t needs_unit = 0;  // first layout unit after everything it uses
};

Pattern make_pattern(const Database& db, Label theorem);

struct Binding {
  std::vector<NodeId> args;  // host node bound to each mandatory hypothesis
  std::size_t region = 0;    // host nodes the application replaces
};

// Matches the proof of `q` against the subtree of `host` rooted at `node`.
std::optional<Binding> match_at(const Database& db, const ProofTree& host,
                                const std::vector<std::uint32_t>& host_sizes, NodeId node,
                                const Pattern& q, const ProofContext& host_context);

struct ProofRefactoring {
  ProofTree tree;
  std::vector<std::size_t> applications;  // per pattern
  std::vector<std::uint64_t> saved;       // per pattern
};

// Rewrites `host` with the patterns in list order until nothing matches.
ProofRefactoring refactor_proof(const Database& db, const ProofTree& host,
                                const ProofContext& host_context,
                                const std::vector<const Pattern*>& patterns);

struct UsageRow {
  std::size_t theorems = 0;
  std::size_t theorems_used = 0;
  std::size_t total_usage = 0;
  double average_usage = 0;
  std::size_t max_usage = 0;
  double average_nodes_saved = 0;
  std::uint64_t total_nodes_saved = 0;
};

struct TheoremUsage {
  std::string name;
  std::string origin;
  std::size_t usage = 0;
  std::uint64_t nodes_saved = 0;
};

struct RefactorStats {
  std::vector<TheoremUsage> per_theorem;  // input order
  std::map<std::string, UsageRow> by_origin;  // plus "total"
  std::size_t proofs_considered = 0;
  std::size_t proofs_skipped = 0;  // too large or unverifiable
  std::size_t refactored_proof_count = 0;
  std::uint64_t nodes_before = 0;
  std::uint64_t nodes_after = 0;
};

struct RefactorOptions {
  unsigned threads = 1;
  std::size_t max_tree_nodes = kDefaultTreeLimit;
  std::map<std::string, std::string> origins;  // theorem name -> origin
};

struct RefactorResult {
  WriteOptions output;  // refactored proofs and unit placement
  RefactorStats stats;
};

// Refactors every provable statement that is not one of `new_theorems`.
// The new theorems must already be part of `db`, after all other units.
RefactorResult refactor_database(const Database& db, const std::vector<Label>& new_theorems,
                                 const RefactorOptions& options = {});

// Parses `base` followed by `fragment`; returns the database and the
// provable statements the fragment added, in order.
std::pair<Database, std::vector<Label>> load_with_fragment(const std::filesystem::path& base,
                                                           const std::filesystem::path& fragment);

std::string stats_to_json(const RefactorStats& stats);

}  // namespace refactor

#endif  // REFACTOR_REFACTOR_HPP
