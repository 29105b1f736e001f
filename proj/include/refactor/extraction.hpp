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

#ifndef REFACTOR_EXTRACTION_HPP
#define REFACTOR_EXTRACTION_HPP

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "refactor/database.hpp"
#include "refactor/proof_tree.hpp"

namespace refactor {

// A standalone theorem over canonical variables.
struct ExtractedTheorem {
  std::string name;
  std::vector<Label> floating;  // mandatory $f, declaration order
  std::vector<std::pair<std::string, Expr>> essentials;
  std::vector<DisjointPair> disjoint;  // every pair the proof needs, sorted
  Expr conclusion;
  // Plain proof. Essential hypotheses appear as local_label(i).
  std::vector<Label> proof;
  std::string dedup_key;
  std::string origin;  // free-form provenance tag, e.g. "expanded"

  // Context in which `proof` verifies.
  ProofContext context(const Database& db) const;
  std::vector<std::string> proof_names(const Database& db) const;
  TheoremSpec spec(const Database& db) const;
};

struct PredictionMask {
  std::string graph_id;
  std::vector<double> probs;
  double threshold = 0.5;
};

// Nodes with probability strictly above the threshold. Throws
// std::invalid_argument on a length mismatch.
std::vector<bool> threshold_mask(const PredictionMask& mask, std::size_t node_count);

enum class Structure { Ok, NotTree, IncompleteArguments };
const char* to_string(Structure s);

Structure check_structure(const ProofTree& tree, const std::vector<bool>& selected);

enum class StandardizeError {
  None,
  NoValidSubstitution,
  DisjointConflict,
  PoolExhausted,
  NoSteps,
  VerifyFailed,
};
const char* to_string(StandardizeError e);

struct StandardizeResult {
  StandardizeError error = StandardizeError::None;
  std::string message;
  std::optional<ExtractedTheorem> theorem;  // unnamed; dedup_key filled
};

// Turns a structurally valid selection into a theorem. The selection must
// satisfy check_structure.
StandardizeResult standardize(const Database& db, const ProofTree& tree,
                              const std::vector<bool>& selected);

enum class Category { NotTreeInvalid, TreeInvalid, TreeValid };
const char* to_string(Category c);

struct ExtractionVerdict {
  Category category = Category::NotTreeInvalid;
  std::string reason;
  std::optional<ExtractedTheorem> theorem;
};

struct ExtractionOptions {
  // The tree is an unmodified library proof: selecting all of it only
  // rediscovers the theorem itself.
  bool reject_whole_tree = false;
};

ExtractionVerdict verify_selection(const Database& db, const ProofTree& tree,
                                   const std::vector<bool>& selected,
                                   const ExtractionOptions& options = {});

ExtractionVerdict verify_extraction(const Database& db, const ProofTree& tree,
                                    const PredictionMask& mask,
                                    const ExtractionOptions& options = {});

// Canonical statement string, invariant under renaming variables.
std::string dedup_key(const Database& db, const std::vector<Expr>& essentials,
                      const Expr& conclusion,
                      const std::vector<DisjointPair>& mandatory_disjoint);
std::string dedup_key(const Database& db, const ExtractedTheorem& t);
// Key of an existing assertion.
std::string statement_key(const Database& db, Label assertion);
// Key of the theorem extracted from a provable's whole proof tree. Zero-arity
// leaves become arguments, so this can be more general than statement_key.
// Axioms and unverifiable proofs fall back to statement_key.
std::string standard_key(const Database& db, Label assertion);

// First occurrence per dedup_key, input order kept.
std::vector<ExtractedTheorem> dedup(std::vector<ExtractedTheorem> theorems);

// Names every theorem rf_<hex of key>, taking more hex digits when a name is
// already used by the database or an earlier theorem.
void assign_names(const Database& db, std::vector<ExtractedTheorem>& theorems);

// ${ $d ... hyp $e ... name $p ... $= proof $. $} blocks.
void write_fragment(const Database& db, const std::vector<ExtractedTheorem>& theorems,
                    std::ostream& os);

}  // namespace refactor

#endif  // REFACTOR_EXTRACTION_HPP
