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

#ifndef REFACTOR_VERIFY_HPP
#define REFACTOR_VERIFY_HPP

#include <limits>
#include <string>
#include <vector>

#include "refactor/database.hpp"

namespace refactor {

// What a proof may reference besides assertions.
struct ProofContext {
  std::vector<Label> hypotheses;       // database hypotheses, sorted
  std::vector<DisjointPair> disjoint;  // sorted
  std::vector<Expr> locals;            // expressions of local_label(i)
  // Assertions with label >= this are not yet available.
  Label assertion_limit = std::numeric_limits<Label>::max();
  // Record the $d pairs the proof needs instead of requiring them in
  // `disjoint`. Identical variables are still rejected.
  bool collect_disjoint = false;
};

// Context of a provable statement: its scope's hypotheses and $d.
ProofContext statement_context(const Database& db, Label provable);

enum class VerifyError {
  None,
  UnknownLabel,
  HypothesisNotInContext,
  ForwardReference,
  StackUnderflow,
  TypecodeMismatch,
  UnificationMismatch,
  DisjointViolation,
  FinalMismatch,
  ResidualStack,
  EmptyProof,
  IncompleteProof,
};

const char* to_string(VerifyError e);

struct TraceStep {
  Label label = 0;
  Expr prop;
  std::vector<std::uint32_t> parents;  // argument steps, frame order
};

struct VerifyResult {
  VerifyError error = VerifyError::None;
  std::string message;
  std::size_t step = 0;  // failing step index
  std::vector<TraceStep> trace;  // filled when requested and successful
  std::vector<DisjointPair> required_disjoint;  // with collect_disjoint

  bool ok() const { return error == VerifyError::None; }
};

// Replays a plain proof. On success the final stack entry equals
// `conclusion`; the trace holds one entry per label.
VerifyResult verify_labels(const Database& db, const Expr& conclusion,
                           std::span<const Label> labels,
                           const ProofContext& ctx, bool want_trace = true);

// Same, resolving textual labels through the database. Unknown labels
// produce VerifyError::UnknownLabel.
VerifyResult verify_proof(const Database& db, const Expr& conclusion,
                          std::span<const std::string> labels,
                          const ProofContext& ctx);

// Verifies a stored provable statement against its own proof without
// expanding shared subproofs.
VerifyResult verify_statement(const Database& db, Label provable);

struct VerifyFailure {
  Label label = 0;
  VerifyResult result;
};

// Verifies every provable statement (or the listed ones).
std::vector<VerifyFailure> verify_database(const Database& db,
                                           std::span<const Label> only = {},
                                           unsigned threads = 1);

// Applies the substitution {var -> replacement} to `expr`.
Expr substitute(const Expr& expr,
                const std::vector<std::pair<SymbolId, std::span<const SymbolId>>>& sigma);

}  // namespace refactor

#endif  // REFACTOR_VERIFY_HPP
