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

#ifndef REFACTOR_DATABASE_HPP
#define REFACTOR_DATABASE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace refactor {

using SymbolId = std::uint32_t;

// Index into Database::statements(). Values with kLocalLabel set name
// hypotheses that live in a ProofContext instead of the database.
using Label = std::uint32_t;
inline constexpr Label kLocalLabel = 0x80000000u;
inline constexpr bool is_local(Label l) { return (l & kLocalLabel) != 0; }
inline constexpr Label local_label(std::uint32_t i) { return i | kLocalLabel; }
inline constexpr std::uint32_t local_index(Label l) { return l & ~kLocalLabel; }

// Typecode first, then the math symbols.
using Expr = std::vector<SymbolId>;

enum class StatementKind : std::uint8_t { Floating, Essential, Axiom, Provable };

inline bool is_hypothesis(StatementKind k) {
  return k == StatementKind::Floating || k == StatementKind::Essential;
}
inline bool is_assertion(StatementKind k) { return !is_hypothesis(k); }

struct DisjointPair {
  SymbolId first = 0;
  SymbolId second = 0;  // first < second

  static DisjointPair make(SymbolId a, SymbolId b) {
    return a < b ? DisjointPair{a, b} : DisjointPair{b, a};
  }
  friend bool operator==(const DisjointPair&, const DisjointPair&) = default;
  friend auto operator<=>(const DisjointPair&, const DisjointPair&) = default;
};

// Mandatory hypotheses (declaration order) and disjoint-variable pairs of an
// assertion.
struct Frame {
  std::vector<Label> hypotheses;
  std::vector<DisjointPair> disjoint;  // sorted
};

// One step of a stored proof. Compressed proofs reuse tagged subproofs; such
// reuse is a backreference to the step whose result was saved, so the stored
// form stays linear in the compressed size. expand() yields the plain label
// sequence.
struct ProofStep {
  std::uint32_t value = 0;
  bool backref = false;

  static ProofStep label(Label l) { return {l, false}; }
  static ProofStep ref(std::uint32_t step) { return {step, true}; }
  friend bool operator==(const ProofStep&, const ProofStep&) = default;
};

struct Statement {
  std::string label;
  StatementKind kind = StatementKind::Axiom;
  Expr expr;

  // Assertions only.
  Frame frame;

  // Provable assertions only: the proof and everything it may reference
  // beyond the mandatory frame (optional floating hypotheses, all active $d).
  std::vector<ProofStep> proof;
  std::vector<Label> context_hypotheses;  // sorted
  std::vector<DisjointPair> context_disjoint;  // sorted
  bool incomplete = false;  // proof contains '?'
  std::string raw_proof;    // proof body as written, for re-emission

  std::size_t unit = 0;  // top-level layout unit holding this statement
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error(what + " at " + std::to_string(line) + ":" +
                           std::to_string(column)),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// One item of the source layout; kept so a database can be written back.
struct LayoutItem {
  enum class Kind : std::uint8_t {
    OpenScope, CloseScope, Constants, Variables, Disjoint, Statement
  };
  Kind kind = Kind::Statement;
  std::vector<SymbolId> symbols;  // Constants / Variables / Disjoint
  Label statement = 0;            // Statement
};

// A top-level layout unit: a single statement or declaration outside any
// block, or a whole ${ ... $} block.
using LayoutUnit = std::vector<LayoutItem>;

// Everything needed to append a standalone theorem block.
struct TheoremSpec {
  std::string name;
  std::vector<std::pair<std::string, Expr>> essentials;  // (label, expr)
  std::vector<DisjointPair> disjoint;
  Expr conclusion;
  std::vector<std::string> proof;  // plain label sequence
};

class Database {
 public:
  const std::vector<Statement>& statements() const { return statements_; }
  const Statement& operator[](Label l) const { return statements_.at(l); }
  std::size_t size() const { return statements_.size(); }

  std::optional<Label> find(std::string_view label) const;
  const Statement& at(std::string_view label) const;

  // Symbols.
  std::size_t symbol_count() const { return symbol_names_.size(); }
  std::string_view symbol(SymbolId s) const { return symbol_names_.at(s); }
  std::optional<SymbolId> find_symbol(std::string_view text) const;
  bool is_variable(SymbolId s) const {
    return s < symbol_is_variable_.size() && symbol_is_variable_[s];
  }
  bool is_constant(SymbolId s) const {
    return s < symbol_is_variable_.size() && !symbol_is_variable_[s];
  }

  std::string render(std::span<const SymbolId> expr) const;
  // Parses "typecode sym sym ..." into an Expr; every token must be declared.
  Expr parse_expr(std::string_view text) const;

  std::vector<Label> assertions() const;
  std::vector<Label> provables() const;

  // Typecodes carried by some floating hypothesis (wff, setvar, class in
  // set.mm). Nodes with these typecodes are syntax nodes.
  bool is_syntax_typecode(SymbolId typecode) const;
  // Floating hypotheses declared at top level for each typecode, in
  // declaration order. These are the canonical variables.
  const std::vector<Label>& variable_pool(SymbolId typecode) const;
  std::optional<Label> global_floating(SymbolId variable) const;

  const std::vector<LayoutUnit>& layout() const { return layout_; }

  // Appends a top-level ${ ... $} block holding the essential hypotheses and
  // the provable assertion. Floating hypotheses come from the global pool.
  // Throws std::invalid_argument on label clashes or unknown proof labels.
  // The proof is not verified here.
  Label add_theorem(const TheoremSpec& spec);

 private:
  friend class Parser;

  SymbolId intern(std::string_view text, bool variable);

  std::vector<Statement> statements_;
  std::unordered_map<std::string, Label> labels_;
  std::vector<std::string> symbol_names_;
  std::vector<bool> symbol_is_variable_;
  std::unordered_map<std::string, SymbolId> symbol_ids_;
  std::unordered_map<SymbolId, std::vector<Label>> pools_;
  std::unordered_map<SymbolId, Label> global_floating_;
  std::unordered_set<SymbolId> floating_typecodes_;
  std::vector<LayoutUnit> layout_;
};

// Resolves `$[ file $]` inclusions; returns the included source text.
using IncludeResolver = std::function<std::string(const std::string&)>;

// Parses Metamath source. Inclusions are an error unless a resolver is given.
Database parse_database(std::string_view source,
                        const IncludeResolver& includes = {});

// Reads a file, flattening inclusions relative to its directory.
Database load_database(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

// Plain label sequence of a stored proof. Throws std::length_error when the
// expanded proof would exceed `limit` steps.
std::vector<Label> expand_proof(const Database& db,
                                std::span<const ProofStep> proof,
                                std::size_t limit = SIZE_MAX);

// Number of steps of the expanded proof, saturating at UINT64_MAX.
std::uint64_t expanded_size(const Database& db,
                            std::span<const ProofStep> proof);

// Number of arguments an application of `label` pops.
std::size_t arity(const Database& db, Label label);

}  // namespace refactor

#endif  // REFACTOR_DATABASE_HPP
