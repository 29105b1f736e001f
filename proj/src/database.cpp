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

#include "refactor/database.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

namespace refactor {

namespace {

constexpr Label kNoLabel = std::numeric_limits<Label>::max();

bool is_mm_whitespace(char c) {
  return c == ' ' || c == '\n' || c == '\t' || c == '\f' || c == '\r';
}

bool is_label_token(std::string_view t) {
  if (t.empty()) return false;
  for (unsigned char c : t) {
    if (!(std::isalnum(c) || c == '.' || c == '-' || c == '_')) return false;
  }
  return true;
}

bool is_math_token(std::string_view t) {
  if (t.empty()) return false;
  for (unsigned char c : t) {
    if (c == '$' || c < 0x21 || c > 0x7e) return false;
  }
  return true;
}

struct Token {
  std::string_view text;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Tokenizer {
 public:
  Tokenizer(std::string_view src, const IncludeResolver& includes)
      : includes_(includes) {
    sources_.push_back({src, 0, 1, 1});
  }

  // Returns the next token outside comments, flattening inclusions.
  std::optional<Token> next() {
    for (;;) {
      auto tok = raw_next();
      if (!tok) {
        if (sources_.size() > 1) {
          sources_.pop_back();
          continue;
        }
        return std::nullopt;
      }
      if (tok->text == "$(") {
        skip_comment(*tok);
        continue;
      }
      if (tok->text == "$[") {
        include(*tok);
        continue;
      }
      return tok;
    }
  }

  [[noreturn]] void fail(const std::string& msg, const Token& at) const {
    throw ParseError(msg, at.line, at.column);
  }

 private:
  struct Source {
    std::string_view text;
    std::size_t pos;
    std::size_t line;
    std::size_t column;
  };

  std::optional<Token> raw_next() {
    Source& s = sources_.back();
    while (s.pos < s.text.size() && is_mm_whitespace(s.text[s.pos])) {
      advance(s);
    }
    if (s.pos >= s.text.size()) return std::nullopt;
    Token tok;
    tok.line = s.line;
    tok.column = s.column;
    std::size_t start = s.pos;
    while (s.pos < s.text.size() && !is_mm_whitespace(s.text[s.pos])) {
      advance(s);
    }
    tok.text = s.text.substr(start, s.pos - start);
    return tok;
  }

  static void advance(Source& s) {
    if (s.text[s.pos] == '\n') {
      ++s.line;
      s.column = 1;
    } else {
      ++s.column;
    }
    ++s.pos;
  }

  void skip_comment(const Token& open) {
    for (;;) {
      auto tok = raw_next();
      if (!tok) fail("unterminated comment", open);
      if (tok->text == "$)") return;
      if (tok->text.find("$(") != std::string_view::npos) {
        fail("nested comment", *tok);
      }
      if (tok->text.find("$)") != std::string_view::npos) {
        fail("'$)' must be a separate token", *tok);
      }
    }
  }

  void include(const Token& open) {
    auto file = raw_next();
    if (!file) fail("unterminated inclusion", open);
    auto close = raw_next();
    if (!close || close->text != "$]") fail("expected '$]'", open);
    if (!includes_) {
      fail("inclusion of '" + std::string(file->text) +
               "' requires a flattened database",
           open);
    }
    std::string name(file->text);
    if (!included_.insert(name).second) return;  // included once
    owned_.push_back(std::make_unique<std::string>(includes_(name)));
    sources_.push_back({*owned_.back(), 0, 1, 1});
  }

  const IncludeResolver& includes_;
  std::vector<Source> sources_;
  std::vector<std::unique_ptr<std::string>> owned_;
  std::set<std::string> included_;
};

std::string join_tokens(const std::vector<std::string_view>& toks) {
  std::string out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) out.push_back(' ');
    out.append(toks[i]);
  }
  return out;
}

}  // namespace

class Parser {
 public:
  Parser(Database& db, std::string_view src, const IncludeResolver& includes)
      : db_(db), tokens_(src, includes) {}

  void run() {
    scopes_.push_back({});
    while (auto tok = tokens_.next()) {
      statement(*tok);
    }
    if (scopes_.size() != 1) {
      throw ParseError("unbalanced scope: missing '$}'", last_.line,
                       last_.column);
    }
  }

 private:
  struct Scope {
    std::vector<SymbolId> variables;
    std::vector<SymbolId> floating_vars;
    std::size_t hyp_mark = 0;
    std::size_t disjoint_mark = 0;
  };

  Token expect_token(const Token& ctx) {
    auto tok = tokens_.next();
    if (!tok) tokens_.fail("unexpected end of input", ctx);
    last_ = *tok;
    return *tok;
  }

  // Reads tokens up to and excluding `terminator`.
  std::vector<Token> read_until(const Token& ctx, std::string_view terminator) {
    std::vector<Token> out;
    for (;;) {
      Token t = expect_token(ctx);
      if (t.text == terminator) return out;
      if (!t.text.empty() && t.text[0] == '$' && t.text.size() == 2) {
        tokens_.fail("unexpected keyword '" + std::string(t.text) + "'", t);
      }
      out.push_back(t);
    }
  }

  void begin_item() {
    if (scopes_.size() == 1) {
      db_.layout_.emplace_back();
    }
  }

  void push_item(LayoutItem item) { db_.layout_.back().push_back(std::move(item)); }

  std::size_t current_unit() const { return db_.layout_.size() - 1; }

  void statement(const Token& tok) {
    last_ = tok;
    const auto& t = tok.text;
    if (t == "${") {
      begin_item();
      push_item({LayoutItem::Kind::OpenScope, {}, 0});
      Scope s;
      s.hyp_mark = active_hyps_.size();
      s.disjoint_mark = active_disjoint_.size();
      scopes_.push_back(std::move(s));
      return;
    }
    if (t == "$}") {
      if (scopes_.size() == 1) tokens_.fail("unbalanced scope: unexpected '$}'", tok);
      Scope& s = scopes_.back();
      for (SymbolId v : s.variables) --var_active_[v];
      for (SymbolId v : s.floating_vars) var_floating_[v] = kNoLabel;
      active_hyps_.resize(s.hyp_mark);
      active_disjoint_.resize(s.disjoint_mark);
      scopes_.pop_back();
      push_item({LayoutItem::Kind::CloseScope, {}, 0});
      return;
    }
    if (t == "$c") return constants(tok);
    if (t == "$v") return variables(tok);
    if (t == "$d") return disjoint(tok);
    if (!t.empty() && t[0] == '$') {
      tokens_.fail("unexpected token '" + std::string(t) + "'", tok);
    }
    labeled(tok);
  }

  void constants(const Token& kw) {
    if (scopes_.size() != 1) tokens_.fail("'$c' must be in the outermost scope", kw);
    auto toks = read_until(kw, "$.");
    if (toks.empty()) tokens_.fail("empty '$c' statement", kw);
    begin_item();
    LayoutItem item{LayoutItem::Kind::Constants, {}, 0};
    for (const auto& t : toks) {
      if (!is_math_token(t.text)) tokens_.fail("invalid math symbol", t);
      if (db_.find_symbol(t.text)) {
        tokens_.fail("symbol '" + std::string(t.text) + "' already declared", t);
      }
      if (db_.labels_.count(std::string(t.text))) {
        tokens_.fail("symbol '" + std::string(t.text) + "' clashes with a label", t);
      }
      item.symbols.push_back(db_.intern(t.text, false));
    }
    push_item(std::move(item));
  }

  void variables(const Token& kw) {
    auto toks = read_until(kw, "$.");
    if (toks.empty()) tokens_.fail("empty '$v' statement", kw);
    begin_item();
    LayoutItem item{LayoutItem::Kind::Variables, {}, 0};
    for (const auto& t : toks) {
      if (!is_math_token(t.text)) tokens_.fail("invalid math symbol", t);
      auto existing = db_.find_symbol(t.text);
      if (existing && db_.is_constant(*existing)) {
        tokens_.fail("'" + std::string(t.text) + "' is a constant", t);
      }
      SymbolId v = existing ? *existing : db_.intern(t.text, true);
      grow(v);
      if (var_active_[v] > 0) {
        tokens_.fail("variable '" + std::string(t.text) + "' already active", t);
      }
      ++var_active_[v];
      scopes_.back().variables.push_back(v);
      item.symbols.push_back(v);
    }
    push_item(std::move(item));
  }

  void disjoint(const Token& kw) {
    auto toks = read_until(kw, "$.");
    begin_item();
    LayoutItem item{LayoutItem::Kind::Disjoint, {}, 0};
    for (const auto& t : toks) {
      auto s = db_.find_symbol(t.text);
      if (!s || !db_.is_variable(*s) || var_active_[*s] == 0) {
        tokens_.fail("'$d' needs active variables, got '" + std::string(t.text) + "'", t);
      }
      if (std::find(item.symbols.begin(), item.symbols.end(), *s) != item.symbols.end()) {
        tokens_.fail("repeated variable in '$d'", t);
      }
      item.symbols.push_back(*s);
    }
    if (item.symbols.size() < 2) tokens_.fail("'$d' needs at least two variables", kw);
    active_disjoint_.push_back(item.symbols);
    push_item(std::move(item));
  }

  Expr math_string(const Token& ctx, const std::vector<Token>& toks,
                   bool need_typing) {
    if (toks.empty()) tokens_.fail("missing typecode", ctx);
    Expr e;
    e.reserve(toks.size());
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const auto& t = toks[i];
      auto s = db_.find_symbol(t.text);
      if (!s) tokens_.fail("undeclared symbol '" + std::string(t.text) + "'", t);
      if (i == 0) {
        if (!db_.is_constant(*s)) tokens_.fail("typecode must be a constant", t);
      } else if (db_.is_variable(*s)) {
        if (var_active_[*s] == 0) {
          tokens_.fail("inactive variable '" + std::string(t.text) + "'", t);
        }
        if (need_typing && var_floating_[*s] == kNoLabel) {
          tokens_.fail("variable '" + std::string(t.text) +
                           "' used without an active floating hypothesis",
                       t);
        }
      }
      e.push_back(*s);
    }
    return e;
  }

  Label add_statement(const Token& at, Statement st) {
    auto [it, inserted] =
        db_.labels_.emplace(st.label, static_cast<Label>(db_.statements_.size()));
    if (!inserted) tokens_.fail("duplicate label '" + st.label + "'", at);
    st.unit = current_unit();
    db_.statements_.push_back(std::move(st));
    Label l = it->second;
    push_item({LayoutItem::Kind::Statement, {}, l});
    return l;
  }

  void labeled(const Token& label_tok) {
    if (!is_label_token(label_tok.text)) {
      tokens_.fail("invalid label '" + std::string(label_tok.text) + "'", label_tok);
    }
    if (db_.find_symbol(label_tok.text)) {
      tokens_.fail("label '" + std::string(label_tok.text) + "' clashes with a math symbol",
                   label_tok);
    }
    Token kw = expect_token(label_tok);
    Statement st;
    st.label = std::string(label_tok.text);
    if (kw.text == "$f") {
      auto toks = read_until(kw, "$.");
      if (toks.size() != 2) tokens_.fail("'$f' needs a typecode and one variable", kw);
      Expr e = math_string(kw, toks, false);
      if (!db_.is_variable(e[1])) tokens_.fail("'$f' needs a variable", toks[1]);
      if (var_floating_[e[1]] != kNoLabel) {
        tokens_.fail("variable already has an active floating hypothesis", toks[1]);
      }
      st.kind = StatementKind::Floating;
      st.expr = std::move(e);
      begin_item();
      SymbolId var = st.expr[1];
      SymbolId tc = st.expr[0];
      Label l = add_statement(label_tok, std::move(st));
      var_floating_[var] = l;
      scopes_.back().floating_vars.push_back(var);
      active_hyps_.push_back(l);
      db_.floating_typecodes_.insert(tc);
      if (scopes_.size() == 1) {
        db_.pools_[tc].push_back(l);
        db_.global_floating_.emplace(var, l);
      }
      return;
    }
    if (kw.text == "$e") {
      auto toks = read_until(kw, "$.");
      st.kind = StatementKind::Essential;
      st.expr = math_string(kw, toks, true);
      begin_item();
      Label l = add_statement(label_tok, std::move(st));
      active_hyps_.push_back(l);
      return;
    }
    if (kw.text == "$a") {
      auto toks = read_until(kw, "$.");
      st.kind = StatementKind::Axiom;
      st.expr = math_string(kw, toks, true);
      st.frame = make_frame(st.expr);
      begin_item();
      add_statement(label_tok, std::move(st));
      return;
    }
    if (kw.text == "$p") {
      auto toks = read_until(kw, "$=");
      st.kind = StatementKind::Provable;
      st.expr = math_string(kw, toks, true);
      st.frame = make_frame(st.expr);
      make_context(st);
      auto proof = read_until(kw, "$.");
      if (proof.empty()) tokens_.fail("empty proof", kw);
      std::vector<std::string_view> raw;
      raw.reserve(proof.size());
      for (const auto& p : proof) raw.push_back(p.text);
      st.raw_proof = join_tokens(raw);
      if (proof[0].text == "(") {
        compressed_proof(st, proof);
      } else {
        plain_proof(st, proof);
      }
      begin_item();
      add_statement(label_tok, std::move(st));
      return;
    }
    tokens_.fail("expected '$f', '$e', '$a' or '$p' after label", kw);
  }

  Frame make_frame(const Expr& expr) {
    std::vector<bool> mandatory(db_.symbol_count(), false);
    auto mark = [&](const Expr& e) {
      for (std::size_t i = 1; i < e.size(); ++i) {
        if (db_.is_variable(e[i])) mandatory[e[i]] = true;
      }
    };
    mark(expr);
    for (Label h : active_hyps_) {
      if (db_.statements_[h].kind == StatementKind::Essential) {
        mark(db_.statements_[h].expr);
      }
    }
    Frame f;
    for (Label h : active_hyps_) {
      const Statement& s = db_.statements_[h];
      if (s.kind == StatementKind::Essential || mandatory[s.expr[1]]) {
        f.hypotheses.push_back(h);
      }
    }
    for (const auto& group : active_disjoint_) {
      for (std::size_t i = 0; i < group.size(); ++i) {
        for (std::size_t j = i + 1; j < group.size(); ++j) {
          if (mandatory[group[i]] && mandatory[group[j]]) {
            f.disjoint.push_back(DisjointPair::make(group[i], group[j]));
          }
        }
      }
    }
    std::sort(f.disjoint.begin(), f.disjoint.end());
    f.disjoint.erase(std::unique(f.disjoint.begin(), f.disjoint.end()),
                     f.disjoint.end());
    return f;
  }

  void make_context(Statement& st) {
    st.context_hypotheses = active_hyps_;
    std::sort(st.context_hypotheses.begin(), st.context_hypotheses.end());
    for (const auto& group : active_disjoint_) {
      for (std::size_t i = 0; i < group.size(); ++i) {
        for (std::size_t j = i + 1; j < group.size(); ++j) {
          st.context_disjoint.push_back(DisjointPair::make(group[i], group[j]));
        }
      }
    }
    std::sort(st.context_disjoint.begin(), st.context_disjoint.end());
    st.context_disjoint.erase(
        std::unique(st.context_disjoint.begin(), st.context_disjoint.end()),
        st.context_disjoint.end());
  }

  Label proof_label(const Token& t) {
    auto it = db_.labels_.find(std::string(t.text));
    if (it == db_.labels_.end()) {
      tokens_.fail("unknown or forward label '" + std::string(t.text) + "' in proof", t);
    }
    return it->second;
  }

  void plain_proof(Statement& st, const std::vector<Token>& proof) {
    for (const auto& t : proof) {
      if (t.text == "?") {
        st.incomplete = true;
        continue;
      }
      st.proof.push_back(ProofStep::label(proof_label(t)));
    }
  }

  void compressed_proof(Statement& st, const std::vector<Token>& proof) {
    std::size_t i = 1;
    std::vector<Label> list;
    for (; i < proof.size() && proof[i].text != ")"; ++i) {
      list.push_back(proof_label(proof[i]));
    }
    if (i == proof.size()) tokens_.fail("unterminated compressed label list", proof[0]);
    ++i;
    const std::size_t m = st.frame.hypotheses.size();
    const std::size_t n = list.size();
    std::vector<std::uint32_t> saved;
    std::uint64_t num = 0;
    bool pending = false;
    for (; i < proof.size(); ++i) {
      for (char c : proof[i].text) {
        if (c >= 'A' && c <= 'T') {
          num = num * 20 + static_cast<std::uint64_t>(c - 'A' + 1);
          std::uint64_t k = num;
          num = 0;
          pending = false;
          if (k <= m) {
            st.proof.push_back(ProofStep::label(st.frame.hypotheses[k - 1]));
          } else if (k <= m + n) {
            st.proof.push_back(ProofStep::label(list[k - m - 1]));
          } else if (k <= m + n + saved.size()) {
            st.proof.push_back(ProofStep::ref(saved[k - m - n - 1]));
          } else {
            tokens_.fail("compressed proof step out of range", proof[i]);
          }
        } else if (c >= 'U' && c <= 'Y') {
          num = num * 5 + static_cast<std::uint64_t>(c - 'U' + 1);
          pending = true;
        } else if (c == 'Z') {
          if (pending || st.proof.empty()) {
            tokens_.fail("misplaced 'Z' in compressed proof", proof[i]);
          }
          const ProofStep& last = st.proof.back();
          saved.push_back(last.backref
                              ? last.value
                              : static_cast<std::uint32_t>(st.proof.size() - 1));
        } else if (c == '?') {
          st.incomplete = true;
        } else {
          tokens_.fail("invalid character in compressed proof", proof[i]);
        }
      }
    }
    if (pending) tokens_.fail("truncated compressed proof number", proof.back());
  }

  void grow(SymbolId v) {
    if (var_active_.size() <= v) {
      var_active_.resize(v + 1, 0);
      var_floating_.resize(v + 1, kNoLabel);
    }
  }

  Database& db_;
  Tokenizer tokens_;
  Token last_;
  std::vector<Scope> scopes_;
  std::vector<int> var_active_;
  std::vector<Label> var_floating_;
  std::vector<Label> active_hyps_;
  std::vector<std::vector<SymbolId>> active_disjoint_;
};

SymbolId Database::intern(std::string_view text, bool variable) {
  auto id = static_cast<SymbolId>(symbol_names_.size());
  symbol_names_.emplace_back(text);
  symbol_is_variable_.push_back(variable);
  symbol_ids_.emplace(std::string(text), id);
  return id;
}

std::optional<Label> Database::find(std::string_view label) const {
  auto it = labels_.find(std::string(label));
  if (it == labels_.end()) return std::nullopt;
  return it->second;
}

const Statement& Database::at(std::string_view label) const {
  auto l = find(label);
  if (!l) throw std::out_of_range("unknown label '" + std::string(label) + "'");
  return statements_[*l];
}

std::optional<SymbolId> Database::find_symbol(std::string_view text) const {
  auto it = symbol_ids_.find(std::string(text));
  if (it == symbol_ids_.end()) return std::nullopt;
  return it->second;
}

std::string Database::render(std::span<const SymbolId> expr) const {
  std::string out;
  for (std::size_t i = 0; i < expr.size(); ++i) {
    if (i) out.push_back(' ');
    if (expr[i] < symbol_names_.size()) {
      out += symbol_names_[expr[i]];
    } else {
      out += "?" + std::to_string(expr[i]);
    }
  }
  return out;
}

Expr Database::parse_expr(std::string_view text) const {
  Expr e;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) {
    auto s = find_symbol(tok);
    if (!s) throw std::invalid_argument("undeclared symbol '" + tok + "'");
    e.push_back(*s);
  }
  return e;
}

std::vector<Label> Database::assertions() const {
  std::vector<Label> out;
  for (Label l = 0; l < statements_.size(); ++l) {
    if (is_assertion(statements_[l].kind)) out.push_back(l);
  }
  return out;
}

std::vector<Label> Database::provables() const {
  std::vector<Label> out;
  for (Label l = 0; l < statements_.size(); ++l) {
    if (statements_[l].kind == StatementKind::Provable) out.push_back(l);
  }
  return out;
}

bool Database::is_syntax_typecode(SymbolId typecode) const {
  return floating_typecodes_.count(typecode) != 0;
}

const std::vector<Label>& Database::variable_pool(SymbolId typecode) const {
  static const std::vector<Label> kEmpty;
  auto it = pools_.find(typecode);
  return it == pools_.end() ? kEmpty : it->second;
}

std::optional<Label> Database::global_floating(SymbolId variable) const {
  auto it = global_floating_.find(variable);
  if (it == global_floating_.end()) return std::nullopt;
  return it->second;
}

Label Database::add_theorem(const TheoremSpec& spec) {
  auto clash = [&](const std::string& l) {
    if (labels_.count(l) || symbol_ids_.count(l)) {
      throw std::invalid_argument("label '" + l + "' already in use");
    }
  };
  clash(spec.name);
  std::set<std::string> local_names;
  for (const auto& [label, expr] : spec.essentials) {
    clash(label);
    if (!local_names.insert(label).second) {
      throw std::invalid_argument("duplicate hypothesis label '" + label + "'");
    }
  }

  std::set<SymbolId> mandatory_vars;
  auto mark = [&](const Expr& e) {
    for (std::size_t i = 1; i < e.size(); ++i) {
      if (is_variable(e[i])) mandatory_vars.insert(e[i]);
    }
  };
  mark(spec.conclusion);
  for (const auto& [label, expr] : spec.essentials) mark(expr);

  std::vector<Label> floats;
  for (SymbolId v : mandatory_vars) {
    auto f = global_floating(v);
    if (!f) {
      throw std::invalid_argument("variable '" + std::string(symbol(v)) +
                                  "' has no global floating hypothesis");
    }
    floats.push_back(*f);
  }
  std::sort(floats.begin(), floats.end());

  const std::size_t unit = layout_.size();
  LayoutUnit items;
  items.push_back({LayoutItem::Kind::OpenScope, {}, 0});
  for (const auto& p : spec.disjoint) {
    items.push_back({LayoutItem::Kind::Disjoint, {p.first, p.second}, 0});
  }

  Statement thm;
  thm.label = spec.name;
  thm.kind = StatementKind::Provable;
  thm.expr = spec.conclusion;
  thm.unit = unit;
  thm.frame.hypotheses = floats;
  std::unordered_map<std::string, Label> local;
  for (const auto& [label, expr] : spec.essentials) {
    Statement h;
    h.label = label;
    h.kind = StatementKind::Essential;
    h.expr = expr;
    h.unit = unit;
    auto l = static_cast<Label>(statements_.size());
    statements_.push_back(std::move(h));
    labels_.emplace(label, l);
    local.emplace(label, l);
    items.push_back({LayoutItem::Kind::Statement, {}, l});
    thm.frame.hypotheses.push_back(l);
  }
  for (const auto& p : spec.disjoint) {
    if (mandatory_vars.count(p.first) && mandatory_vars.count(p.second)) {
      thm.frame.disjoint.push_back(p);
    }
  }
  std::sort(thm.frame.disjoint.begin(), thm.frame.disjoint.end());
  thm.context_disjoint = spec.disjoint;
  std::sort(thm.context_disjoint.begin(), thm.context_disjoint.end());

  std::set<Label> context(thm.frame.hypotheses.begin(), thm.frame.hypotheses.end());
  const auto own = static_cast<Label>(statements_.size());
  try {
    for (const auto& name : spec.proof) {
      auto it = labels_.find(name);
      if (it == labels_.end()) {
        throw std::invalid_argument("unknown label '" + name + "' in proof");
      }
      const Statement& ref = statements_[it->second];
      if (ref.kind == StatementKind::Essential && !local.count(name)) {
        throw std::invalid_argument("hypothesis '" + name + "' is not in scope");
      }
      if (ref.kind == StatementKind::Floating) {
        if (global_floating(ref.expr[1]) != it->second) {
          throw std::invalid_argument("floating hypothesis '" + name +
                                      "' is not global");
        }
        context.insert(it->second);
      }
      thm.proof.push_back(ProofStep::label(it->second));
    }
  } catch (...) {
    for (const auto& [label, l] : local) labels_.erase(label);
    statements_.resize(own - local.size());
    throw;
  }
  thm.context_hypotheses.assign(context.begin(), context.end());
  std::string raw;
  for (std::size_t i = 0; i < spec.proof.size(); ++i) {
    if (i) raw.push_back(' ');
    raw += spec.proof[i];
  }
  thm.raw_proof = std::move(raw);

  statements_.push_back(std::move(thm));
  labels_.emplace(spec.name, own);
  items.push_back({LayoutItem::Kind::Statement, {}, own});
  items.push_back({LayoutItem::Kind::CloseScope, {}, 0});
  layout_.push_back(std::move(items));
  return own;
}

Database parse_database(std::string_view source, const IncludeResolver& includes) {
  Database db;
  Parser parser(db, source, includes);
  parser.run();
  return db;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Database load_database(const std::filesystem::path& path) {
  const auto dir = path.parent_path();
  std::string text = read_file(path);
  return parse_database(text, [dir](const std::string& name) {
    return read_file(dir / name);
  });
}

std::size_t arity(const Database& db, Label label) {
  if (is_local(label)) return 0;
  const Statement& s = db[label];
  return is_hypothesis(s.kind) ? 0 : s.frame.hypotheses.size();
}

namespace {

// Children of every non-backref step; backrefs are resolved to their target.
struct ProofDag {
  std::vector<std::uint32_t> offsets;  // per step, into children
  std::vector<std::uint32_t> children;
  std::uint32_t root = 0;
};

ProofDag build_dag(const Database& db, std::span<const ProofStep> proof) {
  ProofDag dag;
  dag.offsets.assign(proof.size() + 1, 0);
  std::vector<std::uint32_t> stack;
  std::vector<std::vector<std::uint32_t>> kids(proof.size());
  for (std::uint32_t i = 0; i < proof.size(); ++i) {
    const ProofStep& step = proof[i];
    if (step.backref) {
      if (step.value >= i) throw std::invalid_argument("malformed proof backreference");
      stack.push_back(step.value);
      continue;
    }
    std::size_t k = arity(db, step.value);
    if (stack.size() < k) throw std::invalid_argument("proof stack underflow");
    kids[i].assign(stack.end() - static_cast<std::ptrdiff_t>(k), stack.end());
    stack.resize(stack.size() - k);
    stack.push_back(i);
  }
  if (stack.size() != 1) throw std::invalid_argument("proof does not reduce to one step");
  dag.root = stack.back();
  for (std::uint32_t i = 0; i < proof.size(); ++i) {
    dag.offsets[i] = static_cast<std::uint32_t>(dag.children.size());
    dag.children.insert(dag.children.end(), kids[i].begin(), kids[i].end());
  }
  dag.offsets[proof.size()] = static_cast<std::uint32_t>(dag.children.size());
  return dag;
}

}  // namespace

std::vector<Label> expand_proof(const Database& db, std::span<const ProofStep> proof,
                                std::size_t limit) {
  bool plain = std::none_of(proof.begin(), proof.end(),
                            [](const ProofStep& s) { return s.backref; });
  std::vector<Label> out;
  if (plain) {
    if (proof.size() > limit) throw std::length_error("expanded proof exceeds limit");
    out.reserve(proof.size());
    for (const auto& s : proof) out.push_back(s.value);
    return out;
  }
  ProofDag dag = build_dag(db, proof);
  // Iterative post-order over the DAG; shared subproofs are re-emitted.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> stack{{dag.root, 0}};
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    std::uint32_t begin = dag.offsets[node];
    std::uint32_t end = dag.offsets[node + 1];
    if (begin + next < end) {
      std::uint32_t child = dag.children[begin + next];
      ++next;
      stack.emplace_back(child, 0);
      continue;
    }
    if (out.size() == limit) throw std::length_error("expanded proof exceeds limit");
    out.push_back(proof[node].value);
    stack.pop_back();
  }
  return out;
}

std::uint64_t expanded_size(const Database& db, std::span<const ProofStep> proof) {
  ProofDag dag = build_dag(db, proof);
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> size(proof.size(), 0);
  for (std::uint32_t i = 0; i < proof.size(); ++i) {
    if (proof[i].backref) continue;
    std::uint64_t s = 1;
    for (std::uint32_t c = dag.offsets[i]; c < dag.offsets[i + 1]; ++c) {
      std::uint64_t cs = size[dag.children[c]];
      s = (kMax - s < cs) ? kMax : s + cs;
    }
    size[i] = s;
  }
  return size[dag.root];
}

}  // namespace refactor
