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

#include "refactor/extraction.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "refactor/hash.hpp"

namespace refactor {

const char* to_string(Structure s) {
  switch (s) {
    case Structure::Ok: return "ok";
    case Structure::NotTree: return "not_tree";
    case Structure::IncompleteArguments: return "incomplete_arguments";
  }
  return "unknown";
}

const char* to_string(StandardizeError e) {
  switch (e) {
    case StandardizeError::None: return "ok";
    case StandardizeError::NoValidSubstitution: return "no_valid_substitution";
    case StandardizeError::DisjointConflict: return "disjoint_conflict";
    case StandardizeError::PoolExhausted: return "variable_pool_exhausted";
    case StandardizeError::NoSteps: return "no_steps";
    case StandardizeError::VerifyFailed: return "verify_failed";
  }
  return "unknown";
}

const char* to_string(Category c) {
  switch (c) {
    case Category::NotTreeInvalid: return "not_tree_invalid";
    case Category::TreeInvalid: return "tree_invalid";
    case Category::TreeValid: return "tree_valid";
  }
  return "unknown";
}

ProofContext ExtractedTheorem::context(const Database& db) const {
  ProofContext ctx;
  std::set<Label> hyps(floating.begin(), floating.end());
  for (Label l : proof) {
    if (!is_local(l) && db[l].kind == StatementKind::Floating) hyps.insert(l);
  }
  ctx.hypotheses.assign(hyps.begin(), hyps.end());
  ctx.disjoint = disjoint;
  for (const auto& [name, expr] : essentials) ctx.locals.push_back(expr);
  return ctx;
}

std::vector<std::string> ExtractedTheorem::proof_names(const Database& db) const {
  std::vector<std::string> out;
  out.reserve(proof.size());
  for (Label l : proof) {
    out.push_back(is_local(l) ? essentials.at(local_index(l)).first : db[l].label);
  }
  return out;
}

TheoremSpec ExtractedTheorem::spec(const Database& db) const {
  return TheoremSpec{name, essentials, disjoint, conclusion, proof_names(db)};
}

std::vector<bool> threshold_mask(const PredictionMask& mask, std::size_t node_count) {
  if (mask.probs.size() != node_count) {
    throw std::invalid_argument("mask '" + mask.graph_id + "' has " +
                                std::to_string(mask.probs.size()) + " probabilities for " +
                                std::to_string(node_count) + " nodes");
  }
  std::vector<bool> out(node_count);
  for (std::size_t i = 0; i < node_count; ++i) out[i] = mask.probs[i] > mask.threshold;
  return out;
}

Structure check_structure(const ProofTree& tree, const std::vector<bool>& selected) {
  auto child = child_of(tree);
  std::size_t tops = 0;
  for (NodeId i = 0; i < tree.size(); ++i) {
    if (!selected[i]) continue;
    if (child[i] == i || !selected[child[i]]) ++tops;
  }
  // Every other selected node reaches the unique top through selected
  // children, so one top means one connected subtree.
  if (tops != 1) return Structure::NotTree;
  for (NodeId i = 0; i < tree.size(); ++i) {
    if (!selected[i]) continue;
    std::size_t n = 0;
    for (NodeId p : tree.nodes[i].parents) n += selected[p];
    if (n != 0 && n != tree.nodes[i].parents.size()) return Structure::IncompleteArguments;
  }
  return Structure::Ok;
}

namespace {

// Symbols at or above this value are placeholders for the arguments of a
// candidate; they never collide with database symbols.
constexpr SymbolId kTempBase = 0x40000000u;

bool is_temp(SymbolId s) { return s >= kTempBase; }

enum class Role : std::uint8_t { None, Step, SyntaxSlot, EssentialSlot };

bool is_constant_assertion(const Database& db, Label l) {
  if (is_local(l)) return false;
  const Statement& s = db[l];
  return is_assertion(s.kind) && s.frame.hypotheses.empty();
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // Keeps the smaller index as representative so results do not depend on
  // the order constraints are met.
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::uint32_t> parent_;
};

// Symbolic replay of the selected region with every argument slot replaced by
// a placeholder, followed by unification of the equalities the replay needs.
class Standardizer {
 public:
  Standardizer(const Database& db, const ProofTree& tree, const std::vector<bool>& selected)
      : db_(db), tree_(tree), selected_(selected) {}

  StandardizeResult run() {
    StandardizeResult out;
    classify();
    if (steps_ == 0) return fail(StandardizeError::NoSteps, "selection has no steps");
    replay();
    if (!solve(out)) return out;
    return finish();
  }

 private:
  StandardizeResult fail(StandardizeError e, std::string msg) {
    StandardizeResult r;
    r.error = e;
    r.message = std::move(msg);
    return r;
  }

  void classify() {
    const std::size_t n = tree_.size();
    role_.assign(n, Role::None);
    temp_of_.assign(n, 0);
    for (NodeId i = 0; i < n; ++i) {
      if (!selected_[i]) continue;
      const auto& parents = tree_.nodes[i].parents;
      bool all = !parents.empty() &&
                 std::all_of(parents.begin(), parents.end(),
                             [&](NodeId p) { return selected_[p]; });
      if (all) {
        role_[i] = Role::Step;
        ++steps_;
      } else if (db_.is_syntax_typecode(tree_.nodes[i].prop[0])) {
        role_[i] = Role::SyntaxSlot;
        temp_of_[i] = static_cast<std::uint32_t>(temp_node_.size());
        temp_node_.push_back(i);
      } else {
        role_[i] = Role::EssentialSlot;
      }
    }
  }

  void replay() {
    expr_.assign(tree_.size(), {});
    std::vector<std::pair<SymbolId, std::span<const SymbolId>>> sigma;
    for (NodeId i = 0; i < tree_.size(); ++i) {
      if (role_[i] == Role::SyntaxSlot) {
        expr_[i] = {tree_.nodes[i].prop[0], kTempBase + temp_of_[i]};
      }
      if (role_[i] != Role::Step) continue;
      const ProofNode& node = tree_.nodes[i];
      const Statement& a = db_[node.label];
      const auto& hyps = a.frame.hypotheses;
      sigma.clear();
      for (std::size_t j = 0; j < hyps.size(); ++j) {
        const Statement& h = db_[hyps[j]];
        if (h.kind != StatementKind::Floating) continue;
        const Expr& arg = expr_[node.parents[j]];
        sigma.emplace_back(h.expr[1], std::span<const SymbolId>(arg).subspan(1));
      }
      for (std::size_t j = 0; j < hyps.size(); ++j) {
        const Statement& h = db_[hyps[j]];
        if (h.kind != StatementKind::Essential) continue;
        NodeId p = node.parents[j];
        Expr expected = substitute(h.expr, sigma);
        if (role_[p] == Role::EssentialSlot) {
          expr_[p] = std::move(expected);
        } else {
          constraints_.emplace_back(expr_[p], std::move(expected));
        }
      }
      for (const DisjointPair& d : a.frame.disjoint) {
        Expr x, y;
        for (const auto& [var, repl] : sigma) {
          if (var == d.first) x.assign(repl.begin(), repl.end());
          if (var == d.second) y.assign(repl.begin(), repl.end());
        }
        disjoint_checks_.emplace_back(std::move(x), std::move(y));
      }
      expr_[i] = substitute(a.expr, sigma);
    }
  }

  Expr resolve(const Expr& e) const {
    Expr out;
    out.reserve(e.size());
    for (SymbolId s : e) {
      if (is_temp(s)) {
        auto it = resolved_.find(s - kTempBase);
        if (it != resolved_.end()) {
          out.insert(out.end(), it->second.begin(), it->second.end());
          continue;
        }
      }
      out.push_back(s);
    }
    return out;
  }

  // A placeholder class may stand for a constant only when every member
  // came from the same zero-argument assertion; the class is then turned
  // back into that assertion.
  bool try_constant(UnionFind& uf, std::uint32_t temp) {
    std::uint32_t root = uf.find(temp);
    const Expr* prop = nullptr;
    std::vector<std::uint32_t> members;
    for (std::uint32_t k = 0; k < temp_node_.size(); ++k) {
      if (resolved_.count(k) || uf.find(k) != root) continue;
      const ProofNode& node = tree_.nodes[temp_node_[k]];
      if (!is_constant_assertion(db_, node.label)) return false;
      if (prop && *prop != node.prop) return false;
      prop = &node.prop;
      members.push_back(k);
    }
    if (!prop) return false;
    Expr body(prop->begin() + 1, prop->end());
    for (std::uint32_t k : members) resolved_[k] = body;
    return true;
  }

  bool solve(StandardizeResult& out) {
    for (;;) {
      UnionFind uf(temp_node_.size());
      bool restart = false;
      for (const auto& [lhs, rhs] : constraints_) {
        Expr a = resolve(lhs);
        Expr b = resolve(rhs);
        std::size_t i = 0;
        for (; i < a.size() && i < b.size(); ++i) {
          SymbolId x = a[i], y = b[i];
          if (x == y) continue;
          if (is_temp(x) && is_temp(y)) {
            std::uint32_t rx = uf.find(x - kTempBase), ry = uf.find(y - kTempBase);
            if (rx == ry) continue;
            if (tree_.nodes[temp_node_[rx]].prop[0] != tree_.nodes[temp_node_[ry]].prop[0]) {
              out = fail(StandardizeError::NoValidSubstitution,
                         "arguments of different typecodes must coincide");
              return false;
            }
            uf.unite(rx, ry);
            continue;
          }
          SymbolId v = is_temp(x) ? x : y;
          if ((is_temp(x) || is_temp(y)) && try_constant(uf, v - kTempBase)) {
            restart = true;
            break;
          }
          out = fail(StandardizeError::NoValidSubstitution,
                     "an argument is constrained to '" + db_.render(is_temp(x) ? b : a) + "'");
          return false;
        }
        if (restart) break;
        if (a.size() != b.size()) {
          out = fail(StandardizeError::NoValidSubstitution,
                     "'" + db_.render(a) + "' cannot match '" + db_.render(b) + "'");
          return false;
        }
      }
      if (restart) continue;
      rep_.resize(temp_node_.size());
      for (std::uint32_t k = 0; k < temp_node_.size(); ++k) rep_[k] = uf.find(k);
      return true;
    }
  }

  Expr final_expr(const Expr& e) const {
    Expr out;
    out.reserve(e.size());
    for (SymbolId s : e) {
      if (!is_temp(s)) {
        out.push_back(s);
        continue;
      }
      std::uint32_t k = s - kTempBase;
      auto it = resolved_.find(k);
      if (it != resolved_.end()) {
        out.insert(out.end(), it->second.begin(), it->second.end());
      } else {
        out.push_back(canonical_var_.at(rep_[k]));
      }
    }
    return out;
  }

  StandardizeResult finish() {
    // Canonical names in order of first appearance.
    std::unordered_map<SymbolId, std::size_t> used_per_typecode;
    std::unordered_map<std::uint32_t, Label> float_of;
    for (std::uint32_t k = 0; k < temp_node_.size(); ++k) {
      if (resolved_.count(k) || canonical_var_.count(rep_[k])) continue;
      SymbolId tc = tree_.nodes[temp_node_[k]].prop[0];
      const auto& pool = db_.variable_pool(tc);
      std::size_t& next = used_per_typecode[tc];
      if (next >= pool.size()) {
        return fail(StandardizeError::PoolExhausted,
                    "not enough variables of typecode '" + std::string(db_.symbol(tc)) + "'");
      }
      Label f = pool[next++];
      canonical_var_[rep_[k]] = db_[f].expr[1];
      float_of[rep_[k]] = f;
    }

    ExtractedTheorem t;
    std::map<Expr, std::uint32_t> hyp_index;
    NodeId top = 0;
    for (NodeId i = 0; i < tree_.size(); ++i) {
      if (role_[i] == Role::None) continue;
      top = i;
      const ProofNode& node = tree_.nodes[i];
      switch (role_[i]) {
        case Role::Step:
          t.proof.push_back(node.label);
          break;
        case Role::SyntaxSlot: {
          std::uint32_t k = temp_of_[i];
          t.proof.push_back(resolved_.count(k) ? node.label : float_of.at(rep_[k]));
          break;
        }
        case Role::EssentialSlot: {
          Expr e = final_expr(expr_[i]);
          bool constant = std::none_of(e.begin(), e.end(),
                                       [&](SymbolId s) { return db_.is_variable(s); });
          if (constant && e == node.prop && is_constant_assertion(db_, node.label)) {
            t.proof.push_back(node.label);
            break;
          }
          auto [it, inserted] =
              hyp_index.emplace(e, static_cast<std::uint32_t>(t.essentials.size()));
          if (inserted) {
            t.essentials.emplace_back("hyp." + std::to_string(t.essentials.size() + 1), e);
          }
          t.proof.push_back(local_label(it->second));
          break;
        }
        case Role::None:
          break;
      }
    }
    t.conclusion = final_expr(expr_[top]);

    std::set<DisjointPair> pairs;
    for (const auto& [x, y] : disjoint_checks_) {
      Expr fx = final_expr(x), fy = final_expr(y);
      for (SymbolId a : fx) {
        if (!db_.is_variable(a)) continue;
        for (SymbolId b : fy) {
          if (!db_.is_variable(b)) continue;
          if (a == b) {
            return fail(StandardizeError::DisjointConflict,
                        "variable '" + std::string(db_.symbol(a)) +
                            "' would need to be disjoint from itself");
          }
          pairs.insert(DisjointPair::make(a, b));
        }
      }
    }
    t.disjoint.assign(pairs.begin(), pairs.end());

    std::set<Label> mandatory;
    auto mark = [&](const Expr& e) {
      for (SymbolId s : e) {
        if (!db_.is_variable(s)) continue;
        auto f = db_.global_floating(s);
        if (f) mandatory.insert(*f);
      }
    };
    mark(t.conclusion);
    for (const auto& [name, e] : t.essentials) mark(e);
    t.floating.assign(mandatory.begin(), mandatory.end());

    VerifyResult vr = verify_labels(db_, t.conclusion, t.proof, t.context(db_), false);
    if (!vr.ok()) {
      return fail(StandardizeError::VerifyFailed, vr.message);
    }
    t.dedup_key = dedup_key(db_, t);
    StandardizeResult out;
    out.theorem = std::move(t);
    return out;
  }

  const Database& db_;
  const ProofTree& tree_;
  const std::vector<bool>& selected_;
  std::vector<Role> role_;
  std::size_t steps_ = 0;
  std::vector<std::uint32_t> temp_of_;   // node -> placeholder index
  std::vector<NodeId> temp_node_;        // placeholder index -> node
  std::vector<Expr> expr_;
  std::vector<std::pair<Expr, Expr>> constraints_;
  std::vector<std::pair<Expr, Expr>> disjoint_checks_;
  std::unordered_map<std::uint32_t, Expr> resolved_;
  std::vector<std::uint32_t> rep_;
  std::unordered_map<std::uint32_t, SymbolId> canonical_var_;
};

}  // namespace

StandardizeResult standardize(const Database& db, const ProofTree& tree,
                              const std::vector<bool>& selected) {
  if (selected.size() != tree.size()) {
    throw std::invalid_argument("selection size does not match the tree");
  }
  return Standardizer(db, tree, selected).run();
}

ExtractionVerdict verify_selection(const Database& db, const ProofTree& tree,
                                   const std::vector<bool>& selected,
                                   const ExtractionOptions& options) {
  ExtractionVerdict v;
  if (selected.size() != tree.size()) {
    throw std::invalid_argument("selection size does not match the tree");
  }
  Structure s = check_structure(tree, selected);
  if (s == Structure::NotTree) {
    v.category = Category::NotTreeInvalid;
    v.reason = to_string(s);
    return v;
  }
  v.category = Category::TreeInvalid;
  if (s != Structure::Ok) {
    v.reason = to_string(s);
    return v;
  }
  if (options.reject_whole_tree &&
      std::all_of(selected.begin(), selected.end(), [](bool b) { return b; })) {
    v.reason = "whole_tree";
    return v;
  }
  StandardizeResult r = standardize(db, tree, selected);
  if (!r.theorem) {
    v.reason = to_string(r.error);
    return v;
  }
  v.category = Category::TreeValid;
  v.reason = "ok";
  v.theorem = std::move(r.theorem);
  return v;
}

ExtractionVerdict verify_extraction(const Database& db, const ProofTree& tree,
                                    const PredictionMask& mask,
                                    const ExtractionOptions& options) {
  return verify_selection(db, tree, threshold_mask(mask, tree.size()), options);
}

namespace {

class Renamer {
 public:
  explicit Renamer(const Database& db) : db_(db) {}

  std::string render(const Expr& e, bool assign) {
    std::string out;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (i) out.push_back(' ');
      SymbolId s = e[i];
      if (!db_.is_variable(s)) {
        out += db_.symbol(s);
        continue;
      }
      auto it = names_.find(s);
      if (it != names_.end()) {
        out += it->second;
      } else if (assign) {
        out += names_.emplace(s, fresh(s)).first->second;
      } else {
        out += '?';
      }
    }
    return out;
  }

  std::string name(SymbolId v) {
    auto it = names_.find(v);
    if (it != names_.end()) return it->second;
    return names_.emplace(v, fresh(v)).first->second;
  }

 private:
  std::string fresh(SymbolId v) {
    std::string tc = "?";
    if (auto f = db_.global_floating(v)) tc = db_.symbol(db_[*f].expr[0]);
    return tc + "#" + std::to_string(counter_++);
  }

  const Database& db_;
  std::unordered_map<SymbolId, std::string> names_;
  std::size_t counter_ = 0;
};

}  // namespace

std::string dedup_key(const Database& db, const std::vector<Expr>& essentials,
                      const Expr& conclusion,
                      const std::vector<DisjointPair>& mandatory_disjoint) {
  Renamer r(db);
  std::string key = r.render(conclusion, true);

  std::vector<std::pair<std::string, std::size_t>> partial;
  for (std::size_t i = 0; i < essentials.size(); ++i) {
    partial.emplace_back(r.render(essentials[i], false), i);
  }
  std::stable_sort(partial.begin(), partial.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> hyps;
  for (const auto& [text, i] : partial) hyps.push_back(r.render(essentials[i], true));
  std::sort(hyps.begin(), hyps.end());
  hyps.erase(std::unique(hyps.begin(), hyps.end()), hyps.end());

  std::vector<std::string> pairs;
  for (const auto& d : mandatory_disjoint) {
    std::string a = r.name(d.first), b = r.name(d.second);
    if (b < a) std::swap(a, b);
    pairs.push_back(a + " " + b);
  }
  std::sort(pairs.begin(), pairs.end());

  for (const auto& h : hyps) key += " & " + h;
  for (const auto& p : pairs) key += " $d " + p;
  return key;
}

std::string dedup_key(const Database& db, const ExtractedTheorem& t) {
  std::set<SymbolId> mandatory;
  for (Label f : t.floating) mandatory.insert(db[f].expr[1]);
  std::vector<DisjointPair> md;
  for (const auto& d : t.disjoint) {
    if (mandatory.count(d.first) && mandatory.count(d.second)) md.push_back(d);
  }
  std::vector<Expr> hyps;
  for (const auto& [name, e] : t.essentials) hyps.push_back(e);
  return dedup_key(db, hyps, t.conclusion, md);
}

std::string statement_key(const Database& db, Label assertion) {
  const Statement& s = db[assertion];
  std::vector<Expr> hyps;
  for (Label h : s.frame.hypotheses) {
    if (db[h].kind == StatementKind::Essential) hyps.push_back(db[h].expr);
  }
  return dedup_key(db, hyps, s.expr, s.frame.disjoint);
}

std::string standard_key(const Database& db, Label assertion) {
  if (db[assertion].kind != StatementKind::Provable) return statement_key(db, assertion);
  ProofTree t = build_tree(db, assertion);
  ExtractionVerdict v = verify_selection(db, t, std::vector<bool>(t.size(), true));
  return v.theorem ? v.theorem->dedup_key : statement_key(db, assertion);
}

std::vector<ExtractedTheorem> dedup(std::vector<ExtractedTheorem> theorems) {
  std::unordered_set<std::string> seen;
  std::vector<ExtractedTheorem> out;
  for (auto& t : theorems) {
    if (seen.insert(t.dedup_key).second) out.push_back(std::move(t));
  }
  return out;
}

void assign_names(const Database& db, std::vector<ExtractedTheorem>& theorems) {
  std::unordered_set<std::string> used;
  auto taken = [&](const std::string& l) {
    return used.count(l) || db.find(l) || db.find_symbol(l);
  };
  for (auto& t : theorems) {
    const std::string hex = hex64(fnv1a64(t.dedup_key));
    std::string name;
    for (std::size_t digits = 8;; ++digits) {
      name = digits <= hex.size()
                 ? "rf_" + hex.substr(0, digits)
                 : "rf_" + hex + "_" + std::to_string(digits - hex.size());
      bool clash = taken(name);
      for (std::size_t i = 0; i < t.essentials.size() && !clash; ++i) {
        clash = taken(name + "." + std::to_string(i + 1));
      }
      if (!clash) break;
    }
    t.name = name;
    used.insert(name);
    for (std::size_t i = 0; i < t.essentials.size(); ++i) {
      t.essentials[i].first = name + "." + std::to_string(i + 1);
      used.insert(t.essentials[i].first);
    }
  }
}

void write_fragment(const Database& db, const std::vector<ExtractedTheorem>& theorems,
                    std::ostream& os) {
  for (const auto& t : theorems) {
    os << "${\n";
    for (const auto& d : t.disjoint) {
      os << "  $d " << db.symbol(d.first) << " " << db.symbol(d.second) << " $.\n";
    }
    for (const auto& [label, expr] : t.essentials) {
      os << "  " << label << " $e " << db.render(expr) << " $.\n";
    }
    os << "  " << t.name << " $p " << db.render(t.conclusion) << " $=\n   ";
    for (const auto& l : t.proof_names(db)) os << " " << l;
    os << " $.\n$}\n";
  }
}

}  // namespace refactor
