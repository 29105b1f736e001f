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

#include "refactor/synth.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "refactor/database.hpp"
#include "refactor/extraction.hpp"
#include "refactor/proof_tree.hpp"

namespace refactor {
namespace {

using Sigma = std::map<SymbolId, Expr>;  // variable -> symbols without typecode

// Appends `src` to `dst` and returns the id of its root in `dst`.
NodeId append(ProofTree& dst, const ProofTree& src) {
  const NodeId offset = static_cast<NodeId>(dst.size());
  for (const auto& n : src.nodes) {
    ProofNode m = n;
    for (auto& p : m.parents) p += offset;
    dst.nodes.push_back(std::move(m));
  }
  return static_cast<NodeId>(dst.size() - 1);
}

class Synth {
 public:
  Synth(Database& db, const SynthOptions& o) : db_(db), o_(o), rng_(o.seed) {
    for (Label l = 0; l < db_.size(); ++l) {
      const Statement& s = db_[l];
      if (!is_assertion(s.kind)) continue;
      if (db_.is_syntax_typecode(s.expr[0])) {
        syntax_.push_back(l);
      } else {
        keys_.insert(statement_key(db_, l));
        if (s.frame.disjoint.empty()) usable_.push_back(l);
      }
    }
    if (syntax_.empty() || usable_.empty()) {
      throw std::runtime_error("base database has no syntax axioms or no usable assertions");
    }
    for (Label v : db_.variable_pool(db_[syntax_.front()].expr[0])) {
      if (small_vars_.size() < 4) small_vars_.push_back(db_[v].expr[1]);
    }
  }

  std::vector<ExtractedTheorem> run() {
    std::size_t attempts = 0;
    const std::size_t budget = o_.theorems * 4000;
    while (theorems_.size() < o_.theorems) {
      if (++attempts > budget) {
        throw std::runtime_error("synthesis stalled after " + std::to_string(theorems_.size()) +
                                 " theorems");
      }
      std::optional<std::size_t> f = derive();
      if (f && below(4) == 0) promote(*f);
    }
    return theorems_;
  }

 private:
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = rng_();
    } while (x >= limit);
    return x % bound;
  }

  SymbolId typecode_of(SymbolId var) const {
    auto f = db_.global_floating(var);
    return f ? db_[*f].expr[0] : SymbolId(-1);
  }

  // Syntax proof of `tc body`, or null when it does not parse. Pointers stay
  // valid for the lifetime of the cache.
  const ProofTree* parse(SymbolId tc, std::span<const SymbolId> body) {
    Expr key{tc};
    key.insert(key.end(), body.begin(), body.end());
    if (auto it = parse_cache_.find(key); it != parse_cache_.end()) {
      return it->second ? &*it->second : nullptr;
    }
    std::optional<ProofTree> out;
    if (body.size() == 1 && db_.is_variable(body[0]) && typecode_of(body[0]) == tc) {
      ProofTree t;
      t.nodes.push_back({*db_.global_floating(body[0]), key, {}});
      out = std::move(t);
    }
    for (std::size_t i = 0; !out && i < syntax_.size(); ++i) {
      const Statement& ax = db_[syntax_[i]];
      if (ax.expr[0] != tc) continue;
      Sigma sigma;
      if (!match(ax.expr, 1, body, 0, sigma)) continue;
      ProofTree t;
      std::vector<NodeId> parents;
      for (Label h : ax.frame.hypotheses) {
        SymbolId v = db_[h].expr[1];
        parents.push_back(append(t, *parse(db_[h].expr[0], sigma.at(v))));
      }
      t.nodes.push_back({syntax_[i], key, std::move(parents)});
      out = std::move(t);
    }
    auto it = parse_cache_.emplace(std::move(key), std::move(out)).first;
    return it->second ? &*it->second : nullptr;
  }

  // Matches pattern[pi..] against body[bi..]; variables bind to spans that
  // parse as their typecode.
  bool match(const Expr& pattern, std::size_t pi, std::span<const SymbolId> body, std::size_t bi,
             Sigma& sigma) {
    if (pi == pattern.size()) return bi == body.size();
    const SymbolId s = pattern[pi];
    if (!db_.is_variable(s)) {
      return bi < body.size() && body[bi] == s && match(pattern, pi + 1, body, bi + 1, sigma);
    }
    if (auto it = sigma.find(s); it != sigma.end()) {
      const Expr& e = it->second;
      if (body.size() - bi < e.size() || !std::equal(e.begin(), e.end(), body.begin() + bi)) {
        return false;
      }
      return match(pattern, pi + 1, body, bi + e.size(), sigma);
    }
    const bool last = pi + 1 == pattern.size();
    const bool before_constant = !last && !db_.is_variable(pattern[pi + 1]);
    for (std::size_t end = last ? body.size() : bi + 1; end <= body.size(); ++end) {
      if (before_constant && (end == body.size() || body[end] != pattern[pi + 1])) continue;
      auto span = body.subspan(bi, end - bi);
      if (!parse(typecode_of(s), span)) continue;
      sigma[s] = Expr(span.begin(), span.end());
      if (match(pattern, pi + 1, body, end, sigma)) return true;
      sigma.erase(s);
    }
    return false;
  }

  Expr random_body(SymbolId tc, int depth) {
    if (depth <= 0 || below(3) == 0) {
      return {small_vars_[below(small_vars_.size())]};
    }
    std::vector<Label> choices;
    for (Label l : syntax_) {
      if (db_[l].expr[0] == tc) choices.push_back(l);
    }
    const Statement& ax = db_[choices[below(choices.size())]];
    Expr out;
    Sigma sigma;
    for (std::size_t i = 1; i < ax.expr.size(); ++i) {
      SymbolId s = ax.expr[i];
      if (!db_.is_variable(s)) {
        out.push_back(s);
        continue;
      }
      auto it = sigma.find(s);
      if (it == sigma.end()) it = sigma.emplace(s, random_body(typecode_of(s), depth - 1)).first;
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
    return out;
  }

  Expr apply_sigma(const Expr& e, const Sigma& sigma) const {
    Expr out;
    for (SymbolId s : e) {
      auto it = sigma.find(s);
      if (it == sigma.end()) {
        out.push_back(s);
      } else {
        out.insert(out.end(), it->second.begin(), it->second.end());
      }
    }
    return out;
  }

  // Application of assertion `a`; `hyps` are the trees of its essential
  // hypotheses in frame order.
  std::optional<ProofTree> application(Label a, const Sigma& sigma,
                                       const std::vector<const ProofTree*>& hyps) {
    const Statement& s = db_[a];
    ProofTree t;
    std::vector<NodeId> parents;
    std::size_t e = 0;
    for (Label h : s.frame.hypotheses) {
      const Statement& hs = db_[h];
      if (hs.kind == StatementKind::Floating) {
        const ProofTree* p = parse(hs.expr[0], sigma.at(hs.expr[1]));
        if (!p) return std::nullopt;
        parents.push_back(append(t, *p));
      } else {
        parents.push_back(append(t, *hyps[e++]));
      }
    }
    t.nodes.push_back({a, apply_sigma(s.expr, sigma), std::move(parents)});
    return t;
  }

  std::optional<std::size_t> derive() {
    const Label a = usable_[below(usable_.size())];
    const Statement& s = db_[a];
    std::vector<Label> essentials;
    for (Label h : s.frame.hypotheses) {
      if (db_[h].kind == StatementKind::Essential) essentials.push_back(h);
    }
    if (!essentials.empty() && facts_.empty()) return std::nullopt;
    Sigma sigma;
    std::vector<std::size_t> chosen(essentials.size());
    std::vector<std::size_t> order(essentials.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng_);
    for (std::size_t k : order) {
      const Expr& pattern = db_[essentials[k]].expr;
      bool found = false;
      for (int tries = 0; tries < 60 && !found; ++tries) {
        std::size_t f = below(facts_.size());
        const Expr& fe = facts_[f].expr;
        if (fe[0] != pattern[0]) continue;
        Sigma trial = sigma;
        if (match(pattern, 1, std::span<const SymbolId>(fe).subspan(1), 0, trial)) {
          sigma = std::move(trial);
          chosen[k] = f;
          found = true;
        }
      }
      if (!found) return std::nullopt;
    }
    for (Label h : s.frame.hypotheses) {
      const Statement& hs = db_[h];
      if (hs.kind == StatementKind::Floating && !sigma.count(hs.expr[1])) {
        sigma[hs.expr[1]] = random_body(hs.expr[0], 2);
      }
    }
    std::vector<const ProofTree*> hyps;
    for (std::size_t f : chosen) hyps.push_back(&facts_[f].tree);
    auto t = application(a, sigma, hyps);
    if (!t || t->size() > o_.max_fact_nodes) return std::nullopt;
    Expr expr = t->nodes.back().prop;
    if (expr.size() > o_.max_tokens) return std::nullopt;
    auto [it, inserted] = fact_index_.emplace(db_.render(expr), facts_.size());
    if (!inserted) return std::nullopt;
    facts_.push_back({std::move(expr), std::move(*t)});
    return facts_.size() - 1;
  }

  void promote(std::size_t f) {
    const ProofTree tree = facts_[f].tree;
    if (tree.size() > o_.max_theorem_nodes) return;
    std::vector<NodeId> steps;
    for (NodeId i = 0; i + 1 < tree.size(); ++i) {
      if (!tree.nodes[i].parents.empty() && !db_.is_syntax_typecode(tree.nodes[i].prop[0])) {
        steps.push_back(i);
      }
    }
    if (steps.empty()) return;
    auto sizes = subtree_sizes(tree);
    std::vector<bool> selected(tree.size(), true);
    // Half of the theorems get one or two hypotheses by cutting subproofs.
    std::vector<NodeId> cuts;
    if (below(2) == 0) {
      std::size_t want = 1 + below(2);
      for (int tries = 0; tries < 8 && cuts.size() < want; ++tries) {
        NodeId c = steps[below(steps.size())];
        const NodeId first = c + 1 - sizes[c];
        bool overlaps = !selected[c];
        for (NodeId d : cuts) overlaps = overlaps || (d >= first && d <= c);
        if (overlaps) continue;
        for (NodeId i = first; i < c; ++i) selected[i] = false;
        cuts.push_back(c);
      }
    }
    StandardizeResult r = standardize(db_, tree, selected);
    if (!r.theorem || !keys_.insert(r.theorem->dedup_key).second) return;
    ExtractedTheorem th = std::move(*r.theorem);
    th.name = o_.prefix + std::to_string(theorems_.size() + 1);
    for (std::size_t i = 0; i < th.essentials.size(); ++i) {
      th.essentials[i].first = th.name + "." + std::to_string(i + 1);
    }
    th.origin = "synthetic";
    const Label l = db_.add_theorem(th.spec(db_));
    usable_.push_back(l);
    theorems_.push_back(th);

    // Later facts built on this one now go through the new theorem.
    std::sort(cuts.begin(), cuts.end());
    const Statement& s = db_[l];
    Sigma sigma;
    if (!match(s.expr, 1, std::span<const SymbolId>(facts_[f].expr).subspan(1), 0, sigma)) return;
    std::vector<ProofTree> parts;
    std::size_t e = 0;
    for (Label h : s.frame.hypotheses) {
      if (db_[h].kind != StatementKind::Essential) continue;
      const NodeId c = cuts.at(e++);
      if (!match(db_[h].expr, 1, std::span<const SymbolId>(tree.nodes[c].prop).subspan(1), 0,
                 sigma)) {
        return;
      }
      parts.push_back(subtree_above(tree, c));
    }
    for (Label h : s.frame.hypotheses) {
      const Statement& hs = db_[h];
      if (hs.kind == StatementKind::Floating && !sigma.count(hs.expr[1])) return;
    }
    std::vector<const ProofTree*> hyps;
    for (const auto& p : parts) hyps.push_back(&p);
    if (auto t = application(l, sigma, hyps); t && t->nodes.back().prop == facts_[f].expr) {
      facts_[f].tree = std::move(*t);
    }
  }

  struct Fact {
    Expr expr;
    ProofTree tree;
  };

  Database& db_;
  const SynthOptions& o_;
  std::mt19937_64 rng_;
  std::vector<Label> syntax_;
  std::vector<Label> usable_;
  std::vector<SymbolId> small_vars_;
  std::unordered_set<std::string> keys_;
  std::vector<Fact> facts_;
  std::unordered_map<std::string, std::size_t> fact_index_;
  struct ExprHash {
    std::size_t operator()(const Expr& e) const {
      std::uint64_t h = 1469598103934665603ull;
      for (SymbolId s : e) h = (h ^ s) * 1099511628211ull;
      return static_cast<std::size_t>(h);
    }
  };
  std::unordered_map<Expr, std::optional<ProofTree>, ExprHash> parse_cache_;
  std::vector<ExtractedTheorem> theorems_;
};

}  // namespace

std::string synthesize(const std::string& base_text, const SynthOptions& options) {
  Database db = parse_database(base_text);
  auto theorems = Synth(db, options).run();
  std::ostringstream os;
  os << base_text;
  if (!base_text.empty() && base_text.back() != '\n') os << '\n';
  os << "\n$( Generated theorems. $)\n\n";
  write_fragment(db, theorems, os);
  return os.str();
}

}  // namespace refactor
