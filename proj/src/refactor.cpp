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

#include "refactor/refactor.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "refactor/extraction.hpp"
#include "refactor/parallel.hpp"

namespace refactor {

namespace {

// Layout unit declaring each symbol.
std::vector<std::size_t> symbol_units(const Database& db) {
  std::vector<std::size_t> unit(db.symbol_count(), 0);
  std::vector<bool> seen(db.symbol_count(), false);
  for (std::size_t u = 0; u < db.layout().size(); ++u) {
    for (const auto& item : db.layout()[u]) {
      if (item.kind != LayoutItem::Kind::Constants && item.kind != LayoutItem::Kind::Variables) {
        continue;
      }
      for (SymbolId s : item.symbols) {
        if (!seen[s]) {
          seen[s] = true;
          unit[s] = u;
        }
      }
    }
  }
  return unit;
}

Pattern make_pattern(const Database& db, Label theorem,
                     const std::vector<std::size_t>& sym_units) {
  Pattern p;
  p.label = theorem;
  p.tree = std::make_shared<const ProofTree>(build_tree(db, theorem));
  p.key = statement_key(db, theorem);
  const Statement& q = db[theorem];
  std::size_t need = 0;
  auto symbols = [&](const Expr& e) {
    for (SymbolId s : e) need = std::max(need, sym_units[s] + 1);
  };
  symbols(q.expr);
  for (Label h : q.frame.hypotheses) symbols(db[h].expr);
  for (const auto& node : p.tree->nodes) {
    const Statement& s = db[node.label];
    if (s.kind == StatementKind::Essential) continue;  // own hypotheses
    need = std::max(need, s.unit + 1);
  }
  p.needs_unit = need;
  return p;
}

std::ptrdiff_t frame_index(const Statement& q, Label l) {
  const auto& h = q.frame.hypotheses;
  auto it = std::find(h.begin(), h.end(), l);
  return it == h.end() ? -1 : it - h.begin();
}

}  // namespace

Pattern make_pattern(const Database& db, Label theorem) {
  return make_pattern(db, theorem, symbol_units(db));
}

std::optional<Binding> match_at(const Database& db, const ProofTree& host,
                                const std::vector<std::uint32_t>& host_sizes, NodeId node,
                                const Pattern& q, const ProofContext& host_context) {
  const ProofTree& qt = *q.tree;
  const Statement& qs = db[q.label];
  if (host.nodes[node].label != qt.nodes[qt.root()].label) return std::nullopt;

  const std::size_t nh = qs.frame.hypotheses.size();
  std::vector<NodeId> bound(nh, 0);
  std::vector<bool> is_bound(nh, false);
  Binding b;
  std::vector<std::pair<NodeId, NodeId>> stack{{qt.root(), node}};
  while (!stack.empty()) {
    auto [qi, hi] = stack.back();
    stack.pop_back();
    const ProofNode& qn = qt.nodes[qi];
    const ProofNode& hn = host.nodes[hi];
    std::ptrdiff_t k = frame_index(qs, qn.label);
    if (k >= 0) {
      auto i = static_cast<std::size_t>(k);
      if (!is_bound[i]) {
        is_bound[i] = true;
        bound[i] = hi;
      } else if (host.nodes[bound[i]].prop != hn.prop) {
        return std::nullopt;
      }
      continue;
    }
    if (db[qn.label].kind == StatementKind::Floating) {
      // Dummy variable of q: any subtree of the same typecode will do.
      if (hn.prop[0] != qn.prop[0]) return std::nullopt;
      b.region += host_sizes[hi];
      continue;
    }
    if (hn.label != qn.label) return std::nullopt;
    ++b.region;
    for (std::size_t j = 0; j < qn.parents.size(); ++j) {
      stack.emplace_back(qn.parents[j], hn.parents[j]);
    }
  }
  if (b.region < 2) return std::nullopt;
  if (std::find(is_bound.begin(), is_bound.end(), false) != is_bound.end()) {
    return std::nullopt;
  }

  std::vector<std::pair<SymbolId, std::span<const SymbolId>>> sigma;
  for (std::size_t i = 0; i < nh; ++i) {
    const Statement& h = db[qs.frame.hypotheses[i]];
    if (h.kind != StatementKind::Floating) continue;
    const Expr& arg = host.nodes[bound[i]].prop;
    if (arg[0] != h.expr[0]) return std::nullopt;
    sigma.emplace_back(h.expr[1], std::span<const SymbolId>(arg).subspan(1));
  }
  for (std::size_t i = 0; i < nh; ++i) {
    const Statement& h = db[qs.frame.hypotheses[i]];
    if (h.kind != StatementKind::Essential) continue;
    if (substitute(h.expr, sigma) != host.nodes[bound[i]].prop) return std::nullopt;
  }
  if (substitute(qs.expr, sigma) != host.nodes[node].prop) return std::nullopt;
  for (const DisjointPair& d : qs.frame.disjoint) {
    std::span<const SymbolId> x, y;
    for (const auto& [var, repl] : sigma) {
      if (var == d.first) x = repl;
      if (var == d.second) y = repl;
    }
    for (SymbolId a : x) {
      if (!db.is_variable(a)) continue;
      for (SymbolId c : y) {
        if (!db.is_variable(c)) continue;
        if (a == c) return std::nullopt;
        if (!std::binary_search(host_context.disjoint.begin(), host_context.disjoint.end(),
                                DisjointPair::make(a, c))) {
          return std::nullopt;
        }
      }
    }
  }
  b.args = std::move(bound);
  return b;
}

ProofRefactoring refactor_proof(const Database& db, const ProofTree& host,
                                const ProofContext& host_context,
                                const std::vector<const Pattern*>& patterns) {
  ProofRefactoring out;
  out.tree = host;
  out.applications.assign(patterns.size(), 0);
  out.saved.assign(patterns.size(), 0);
  // Repeat the whole list until a full pass changes nothing, so the result is
  // a fixed point for every pattern.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t qi = 0; qi < patterns.size(); ++qi) {
      const Pattern& q = *patterns[qi];
      for (bool applied = true; applied;) {
        applied = false;
        const ProofTree& t = out.tree;
        auto sizes = subtree_sizes(t);
        for (NodeId n = 0; n < t.size(); ++n) {
          auto b = match_at(db, t, sizes, n, q, host_context);
          if (!b) continue;
          std::vector<Label> labels;
          labels.reserve(t.size());
          const NodeId begin = n + 1 - sizes[n];
          for (NodeId i = 0; i < begin; ++i) labels.push_back(t.nodes[i].label);
          for (NodeId a : b->args) {
            for (NodeId j = a + 1 - sizes[a]; j <= a; ++j) labels.push_back(t.nodes[j].label);
          }
          labels.push_back(q.label);
          for (NodeId i = n + 1; i < t.size(); ++i) labels.push_back(t.nodes[i].label);
          ProofTree next;
          try {
            next = tree_from_labels(db, t.nodes[t.root()].prop, labels, host_context, t.theorem);
          } catch (const TreeError& e) {
            throw std::logic_error("refactoring '" + t.theorem + "' with '" + db[q.label].label +
                                   "' broke the proof: " + e.what());
          }
          next.local_names = t.local_names;
          out.saved[qi] += t.size() - next.size();
          ++out.applications[qi];
          out.tree = std::move(next);
          applied = changed = true;
          break;
        }
      }
    }
  }
  return out;
}

RefactorResult refactor_database(const Database& db, const std::vector<Label>& new_theorems,
                                 const RefactorOptions& options) {
  const auto sym_units = symbol_units(db);
  std::vector<Pattern> patterns;
  patterns.reserve(new_theorems.size());
  for (Label q : new_theorems) patterns.push_back(make_pattern(db, q, sym_units));
  std::unordered_set<Label> is_new(new_theorems.begin(), new_theorems.end());

  std::vector<Label> hosts;
  for (Label l : db.provables()) {
    if (!is_new.count(l)) hosts.push_back(l);
  }

  struct HostResult {
    bool skipped = false;
    bool changed = false;
    std::uint64_t before = 0, after = 0;
    std::vector<Label> proof;
    std::vector<std::uint64_t> saved;
    std::vector<std::size_t> uses;  // per pattern, in the final proof
  };
  std::vector<HostResult> results(hosts.size());
  parallel_for(hosts.size(), options.threads, [&](std::size_t i) {
    HostResult& r = results[i];
    const Label h = hosts[i];
    const Statement& hs = db[h];
    ProofTree tree;
    try {
      tree = build_tree(db, h, options.max_tree_nodes);
    } catch (const TreeError&) {
      r.skipped = true;
      return;
    }
    r.before = r.after = tree.size();
    const std::string key = statement_key(db, h);
    std::vector<const Pattern*> usable;
    std::vector<std::size_t> index;
    for (std::size_t k = 0; k < patterns.size(); ++k) {
      if (patterns[k].needs_unit <= hs.unit && patterns[k].key != key) {
        usable.push_back(&patterns[k]);
        index.push_back(k);
      }
    }
    if (usable.empty()) return;
    // New theorems sit after the host in `db`; placement is handled by units.
    ProofContext ctx = statement_context(db, h);
    ctx.assertion_limit = std::numeric_limits<Label>::max();
    ProofRefactoring pr = refactor_proof(db, tree, ctx, usable);
    if (pr.tree.size() == tree.size() &&
        std::all_of(pr.applications.begin(), pr.applications.end(),
                    [](std::size_t a) { return a == 0; })) {
      return;
    }
    r.changed = true;
    r.after = pr.tree.size();
    r.proof = linearize(pr.tree);
    r.saved.assign(patterns.size(), 0);
    r.uses.assign(patterns.size(), 0);
    for (std::size_t k = 0; k < usable.size(); ++k) r.saved[index[k]] = pr.saved[k];
    for (Label l : r.proof) {
      for (std::size_t k = 0; k < usable.size(); ++k) {
        if (usable[k]->label == l) ++r.uses[index[k]];
      }
    }
  });

  RefactorResult out;
  RefactorStats& st = out.stats;
  st.per_theorem.resize(patterns.size());
  std::vector<std::size_t> first_use(patterns.size(), SIZE_MAX);
  for (std::size_t k = 0; k < patterns.size(); ++k) {
    st.per_theorem[k].name = db[patterns[k].label].label;
    auto it = options.origins.find(st.per_theorem[k].name);
    st.per_theorem[k].origin = it == options.origins.end() ? "new" : it->second;
  }
  for (std::size_t i = 0; i < hosts.size(); ++i) {
    const HostResult& r = results[i];
    if (r.skipped) {
      ++st.proofs_skipped;
      continue;
    }
    ++st.proofs_considered;
    st.nodes_before += r.before;
    st.nodes_after += r.after;
    if (!r.changed) continue;
    ++st.refactored_proof_count;
    out.output.proofs.emplace(hosts[i], r.proof);
    for (std::size_t k = 0; k < patterns.size(); ++k) {
      st.per_theorem[k].usage += r.uses[k];
      st.per_theorem[k].nodes_saved += r.saved[k];
      if (r.uses[k] > 0) first_use[k] = std::min(first_use[k], db[hosts[i]].unit);
    }
  }

  auto add_row = [](UsageRow& row, const TheoremUsage& u) {
    ++row.theorems;
    row.theorems_used += u.usage > 0;
    row.total_usage += u.usage;
    row.max_usage = std::max(row.max_usage, u.usage);
    row.total_nodes_saved += u.nodes_saved;
  };
  st.by_origin["total"];
  for (const auto& u : st.per_theorem) {
    add_row(st.by_origin["total"], u);
    add_row(st.by_origin[u.origin], u);
  }
  for (auto& [origin, row] : st.by_origin) {
    if (row.theorems == 0) continue;
    row.average_usage = static_cast<double>(row.total_usage) / static_cast<double>(row.theorems);
    row.average_nodes_saved =
        static_cast<double>(row.total_nodes_saved) / static_cast<double>(row.theorems);
  }

  // Each used theorem moves to just before the unit of its first user;
  // unused ones stay where they are.
  std::vector<std::vector<std::size_t>> before(db.layout().size());
  std::vector<bool> moved(db.layout().size(), false);
  for (std::size_t k = 0; k < patterns.size(); ++k) {
    std::size_t own = db[patterns[k].label].unit;
    std::size_t at = first_use[k] == SIZE_MAX ? own : first_use[k];
    moved[own] = true;
    before[at].push_back(own);
  }
  for (std::size_t u = 0; u < db.layout().size(); ++u) {
    for (std::size_t q : before[u]) out.output.unit_order.push_back(q);
    if (!moved[u]) out.output.unit_order.push_back(u);
  }
  return out;
}

namespace {

std::vector<std::string> fragment_theorem_labels(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> tokens;
  std::string tok;
  bool comment = false;
  while (in >> tok) {
    if (tok == "$(") comment = true;
    if (!comment) tokens.push_back(tok);
    if (tok == "$)") comment = false;
  }
  std::vector<std::string> labels;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (tokens[i + 1] == "$p") labels.push_back(tokens[i]);
  }
  return labels;
}

}  // namespace

std::pair<Database, std::vector<Label>> load_with_fragment(
    const std::filesystem::path& base, const std::filesystem::path& fragment) {
  const auto dir = base.parent_path();
  IncludeResolver resolve = [dir](const std::string& name) { return read_file(dir / name); };
  std::string base_text = read_file(base);
  std::string frag_text = read_file(fragment);
  Database alone = parse_database(base_text, resolve);

  // A database that already holds the fragment (a second refactoring pass).
  auto names = fragment_theorem_labels(frag_text);
  std::vector<Label> existing;
  for (const auto& n : names) {
    if (auto l = alone.find(n)) existing.push_back(*l);
  }
  if (!names.empty() && existing.size() == names.size()) {
    return {std::move(alone), std::move(existing)};
  }

  const std::size_t units = alone.layout().size();
  Database db = parse_database(base_text + "\n" + frag_text, resolve);
  std::vector<Label> added;
  for (Label l : db.provables()) {
    if (db[l].unit >= units) added.push_back(l);
  }
  return {std::move(db), std::move(added)};
}

std::string stats_to_json(const RefactorStats& st) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  auto& rows = j["usage"] = nlohmann::ordered_json::object();
  for (const auto& [origin, r] : st.by_origin) {
    rows[origin] = {{"theorems", r.theorems},
                    {"theorems_used", r.theorems_used},
                    {"total_usage", r.total_usage},
                    {"average_usage", r.average_usage},
                    {"max_usage", r.max_usage},
                    {"average_nodes_saved", r.average_nodes_saved},
                    {"total_nodes_saved", r.total_nodes_saved}};
  }
  j["proofs_considered"] = st.proofs_considered;
  j["proofs_skipped"] = st.proofs_skipped;
  j["refactored_proof_count"] = st.refactored_proof_count;
  j["nodes_before"] = st.nodes_before;
  j["nodes_after"] = st.nodes_after;
  auto& per = j["per_theorem"] = nlohmann::ordered_json::array();
  for (const auto& u : st.per_theorem) {
    per.push_back({{"name", u.name},
                   {"origin", u.origin},
                   {"usage", u.usage},
                   {"nodes_saved", u.nodes_saved}});
  }
  return j.dump(2);
}

}  // namespace refactor
