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

#include "refactor/expansion.hpp"

#include <algorithm>
#include <unordered_map>

namespace refactor {

namespace {

const Statement& expandable(const Database& db, const ProofTree& host, NodeId c) {
  if (c >= host.size()) throw std::invalid_argument("node id out of range");
  Label l = host.nodes[c].label;
  if (is_local(l) || db[l].kind != StatementKind::Provable) {
    throw std::invalid_argument("node " + std::to_string(c) +
                                " is not an application of a provable theorem");
  }
  if (db[l].incomplete) {
    throw std::invalid_argument("theorem '" + db[l].label + "' has no complete proof");
  }
  return db[l];
}

std::ptrdiff_t frame_index(const Statement& t, Label l) {
  const auto& h = t.frame.hypotheses;
  auto it = std::find(h.begin(), h.end(), l);
  return it == h.end() ? -1 : it - h.begin();
}

}  // namespace

Inlined inline_node(const Database& db, const ProofTree& host, NodeId c,
                    const ProofTree& theorem_tree) {
  const Statement& t = expandable(db, host, c);
  const auto sizes = subtree_sizes(host);
  const NodeId begin = c + 1 - sizes[c];
  const auto& args = host.nodes[c].parents;

  Inlined out;
  out.labels.reserve(host.size() + theorem_tree.size());
  for (NodeId i = 0; i < begin; ++i) out.labels.push_back(host.nodes[i].label);
  out.target.assign(out.labels.size(), false);
  for (const auto& node : theorem_tree.nodes) {
    std::ptrdiff_t k = frame_index(t, node.label);
    if (k < 0) {
      out.labels.push_back(node.label);
      out.target.push_back(true);
      continue;
    }
    NodeId arg = args[static_cast<std::size_t>(k)];
    for (NodeId j = arg + 1 - sizes[arg]; j <= arg; ++j) {
      out.labels.push_back(host.nodes[j].label);
      out.target.push_back(j == arg);
    }
  }
  for (NodeId i = c + 1; i < host.size(); ++i) {
    out.labels.push_back(host.nodes[i].label);
    out.target.push_back(false);
  }
  return out;
}

ExpansionOutcome expand_once(const Database& db, const ProofTree& host, NodeId c,
                             const ProofContext& host_context, TreeCache& trees,
                             std::size_t occurrence) {
  const Statement& t = expandable(db, host, c);
  ExpansionOutcome out;
  std::shared_ptr<const ProofTree> tt;
  try {
    tt = trees.get(host.nodes[c].label);
  } catch (const TreeError& e) {
    out.discard_reason = e.what();
    return out;
  }
  Inlined in = inline_node(db, host, c, *tt);
  VerifyResult r = verify_labels(db, host.nodes[host.root()].prop, in.labels, host_context);
  if (!r.ok()) {
    out.discard_reason = std::string(to_string(r.error)) + ": " + r.message;
    return out;
  }
  ExpansionRecord rec;
  rec.graph = tree_from_trace(std::move(r.trace), host.theorem);
  rec.graph.local_names = host.local_names;
  rec.target = std::move(in.target);
  rec.host = host.theorem;
  rec.theorem = db.find(t.label).value();
  rec.occurrence = occurrence;
  rec.node = c;
  out.record = std::move(rec);
  return out;
}

ExpansionOutcome expand_once(const Database& db, Label host, NodeId c, TreeCache& trees) {
  auto tree = trees.get(host);
  std::size_t occurrence = 0;
  for (const auto& [node, occ] : expandable_nodes(db, *tree)) {
    if (node == c) occurrence = occ;
  }
  return expand_once(db, *tree, c, statement_context(db, host), trees, occurrence);
}

std::vector<std::pair<NodeId, std::size_t>> expandable_nodes(const Database& db,
                                                            const ProofTree& host) {
  std::vector<std::pair<NodeId, std::size_t>> out;
  std::unordered_map<Label, std::size_t> seen;
  for (NodeId i = 0; i < host.size(); ++i) {
    Label l = host.nodes[i].label;
    if (is_local(l) || db[l].kind != StatementKind::Provable) continue;
    out.emplace_back(i, seen[l]++);
  }
  return out;
}

Expansions enumerate_expansions(const Database& db, Label host, TreeCache& trees) {
  Expansions out;
  auto tree = trees.get(host);
  ProofContext ctx = statement_context(db, host);
  for (const auto& [node, occ] : expandable_nodes(db, *tree)) {
    ExpansionOutcome e = expand_once(db, *tree, node, ctx, trees, occ);
    if (e.record) {
      out.records.push_back(std::move(*e.record));
    } else {
      out.discarded.emplace_back(node, e.discard_reason);
    }
  }
  return out;
}

std::uint64_t expanded_node_count(const ProofTree& host,
                                  const std::vector<std::uint32_t>& host_sizes, NodeId c,
                                  const ProofTree& theorem_tree,
                                  const std::vector<std::size_t>& hyp_uses) {
  const auto& args = host.nodes[c].parents;
  std::uint64_t n = host.size() - host_sizes[c] + theorem_tree.size();
  for (std::size_t i = 0; i < args.size() && i < hyp_uses.size(); ++i) {
    n += static_cast<std::uint64_t>(hyp_uses[i]) * (host_sizes[args[i]] - 1);
  }
  return n;
}

std::vector<std::size_t> hypothesis_uses(const Database& db, Label theorem,
                                         const ProofTree& theorem_tree) {
  const Statement& t = db[theorem];
  std::vector<std::size_t> uses(t.frame.hypotheses.size(), 0);
  for (const auto& node : theorem_tree.nodes) {
    std::ptrdiff_t k = frame_index(t, node.label);
    if (k >= 0) ++uses[static_cast<std::size_t>(k)];
  }
  return uses;
}

}  // namespace refactor
