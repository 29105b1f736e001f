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

#include "refactor/proof_tree.hpp"

#include <json.hpp>

namespace refactor {

ProofTree tree_from_trace(std::vector<TraceStep> trace, std::string theorem) {
  ProofTree tree;
  tree.theorem = std::move(theorem);
  tree.nodes.resize(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    tree.nodes[i].label = trace[i].label;
    tree.nodes[i].prop = std::move(trace[i].prop);
    tree.nodes[i].parents = std::move(trace[i].parents);
  }
  return tree;
}

ProofTree tree_from_labels(const Database& db, const Expr& conclusion,
                           std::span<const Label> labels, const ProofContext& ctx,
                           std::string theorem) {
  VerifyResult r = verify_labels(db, conclusion, labels, ctx, true);
  if (!r.ok()) {
    throw TreeError("proof of '" + theorem + "' does not verify: " + r.message, r.error);
  }
  return tree_from_trace(std::move(r.trace), std::move(theorem));
}

ProofTree build_tree(const Database& db, Label provable, std::size_t limit) {
  const Statement& s = db[provable];
  if (s.kind != StatementKind::Provable) {
    throw TreeError("'" + s.label + "' is not a provable statement", VerifyError::UnknownLabel);
  }
  if (s.incomplete) {
    throw TreeError("proof of '" + s.label + "' is incomplete", VerifyError::IncompleteProof);
  }
  std::vector<Label> labels;
  try {
    labels = expand_proof(db, s.proof, limit);
  } catch (const std::length_error&) {
    throw TreeError("proof of '" + s.label + "' exceeds " + std::to_string(limit) + " nodes",
                    VerifyError::None);
  } catch (const std::invalid_argument& e) {
    throw TreeError("proof of '" + s.label + "' is malformed: " + e.what(),
                    VerifyError::StackUnderflow);
  }
  return tree_from_labels(db, s.expr, labels, statement_context(db, provable), s.label);
}

std::vector<Label> linearize(const ProofTree& tree) {
  std::vector<Label> out;
  out.reserve(tree.size());
  for (const auto& n : tree.nodes) out.push_back(n.label);
  return out;
}

std::vector<std::uint32_t> subtree_sizes(const ProofTree& tree) {
  std::vector<std::uint32_t> size(tree.size(), 1);
  for (std::size_t i = 0; i < tree.size(); ++i) {
    for (NodeId p : tree.nodes[i].parents) size[i] += size[p];
  }
  return size;
}

std::vector<NodeId> child_of(const ProofTree& tree) {
  std::vector<NodeId> child(tree.size());
  for (NodeId i = 0; i < tree.size(); ++i) {
    child[i] = i;
    for (NodeId p : tree.nodes[i].parents) child[p] = i;
  }
  return child;
}

ProofTree subtree_above(const ProofTree& tree, NodeId node) {
  if (node >= tree.size()) throw std::out_of_range("unknown node id");
  auto sizes = subtree_sizes(tree);
  const NodeId first = node + 1 - sizes[node];
  ProofTree out;
  out.theorem = tree.theorem;
  out.local_names = tree.local_names;
  out.nodes.assign(tree.nodes.begin() + first, tree.nodes.begin() + node + 1);
  for (auto& n : out.nodes) {
    for (auto& p : n.parents) p -= first;
  }
  return out;
}

std::string label_name(const Database& db, const ProofTree& tree, Label label) {
  if (is_local(label)) {
    std::uint32_t i = local_index(label);
    return i < tree.local_names.size() ? tree.local_names[i] : "?" + std::to_string(i);
  }
  return db[label].label;
}

std::string tree_to_json(const Database& db, const ProofTree& tree) {
  nlohmann::ordered_json j;
  j["theorem"] = tree.theorem;
  j["root"] = tree.size() ? tree.root() : 0;
  auto& nodes = j["nodes"] = nlohmann::ordered_json::array();
  for (NodeId i = 0; i < tree.size(); ++i) {
    const auto& n = tree.nodes[i];
    nodes.push_back({{"id", i},
                     {"label", label_name(db, tree, n.label)},
                     {"prop", db.render(n.prop)},
                     {"parents", n.parents}});
  }
  return j.dump();
}

std::shared_ptr<const ProofTree> TreeCache::get(Label provable) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = trees_.find(provable);
    if (it != trees_.end()) return it->second;
  }
  auto tree = std::make_shared<const ProofTree>(build_tree(db_, provable, limit_));
  std::lock_guard<std::mutex> lock(mu_);
  return trees_.emplace(provable, std::move(tree)).first->second;
}

}  // namespace refactor
