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

#ifndef REFACTOR_PROOF_TREE_HPP
#define REFACTOR_PROOF_TREE_HPP

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "refactor/database.hpp"
#include "refactor/verify.hpp"

namespace refactor {

using NodeId = std::uint32_t;

struct ProofNode {
  Label label = 0;
  Expr prop;
  std::vector<NodeId> parents;  // arguments in frame order
};

// Nodes are stored in RPN order, so parents precede children and the root is
// the last node. A node's subtree is the contiguous id range
// [id - size(id) + 1, id].
struct ProofTree {
  std::string theorem;
  std::vector<ProofNode> nodes;
  // Names for local labels (hypotheses that are not database statements).
  std::vector<std::string> local_names;

  std::size_t size() const { return nodes.size(); }
  NodeId root() const { return static_cast<NodeId>(nodes.size() - 1); }
  const ProofNode& operator[](NodeId id) const { return nodes[id]; }
};

class TreeError : public std::runtime_error {
 public:
  TreeError(const std::string& what, VerifyError error)
      : std::runtime_error(what), error_(error) {}
  VerifyError error() const { return error_; }

 private:
  VerifyError error_;
};

// Default cap on expanded proof size when building trees.
inline constexpr std::size_t kDefaultTreeLimit = 1'000'000;

// Tree of a provable statement's expanded proof. Throws TreeError when the
// proof does not verify, is incomplete, or exceeds `limit` nodes.
ProofTree build_tree(const Database& db, Label provable,
                     std::size_t limit = kDefaultTreeLimit);

// Tree of a plain proof verified against `ctx`. Throws TreeError.
ProofTree tree_from_labels(const Database& db, const Expr& conclusion,
                           std::span<const Label> labels, const ProofContext& ctx,
                           std::string theorem = {});

// Tree built from a verified trace.
ProofTree tree_from_trace(std::vector<TraceStep> trace, std::string theorem = {});

std::vector<Label> linearize(const ProofTree& tree);

// Subtree sizes of every node.
std::vector<std::uint32_t> subtree_sizes(const ProofTree& tree);

// The child of each node (the node consuming it), root maps to itself.
std::vector<NodeId> child_of(const ProofTree& tree);

// The self-contained tree proving node.prop. Throws std::out_of_range.
ProofTree subtree_above(const ProofTree& tree, NodeId node);

std::string label_name(const Database& db, const ProofTree& tree, Label label);

// {theorem, root, nodes:[{id,label,prop,parents}]}
std::string tree_to_json(const Database& db, const ProofTree& tree);

// Thread-safe memo of trees for provable statements.
class TreeCache {
 public:
  explicit TreeCache(const Database& db, std::size_t limit = kDefaultTreeLimit)
      : db_(db), limit_(limit) {}
  // Throws TreeError like build_tree.
  std::shared_ptr<const ProofTree> get(Label provable);

 private:
  const Database& db_;
  std::size_t limit_;
  std::mutex mu_;
  std::unordered_map<Label, std::shared_ptr<const ProofTree>> trees_;
};

}  // namespace refactor

#endif  // REFACTOR_PROOF_TREE_HPP
