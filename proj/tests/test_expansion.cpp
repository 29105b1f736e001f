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

#include <algorithm>
#include <map>

#include <gtest/gtest.h>

#include "refactor/expansion.hpp"
#include "test_util.hpp"

namespace refactor {
namespace {

using testing::prop_db;
using testing::toy_db;

TEST(Expansion, Mp1iInlinesA1i) {
  const Database& db = prop_db();
  TreeCache trees(db);
  ProofTree host = build_tree(db, *db.find("mp1i"));
  ASSERT_EQ(db[host[host.root()].label].label, "a1i");
  ExpansionOutcome e = expand_once(db, *db.find("mp1i"), host.root(), trees);
  ASSERT_TRUE(e.record) << e.discard_reason;
  EXPECT_EQ(testing::names(db, e.record->graph),
            "wps wch wps wi wph wps mp1i.a mp1i.b ax-mp wps wch ax-1 ax-mp");
  EXPECT_EQ(e.record->graph[e.record->graph.root()].prop, host[host.root()].prop);
  // The a1i body plus the copied argument roots.
  std::vector<bool> want = {true, true, true, true, false, false, false, false,
                            true, true, true, true, true};
  EXPECT_EQ(e.record->target, want);
  EXPECT_EQ(e.record->host, "mp1i");
  EXPECT_EQ(db[e.record->theorem].label, "a1i");
}

TEST(Expansion, NonProvableNodeIsRejected) {
  const Database& db = prop_db();
  TreeCache trees(db);
  ProofTree host = build_tree(db, *db.find("a1i"));
  EXPECT_THROW(inline_node(db, host, host.root(), host), std::invalid_argument);
  EXPECT_THROW(expand_once(db, *db.find("a1i"), 0, trees), std::invalid_argument);
}

TEST(Expansion, OccurrencesAreCountedPerTheorem) {
  const Database& db = toy_db();
  for (Label h : db.provables()) {
    ProofTree t = build_tree(db, h);
    std::map<Label, std::size_t> next;
    for (const auto& [node, occ] : expandable_nodes(db, t)) {
      EXPECT_EQ(db[t[node].label].kind, StatementKind::Provable);
      EXPECT_EQ(occ, next[t[node].label]++);
    }
  }
}

TEST(Expansion, AllCorpusExpansionsVerify) {
  const Database& db = toy_db();
  TreeCache trees(db);
  std::size_t checked = 0;
  for (Label h : db.provables()) {
    auto host = trees.get(h);
    auto sizes = subtree_sizes(*host);
    Expansions ex = enumerate_expansions(db, h, trees);
    EXPECT_TRUE(ex.discarded.empty()) << db[h].label;
    for (const auto& r : ex.records) {
      const ProofTree& g = r.graph;
      auto tt = trees.get(r.theorem);
      // Independent replay of the expanded proof in the host's context.
      auto labels = linearize(g);
      VerifyResult v = verify_labels(db, db[h].expr, labels, statement_context(db, h), false);
      EXPECT_TRUE(v.ok()) << r.host << ": " << v.message;
      EXPECT_EQ(g[g.root()].prop, db[h].expr);
      EXPECT_EQ(g.size(), expanded_node_count(*host, sizes, r.node, *tt,
                                              hypothesis_uses(db, r.theorem, *tt)));
      EXPECT_EQ(static_cast<std::size_t>(std::count(r.target.begin(), r.target.end(), true)),
                tt->size());
      ++checked;
    }
  }
  EXPECT_GT(checked, 1000u);
}

TEST(Expansion, RecordCountMatchesOccurrences) {
  const Database& db = toy_db();
  TreeCache trees(db);
  auto ps = db.provables();
  std::size_t records = 0, occurrences = 0;
  for (std::size_t i = 0; i < ps.size(); i += ps.size() / 50) {
    Expansions ex = enumerate_expansions(db, ps[i], trees);
    records += ex.records.size() + ex.discarded.size();
    for (Label l : expand_proof(db, db[ps[i]].proof)) {
      occurrences += db[l].kind == StatementKind::Provable;
    }
  }
  EXPECT_EQ(records, occurrences);
  EXPECT_GT(records, 0u);
}

TEST(Expansion, DisjointViolationIsDiscarded) {
  // The proof of t-in needs $d x y for its dummy y. Inlined into a host that
  // instantiates x with y, that becomes $d y y, which nothing can satisfy.
  Database db = parse_database(R"(
    $c set |- = R $. $v x y $.
    vx $f set x $. vy $f set y $.
    ${ $d x y $. ax-d $a |- = x y $. $}
    ${ e1 $e |- = x y $. ax-e $a |- R x $. $}
    ${ $d x y $. t-in $p |- R x $= vx vy vx vy ax-d ax-e $. $}
    host $p |- R y $= vy t-in $.
  )");
  ASSERT_TRUE(verify_database(db).empty());
  TreeCache trees(db);
  ExpansionOutcome e = expand_once(db, *db.find("host"), 1, trees);
  EXPECT_FALSE(e.record);
  EXPECT_NE(e.discard_reason.find("disjoint"), std::string::npos) << e.discard_reason;
}

}  // namespace
}  // namespace refactor
