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

#include <gtest/gtest.h>
#include <json.hpp>

#include "refactor/proof_tree.hpp"
#include "test_util.hpp"

namespace refactor {
namespace {

using testing::prop_db;

TEST(ProofTree, A1iShape) {
  const Database& db = prop_db();
  ProofTree t = build_tree(db, *db.find("a1i"));
  ASSERT_EQ(t.size(), 9u);
  EXPECT_EQ(testing::names(db, t), "wph wps wph wi a1i.1 wph wps ax-1 ax-mp");
  EXPECT_EQ(t[t.root()].parents, (std::vector<NodeId>{0, 3, 4, 7}));
  EXPECT_EQ(t[3].parents, (std::vector<NodeId>{1, 2}));
  EXPECT_EQ(db.render(t[t.root()].prop), "|- ( ps -> ph )");
  EXPECT_EQ(db.render(t[7].prop), "|- ( ph -> ( ps -> ph ) )");
}

TEST(ProofTree, SizesChildrenAndLinearization) {
  const Database& db = testing::toy_db();
  for (Label p : db.provables()) {
    ProofTree t = build_tree(db, p);
    auto sizes = subtree_sizes(t);
    auto child = child_of(t);
    EXPECT_EQ(sizes[t.root()], t.size());
    EXPECT_EQ(child[t.root()], t.root());
    for (NodeId i = 0; i < t.size(); ++i) {
      std::uint32_t s = 1;
      for (NodeId q : t[i].parents) {
        s += sizes[q];
        EXPECT_EQ(child[q], i);
        EXPECT_LT(q, i);
      }
      EXPECT_EQ(sizes[i], s);
    }
    EXPECT_EQ(linearize(t), expand_proof(db, db[p].proof));
  }
}

TEST(ProofTree, SubtreeAboveIsSelfContained) {
  const Database& db = prop_db();
  ProofTree t = build_tree(db, *db.find("imim2i"));
  ProofTree s = subtree_above(t, t.root() - 1);
  EXPECT_EQ(s.size(), subtree_sizes(t)[t.root() - 1]);
  EXPECT_EQ(s[s.root()].prop, t[t.root() - 1].prop);
  EXPECT_THROW(subtree_above(t, 1000), std::out_of_range);
}

TEST(ProofTree, FromLabelsRejectsBadProof) {
  const Database& db = prop_db();
  Label l = *db.find("a1i");
  std::vector<Label> labels = {*db.find("wph"), *db.find("wps"), *db.find("wi")};
  try {
    tree_from_labels(db, db[l].expr, labels, statement_context(db, l));
    FAIL() << "expected TreeError";
  } catch (const TreeError& e) {
    EXPECT_EQ(e.error(), VerifyError::FinalMismatch);
  }
}

TEST(ProofTree, LimitAndIncomplete) {
  const Database& db = prop_db();
  EXPECT_THROW(build_tree(db, *db.find("imim2i"), 5), TreeError);
  Database inc = parse_database(R"(
    $c wff |- $. $v ph $. wph $f wff ph $. ax $a |- ph $.
    t $p |- ph $= wph ? $.
  )");
  EXPECT_THROW(build_tree(inc, *inc.find("t")), TreeError);
}

TEST(ProofTree, JsonExport) {
  const Database& db = prop_db();
  ProofTree t = build_tree(db, *db.find("a1i"));
  auto j = nlohmann::json::parse(tree_to_json(db, t));
  EXPECT_EQ(j["theorem"], "a1i");
  EXPECT_EQ(j["root"], 8);
  ASSERT_EQ(j["nodes"].size(), 9u);
  EXPECT_EQ(j["nodes"][3]["label"], "wi");
  EXPECT_EQ(j["nodes"][3]["prop"], "wff ( ps -> ph )");
  EXPECT_EQ(j["nodes"][8]["parents"], nlohmann::json::array({0, 3, 4, 7}));
}

TEST(ProofTree, CacheSharesTrees) {
  const Database& db = prop_db();
  TreeCache cache(db);
  auto a = cache.get(*db.find("syl"));
  auto b = cache.get(*db.find("syl"));
  EXPECT_EQ(a.get(), b.get());
}

}  // namespace
}  // namespace refactor
