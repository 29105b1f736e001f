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

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "refactor/expansion.hpp"
#include "refactor/extraction.hpp"
#include "test_util.hpp"

namespace refactor {
namespace {

using testing::all_but;
using testing::mask_of;
using testing::prop_db;
using testing::toy_db;

ProofTree tree_of(const Database& db, const std::string& label) {
  return build_tree(db, *db.find(label));
}

// 2falsea: 0 wph 1 wps 2 wa 3 wch 4 wth 5 wa 6 wph 7 wps 8 wa 9 wn 10 wch
// 11 wth 12 wa 13 wn 14 2falsea.1 15 2falsea.2 16 2th 17 con4bii
TEST(Extraction, LeafCutSelectionIsValid) {
  const Database& db = prop_db();
  ProofTree t = tree_of(db, "2falsea");
  ASSERT_EQ(t.size(), 18u);
  auto sel = all_but(t.size(), {0, 1, 3, 4, 6, 7, 10, 11});
  ExtractionVerdict v = verify_selection(db, t, sel);
  ASSERT_EQ(v.category, Category::TreeValid) << v.reason;
  const ExtractedTheorem& th = *v.theorem;
  EXPECT_EQ(testing::joined(th.proof_names(db)), "wph wps wph wn wps wn hyp.1 hyp.2 2th con4bii");
  EXPECT_EQ(db.render(th.conclusion), "|- ( ph <-> ps )");
  ASSERT_EQ(th.essentials.size(), 2u);
  EXPECT_EQ(db.render(th.essentials[0].second), "|- -. ph");
  EXPECT_EQ(db.render(th.essentials[1].second), "|- -. ps");
  // The result is 2false up to renaming.
  EXPECT_EQ(th.dedup_key, statement_key(db, *db.find("2false")));
}

TEST(Extraction, PartialArgumentsAreRejected) {
  const Database& db = prop_db();
  ProofTree t = tree_of(db, "2falsea");
  // con4bii with only its hypothesis argument selected.
  auto sel = mask_of(t.size(), {6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17});
  EXPECT_EQ(check_structure(t, sel), Structure::IncompleteArguments);
  ExtractionVerdict v = verify_selection(db, t, sel);
  EXPECT_EQ(v.category, Category::TreeInvalid);
  EXPECT_EQ(v.reason, "incomplete_arguments");
}

TEST(Extraction, ConstrainedCompoundArgumentHasNoSubstitution) {
  const Database& db = prop_db();
  // a1i: 0 wph 1 wps 2 wph 3 wi 4 a1i.1 5 wph 6 wps 7 ax-1 8 ax-mp. Node 3
  // becomes an argument, but ax-1 fixes it to be an implication.
  ProofTree t = tree_of(db, "a1i");
  auto sel = all_but(t.size(), {1, 2});
  EXPECT_EQ(check_structure(t, sel), Structure::Ok);
  StandardizeResult r = standardize(db, t, sel);
  EXPECT_EQ(r.error, StandardizeError::NoValidSubstitution);
  ExtractionVerdict v = verify_selection(db, t, sel);
  EXPECT_EQ(v.category, Category::TreeInvalid);
  EXPECT_EQ(v.reason, "no_valid_substitution");
}

TEST(Extraction, DisconnectedAndEmptySelections) {
  const Database& db = prop_db();
  ProofTree t = tree_of(db, "a1i");
  EXPECT_EQ(verify_selection(db, t, mask_of(t.size(), {0, 5})).category,
            Category::NotTreeInvalid);
  EXPECT_EQ(verify_selection(db, t, mask_of(t.size(), {})).category, Category::NotTreeInvalid);
  EXPECT_EQ(verify_selection(db, t, mask_of(t.size(), {0, 5})).reason, "not_tree");
}

TEST(Extraction, SelectionWithoutStepsIsInvalid) {
  const Database& db = prop_db();
  ProofTree t = tree_of(db, "a1i");
  ExtractionVerdict v = verify_selection(db, t, mask_of(t.size(), {3}));
  EXPECT_EQ(v.category, Category::TreeInvalid);
  EXPECT_EQ(verify_selection(db, t, mask_of(t.size(), {4})).category, Category::TreeInvalid);
}

// Zero-arity leaves are arguments, so a whole tree gives back its theorem
// exactly when no such leaf occurs; otherwise a generalization comes back.
bool has_constant_leaf(const Database& db, const ProofTree& t) {
  for (const auto& n : t.nodes) {
    if (n.parents.empty() && is_assertion(db[n.label].kind)) return true;
  }
  return false;
}

TEST(Extraction, WholeTreeIsIdentity) {
  const Database& db = toy_db();
  std::size_t identical = 0;
  for (Label p : db.provables()) {
    ProofTree t = build_tree(db, p);
    std::vector<bool> all(t.size(), true);
    ExtractionVerdict v = verify_selection(db, t, all);
    ASSERT_EQ(v.category, Category::TreeValid) << db[p].label << ": " << v.reason;
    EXPECT_EQ(v.theorem->dedup_key, standard_key(db, p));
    if (!has_constant_leaf(db, t)) {
      EXPECT_EQ(v.theorem->dedup_key, statement_key(db, p)) << db[p].label;
      ++identical;
    }
    ExtractionOptions raw;
    raw.reject_whole_tree = true;
    ExtractionVerdict r = verify_selection(db, t, all, raw);
    EXPECT_EQ(r.category, Category::TreeInvalid);
    EXPECT_EQ(r.reason, "whole_tree");
  }
  EXPECT_GT(identical, 900u);
}

TEST(Extraction, ConstantLeafGeneralizes) {
  const Database& db = prop_db();
  // wtru wph ax-tru a1i: both zero-arity leaves become arguments, giving a1i.
  ProofTree t = tree_of(db, "trud");
  ExtractionVerdict v = verify_selection(db, t, std::vector<bool>(t.size(), true));
  ASSERT_EQ(v.category, Category::TreeValid) << v.reason;
  EXPECT_EQ(v.theorem->dedup_key, statement_key(db, *db.find("a1i")));
}

TEST(Extraction, ConstrainedConstantResolvesBack) {
  Database db = parse_database(R"(
    $c wff |- ( ) -> T. $. $v ph $.
    wph $f wff ph $.
    wi $a wff ( ph -> ph ) $.
    wtru $a wff T. $.
    ax-tru $a |- T. $.
    ${ k.1 $e |- ph $. ax-k $a |- ( ph -> T. ) $. $}
    ${ j.1 $e |- ( ph -> ph ) $. ax-j $a |- ph $. $}
    t $p |- T. $= wtru wtru ax-tru ax-k ax-j $.
  )");
  ASSERT_TRUE(verify_database(db).empty());
  ProofTree t = build_tree(db, *db.find("t"));
  ExtractionVerdict v = verify_selection(db, t, std::vector<bool>(t.size(), true));
  ASSERT_EQ(v.category, Category::TreeValid) << v.reason;
  // ax-j forces its argument to equal T. from ax-k, so both wtru leaves turn
  // back into the constant and the ax-tru leaf is a step again.
  EXPECT_EQ(db.render(v.theorem->conclusion), "|- T.");
  EXPECT_TRUE(v.theorem->essentials.empty());
  EXPECT_EQ(testing::joined(v.theorem->proof_names(db)), "wtru wtru ax-tru ax-k ax-j");
}

TEST(Extraction, ThresholdIsStrictAndMonotone) {
  PredictionMask m{"g", {0.5, 0.51, 0.49, 1.0}};
  EXPECT_EQ(threshold_mask(m, 4), (std::vector<bool>{false, true, false, true}));
  EXPECT_THROW(threshold_mask(m, 3), std::invalid_argument);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  PredictionMask r{"r", std::vector<double>(50)};
  for (auto& p : r.probs) p = u(rng);
  r.threshold = 0.0;
  auto prev = threshold_mask(r, 50);
  for (double th = 0.05; th < 1; th += 0.05) {
    r.threshold = th;
    auto cur = threshold_mask(r, 50);
    for (std::size_t i = 0; i < 50; ++i) EXPECT_FALSE(cur[i] && !prev[i]);
    prev = cur;
  }
}

TEST(Extraction, ExactTargetMasksRoundTrip) {
  const Database& db = toy_db();
  TreeCache trees(db);
  std::size_t n = 0;
  for (Label h : db.provables()) {
    for (const auto& r : enumerate_expansions(db, h, trees).records) {
      PredictionMask m{"x", std::vector<double>(r.graph.size())};
      for (std::size_t i = 0; i < m.probs.size(); ++i) m.probs[i] = r.target[i] ? 1.0 : 0.0;
      ExtractionVerdict v = verify_extraction(db, r.graph, m);
      ASSERT_EQ(v.category, Category::TreeValid) << r.host << " " << v.reason;
      EXPECT_EQ(v.theorem->dedup_key, standard_key(db, r.theorem)) << r.host;
      ++n;
    }
  }
  EXPECT_GT(n, 1000u);
}

TEST(Extraction, DedupKeyIgnoresVariableNames) {
  const Database& db = prop_db();
  auto e = [&](const char* s) { return db.parse_expr(s); };
  std::string a = dedup_key(db, {e("|- ph"), e("|- ( ph -> ps )")}, e("|- ps"), {});
  std::string b = dedup_key(db, {e("|- ( ch -> th )"), e("|- ch")}, e("|- th"), {});
  std::string c = dedup_key(db, {e("|- ph"), e("|- ( ph -> ps )")}, e("|- ph"), {});
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_EQ(a, statement_key(db, *db.find("ax-mp")));
}

TEST(Extraction, DedupAndNaming) {
  const Database& db = prop_db();
  ProofTree t1 = tree_of(db, "2falsea");
  ProofTree t2 = tree_of(db, "2false");
  auto v1 = verify_selection(db, t1, all_but(t1.size(), {0, 1, 3, 4, 6, 7, 10, 11}));
  auto v2 = verify_selection(db, t2, std::vector<bool>(t2.size(), true));
  auto v3 = verify_selection(db, tree_of(db, "trud"), std::vector<bool>(4, true));
  std::vector<ExtractedTheorem> all = {*v1.theorem, *v3.theorem, *v2.theorem};
  auto kept = dedup(all);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].dedup_key, v1.theorem->dedup_key);
  EXPECT_EQ(kept[1].dedup_key, v3.theorem->dedup_key);
  assign_names(db, kept);
  EXPECT_EQ(kept[0].name.rfind("rf_", 0), 0u);
  EXPECT_EQ(kept[0].name.size(), 11u);
  EXPECT_EQ(kept[0].essentials[0].first, kept[0].name + ".1");
  EXPECT_NE(kept[0].name, kept[1].name);

  // A taken name makes the next theorem take more digits.
  Database db2 = db;
  TheoremSpec s = kept[1].spec(db2);
  db2.add_theorem(s);
  std::vector<ExtractedTheorem> again = {kept[1]};
  assign_names(db2, again);
  EXPECT_EQ(again[0].name.size(), 12u);
  EXPECT_EQ(again[0].name.substr(0, 11), kept[1].name);
}

TEST(Extraction, FragmentVerifiesWhenAppended) {
  const Database& db = prop_db();
  ProofTree t = tree_of(db, "2falsea");
  auto v = verify_selection(db, t, all_but(t.size(), {0, 1, 3, 4, 6, 7, 10, 11}));
  std::vector<ExtractedTheorem> ths = {*v.theorem};
  assign_names(db, ths);
  std::ostringstream frag;
  write_fragment(db, ths, frag);
  Database ext = parse_database(testing::read_data("prop.mm") + "\n" + frag.str());
  EXPECT_TRUE(ext.find(ths[0].name));
  EXPECT_TRUE(verify_database(ext).empty());
}

TEST(Extraction, InheritsNeededDisjointPairs) {
  Database db = parse_database(R"(
    $c set |- = R $. $v x y z $.
    vx $f set x $. vy $f set y $. vz $f set z $.
    ${ $d x y $. ax-d $a |- = x y $. $}
    ${ e1 $e |- = x y $. ax-e $a |- R x $. $}
    ${ $d y z $. host $p |- R z $= vz vy vz vy ax-d ax-e $. $}
  )");
  ProofTree t = build_tree(db, *db.find("host"));
  ExtractionVerdict v = verify_selection(db, t, std::vector<bool>(t.size(), true));
  ASSERT_EQ(v.category, Category::TreeValid) << v.reason;
  ASSERT_EQ(v.theorem->disjoint.size(), 1u);
  std::vector<ExtractedTheorem> ths = {*v.theorem};
  assign_names(db, ths);
  std::ostringstream frag;
  write_fragment(db, ths, frag);
  EXPECT_NE(frag.str().find("$d x y $."), std::string::npos) << frag.str();
}

}  // namespace
}  // namespace refactor
