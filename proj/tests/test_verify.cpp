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
#include <sstream>

#include <gtest/gtest.h>

#include "refactor/verify.hpp"
#include "test_util.hpp"

namespace refactor {
namespace {

using testing::prop_db;

std::vector<std::string> split(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

VerifyError check(const Database& db, const std::string& theorem, const std::string& proof) {
  Label l = *db.find(theorem);
  auto labels = split(proof);
  return verify_proof(db, db[l].expr, labels, statement_context(db, l)).error;
}

TEST(Verify, BundledCorpusVerifies) {
  EXPECT_TRUE(verify_database(prop_db()).empty());
  EXPECT_TRUE(verify_database(testing::toy_db(), {}, 4).empty());
}

TEST(Verify, AcceptsStoredProof) {
  EXPECT_EQ(check(prop_db(), "a1i", "wph wps wph wi a1i.1 wph wps ax-1 ax-mp"), VerifyError::None);
}

TEST(Verify, ErrorKinds) {
  const Database& db = prop_db();
  EXPECT_EQ(check(db, "a1i", ""), VerifyError::EmptyProof);
  EXPECT_EQ(check(db, "a1i", "wph wps wph wi a1i.1 wph wps ax-1 nope"), VerifyError::UnknownLabel);
  EXPECT_EQ(check(db, "a1i", "wph wps ax-mp"), VerifyError::StackUnderflow);
  EXPECT_EQ(check(db, "a1i", "wph wps wph wi a1i.1 wph wps ax-1 ax-mp wph"),
            VerifyError::ResidualStack);
  EXPECT_EQ(check(db, "a1i", "wph wps wi"), VerifyError::FinalMismatch);
  EXPECT_EQ(check(db, "a1i", "wph wps wph wi mp1i.a wph wps ax-1 ax-mp"),
            VerifyError::HypothesisNotInContext);
  // a1i.1 is a |- statement where ax-mp expects the wff argument.
  EXPECT_EQ(check(db, "a1i", "a1i.1 wps wph wi a1i.1 wph wps ax-1 ax-mp"),
            VerifyError::TypecodeMismatch);
  // maj must be ( ph -> ps ) for the given ph and ps.
  EXPECT_EQ(check(db, "a1i", "wps wps wph wi a1i.1 wph wps ax-1 ax-mp"),
            VerifyError::UnificationMismatch);
  // a1i is declared before mp1i, so a1i may not use mp1i.
  EXPECT_EQ(check(db, "a1i", "wph wps wph a1i.1 a1i.1 mp1i"), VerifyError::ForwardReference);
}

TEST(Verify, TraceRecordsArguments) {
  const Database& db = prop_db();
  Label l = *db.find("a1i");
  auto labels = expand_proof(db, db[l].proof);
  VerifyResult r = verify_labels(db, db[l].expr, labels, statement_context(db, l));
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.trace.size(), 9u);
  EXPECT_EQ(r.trace.back().parents, (std::vector<std::uint32_t>{0, 3, 4, 7}));
  EXPECT_EQ(db.render(r.trace[3].prop), "wff ( ps -> ph )");
}

class Disjoint : public ::testing::Test {
 protected:
  Database db = parse_database(R"(
    $c set |- = $. $v x y z $.
    vx $f set x $. vy $f set y $. vz $f set z $.
    ${ $d x y $. ax-d $a |- = x y $. $}
    ${ $d x z $. t-ok $p |- = x z $= vx vz ax-d $. $}
    t-missing $p |- = x z $= vx vz ax-d $.
    t-same $p |- = x x $= vx vx ax-d $.
  )");
};

TEST_F(Disjoint, RequiresPairsInScope) {
  EXPECT_TRUE(verify_statement(db, *db.find("t-ok")).ok());
  EXPECT_EQ(verify_statement(db, *db.find("t-missing")).error, VerifyError::DisjointViolation);
  EXPECT_EQ(verify_statement(db, *db.find("t-same")).error, VerifyError::DisjointViolation);
}

TEST_F(Disjoint, CollectModeReportsNeededPairs) {
  Label l = *db.find("t-missing");
  ProofContext ctx = statement_context(db, l);
  ctx.collect_disjoint = true;
  auto labels = expand_proof(db, db[l].proof);
  VerifyResult r = verify_labels(db, db[l].expr, labels, ctx);
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.required_disjoint.size(), 1u);
  EXPECT_EQ(db.symbol(r.required_disjoint[0].first), "x");
  EXPECT_EQ(db.symbol(r.required_disjoint[0].second), "z");

  Label same = *db.find("t-same");
  ProofContext ctx2 = statement_context(db, same);
  ctx2.collect_disjoint = true;
  auto labels2 = expand_proof(db, db[same].proof);
  EXPECT_EQ(verify_labels(db, db[same].expr, labels2, ctx2).error,
            VerifyError::DisjointViolation);
}

TEST(Verify, LocalHypotheses) {
  const Database& db = prop_db();
  ProofContext ctx;
  ctx.hypotheses = {*db.find("wph"), *db.find("wps")};
  std::sort(ctx.hypotheses.begin(), ctx.hypotheses.end());
  ctx.locals = {db.parse_expr("|- ph")};
  std::vector<Label> labels = {*db.find("wph"), *db.find("wps"), local_label(0),
                               *db.find("a1i")};
  EXPECT_TRUE(verify_labels(db, db.parse_expr("|- ( ps -> ph )"), labels, ctx).ok());
  labels[2] = local_label(1);
  EXPECT_EQ(verify_labels(db, db.parse_expr("|- ( ps -> ph )"), labels, ctx).error,
            VerifyError::UnknownLabel);
}

TEST(Verify, SubstituteReplacesVariables) {
  const Database& db = prop_db();
  Expr e = db.parse_expr("|- ( ph -> ps )");
  Expr rep = db.parse_expr("wff -. ch");
  std::vector<std::pair<SymbolId, std::span<const SymbolId>>> sigma = {
      {*db.find_symbol("ph"), std::span<const SymbolId>(rep).subspan(1)}};
  EXPECT_EQ(db.render(substitute(e, sigma)), "|- ( -. ch -> ps )");
}

TEST(Verify, ParallelMatchesSequential) {
  const Database& db = testing::toy_db();
  Database broken = parse_database(testing::read_data("prop.mm") +
                                   "\nbad $p |- ( ps -> ph ) $= wph wps wi $.\n");
  auto seq = verify_database(broken, {}, 1);
  auto par = verify_database(broken, {}, 8);
  ASSERT_EQ(seq.size(), 1u);
  ASSERT_EQ(par.size(), 1u);
  EXPECT_EQ(seq[0].label, par[0].label);
  EXPECT_EQ(broken[seq[0].label].label, "bad");
  EXPECT_TRUE(verify_database(db, {}, 8).empty());
}

}  // namespace
}  // namespace refactor
