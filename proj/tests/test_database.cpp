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

#include <functional>
#include <map>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "refactor/database.hpp"
#include "refactor/proof_tree.hpp"
#include "refactor/verify.hpp"
#include "refactor/writer.hpp"
#include "test_util.hpp"

namespace refactor {
namespace {

using testing::prop_db;
using testing::toy_db;

std::vector<std::string> expanded_names(const Database& db, const std::string& label) {
  std::vector<std::string> out;
  for (Label l : expand_proof(db, db.at(label).proof)) out.push_back(db[l].label);
  return out;
}

TEST(Database, CountsAndKinds) {
  const Database& db = prop_db();
  EXPECT_EQ(db.provables().size(), 20u);
  EXPECT_EQ(db.at("ax-mp").kind, StatementKind::Axiom);
  EXPECT_EQ(db.at("wph").kind, StatementKind::Floating);
  EXPECT_EQ(db.at("a1i.1").kind, StatementKind::Essential);
  EXPECT_EQ(db.render(db.at("a1i").expr), "|- ( ps -> ph )");
  EXPECT_TRUE(db.is_syntax_typecode(db.at("wph").expr[0]));
  EXPECT_FALSE(db.is_syntax_typecode(db.at("a1i").expr[0]));
}

TEST(Database, FrameIsMandatoryHypothesesInOrder) {
  const Database& db = prop_db();
  std::vector<std::string> names;
  for (Label h : db.at("a1i").frame.hypotheses) names.push_back(db[h].label);
  EXPECT_EQ(testing::joined(names), "wph wps a1i.1");
  names.clear();
  for (Label h : db.at("ax-mp").frame.hypotheses) names.push_back(db[h].label);
  EXPECT_EQ(testing::joined(names), "wph wps min maj");
}

TEST(Database, VariablePoolFollowsDeclarationOrder) {
  const Database& db = prop_db();
  const auto& pool = db.variable_pool(db.at("wph").expr[0]);
  ASSERT_GE(pool.size(), 4u);
  EXPECT_EQ(db[pool[0]].label, "wph");
  EXPECT_EQ(db[pool[1]].label, "wps");
  EXPECT_EQ(db[pool[2]].label, "wch");
  EXPECT_EQ(db[pool[3]].label, "wth");
}

TEST(Database, CompressedProofsDecode) {
  const Database& db = prop_db();
  EXPECT_EQ(expanded_names(db, "idc"), expanded_names(db, "id"));
  EXPECT_EQ(expanded_size(db, db.at("idc").proof), 14u);
  EXPECT_EQ(testing::joined(expanded_names(db, "sylc")),
            "wph wps wch sylc.1 wps wch wi wph sylc.2 a1i mpd");
}

TEST(Database, IncompleteProofIsFlagged) {
  Database db = parse_database(R"(
    $c wff |- ( ) -> $. $v ph ps $.
    wph $f wff ph $. wps $f wff ps $.
    wi $a wff ( ph -> ps ) $.
    ax $a |- ( ph -> ph ) $.
    t1 $p |- ( ph -> ph ) $= wph ? $.
    t2 $p |- ( ph -> ph ) $= ( ax ) A? $.
  )");
  EXPECT_TRUE(db.at("t1").incomplete);
  EXPECT_TRUE(db.at("t2").incomplete);
  EXPECT_EQ(verify_statement(db, *db.find("t1")).error, VerifyError::IncompleteProof);
}

TEST(Database, ScopedHypothesisUnusableOutsideBlock) {
  const char* src = R"(
    $c wff |- $. $v ph $.
    wph $f wff ph $.
    ${ h $e |- ph $. a $a |- ph $. $}
    t $p |- ph $= wph h a $.
  )";
  Database db = parse_database(src);
  EXPECT_EQ(verify_statement(db, *db.find("t")).error, VerifyError::HypothesisNotInContext);
}

TEST(Database, DisjointPairsOnlyAmongMandatoryVariables) {
  Database db = parse_database(R"(
    $c set |- = $. $v x y z $.
    vx $f set x $. vy $f set y $. vz $f set z $.
    ${ $d x y z $. ax $a |- = x y $. $}
  )");
  const Frame& f = db.at("ax").frame;
  ASSERT_EQ(f.disjoint.size(), 1u);
  EXPECT_EQ(db.symbol(f.disjoint[0].first), "x");
  EXPECT_EQ(db.symbol(f.disjoint[0].second), "y");
}

TEST(Database, RejectsMalformedSources) {
  const char* head = "$c wff |- $. $v ph $. wph $f wff ph $.\n";
  std::vector<std::string> bad = {
      "$( outer $( inner $) $)",
      "ax $a |- qq $.",
      "ax $a |- ph $. ax $a |- ph $.",
      "${ ax $a |- ph $.",
      "ax $a |- ph",
      "t $p |- ph $= nope $.",
      "$[ other.mm $]",
      "$v ph $.",
  };
  for (const auto& b : bad) {
    EXPECT_THROW(parse_database(head + b), ParseError) << b;
  }
}

TEST(Database, IncludesAreResolvedOnce) {
  int calls = 0;
  auto resolver = [&](const std::string& name) {
    ++calls;
    EXPECT_EQ(name, "base.mm");
    return std::string("$c wff $. $v ph $. wph $f wff ph $.");
  };
  Database db = parse_database("$[ base.mm $] $[ base.mm $] w $a wff ph $.", resolver);
  EXPECT_EQ(calls, 1);
  EXPECT_TRUE(db.find("w"));
}

TEST(Database, ExpansionLimitThrows) {
  const Database& db = prop_db();
  EXPECT_THROW(expand_proof(db, db.at("imim2i").proof, 5), std::length_error);
  EXPECT_EQ(expand_proof(db, db.at("imim2i").proof, 10).size(), 10u);
}

TEST(Database, ArityCountsMandatoryHypotheses) {
  const Database& db = prop_db();
  EXPECT_EQ(arity(db, *db.find("ax-mp")), 4u);
  EXPECT_EQ(arity(db, *db.find("wi")), 2u);
  EXPECT_EQ(arity(db, *db.find("wph")), 0u);
  EXPECT_EQ(arity(db, *db.find("a1i.1")), 0u);
}

// Test-only encoder for the compressed proof format.
std::string encode_number(std::size_t n) {
  std::string out(1, static_cast<char>('A' + (n - 1) % 20));
  std::size_t q = (n - 1) / 20;
  while (q > 0) {
    out.insert(out.begin(), static_cast<char>('U' + (q - 1) % 5));
    q = (q - 1) / 5;
  }
  return out;
}

std::string compress(const Database& db, Label theorem, const ProofTree& tree) {
  const auto& mandatory = db[theorem].frame.hypotheses;
  std::vector<Label> list;
  std::map<Label, std::size_t> number;
  for (std::size_t i = 0; i < mandatory.size(); ++i) number[mandatory[i]] = i + 1;
  for (const auto& n : tree.nodes) {
    if (!number.count(n.label)) {
      list.push_back(n.label);
      number[n.label] = mandatory.size() + list.size();
    }
  }
  // Subtrees seen more than once are saved with Z and reused.
  std::vector<std::string> key(tree.size());
  std::map<std::string, int> seen;
  for (NodeId i = 0; i < tree.size(); ++i) {
    key[i] = "(";
    for (NodeId p : tree.nodes[i].parents) key[i] += key[p] + ",";
    key[i] += std::to_string(tree.nodes[i].label) + ")";
    ++seen[key[i]];
  }
  std::map<std::string, std::size_t> saved;
  std::string body;
  std::function<void(NodeId)> emit = [&](NodeId i) {
    if (auto it = saved.find(key[i]); it != saved.end()) {
      body += encode_number(mandatory.size() + list.size() + it->second);
      return;
    }
    for (NodeId p : tree.nodes[i].parents) emit(p);
    body += encode_number(number.at(tree.nodes[i].label));
    if (!tree.nodes[i].parents.empty() && seen[key[i]] > 1) {
      body += 'Z';
      saved.emplace(key[i], saved.size() + 1);
    }
  };
  emit(tree.root());
  std::string out = "(";
  for (Label l : list) out += " " + db[l].label;
  return out + " ) " + body;
}

TEST(Database, CompressionRoundTripOnCorpus) {
  const Database& db = toy_db();
  const std::string text = testing::read_data("toy.mm");
  std::map<std::string, std::string> compressed;
  std::size_t with_z = 0;
  for (Label p : db.provables()) {
    ProofTree t = build_tree(db, p);
    compressed[db[p].label] = compress(db, p, t);
    with_z += compressed[db[p].label].find('Z') != std::string::npos;
  }
  EXPECT_GT(with_z, 10u);
  std::regex proof_re(R"((\S+) \$p ([^$]*)\$=[^$]*\$\.)");
  std::string rewritten;
  auto it = std::sregex_iterator(text.begin(), text.end(), proof_re);
  std::size_t last = 0;
  for (; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    rewritten += text.substr(last, m.position() - last);
    rewritten += m[1].str() + " $p " + m[2].str() + "$= " + compressed.at(m[1].str()) + " $.";
    last = m.position() + m.length();
  }
  rewritten += text.substr(last);
  Database db2 = parse_database(rewritten);
  ASSERT_EQ(db2.provables().size(), db.provables().size());
  for (Label p : db.provables()) {
    EXPECT_EQ(expand_proof(db2, db2[p].proof), expand_proof(db, db[p].proof)) << db[p].label;
  }
  EXPECT_TRUE(verify_database(db2).empty());
}

TEST(Database, WriterRoundTrip) {
  const Database& db = prop_db();
  std::ostringstream os;
  write_database(db, os);
  Database db2 = parse_database(os.str());
  ASSERT_EQ(db2.size(), db.size());
  for (Label l = 0; l < db.size(); ++l) {
    EXPECT_EQ(db2[l].label, db[l].label);
    EXPECT_EQ(db2.render(db2[l].expr), db.render(db[l].expr));
    EXPECT_EQ(db2[l].frame.hypotheses, db[l].frame.hypotheses);
    if (db[l].kind == StatementKind::Provable) {
      EXPECT_EQ(expand_proof(db2, db2[l].proof), expand_proof(db, db[l].proof));
    }
  }
  EXPECT_TRUE(verify_database(db2).empty());
}

TEST(Database, AddTheoremAppendsBlock) {
  Database db = prop_db();
  TheoremSpec s;
  s.name = "new1";
  s.essentials = {{"new1.1", db.parse_expr("|- ph")}};
  s.conclusion = db.parse_expr("|- ( ps -> ph )");
  s.proof = {"wph", "wps", "new1.1", "a1i"};
  Label l = db.add_theorem(s);
  EXPECT_EQ(db[l].label, "new1");
  EXPECT_TRUE(verify_statement(db, l).ok());
  s.name = "new2";
  s.essentials = {};
  s.proof = {"nope"};
  EXPECT_THROW(db.add_theorem(s), std::invalid_argument);
  EXPECT_FALSE(db.find("new2"));
}

}  // namespace
}  // namespace refactor
