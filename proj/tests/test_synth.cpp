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

#include "refactor/synth.hpp"
#include "refactor/verify.hpp"
#include "test_util.hpp"

namespace refactor {
namespace {

TEST(Synth, SmallRunIsPrefixOfBundledCorpus) {
  SynthOptions o;
  o.theorems = 100;
  std::string text = synthesize(testing::read_data("prop.mm"), o);
  std::string toy = testing::read_data("toy.mm");
  ASSERT_LE(text.size(), toy.size());
  EXPECT_EQ(toy.compare(0, text.size(), text), 0);
  Database db = parse_database(text);
  EXPECT_TRUE(verify_database(db, {}, 4).empty());
  EXPECT_EQ(db.provables().size(), testing::prop_db().provables().size() + 100);
  EXPECT_TRUE(db.find("sy100"));
  EXPECT_FALSE(db.find("sy101"));
}

TEST(Synth, SeedChangesOutput) {
  SynthOptions a, b;
  a.theorems = b.theorems = 20;
  b.seed = 2;
  b.prefix = "gen";
  std::string base = testing::read_data("prop.mm");
  std::string x = synthesize(base, a), y = synthesize(base, b);
  EXPECT_NE(x, y);
  EXPECT_EQ(x, synthesize(base, a));
  Database db = parse_database(y);
  EXPECT_TRUE(db.find("gen20"));
  EXPECT_TRUE(verify_database(db).empty());
}

TEST(Synth, StallsWithoutUsableAssertions) {
  SynthOptions o;
  o.theorems = 3;
  EXPECT_THROW(synthesize("$c wff |- $. $v ph $. wph $f wff ph $.", o), std::runtime_error);
}

}  // namespace
}  // namespace refactor
