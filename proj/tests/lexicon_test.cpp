// Copyright 2026 The kgq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "kgq/lexicon.hpp"
#include "test_util.hpp"

namespace kgq {
namespace {

using testing::default_lexicon;

RelationLexicon parse(const char *text) { return parse_lexicon(nlohmann::json::parse(text)); }

TEST(Lexicon, DefaultLoads) {
  const auto &lex = default_lexicon();
  for (const char *r : {"पितृ", "मातृ", "पुत्र", "पुत्री", "पति", "पत्नी", "भ्रातृ", "भगिनी", "मातुल"}) {
    EXPECT_TRUE(lex.is_canonical(r)) << r;
  }
  EXPECT_TRUE(lex.is_interrogative("किम्"));
  EXPECT_TRUE(lex.pronouns().contains("तद्"));
}

TEST(Lexicon, DanglingInverseRejected) {
  EXPECT_THROW(parse(R"({"relations":[{"canonical":"a","forms":[],"inverse":[{"object_gender":"m","relation":"zz"}]}],"pronouns":["p"]})"),
               ValidationError);
}

TEST(Lexicon, DanglingDecompositionRejected) {
  EXPECT_THROW(parse(R"({"relations":[{"canonical":"a","decompose":[["a","zz"]]}],"pronouns":["p"]})"),
               ValidationError);
}

TEST(Lexicon, ShortChainRejected) {
  EXPECT_THROW(parse(R"({"relations":[{"canonical":"a","decompose":[["a"]]}],"pronouns":["p"]})"),
               ValidationError);
}

TEST(Lexicon, OverlappingFormsNameBothEntries) {
  try {
    parse(R"({"relations":[{"canonical":"पुत्री","forms":["तनया"]},{"canonical":"कन्या","forms":["तनया"]}],"pronouns":["p"]})");
    FAIL();
  } catch (const ValidationError &e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("पुत्री"), std::string::npos);
    EXPECT_NE(msg.find("कन्या"), std::string::npos);
  }
}

TEST(Lexicon, InverseMustRoundTrip) {
  EXPECT_THROW(parse(R"({"relations":[{"canonical":"a","inverse":[{"object_gender":"m","relation":"b"}]},{"canonical":"b"}],"pronouns":["p"]})"),
               ValidationError);
}

TEST(Lexicon, InterrogativeCannotBeRelation) {
  EXPECT_THROW(parse(R"({"relations":[{"canonical":"किम्"}],"pronouns":["p"],"interrogatives":["किम्"]})"),
               ValidationError);
}

TEST(Lexicon, Canonicalize) {
  const auto &lex = default_lexicon();
  EXPECT_EQ(lex.canonicalize("दुहितृ"), "पुत्री");
  EXPECT_EQ(lex.canonicalize("तनया"), "पुत्री");
  EXPECT_EQ(lex.canonicalize("आत्मजा"), "पुत्री");
  EXPECT_EQ(lex.canonicalize("पुत्र"), "पुत्र");
  EXPECT_EQ(lex.canonicalize("भार्या"), "पत्नी");
  EXPECT_EQ(lex.canonicalize("कफ"), std::nullopt);
}

TEST(Lexicon, CanonicalizeIsAFunction) {
  const auto &lex = default_lexicon();
  std::map<Root, Root> seen;
  for (const auto &e : lex.entries()) {
    for (const auto &f : e.forms) {
      EXPECT_TRUE(seen.emplace(f, e.canonical).second) << f;
      EXPECT_EQ(lex.canonicalize(f), e.canonical);
    }
  }
}

TEST(Lexicon, InversesOf) {
  const auto &lex = default_lexicon();
  EXPECT_EQ(lex.inverses_of("पुत्र", Gender::kMasculine), std::vector<Root>{"पितृ"});
  EXPECT_EQ(lex.inverses_of("पुत्र", Gender::kFeminine), std::vector<Root>{"मातृ"});
  EXPECT_TRUE(lex.inverses_of("पुत्र", std::nullopt).empty());
  EXPECT_TRUE(lex.inverses_of("पुत्र", Gender::kNeuter).empty());
  EXPECT_THROW(lex.inverses_of("कफ", Gender::kMasculine), Error);
}

TEST(Lexicon, DefaultInversesRoundTrip) {
  const auto &lex = default_lexicon();
  for (const auto &e : lex.entries()) {
    for (const auto &rule : e.inverse_rules) {
      bool back = false;
      for (const auto &r : lex.entry(rule.relation).inverse_rules) back |= r.relation == e.canonical;
      EXPECT_TRUE(back) << e.canonical << " -> " << rule.relation;
    }
  }
}

TEST(Lexicon, DecompositionsOf) {
  const auto &lex = default_lexicon();
  EXPECT_EQ(lex.decompositions_of("मातुल"), (std::vector<RelationChain>{{"मातृ", "भ्रातृ"}}));
  EXPECT_TRUE(lex.decompositions_of("पितृ").empty());
  EXPECT_EQ(lex.decompositions_of("भ्रातृ"),
            (std::vector<RelationChain>{{"पितृ", "पुत्र"}, {"मातृ", "पुत्र"}}));
  EXPECT_THROW(lex.decompositions_of("कफ"), Error);
}

TEST(Lexicon, DefaultExclusivePairs) {
  const auto &lex = default_lexicon();
  EXPECT_TRUE(lex.are_exclusive("पितृ", "पुत्र"));
  EXPECT_TRUE(lex.are_exclusive("पुत्र", "पितृ"));
  EXPECT_TRUE(lex.are_exclusive("पति", "पत्नी"));
  EXPECT_FALSE(lex.are_exclusive("भ्रातृ", "भ्रातृ"));
  EXPECT_FALSE(lex.are_exclusive("पितृ", "मातृ"));
}

TEST(Lexicon, ExplicitExclusiveSetReplacesDefault) {
  auto lex = parse(R"({"relations":[{"canonical":"a","inverse":[{"object_gender":"m","relation":"b"}]},
                                     {"canonical":"b","inverse":[{"object_gender":"m","relation":"a"}]}],
                       "pronouns":["p"],"mutually_exclusive":[]})");
  EXPECT_FALSE(lex.are_exclusive("a", "b"));
  EXPECT_THROW(parse(R"({"relations":[{"canonical":"a"}],"pronouns":["p"],"mutually_exclusive":[["a","zz"]]})"),
               ValidationError);
}

TEST(Lexicon, InterrogativesDefaultToKim) {
  auto lex = parse(R"({"relations":[{"canonical":"a"}],"pronouns":["p"]})");
  EXPECT_TRUE(lex.is_interrogative("किम्"));
}

}  // namespace
}  // namespace kgq
