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

#include <cmath>
#include <sstream>

#include "kgq/metrics.hpp"
#include "kgq/synonyms.hpp"
#include "test_util.hpp"

namespace kgq {
namespace {

using namespace feature;
using testing::fixture;
using testing::noun;

Sloka sloka96() {
  return testing::prepared(load_corpus(fixture("bpn_1_96.jsonl")))[0];
}

TEST(Featurize, EmptySloka) {
  auto v = featurize(Sloka{}, {});
  for (double x : v) EXPECT_EQ(x, 0.0);
}

TEST(Featurize, FeatureNamesAreDistinct) {
  const auto &names = feature_names();
  std::set<std::string_view> distinct(names.begin(), names.end());
  EXPECT_EQ(distinct.size(), kFeatureCount);
}

TEST(Featurize, SlokaNinetySix) {
  auto v = featurize(sloka96(), {});
  FeatureVector want{};
  want[kWords] = 15;
  want[kNouns] = 9;
  want[kNonProperties] = 9;
  want[kSpecials] = 2;
  want[kPronouns] = 2;
  want[kCase1 + 0] = 4;
  want[kCase1 + 1] = 3;
  want[kCase1 + 7] = 2;
  want[kNumberSg + 0] = 6;
  want[kNumberSg + 1] = 2;
  want[kNumberSg + 2] = 1;
  want[kWordRatios + 0] = 9.0 / 15;
  want[kWordRatios + 2] = 9.0 / 15;
  want[kWordRatios + 3] = 2.0 / 15;
  want[kNounRatios + 1] = 1;
  want[kNounRatios + 2] = 2.0 / 9;
  want[kCaseRatio1 + 0] = 4.0 / 9;
  want[kCaseRatio1 + 1] = 3.0 / 9;
  want[kCaseRatio1 + 7] = 2.0 / 9;
  want[kNumberRatioSg + 0] = 6.0 / 9;
  want[kNumberRatioSg + 1] = 2.0 / 9;
  want[kNumberRatioSg + 2] = 1.0 / 9;
  want[kOtherRatios + 3] = 2.0 / 9;
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    EXPECT_DOUBLE_EQ(v[j], want[j]) << feature_names()[j];
  }
}

TEST(Featurize, SingleNounZeroDenominators) {
  auto v = featurize(testing::sloka("s", {noun("x", kNominative)}), {});
  EXPECT_EQ(v[kNouns], 1);
  EXPECT_EQ(v[kCase1], 1);
  EXPECT_EQ(v[kNumberSg], 1);
  EXPECT_EQ(v[kWordRatios], 1);
  EXPECT_EQ(v[kOtherRatios + 1], 0);
  EXPECT_EQ(v[kOtherRatios + 2], 0);
}

void check_identities(const FeatureVector &v) {
  auto q = [](double a, double b) { return b == 0 ? 0.0 : a / b; };
  ASSERT_EQ(v[kProperties] + v[kNonProperties], v[kNouns]);
  double cases = 0, numbers = 0;
  for (std::size_t c = 0; c < 8; ++c) cases += v[kCase1 + c];
  for (std::size_t n = 0; n < 3; ++n) numbers += v[kNumberSg + n];
  ASSERT_LE(cases, v[kNouns]);
  ASSERT_LE(numbers, v[kNouns]);
  ASSERT_EQ(v[kWordRatios + 0], q(v[kNouns], v[kWords]));
  ASSERT_EQ(v[kWordRatios + 1], q(v[kProperties], v[kWords]));
  ASSERT_EQ(v[kWordRatios + 2], q(v[kNonProperties], v[kWords]));
  ASSERT_EQ(v[kWordRatios + 3], q(v[kSpecials], v[kWords]));
  ASSERT_EQ(v[kNounRatios + 0], q(v[kProperties], v[kNouns]));
  ASSERT_EQ(v[kNounRatios + 1], q(v[kNonProperties], v[kNouns]));
  ASSERT_EQ(v[kNounRatios + 2], q(v[kSpecials], v[kNouns]));
  for (std::size_t c = 0; c < 8; ++c) ASSERT_EQ(v[kCaseRatio1 + c], q(v[kCase1 + c], v[kNouns]));
  for (std::size_t n = 0; n < 3; ++n) ASSERT_EQ(v[kNumberRatioSg + n], q(v[kNumberSg + n], v[kNouns]));
  ASSERT_EQ(v[kOtherRatios + 0], q(v[kProperties], v[kNonProperties]));
  ASSERT_EQ(v[kOtherRatios + 1], q(v[kNonProperties], v[kProperties]));
  ASSERT_EQ(v[kOtherRatios + 2], q(v[kSpecials], v[kProperties]));
  ASSERT_EQ(v[kOtherRatios + 3], q(v[kSpecials], v[kNonProperties]));
}

TEST(FeaturizeProperties, IdentitiesOnRandomSlokas) {
  testing::RandomCorpus gen(1);
  const RootSet props = {"वन", "नगर", "अर्जुन"};
  for (int i = 0; i < 1000; ++i) {
    Sloka s;
    for (std::size_t k = gen.pick(16); k > 0; --k) s.tokens.push_back(gen.token());
    check_identities(featurize(s, props));
  }
}

// ---------------------------------------------------------------------------

FeatureVector point(double a, double b) {
  FeatureVector v{};
  v[0] = a;
  v[1] = b;
  return v;
}

std::vector<LabeledExample> separable() {
  return {{point(0, 0), false}, {point(1, 0), false}, {point(3, 3), true}, {point(4, 3), true}};
}

TEST(Classifier, SeparableToyReachesPerfectAccuracy) {
  auto model = train_classifier(separable());
  for (const auto &e : separable()) EXPECT_EQ(model.classify(e.features), e.label);
}

TEST(Classifier, Deterministic) {
  auto a = train_classifier(separable());
  auto b = train_classifier(separable());
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.bias, b.bias);
  EXPECT_EQ(a.loss_history, b.loss_history);
}

TEST(Classifier, DuplicatedTrainingSet) {
  auto once = separable();
  auto twice = once;
  twice.insert(twice.end(), once.begin(), once.end());
  auto a = train_classifier(once);
  auto b = train_classifier(twice);
  for (std::size_t j = 0; j < kFeatureCount; ++j) EXPECT_NEAR(a.weights[j], b.weights[j], 1e-9);
  EXPECT_NEAR(a.bias, b.bias, 1e-9);
}

TEST(Classifier, FlippedLabelsNegateDecision) {
  auto data = separable();
  auto flipped = data;
  for (auto &e : flipped) e.label = !e.label;
  auto a = train_classifier(data);
  auto b = train_classifier(flipped);
  for (double x = -2; x <= 6; x += 0.5) {
    for (double y = -2; y <= 6; y += 0.5) {
      const double da = a.decision(point(x, y));
      const double db = b.decision(point(x, y));
      EXPECT_NEAR(da, -db, 1e-9);
      if (std::abs(da) > 1e-6) {
        EXPECT_NE(a.classify(point(x, y)), b.classify(point(x, y)));
      }
    }
  }
}

TEST(Classifier, SingleClassIsError) {
  std::vector<LabeledExample> one = {{point(0, 0), true}, {point(1, 1), true}};
  EXPECT_THROW(train_classifier(one), Error);
  EXPECT_THROW(train_classifier({}), Error);
}

TEST(Classifier, LossNonIncreasing) {
  testing::RandomCorpus gen(2);
  std::vector<LabeledExample> data;
  for (int i = 0; i < 40; ++i) {
    Sloka s;
    for (std::size_t k = 1 + gen.pick(12); k > 0; --k) s.tokens.push_back(gen.token());
    data.push_back({featurize(s, {"वन"}), gen.pick(2) == 1});
  }
  data[0].label = true;
  data[1].label = false;
  auto model = train_classifier(data, {500, 0.05, 1e-2});
  ASSERT_EQ(model.loss_history.size(), 501u);
  for (std::size_t i = 1; i < model.loss_history.size(); ++i) {
    EXPECT_LE(model.loss_history[i], model.loss_history[i - 1] + 1e-12) << i;
  }
}

TEST(Classifier, GradientMatchesFiniteDifferences) {
  std::mt19937 rng(3);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<FeatureVector> x(20);
    std::vector<bool> y(20);
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (auto &v : x[i]) v = normal(rng);
      y[i] = i % 2 == 0;
    }
    LogisticObjective f(x, y, 0.01);
    LogisticObjective::Params p;
    for (auto &v : p) v = 0.3 * normal(rng);
    const auto g = f.gradient(p);
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double h = 1e-5;
      auto plus = p, minus = p;
      plus[j] += h;
      minus[j] -= h;
      const double fd = (f.loss(plus) - f.loss(minus)) / (2 * h);
      const double rel = std::abs(fd - g[j]) / std::max({std::abs(fd), std::abs(g[j]), 1e-8});
      EXPECT_LT(rel, 1e-5) << "param " << j;
    }
  }
}

// ---------------------------------------------------------------------------

TEST(Labels, ParseAndValidate) {
  std::istringstream ok(R"({"sloka_id":"a","is_synonym_sloka":true,"groups":[["x","y"]]}
{"sloka_id":"b","is_synonym_sloka":false})");
  auto labels = parse_labels(ok);
  ASSERT_EQ(labels.size(), 2u);
  EXPECT_EQ(labels[0].groups, (std::vector<std::vector<Root>>{{"x", "y"}}));
  std::istringstream dup(R"({"sloka_id":"a","is_synonym_sloka":true}
{"sloka_id":"a","is_synonym_sloka":true})");
  EXPECT_THROW(parse_labels(dup), ValidationError);
  std::istringstream bad("{\"sloka_id\":\"a\"}");
  EXPECT_THROW(parse_labels(bad), ValidationError);
}

struct LabeledCorpus {
  Corpus corpus;
  std::vector<SlokaLabel> labels;
};

LabeledCorpus chapters(std::size_t first, std::size_t second, std::size_t unlabeled = 0) {
  std::vector<Sloka> slokas;
  std::vector<SlokaLabel> labels;
  auto add = [&](const std::string &chapter, std::size_t n, bool label) {
    for (std::size_t i = 0; i < n; ++i) {
      Sloka s{chapter + "." + std::to_string(i) + (label ? "" : "u"), chapter, chapter, "", {}};
      if (label) labels.push_back({s.id, i % 3 == 0, {}});
      slokas.push_back(std::move(s));
    }
  };
  add("1", unlabeled, false);
  add("1", first, true);
  add("2", second, true);
  return {Corpus(std::move(slokas)), std::move(labels)};
}

TEST(Scenario, PrefixSplitOfFirstChapter) {
  auto d = chapters(261, 131, 5);
  auto s = make_scenario(d.corpus, d.labels, Scenario::kS1);
  EXPECT_EQ(s.chapter_a, "1");
  EXPECT_EQ(s.train.size(), 52u);
  EXPECT_EQ(s.test.size(), 209u);
  EXPECT_EQ(d.corpus[s.train.front()].id, "1.0");
  EXPECT_EQ(d.corpus[s.test.front()].id, "1.52");
}

TEST(Scenario, CrossChapter) {
  auto d = chapters(261, 131);
  auto s3 = make_scenario(d.corpus, d.labels, Scenario::kS3);
  EXPECT_EQ(s3.train.size(), 261u);
  EXPECT_EQ(s3.test.size(), 131u);
  auto s4 = make_scenario(d.corpus, d.labels, Scenario::kS4);
  EXPECT_EQ(s4.train.size(), 131u);
  EXPECT_EQ(s4.test.size(), 261u);
  auto s2 = make_scenario(d.corpus, d.labels, Scenario::kS2);
  EXPECT_EQ(s2.train.size(), 26u);
  EXPECT_EQ(s2.test.size(), 105u);
}

TEST(Scenario, ToyChapterFloorsTheSplit) {
  auto d = chapters(10, 3);
  auto s = make_scenario(d.corpus, d.labels, Scenario::kS1);
  EXPECT_EQ(s.train.size(), 2u);
  EXPECT_EQ(s.test.size(), 8u);
}

TEST(Scenario, UnknownChapterIsError) {
  auto d = chapters(10, 3);
  EXPECT_THROW(make_scenario(d.corpus, d.labels, Scenario::kS1, "9"), Error);
  EXPECT_THROW(parse_scenario("S5"), Error);
  auto one = chapters(10, 0);
  EXPECT_THROW(make_scenario(one.corpus, one.labels, Scenario::kS3), Error);
}

// ---------------------------------------------------------------------------

using PairSet = std::set<SynonymPair>;

TEST(Pairs, SlokaNinetySix) {
  PairSet want = {unordered_pair("कारिका", "हन्त्"), unordered_pair("कारिका", "भद्र"),
                  unordered_pair("कारिका", "सपुष्प"), unordered_pair("नन्दिन्", "रवि"),
                  unordered_pair("भद्र", "हन्त्"), unordered_pair("भद्र", "सपुष्प"),
                  unordered_pair("सपुष्प", "हन्त्")};
  EXPECT_EQ(extract_synonym_pairs(sloka96(), {}), want);
}

TEST(Pairs, MergedCandrikaAddsValidPair) {
  Sloka s = sloka96();
  ASSERT_EQ(s.tokens[0].root, "चन्द्रि");
  AnnotatedToken merged{"चन्द्रिका", "चन्द्रिका", Pos::kNoun,
                        {kNominative, Number::kSingular, Gender::kFeminine}, std::nullopt};
  s.tokens.erase(s.tokens.begin(), s.tokens.begin() + 2);
  s.tokens.insert(s.tokens.begin(), merged);
  auto before = extract_synonym_pairs(sloka96(), {});
  auto after = extract_synonym_pairs(s, {});
  EXPECT_TRUE(after.contains(unordered_pair("चन्द्रिका", "भद्र")));
  EXPECT_TRUE(std::includes(after.begin(), after.end(), before.begin(), before.end()));
}

TEST(Pairs, SingleNoun) {
  EXPECT_TRUE(extract_synonym_pairs(testing::sloka("s", {noun("x", 1)}), {}).empty());
}

TEST(Pairs, GenderIgnoredAndFieldsRequired) {
  auto s = testing::sloka("s", {noun("a", 1, Number::kSingular, Gender::kMasculine),
                                noun("b", 1, Number::kSingular, Gender::kNeuter),
                                noun("c", 1, std::nullopt), noun("d", std::nullopt)});
  EXPECT_EQ(extract_synonym_pairs(s, {}), (PairSet{unordered_pair("a", "b")}));
}

TEST(PairsProperties, IrreflexiveAndAntiMonotone) {
  testing::RandomCorpus gen(6);
  const std::vector<Root> pool = {"अर्जुन", "कर्ण", "भीम", "वन", "नगर", "पुत्र"};
  for (int i = 0; i < 300; ++i) {
    Sloka s;
    for (std::size_t k = gen.pick(12); k > 0; --k) s.tokens.push_back(gen.token());
    RootSet small, large;
    for (const auto &r : pool) {
      if (gen.pick(3) == 0) small.insert(r);
    }
    large = small;
    for (const auto &r : pool) {
      if (gen.pick(2) == 0) large.insert(r);
    }
    auto a = extract_synonym_pairs(s, small);
    auto b = extract_synonym_pairs(s, large);
    for (const auto &[x, y] : a) {
      EXPECT_LT(x, y);
      EXPECT_EQ(unordered_pair(y, x), unordered_pair(x, y));
    }
    EXPECT_TRUE(std::includes(a.begin(), a.end(), b.begin(), b.end()));
  }
}

// ---------------------------------------------------------------------------

TEST(Coverage, SixtyOfEightySeven) {
  std::vector<std::vector<Root>> groups;
  PairSet found;
  for (int g = 0; g < 87; ++g) {
    const std::string a = "g" + std::to_string(g) + "a", b = "g" + std::to_string(g) + "b";
    groups.push_back({a, b, "g" + std::to_string(g) + "c"});
    if (g < 60) found.insert(unordered_pair(a, b));
  }
  found.insert(unordered_pair("g70a", "g71b"));  // straddles two groups
  auto c = group_coverage(groups, found);
  EXPECT_EQ(c.covered, 60u);
  EXPECT_EQ(round2(c.fraction()), 0.69);
}

TEST(Coverage, EdgeCases) {
  EXPECT_EQ(group_coverage({{"a", "b"}}, {}).fraction(), 0.0);
  EXPECT_EQ(group_coverage({{"a", "b", "c"}}, {unordered_pair("a", "c")}).fraction(), 1.0);
  EXPECT_THROW(group_coverage({}, {}), Error);
}

TEST(Coverage, GroupPairs) {
  EXPECT_EQ(group_pairs({{"a", "b", "c"}}),
            (PairSet{unordered_pair("a", "b"), unordered_pair("a", "c"), unordered_pair("b", "c")}));
}

}  // namespace
}  // namespace kgq
