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

// Synonym mining for glossary texts: per-śloka features, a logistic
// classifier for synonym ślokas, and case/number agreement pairing.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgq/corpus.hpp"
#include "kgq/error.hpp"
#include "kgq/lexicon.hpp"

namespace kgq {

inline constexpr std::size_t kFeatureCount = 40;

// Feature layout. Counts first, then ratios to words, ratios to nouns and
// the cross ratios of properties, non-properties and specials.
namespace feature {
inline constexpr std::size_t kWords = 0;
inline constexpr std::size_t kNouns = 1;
inline constexpr std::size_t kProperties = 2;
inline constexpr std::size_t kNonProperties = 3;
inline constexpr std::size_t kSpecials = 4;
inline constexpr std::size_t kPronouns = 5;
inline constexpr std::size_t kVerbs = 6;
inline constexpr std::size_t kCase1 = 7;          // .. kCase1 + 7
inline constexpr std::size_t kNumberSg = 15;      // sg, du, pl
inline constexpr std::size_t kWordRatios = 18;    // nouns, properties, non_properties, specials
inline constexpr std::size_t kNounRatios = 22;    // properties, non_properties, specials
inline constexpr std::size_t kCaseRatio1 = 25;    // .. kCaseRatio1 + 7
inline constexpr std::size_t kNumberRatioSg = 33; // sg, du, pl
inline constexpr std::size_t kOtherRatios = 36;
}  // namespace feature

inline const std::array<std::string_view, kFeatureCount> &feature_names() {
  static const std::array<std::string_view, kFeatureCount> kNames = {
      "words", "nouns", "properties", "non_properties", "specials", "pronouns", "verbs",
      "case_1_nouns", "case_2_nouns", "case_3_nouns", "case_4_nouns", "case_5_nouns",
      "case_6_nouns", "case_7_nouns", "case_8_nouns",
      "number_sg_nouns", "number_du_nouns", "number_pl_nouns",
      "nouns_per_word", "properties_per_word", "non_properties_per_word", "specials_per_word",
      "properties_per_noun", "non_properties_per_noun", "specials_per_noun",
      "case_1_per_noun", "case_2_per_noun", "case_3_per_noun", "case_4_per_noun",
      "case_5_per_noun", "case_6_per_noun", "case_7_per_noun", "case_8_per_noun",
      "number_sg_per_noun", "number_du_per_noun", "number_pl_per_noun",
      "properties_per_non_property", "non_properties_per_property",
      "specials_per_property", "specials_per_non_property"};
  return kNames;
}

using FeatureVector = std::array<double, kFeatureCount>;

inline double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

// "Specials" are adverbs, conjunctions and prepositions. Nouns without a
// case or number are left out of those counts.
inline FeatureVector featurize(const Sloka &sloka, const RootSet &properties) {
  using namespace feature;
  FeatureVector v{};
  for (const auto &t : sloka.tokens) {
    v[kWords] += 1;
    switch (t.pos) {
      case Pos::kNoun:
        v[kNouns] += 1;
        v[properties.contains(t.root) ? kProperties : kNonProperties] += 1;
        if (t.morph.grammatical_case) v[kCase1 + *t.morph.grammatical_case - 1] += 1;
        if (t.morph.number) v[kNumberSg + static_cast<std::size_t>(*t.morph.number)] += 1;
        break;
      case Pos::kPronoun: v[kPronouns] += 1; break;
      case Pos::kVerb: v[kVerbs] += 1; break;
      case Pos::kAdverb:
      case Pos::kConjunction:
      case Pos::kPreposition: v[kSpecials] += 1; break;
      default: break;
    }
  }
  const double words = v[kWords], nouns = v[kNouns];
  v[kWordRatios + 0] = safe_ratio(nouns, words);
  v[kWordRatios + 1] = safe_ratio(v[kProperties], words);
  v[kWordRatios + 2] = safe_ratio(v[kNonProperties], words);
  v[kWordRatios + 3] = safe_ratio(v[kSpecials], words);
  v[kNounRatios + 0] = safe_ratio(v[kProperties], nouns);
  v[kNounRatios + 1] = safe_ratio(v[kNonProperties], nouns);
  v[kNounRatios + 2] = safe_ratio(v[kSpecials], nouns);
  for (std::size_t c = 0; c < 8; ++c) v[kCaseRatio1 + c] = safe_ratio(v[kCase1 + c], nouns);
  for (std::size_t n = 0; n < 3; ++n) v[kNumberRatioSg + n] = safe_ratio(v[kNumberSg + n], nouns);
  v[kOtherRatios + 0] = safe_ratio(v[kProperties], v[kNonProperties]);
  v[kOtherRatios + 1] = safe_ratio(v[kNonProperties], v[kProperties]);
  v[kOtherRatios + 2] = safe_ratio(v[kSpecials], v[kProperties]);
  v[kOtherRatios + 3] = safe_ratio(v[kSpecials], v[kNonProperties]);
  return v;
}

// ---------------------------------------------------------------------------
// Classification.

class SlokaClassifier {
 public:
  virtual ~SlokaClassifier() = default;
  // Probability that the śloka lists synonyms.
  virtual double score(const FeatureVector &v) const = 0;
  bool classify(const FeatureVector &v) const { return score(v) >= 0.5; }
};

struct Hyperparameters {
  std::size_t epochs = 2000;
  double learning_rate = 0.1;
  double l2 = 1e-3;
};

struct LabeledExample {
  FeatureVector features;
  bool label = false;
};

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// Mean logistic loss plus (l2 / 2)·|w|² over standardized inputs. Parameters
// are the 40 weights followed by the bias.
class LogisticObjective {
 public:
  using Params = std::array<double, kFeatureCount + 1>;

  LogisticObjective(const std::vector<FeatureVector> &x, const std::vector<bool> &y, double l2)
      : x_(x), y_(y), l2_(l2) {}

  double loss(const Params &p) const {
    double sum = 0;
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const double z = margin(p, x_[i]);
      sum += softplus(z) - (y_[i] ? z : 0.0);
    }
    double reg = 0;
    for (std::size_t j = 0; j < kFeatureCount; ++j) reg += p[j] * p[j];
    return sum / static_cast<double>(x_.size()) + 0.5 * l2_ * reg;
  }

  Params gradient(const Params &p) const {
    Params g{};
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const double r = sigmoid(margin(p, x_[i])) - (y_[i] ? 1.0 : 0.0);
      for (std::size_t j = 0; j < kFeatureCount; ++j) g[j] += r * x_[i][j];
      g[kFeatureCount] += r;
    }
    const double n = static_cast<double>(x_.size());
    for (std::size_t j = 0; j <= kFeatureCount; ++j) g[j] /= n;
    for (std::size_t j = 0; j < kFeatureCount; ++j) g[j] += l2_ * p[j];
    return g;
  }

  static double margin(const Params &p, const FeatureVector &x) {
    double z = p[kFeatureCount];
    for (std::size_t j = 0; j < kFeatureCount; ++j) z += p[j] * x[j];
    return z;
  }

 private:
  const std::vector<FeatureVector> &x_;
  const std::vector<bool> &y_;
  double l2_;
};

class LogisticModel : public SlokaClassifier {
 public:
  FeatureVector weights{};
  double bias = 0;
  // Training-set standardization; scale is 1 for constant features.
  FeatureVector mean{};
  FeatureVector scale{};
  Hyperparameters hyper;
  std::vector<double> loss_history;

  FeatureVector standardize(const FeatureVector &v) const {
    FeatureVector out;
    for (std::size_t j = 0; j < kFeatureCount; ++j) out[j] = (v[j] - mean[j]) / scale[j];
    return out;
  }

  double decision(const FeatureVector &v) const {
    const auto x = standardize(v);
    double z = bias;
    for (std::size_t j = 0; j < kFeatureCount; ++j) z += weights[j] * x[j];
    return z;
  }

  double score(const FeatureVector &v) const override { return sigmoid(decision(v)); }
};

// Full-batch gradient descent from zero. Throws Error unless both labels occur.
inline LogisticModel train_classifier(const std::vector<LabeledExample> &train,
                                      const Hyperparameters &hyper = {}) {
  std::size_t positives = 0;
  for (const auto &e : train) positives += e.label ? 1 : 0;
  if (positives == 0 || positives == train.size()) {
    throw Error("train_classifier: training set needs both labels");
  }

  LogisticModel model;
  model.hyper = hyper;
  const double n = static_cast<double>(train.size());
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    double sum = 0;
    for (const auto &e : train) sum += e.features[j];
    model.mean[j] = sum / n;
    double var = 0;
    for (const auto &e : train) var += (e.features[j] - model.mean[j]) * (e.features[j] - model.mean[j]);
    const double sd = std::sqrt(var / n);
    model.scale[j] = sd > 0 ? sd : 1.0;
  }

  std::vector<FeatureVector> x;
  std::vector<bool> y;
  for (const auto &e : train) {
    x.push_back(model.standardize(e.features));
    y.push_back(e.label);
  }
  LogisticObjective objective(x, y, hyper.l2);
  LogisticObjective::Params params{};
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    model.loss_history.push_back(objective.loss(params));
    const auto g = objective.gradient(params);
    for (std::size_t j = 0; j <= kFeatureCount; ++j) params[j] -= hyper.learning_rate * g[j];
  }
  model.loss_history.push_back(objective.loss(params));
  for (std::size_t j = 0; j < kFeatureCount; ++j) model.weights[j] = params[j];
  model.bias = params[kFeatureCount];
  return model;
}

// ---------------------------------------------------------------------------
// Labels and train/test scenarios.

struct SlokaLabel {
  std::string sloka_id;
  bool is_synonym_sloka = false;
  std::vector<std::vector<Root>> groups;
};

inline std::vector<SlokaLabel> parse_labels(std::istream &in) {
  std::vector<SlokaLabel> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error &e) {
      throw ParseError(line_no, e.what());
    }
    const std::string where = "labels line " + std::to_string(line_no);
    if (!j.is_object() || !j.contains("sloka_id") || !j["sloka_id"].is_string() ||
        !j.contains("is_synonym_sloka") || !j["is_synonym_sloka"].is_boolean()) {
      throw ValidationError(where + ": needs string 'sloka_id' and boolean 'is_synonym_sloka'");
    }
    SlokaLabel label{j["sloka_id"].get<std::string>(), j["is_synonym_sloka"].get<bool>(), {}};
    if (!seen.insert(label.sloka_id).second) {
      throw ValidationError(where + ": duplicate sloka_id '" + label.sloka_id + "'");
    }
    if (j.contains("groups")) {
      try {
        label.groups = j["groups"].get<std::vector<std::vector<Root>>>();
      } catch (const nlohmann::json::exception &) {
        throw ValidationError(where + ": 'groups' must be a list of string lists");
      }
    }
    out.push_back(std::move(label));
  }
  return out;
}

inline std::vector<SlokaLabel> load_labels(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open labels file '" + path + "'");
  return parse_labels(in);
}

enum class Scenario { kS1, kS2, kS3, kS4 };

inline Scenario parse_scenario(std::string_view s) {
  if (s == "S1") return Scenario::kS1;
  if (s == "S2") return Scenario::kS2;
  if (s == "S3") return Scenario::kS3;
  if (s == "S4") return Scenario::kS4;
  throw Error("unknown scenario '" + std::string(s) + "'");
}

struct ScenarioSplit {
  std::string chapter_a, chapter_b;
  std::vector<std::size_t> train;  // śloka indices in corpus order
  std::vector<std::size_t> test;
};

// S1/S2: first 20% (floored) of chapter A/B against the rest of it.
// S3/S4: chapter A against chapter B and the reverse. Only labeled ślokas
// take part. Chapters default to the first two chapters with labels.
inline ScenarioSplit make_scenario(const Corpus &corpus, const std::vector<SlokaLabel> &labels,
                                   Scenario scenario,
                                   std::optional<std::string> chapter_a = std::nullopt,
                                   std::optional<std::string> chapter_b = std::nullopt) {
  std::set<std::string> labeled;
  for (const auto &l : labels) labeled.insert(l.sloka_id);
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> by_chapter;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!labeled.contains(corpus[i].id)) continue;
    auto &members = by_chapter[corpus[i].chapter];
    if (members.empty()) order.push_back(corpus[i].chapter);
    members.push_back(i);
  }
  auto pick = [&](const std::optional<std::string> &given, std::size_t k) {
    if (given) {
      if (!by_chapter.contains(*given)) throw Error("unknown chapter '" + *given + "'");
      return *given;
    }
    if (order.size() <= k) throw Error("scenario needs a labeled chapter #" + std::to_string(k + 1));
    return order[k];
  };

  ScenarioSplit split;
  const bool needs_b = scenario != Scenario::kS1;
  const bool needs_a = scenario != Scenario::kS2;
  if (needs_a) split.chapter_a = pick(chapter_a, 0);
  if (needs_b) split.chapter_b = pick(chapter_b, 1);

  auto prefix_split = [&](const std::vector<std::size_t> &members) {
    const std::size_t n_train = members.size() / 5;
    split.train.assign(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.assign(members.begin() + static_cast<std::ptrdiff_t>(n_train), members.end());
  };
  switch (scenario) {
    case Scenario::kS1: prefix_split(by_chapter[split.chapter_a]); break;
    case Scenario::kS2: prefix_split(by_chapter[split.chapter_b]); break;
    case Scenario::kS3:
      split.train = by_chapter[split.chapter_a];
      split.test = by_chapter[split.chapter_b];
      break;
    case Scenario::kS4:
      split.train = by_chapter[split.chapter_b];
      split.test = by_chapter[split.chapter_a];
      break;
  }
  return split;
}

// ---------------------------------------------------------------------------
// Synonym pairs.

using SynonymPair = RootPair;

// Non-property nouns agreeing in case and number pair up; gender is ignored.
inline std::set<SynonymPair> extract_synonym_pairs(const Sloka &sloka, const RootSet &properties) {
  std::vector<const AnnotatedToken *> nouns;
  for (const auto &t : sloka.tokens) {
    if (t.is_noun() && !properties.contains(t.root) && t.morph.grammatical_case &&
        t.morph.number) {
      nouns.push_back(&t);
    }
  }
  std::set<SynonymPair> out;
  for (std::size_t i = 0; i < nouns.size(); ++i) {
    for (std::size_t j = i + 1; j < nouns.size(); ++j) {
      const auto &a = *nouns[i];
      const auto &b = *nouns[j];
      if (a.root != b.root && a.morph.grammatical_case == b.morph.grammatical_case &&
          a.morph.number == b.morph.number) {
        out.insert(unordered_pair(a.root, b.root));
      }
    }
  }
  return out;
}

// Every unordered pair inside each gold group.
inline std::set<SynonymPair> group_pairs(const std::vector<std::vector<Root>> &groups) {
  std::set<SynonymPair> out;
  for (const auto &g : groups) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = i + 1; j < g.size(); ++j) {
        if (g[i] != g[j]) out.insert(unordered_pair(g[i], g[j]));
      }
    }
  }
  return out;
}

struct Coverage {
  std::size_t covered = 0;
  std::size_t groups = 0;
  double fraction() const { return static_cast<double>(covered) / static_cast<double>(groups); }
};

// A group is covered once any found pair lies entirely inside it.
inline Coverage group_coverage(const std::vector<std::vector<Root>> &gold,
                               const std::set<SynonymPair> &found) {
  if (gold.empty()) throw Error("group_coverage: no gold groups");
  Coverage c{0, gold.size()};
  for (const auto &g : gold) {
    const RootSet members(g.begin(), g.end());
    for (const auto &[a, b] : found) {
      if (a != b && members.contains(a) && members.contains(b)) {
        ++c.covered;
        break;
      }
    }
  }
  return c;
}

}  // namespace kgq
