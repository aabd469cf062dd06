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

// Factoid questions: annotated tokens -> chained query triplets -> alternate
// conjunctive patterns -> answers from a knowledge graph.

#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgq/corpus.hpp"
#include "kgq/error.hpp"
#include "kgq/kg_store.hpp"
#include "kgq/lexicon.hpp"

namespace kgq {

inline constexpr std::size_t kMaxQuestionTokens = 32;
inline constexpr const char *kAnswerVar = "ans";

struct ParsedQuestion {
  std::vector<TriplePattern> triplets;
  std::string answer_var = kAnswerVar;

  bool operator==(const ParsedQuestion &) const = default;
};

// Constants as-is, variables as "?name".
inline std::string render(const Term &t) {
  return t.is_variable ? "?" + t.value : t.value;
}

using RenderedPattern = std::vector<std::array<std::string, 3>>;

inline RenderedPattern render(std::span<const TriplePattern> patterns) {
  RenderedPattern out;
  for (const auto &p : patterns) {
    out.push_back({render(p.subject), render(p.predicate), render(p.object)});
  }
  return out;
}

inline Term parse_term(const std::string &s) {
  if (!s.empty() && s.front() == '?') return Term::var(s.substr(1));
  return Term::constant(s);
}

namespace detail {

inline const char *kMarriage = "विवाह";
inline const char *kWith = "सह";
inline const char *kWife = "पत्नी";
inline const char *kHusband = "पति";

}  // namespace detail

// Tokens are compound-normalized and pronoun-reclassified here, exactly as
// corpus text is. The scan is order-tolerant:
//   - a genitive non-relation noun is the subject constant;
//   - a genitive relation word is a chain link whose object is a fresh
//     variable x1, x2, ... feeding the next triplet;
//   - a non-genitive relation word is the predicate of the final triplet;
//   - the interrogative marks the answer slot: the final object, or the
//     subject when it is itself genitive;
//   - with no relation word, "S-gen N kim" asks for the predicate;
//   - "vivāha kim-instrumental saha" asks for the spouse.
// Throws UnparsableQuestion otherwise.
inline ParsedQuestion parse_question(std::vector<AnnotatedToken> tokens,
                                     const RelationLexicon &lex) {
  if (tokens.size() > kMaxQuestionTokens) {
    throw UnparsableQuestion("question longer than " +
                             std::to_string(kMaxQuestionTokens) + " tokens");
  }
  normalize_compounds(tokens);
  reclassify_pronouns(tokens, lex.pronouns());

  std::vector<const AnnotatedToken *> genitive_nouns, other_nouns;
  std::vector<Root> chain, final_relations;
  std::vector<std::size_t> interrogatives;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto &tok = tokens[i];
    const bool genitive = tok.morph.grammatical_case == kGenitive;
    if (lex.is_interrogative(tok.root)) {
      interrogatives.push_back(i);
    } else if (auto rel = lex.canonicalize(tok.root)) {
      (genitive ? chain : final_relations).push_back(*rel);
    } else if (tok.is_noun()) {
      (genitive ? genitive_nouns : other_nouns).push_back(&tok);
    }
  }

  if (interrogatives.empty()) throw UnparsableQuestion("no interrogative word");
  if (interrogatives.size() > 1) throw UnparsableQuestion("more than one interrogative word");
  const std::size_t qi = interrogatives.front();
  const AnnotatedToken &q = tokens[qi];
  const Term ans = Term::var(kAnswerVar);

  // Spouse phrasing; the three trigger words must be adjacent and in order.
  if (qi >= 1 && qi + 1 < tokens.size() && tokens[qi - 1].root == detail::kMarriage &&
      tokens[qi + 1].root == detail::kWith &&
      q.morph.grammatical_case == kInstrumental) {
    if (genitive_nouns.empty()) throw UnparsableQuestion("marriage question without a subject");
    const char *rel = nullptr;
    if (q.morph.gender == Gender::kFeminine) rel = detail::kWife;
    if (q.morph.gender == Gender::kMasculine) rel = detail::kHusband;
    if (!rel || !lex.is_canonical(rel)) {
      throw UnparsableQuestion("cannot determine spouse relation");
    }
    return {{{Term::constant(genitive_nouns.front()->root), Term::constant(rel), ans}}};
  }

  if (final_relations.size() > 1) {
    throw UnparsableQuestion("more than one non-genitive relation word");
  }
  chain.insert(chain.end(), final_relations.begin(), final_relations.end());

  if (chain.empty()) {
    if (genitive_nouns.size() == 1 && other_nouns.size() == 1 &&
        q.morph.grammatical_case != kGenitive) {
      return {{{Term::constant(genitive_nouns.front()->root), ans,
                Term::constant(other_nouns.front()->root)}}};
    }
    throw UnparsableQuestion("no relation word");
  }

  Term subject, final_object;
  if (q.morph.grammatical_case == kGenitive) {
    if (other_nouns.empty()) throw UnparsableQuestion("no object for a genitive interrogative");
    subject = ans;
    final_object = Term::constant(other_nouns.front()->root);
  } else {
    if (genitive_nouns.empty()) throw UnparsableQuestion("no subject");
    subject = Term::constant(genitive_nouns.front()->root);
    final_object = ans;
  }

  ParsedQuestion out;
  Term current = subject;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    Term object = k + 1 == chain.size() ? final_object : Term::var("x" + std::to_string(k + 1));
    out.triplets.push_back({current, Term::constant(chain[k]), object});
    current = object;
  }
  return out;
}

struct AlternatePatterns {
  std::vector<std::vector<TriplePattern>> patterns;
};

// Each triplet expands to itself plus one path per decomposition of its
// predicate, with fresh y1, y2, ... intermediates. Alternates are the
// Cartesian product, the all-original pattern first.
inline AlternatePatterns enhance_query(const ParsedQuestion &q, const RelationLexicon &lex) {
  std::vector<std::vector<std::vector<TriplePattern>>> enhanced;
  std::size_t fresh = 0;
  for (const auto &t : q.triplets) {
    std::vector<std::vector<TriplePattern>> set{{t}};
    if (!t.predicate.is_variable && lex.is_canonical(t.predicate.value)) {
      for (const auto &chain : lex.decompositions_of(t.predicate.value)) {
        std::vector<TriplePattern> path;
        Term from = t.subject;
        for (std::size_t k = 0; k < chain.size(); ++k) {
          Term to = k + 1 == chain.size() ? t.object : Term::var("y" + std::to_string(++fresh));
          path.push_back({from, Term::constant(chain[k]), to});
          from = to;
        }
        set.push_back(std::move(path));
      }
    }
    enhanced.push_back(std::move(set));
  }

  AlternatePatterns out;
  std::vector<std::size_t> choice(enhanced.size(), 0);
  for (;;) {
    std::vector<TriplePattern> pattern;
    for (std::size_t i = 0; i < enhanced.size(); ++i) {
      const auto &part = enhanced[i][choice[i]];
      pattern.insert(pattern.end(), part.begin(), part.end());
    }
    out.patterns.push_back(std::move(pattern));
    std::size_t i = enhanced.size();
    while (i > 0) {
      --i;
      if (++choice[i] < enhanced[i].size()) break;
      choice[i] = 0;
      if (i == 0) return out;
    }
    if (enhanced.empty()) return out;
  }
}

struct Answer {
  Root value;
  // Number of alternate patterns that produced this value.
  std::size_t multiplicity = 0;

  bool operator==(const Answer &) const = default;
};

struct AnswerSet {
  std::vector<Answer> answers;  // sorted by value
  std::size_t patterns_tried = 0;

  bool no_answer() const { return answers.empty(); }
  std::set<Root> values() const {
    std::set<Root> out;
    for (const auto &a : answers) out.insert(a.value);
    return out;
  }
};

inline AnswerSet answer_question(const KnowledgeGraph &kg, const ParsedQuestion &q,
                                 const RelationLexicon &lex) {
  const auto alternates = enhance_query(q, lex);
  std::map<Root, std::size_t> counts;
  for (const auto &pattern : alternates.patterns) {
    std::set<Root> values;
    for (const auto &b : match_pattern(kg, pattern)) {
      if (auto it = b.find(q.answer_var); it != b.end()) values.insert(it->second);
    }
    for (const auto &v : values) ++counts[v];
  }
  AnswerSet out;
  out.patterns_tried = alternates.patterns.size();
  for (const auto &[v, n] : counts) out.answers.push_back({v, n});
  return out;
}

inline nlohmann::ordered_json answer_to_json(const AnswerSet &a) {
  nlohmann::ordered_json j;
  auto arr = nlohmann::ordered_json::array();
  for (const auto &ans : a.answers) {
    nlohmann::ordered_json item;
    item["value"] = ans.value;
    item["multiplicity"] = ans.multiplicity;
    arr.push_back(std::move(item));
  }
  j["answers"] = std::move(arr);
  j["patterns_tried"] = a.patterns_tried;
  return j;
}

}  // namespace kgq
