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

// Rule-based triplet extraction. Every relationship word is a predicate; its
// subjects are genitive nouns and its objects are nouns agreeing with it in
// case, gender and (optionally) number, all inside a window of ślokas.

#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "kgq/corpus.hpp"
#include "kgq/error.hpp"
#include "kgq/lexicon.hpp"

namespace kgq {

enum class Origin { kDirect, kInferred };

inline std::string_view to_string(Origin o) {
  return o == Origin::kDirect ? "direct" : "inferred";
}

struct Triplet {
  Root subject;
  Root predicate;
  Root object;
  std::set<std::string> provenance;
  Origin origin = Origin::kDirect;

  auto key() const { return std::tie(subject, predicate, object); }
  bool operator==(const Triplet &) const = default;
};

enum class Side { kEither, kBefore, kAfter };

struct FilterSpec {
  int id = 2;
  Side subject_position = Side::kEither;
  Side object_position = Side::kEither;
  bool object_number_must_match = true;

  // The four extraction filters; throws Error for ids outside 1..4.
  static FilterSpec from_id(int id) {
    switch (id) {
      case 1: return {1, Side::kEither, Side::kEither, false};
      case 2: return {2, Side::kEither, Side::kEither, true};
      case 3: return {3, Side::kBefore, Side::kAfter, true};
      case 4: return {4, Side::kAfter, Side::kBefore, true};
      default:
        throw Error("filter id must be in 1..4, got " + std::to_string(id));
    }
  }
};

struct PredicateOccurrence {
  std::size_t token_index;
  Root relation;

  bool operator==(const PredicateOccurrence &) const = default;
};

inline std::vector<PredicateOccurrence> find_predicates(const Sloka &sloka,
                                                        const RelationLexicon &lex) {
  std::vector<PredicateOccurrence> out;
  for (std::size_t i = 0; i < sloka.tokens.size(); ++i) {
    if (auto rel = lex.canonicalize(sloka.tokens[i].root)) out.push_back({i, *rel});
  }
  return out;
}

struct WindowToken {
  std::size_t sloka_index;
  std::size_t token_index;
  const AnnotatedToken *token;
};

// Tokens of the ślokas within `w` of `sloka_index` in the same document, in
// document order.
inline std::vector<WindowToken> context_window(const Corpus &corpus,
                                               std::size_t sloka_index,
                                               std::size_t w = 1) {
  if (sloka_index >= corpus.size()) throw Error("context_window: index out of range");
  const auto &members = corpus.doc_members(corpus[sloka_index].doc);
  const std::size_t pos = corpus.position_in_doc(sloka_index);
  const std::size_t first = pos >= w ? pos - w : 0;
  const std::size_t last = std::min(members.size() - 1, pos + w);
  std::vector<WindowToken> out;
  for (std::size_t k = first; k <= last; ++k) {
    const auto &s = corpus[members[k]];
    for (std::size_t t = 0; t < s.tokens.size(); ++t) {
      out.push_back({members[k], t, &s.tokens[t]});
    }
  }
  return out;
}

namespace detail {

inline bool side_allows(Side side, std::size_t candidate, std::size_t predicate) {
  switch (side) {
    case Side::kEither: return true;
    case Side::kBefore: return candidate < predicate;
    case Side::kAfter: return candidate > predicate;
  }
  return false;
}

inline bool agrees_with(const MorphTag &object, const MorphTag &predicate,
                        bool number_must_match) {
  if (!object.grammatical_case || !predicate.grammatical_case ||
      *object.grammatical_case != *predicate.grammatical_case) {
    return false;
  }
  if (!object.gender || !predicate.gender || *object.gender != *predicate.gender) {
    return false;
  }
  if (number_must_match &&
      (!object.number || !predicate.number || *object.number != *predicate.number)) {
    return false;
  }
  return true;
}

}  // namespace detail

// Expects a pronoun-reclassified, compound-normalized corpus. Output is sorted
// by (subject, predicate, object) with provenance merged.
inline std::vector<Triplet> extract_triplets(const Corpus &corpus,
                                             const RelationLexicon &lex,
                                             const FilterSpec &filter,
                                             std::size_t w = 1) {
  FilterSpec::from_id(filter.id);
  std::map<std::tuple<Root, Root, Root>, Triplet> found;

  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto predicates = find_predicates(corpus[i], lex);
    if (predicates.empty()) continue;
    const auto window = context_window(corpus, i, w);

    for (const auto &pred : predicates) {
      std::size_t ppos = 0;
      while (window[ppos].sloka_index != i || window[ppos].token_index != pred.token_index) {
        ++ppos;
      }
      const MorphTag &pm = window[ppos].token->morph;

      std::vector<const Root *> subjects, objects;
      for (std::size_t k = 0; k < window.size(); ++k) {
        const AnnotatedToken &tok = *window[k].token;
        if (k == ppos || !tok.is_noun() || lex.is_relation(tok.root)) continue;
        if (tok.morph.grammatical_case == kGenitive &&
            detail::side_allows(filter.subject_position, k, ppos)) {
          subjects.push_back(&tok.root);
        }
        if (detail::agrees_with(tok.morph, pm, filter.object_number_must_match) &&
            detail::side_allows(filter.object_position, k, ppos)) {
          objects.push_back(&tok.root);
        }
      }

      for (const Root *s : subjects) {
        for (const Root *o : objects) {
          if (*s == *o) continue;
          auto [it, inserted] = found.try_emplace({*s, pred.relation, *o});
          if (inserted) {
            it->second = Triplet{*s, pred.relation, *o, {}, Origin::kDirect};
          }
          it->second.provenance.insert(corpus[i].id);
        }
      }
    }
  }

  std::vector<Triplet> out;
  out.reserve(found.size());
  for (auto &[key, t] : found) out.push_back(std::move(t));
  return out;
}

}  // namespace kgq
