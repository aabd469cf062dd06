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

// In-memory triple store with SPO/POS/OSP indexes, inverse-relation
// enhancement and conjunctive pattern matching.

#pragma once

#include <array>
#include <cstddef>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "kgq/corpus.hpp"
#include "kgq/error.hpp"
#include "kgq/extraction.hpp"
#include "kgq/lexicon.hpp"

namespace kgq {

class KnowledgeGraph {
 public:
  using Key = std::tuple<Root, Root, Root>;
  using Index = std::map<Root, std::map<Root, std::set<Root>>>;

  // Inserts or merges an edge. Provenance is merged; a direct edge replaces
  // an inferred one with the same key, never the other way around.
  void add(const Triplet &t) {
    auto [it, inserted] = edges_.try_emplace(Key{t.subject, t.predicate, t.object}, t);
    if (!inserted) {
      it->second.provenance.insert(t.provenance.begin(), t.provenance.end());
      if (t.origin == Origin::kDirect) it->second.origin = Origin::kDirect;
      return;
    }
    spo_[t.subject][t.predicate].insert(t.object);
    pos_[t.predicate][t.object].insert(t.subject);
    osp_[t.object][t.subject].insert(t.predicate);
    entities_.insert(t.subject);
    entities_.insert(t.object);
  }

  const Triplet *find(const Root &s, const Root &p, const Root &o) const {
    auto it = edges_.find(Key{s, p, o});
    return it == edges_.end() ? nullptr : &it->second;
  }

  bool contains(const Root &s, const Root &p, const Root &o) const {
    return find(s, p, o) != nullptr;
  }

  std::size_t edge_count() const { return edges_.size(); }
  const std::set<Root> &entities() const { return entities_; }
  const std::map<Key, Triplet> &edges() const { return edges_; }

  // Edges in (subject, predicate, object) order.
  std::vector<Triplet> triplets() const {
    std::vector<Triplet> out;
    out.reserve(edges_.size());
    for (const auto &[k, t] : edges_) out.push_back(t);
    return out;
  }

  std::set<Root> relation_types() const {
    std::set<Root> out;
    for (const auto &[p, rest] : pos_) out.insert(p);
    return out;
  }

  const Index &spo() const { return spo_; }
  const Index &pos() const { return pos_; }
  const Index &osp() const { return osp_; }

  // Calls fn(s, p, o) for every edge matching the bound slots, choosing the
  // index that covers the most bound slots.
  template <typename Fn>
  void for_each_match(const std::optional<Root> &s, const std::optional<Root> &p,
                      const std::optional<Root> &o, Fn &&fn) const {
    auto lookup = [](const Index &idx, const Root &a) -> const std::map<Root, std::set<Root>> * {
      auto it = idx.find(a);
      return it == idx.end() ? nullptr : &it->second;
    };
    if (s && p && o) {
      if (contains(*s, *p, *o)) fn(*s, *p, *o);
    } else if (s && p) {
      if (auto *m = lookup(spo_, *s)) {
        if (auto it = m->find(*p); it != m->end()) {
          for (const auto &obj : it->second) fn(*s, *p, obj);
        }
      }
    } else if (s && o) {
      if (auto *m = lookup(osp_, *o)) {
        if (auto it = m->find(*s); it != m->end()) {
          for (const auto &pred : it->second) fn(*s, pred, *o);
        }
      }
    } else if (p && o) {
      if (auto *m = lookup(pos_, *p)) {
        if (auto it = m->find(*o); it != m->end()) {
          for (const auto &subj : it->second) fn(subj, *p, *o);
        }
      }
    } else if (s) {
      if (auto *m = lookup(spo_, *s)) {
        for (const auto &[pred, objs] : *m) {
          for (const auto &obj : objs) fn(*s, pred, obj);
        }
      }
    } else if (p) {
      if (auto *m = lookup(pos_, *p)) {
        for (const auto &[obj, subjs] : *m) {
          for (const auto &subj : subjs) fn(subj, *p, obj);
        }
      }
    } else if (o) {
      if (auto *m = lookup(osp_, *o)) {
        for (const auto &[subj, preds] : *m) {
          for (const auto &pred : preds) fn(subj, pred, *o);
        }
      }
    } else {
      for (const auto &[k, t] : edges_) fn(t.subject, t.predicate, t.object);
    }
  }

  bool operator==(const KnowledgeGraph &other) const { return edges_ == other.edges_; }

 private:
  std::map<Key, Triplet> edges_;
  Index spo_, pos_, osp_;
  std::set<Root> entities_;
};

inline KnowledgeGraph build_kg(const std::vector<Triplet> &triplets) {
  KnowledgeGraph kg;
  for (const auto &t : triplets) kg.add(t);
  return kg;
}

// ---------------------------------------------------------------------------
// Entity genders.

struct EntityGender {
  Root entity;
  std::optional<Gender> gender;
  // Occurrence counts indexed by Gender.
  std::array<std::size_t, 3> evidence{};
};

using GenderMap = std::map<Root, EntityGender>;

// Majority vote over gendered noun occurrences of each entity's root. A
// gender wins only with more than half of the votes.
inline GenderMap infer_entity_genders(const Corpus &corpus, const KnowledgeGraph &kg) {
  GenderMap out;
  for (const auto &e : kg.entities()) out[e].entity = e;
  for (const auto &s : corpus.slokas()) {
    for (const auto &t : s.tokens) {
      if (!t.is_noun() || !t.morph.gender) continue;
      auto it = out.find(t.root);
      if (it != out.end()) ++it->second.evidence[static_cast<std::size_t>(*t.morph.gender)];
    }
  }
  for (auto &[root, eg] : out) {
    const std::size_t total = eg.evidence[0] + eg.evidence[1] + eg.evidence[2];
    for (std::size_t g = 0; g < 3; ++g) {
      if (2 * eg.evidence[g] > total) eg.gender = static_cast<Gender>(g);
    }
  }
  return out;
}

// Adds (b, R', a) for every direct (a, R, b) and every inverse R' of R allowed
// by gender(a), unless a direct (b, R'', a) with {R'', R'} mutually exclusive
// exists. Only direct edges are sources, so the result is idempotent.
inline KnowledgeGraph enhance_with_inverses(const KnowledgeGraph &kg,
                                            const RelationLexicon &lex,
                                            const GenderMap &genders) {
  KnowledgeGraph out = kg;
  auto direct_between = [&](const Root &from, const Root &to) {
    std::vector<Root> preds;
    kg.for_each_match(from, std::nullopt, to, [&](const Root &, const Root &p, const Root &) {
      if (kg.find(from, p, to)->origin == Origin::kDirect) preds.push_back(p);
    });
    return preds;
  };

  for (const auto &[key, edge] : kg.edges()) {
    if (edge.origin != Origin::kDirect || !lex.is_canonical(edge.predicate)) continue;
    auto g = genders.find(edge.subject);
    const std::optional<Gender> gender =
        g == genders.end() ? std::nullopt : g->second.gender;
    const auto reverse = direct_between(edge.object, edge.subject);
    for (const auto &inverse : lex.inverses_of(edge.predicate, gender)) {
      bool blocked = false;
      for (const auto &existing : reverse) {
        blocked |= existing == inverse || lex.are_exclusive(existing, inverse);
      }
      if (blocked) continue;
      out.add(Triplet{edge.object, inverse, edge.subject, edge.provenance, Origin::kInferred});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conjunctive patterns.

struct Term {
  bool is_variable = false;
  std::string value;  // variable name or constant root

  static Term var(std::string name) { return {true, std::move(name)}; }
  static Term constant(std::string root) { return {false, std::move(root)}; }

  bool operator==(const Term &) const = default;
  auto operator<=>(const Term &) const = default;
};

struct TriplePattern {
  Term subject;
  Term predicate;
  Term object;

  bool operator==(const TriplePattern &) const = default;
};

using Binding = std::map<std::string, Root>;

namespace detail {

inline std::optional<Root> resolve(const Term &t, const Binding &b) {
  if (!t.is_variable) return t.value;
  auto it = b.find(t.value);
  if (it == b.end()) return std::nullopt;
  return it->second;
}

inline bool bind(const Term &t, const Root &value, Binding &b) {
  if (!t.is_variable) return t.value == value;
  auto [it, inserted] = b.emplace(t.value, value);
  return inserted || it->second == value;
}

inline int bound_slots(const TriplePattern &p, const Binding &b) {
  return static_cast<int>(resolve(p.subject, b).has_value()) +
         static_cast<int>(resolve(p.predicate, b).has_value()) +
         static_cast<int>(resolve(p.object, b).has_value());
}

inline void match_from(const KnowledgeGraph &kg, std::span<const TriplePattern> patterns,
                       std::vector<bool> &done, std::size_t remaining, Binding &binding,
                       std::set<Binding> &results) {
  if (remaining == 0) {
    results.insert(binding);
    return;
  }
  // Most constrained pattern first; ties keep the given order.
  std::size_t pick = patterns.size();
  int best = -1;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    if (done[i]) continue;
    int score = bound_slots(patterns[i], binding);
    if (score > best) {
      best = score;
      pick = i;
    }
  }
  const TriplePattern &pat = patterns[pick];
  done[pick] = true;
  kg.for_each_match(resolve(pat.subject, binding), resolve(pat.predicate, binding),
                    resolve(pat.object, binding),
                    [&](const Root &s, const Root &p, const Root &o) {
                      Binding next = binding;
                      if (bind(pat.subject, s, next) && bind(pat.predicate, p, next) &&
                          bind(pat.object, o, next)) {
                        match_from(kg, patterns, done, remaining - 1, next, results);
                      }
                    });
  done[pick] = false;
}

}  // namespace detail

// All variable assignments satisfying every pattern, deduplicated and sorted.
// An empty pattern list yields one empty binding.
inline std::vector<Binding> match_pattern(const KnowledgeGraph &kg,
                                          std::span<const TriplePattern> patterns) {
  std::set<Binding> results;
  std::vector<bool> done(patterns.size(), false);
  Binding binding;
  detail::match_from(kg, patterns, done, patterns.size(), binding, results);
  return {results.begin(), results.end()};
}

// ---------------------------------------------------------------------------
// Flat-file format: subject TAB predicate TAB object TAB origin TAB provenance.

inline std::string serialize_kg(const KnowledgeGraph &kg) {
  std::string out;
  for (const auto &[key, t] : kg.edges()) {
    out += t.subject;
    out += '\t';
    out += t.predicate;
    out += '\t';
    out += t.object;
    out += '\t';
    out += to_string(t.origin);
    out += '\t';
    bool first = true;
    for (const auto &id : t.provenance) {
      if (!first) out += ',';
      out += id;
      first = false;
    }
    out += '\n';
  }
  return out;
}

inline KnowledgeGraph deserialize_kg(std::istream &in) {
  KnowledgeGraph kg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 5) {
      throw ParseError(line_no, "expected 5 tab-separated fields, got " +
                                    std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      throw ParseError(line_no, "empty subject, predicate or object");
    }
    Triplet t{fields[0], fields[1], fields[2], {}, Origin::kDirect};
    if (fields[3] == "inferred") {
      t.origin = Origin::kInferred;
    } else if (fields[3] != "direct") {
      throw ParseError(line_no, "origin must be 'direct' or 'inferred'");
    }
    std::stringstream prov(fields[4]);
    for (std::string id; std::getline(prov, id, ',');) {
      if (!id.empty()) t.provenance.insert(id);
    }
    kg.add(t);
  }
  return kg;
}

inline KnowledgeGraph deserialize_kg(const std::string &text) {
  std::istringstream in(text);
  return deserialize_kg(in);
}

inline KnowledgeGraph load_kg(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open KG file '" + path + "'");
  return deserialize_kg(in);
}

}  // namespace kgq
