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

// Relationship lexicon: synonym groups mapped to canonical relation roots,
// gender-conditioned inverse rules and decompositions of derived relations.

#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgq/corpus.hpp"
#include "kgq/error.hpp"

namespace kgq {

// (a, R, b) with gender(a) == object_gender implies (b, relation, a).
struct InverseRule {
  Gender object_gender;
  Root relation;

  bool operator==(const InverseRule &) const = default;
};

using RelationChain = std::vector<Root>;

struct RelationEntry {
  Root canonical;
  RootSet forms;
  std::vector<InverseRule> inverse_rules;
  std::vector<RelationChain> decompositions;
};

using RootPair = std::pair<Root, Root>;

inline RootPair unordered_pair(Root a, Root b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

class RelationLexicon {
 public:
  RelationLexicon() = default;

  // Validates every invariant; throws ValidationError. Without an explicit
  // `mutually_exclusive` set, every (R, inverse of R) pair is exclusive.
  RelationLexicon(std::vector<RelationEntry> entries, RootSet pronouns,
                  RootSet interrogatives,
                  std::optional<std::set<RootPair>> mutually_exclusive = std::nullopt)
      : entries_(std::move(entries)),
        pronouns_(std::move(pronouns)),
        interrogatives_(std::move(interrogatives)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      auto &e = entries_[i];
      if (e.canonical.empty()) throw ValidationError("relation with empty canonical root");
      if (!by_canonical_.emplace(e.canonical, i).second) {
        throw ValidationError("duplicate canonical relation '" + e.canonical + "'");
      }
      e.forms.insert(e.canonical);
      for (const auto &form : e.forms) {
        auto [it, inserted] = by_form_.emplace(form, i);
        if (!inserted) {
          throw ValidationError("form '" + form + "' appears in both '" +
                                entries_[it->second].canonical + "' and '" +
                                e.canonical + "'");
        }
      }
    }
    for (const auto &e : entries_) {
      for (const auto &rule : e.inverse_rules) {
        require_canonical(rule.relation, "inverse of '" + e.canonical + "'");
      }
      for (const auto &chain : e.decompositions) {
        if (chain.size() < 2) {
          throw ValidationError("decomposition of '" + e.canonical +
                                "' must have at least 2 relations");
        }
        for (const auto &r : chain) {
          require_canonical(r, "decomposition of '" + e.canonical + "'");
        }
      }
    }
    // Inverse rules must round-trip.
    for (const auto &e : entries_) {
      for (const auto &rule : e.inverse_rules) {
        const auto &back = entries_[by_canonical_.at(rule.relation)];
        bool closes = false;
        for (const auto &r : back.inverse_rules) closes |= r.relation == e.canonical;
        if (!closes) {
          throw ValidationError("inverse '" + rule.relation + "' of '" + e.canonical +
                                "' has no inverse rule back to '" + e.canonical + "'");
        }
      }
    }
    for (const auto &q : interrogatives_) {
      if (by_form_.contains(q)) {
        throw ValidationError("interrogative '" + q + "' is also a relation form");
      }
    }
    if (mutually_exclusive) {
      for (const auto &[a, b] : *mutually_exclusive) {
        require_canonical(a, "mutually_exclusive");
        require_canonical(b, "mutually_exclusive");
        exclusive_.insert(unordered_pair(a, b));
      }
    } else {
      for (const auto &e : entries_) {
        for (const auto &rule : e.inverse_rules) {
          if (rule.relation != e.canonical) {
            exclusive_.insert(unordered_pair(e.canonical, rule.relation));
          }
        }
      }
    }
  }

  const std::vector<RelationEntry> &entries() const { return entries_; }
  const RootSet &pronouns() const { return pronouns_; }
  const RootSet &interrogatives() const { return interrogatives_; }
  const std::set<RootPair> &mutually_exclusive() const { return exclusive_; }

  // Canonical relation for any synonym form, or nullopt.
  std::optional<Root> canonicalize(const Root &root) const {
    auto it = by_form_.find(root);
    if (it == by_form_.end()) return std::nullopt;
    return entries_[it->second].canonical;
  }

  bool is_relation(const Root &root) const { return by_form_.contains(root); }
  bool is_canonical(const Root &root) const { return by_canonical_.contains(root); }
  bool is_interrogative(const Root &root) const { return interrogatives_.contains(root); }

  const RelationEntry &entry(const Root &canonical) const {
    auto it = by_canonical_.find(canonical);
    if (it == by_canonical_.end()) {
      throw Error("unknown relation '" + canonical + "'");
    }
    return entries_[it->second];
  }

  // Inverse relations applicable when the original subject has `gender`.
  // Neuter or unknown gender yields nothing.
  std::vector<Root> inverses_of(const Root &relation,
                                std::optional<Gender> gender) const {
    const auto &e = entry(relation);
    std::vector<Root> out;
    if (!gender || *gender == Gender::kNeuter) return out;
    for (const auto &rule : e.inverse_rules) {
      if (rule.object_gender == *gender) out.push_back(rule.relation);
    }
    return out;
  }

  const std::vector<RelationChain> &decompositions_of(const Root &relation) const {
    return entry(relation).decompositions;
  }

  bool are_exclusive(const Root &a, const Root &b) const {
    return exclusive_.contains(unordered_pair(a, b));
  }

 private:
  void require_canonical(const Root &r, const std::string &where) const {
    if (!by_canonical_.contains(r)) {
      throw ValidationError(where + ": unknown relation '" + r + "'");
    }
  }

  std::vector<RelationEntry> entries_;
  RootSet pronouns_;
  RootSet interrogatives_;
  std::set<RootPair> exclusive_;
  std::map<Root, std::size_t> by_canonical_;
  std::map<Root, std::size_t> by_form_;
};

inline RelationLexicon parse_lexicon(const nlohmann::json &j) {
  auto fail = [](const std::string &msg) -> void { throw ValidationError("lexicon: " + msg); };
  if (!j.is_object()) fail("top level must be an object");

  auto strings = [&](const nlohmann::json &arr, const std::string &field) {
    RootSet out;
    if (!arr.is_array()) fail("'" + field + "' must be an array of strings");
    for (const auto &v : arr) {
      if (!v.is_string()) fail("'" + field + "' must be an array of strings");
      out.insert(v.get<std::string>());
    }
    return out;
  };

  std::vector<RelationEntry> entries;
  auto rel = j.find("relations");
  if (rel == j.end() || !rel->is_array()) fail("'relations' must be an array");
  for (const auto &r : *rel) {
    if (!r.is_object() || !r.contains("canonical") || !r["canonical"].is_string()) {
      fail("each relation needs a string 'canonical'");
    }
    RelationEntry e;
    e.canonical = r["canonical"].get<std::string>();
    if (r.contains("forms")) e.forms = strings(r["forms"], e.canonical + ".forms");
    if (r.contains("inverse")) {
      for (const auto &inv : r["inverse"]) {
        if (!inv.is_object() || !inv.contains("object_gender") ||
            !inv.contains("relation") || !inv["relation"].is_string()) {
          fail(e.canonical + ".inverse: entries need 'object_gender' and 'relation'");
        }
        auto g = inv["object_gender"].is_string()
                     ? parse_gender(inv["object_gender"].get<std::string>())
                     : std::nullopt;
        if (!g || *g == Gender::kNeuter) {
          fail(e.canonical + ".inverse: object_gender must be 'm' or 'f'");
        }
        e.inverse_rules.push_back({*g, inv["relation"].get<std::string>()});
      }
    }
    if (r.contains("decompose")) {
      for (const auto &chain : r["decompose"]) {
        RelationChain c;
        if (!chain.is_array()) fail(e.canonical + ".decompose: chains must be arrays");
        for (const auto &x : chain) {
          if (!x.is_string()) fail(e.canonical + ".decompose: chains hold strings");
          c.push_back(x.get<std::string>());
        }
        e.decompositions.push_back(std::move(c));
      }
    }
    entries.push_back(std::move(e));
  }

  RootSet pronouns = j.contains("pronouns") ? strings(j["pronouns"], "pronouns") : RootSet{};
  RootSet interrogatives = j.contains("interrogatives")
                               ? strings(j["interrogatives"], "interrogatives")
                               : RootSet{"किम्"};
  std::optional<std::set<RootPair>> exclusive;
  if (j.contains("mutually_exclusive")) {
    exclusive.emplace();
    for (const auto &pair : j["mutually_exclusive"]) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() ||
          !pair[1].is_string()) {
        fail("'mutually_exclusive' entries must be pairs of strings");
      }
      exclusive->insert(unordered_pair(pair[0].get<std::string>(),
                                       pair[1].get<std::string>()));
    }
  }
  return RelationLexicon(std::move(entries), std::move(pronouns),
                         std::move(interrogatives), std::move(exclusive));
}

inline RelationLexicon load_lexicon(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open lexicon file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError(0, std::string("lexicon: ") + e.what());
  }
  return parse_lexicon(j);
}

}  // namespace kgq
