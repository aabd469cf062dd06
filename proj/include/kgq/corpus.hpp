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

// Annotated śloka corpora: token model, JSONL reader/writer, compound and
// pronoun normalization, and noun frequency statistics.

#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgq/error.hpp"

namespace kgq {

using Root = std::string;
using RootSet = std::set<Root>;

enum class Pos {
  kNoun,
  kVerb,
  kPronoun,
  kAdverb,
  kConjunction,
  kPreposition,
  kParticle,
  kInterjection,
  kOther,
};

enum class Number { kSingular, kDual, kPlural };
enum class Gender { kMasculine, kFeminine, kNeuter };

// Grammatical case (vibhakti) numbering used throughout.
inline constexpr int kNominative = 1;
inline constexpr int kAccusative = 2;
inline constexpr int kInstrumental = 3;
inline constexpr int kGenitive = 6;
inline constexpr int kLocative = 7;
inline constexpr int kVocative = 8;

struct MorphTag {
  std::optional<int> grammatical_case;
  std::optional<Number> number;
  std::optional<Gender> gender;

  bool operator==(const MorphTag &) const = default;
};

struct AnnotatedToken {
  std::string surface;
  Root root;
  Pos pos = Pos::kOther;
  MorphTag morph;
  // Members split from one original compound share this id within a śloka.
  std::optional<int> compound;

  bool is_noun() const { return pos == Pos::kNoun; }
  bool operator==(const AnnotatedToken &) const = default;
};

struct Sloka {
  std::string id;
  std::string chapter;
  std::string doc;
  std::string text;
  std::vector<AnnotatedToken> tokens;

  bool operator==(const Sloka &) const = default;
};

// ---------------------------------------------------------------------------
// Enum spellings. These are the exact strings of the JSONL format.

inline std::string_view to_string(Pos pos) {
  switch (pos) {
    case Pos::kNoun: return "noun";
    case Pos::kVerb: return "verb";
    case Pos::kPronoun: return "pronoun";
    case Pos::kAdverb: return "adverb";
    case Pos::kConjunction: return "conjunction";
    case Pos::kPreposition: return "preposition";
    case Pos::kParticle: return "particle";
    case Pos::kInterjection: return "interjection";
    case Pos::kOther: return "other";
  }
  return "other";
}

inline std::string_view to_string(Number number) {
  switch (number) {
    case Number::kSingular: return "sg";
    case Number::kDual: return "du";
    case Number::kPlural: return "pl";
  }
  return "sg";
}

inline std::string_view to_string(Gender gender) {
  switch (gender) {
    case Gender::kMasculine: return "m";
    case Gender::kFeminine: return "f";
    case Gender::kNeuter: return "n";
  }
  return "m";
}

inline std::optional<Pos> parse_pos(std::string_view s) {
  static constexpr Pos kAll[] = {
      Pos::kNoun,     Pos::kVerb,        Pos::kPronoun,
      Pos::kAdverb,   Pos::kConjunction, Pos::kPreposition,
      Pos::kParticle, Pos::kInterjection, Pos::kOther};
  for (Pos p : kAll) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

inline std::optional<Number> parse_number(std::string_view s) {
  if (s == "sg") return Number::kSingular;
  if (s == "du") return Number::kDual;
  if (s == "pl") return Number::kPlural;
  return std::nullopt;
}

inline std::optional<Gender> parse_gender(std::string_view s) {
  if (s == "m") return Gender::kMasculine;
  if (s == "f") return Gender::kFeminine;
  if (s == "n") return Gender::kNeuter;
  return std::nullopt;
}

// Parts of speech that never inflect for case.
inline bool is_caseless_pos(Pos pos) {
  return pos == Pos::kVerb || pos == Pos::kConjunction ||
         pos == Pos::kPreposition || pos == Pos::kParticle;
}

// ---------------------------------------------------------------------------

// An ordered, id-unique list of ślokas with a per-document index.
class Corpus {
 public:
  Corpus() = default;

  // Throws ValidationError on duplicate śloka ids.
  explicit Corpus(std::vector<Sloka> slokas) : slokas_(std::move(slokas)) {
    for (std::size_t i = 0; i < slokas_.size(); ++i) {
      auto [it, inserted] = by_id_.emplace(slokas_[i].id, i);
      if (!inserted) {
        throw ValidationError("duplicate sloka_id '" + slokas_[i].id + "'");
      }
      auto &members = docs_[slokas_[i].doc];
      position_in_doc_.push_back(members.size());
      members.push_back(i);
    }
  }

  const std::vector<Sloka> &slokas() const { return slokas_; }
  std::size_t size() const { return slokas_.size(); }
  bool empty() const { return slokas_.empty(); }
  const Sloka &operator[](std::size_t i) const { return slokas_[i]; }

  std::optional<std::size_t> find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
  }

  // Indices of the ślokas of `doc`, in corpus order.
  const std::vector<std::size_t> &doc_members(const std::string &doc) const {
    static const std::vector<std::size_t> kEmpty;
    auto it = docs_.find(doc);
    return it == docs_.end() ? kEmpty : it->second;
  }

  // Position of śloka `i` within its document.
  std::size_t position_in_doc(std::size_t i) const { return position_in_doc_[i]; }

  std::size_t doc_count() const { return docs_.size(); }

  bool operator==(const Corpus &other) const { return slokas_ == other.slokas_; }

 private:
  std::vector<Sloka> slokas_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::map<std::string, std::vector<std::size_t>> docs_;
  std::vector<std::size_t> position_in_doc_;
};

// ---------------------------------------------------------------------------
// JSONL reading and writing.

struct LoadOptions {
  // Ignore unknown fields instead of rejecting them.
  bool lenient = false;
};

namespace detail {

inline void check_known_keys(const nlohmann::json &obj,
                             std::initializer_list<std::string_view> known,
                             std::string_view where, bool lenient) {
  if (lenient) return;
  for (const auto &item : obj.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw ValidationError(std::string(where) + ": unknown field '" +
                            item.key() + "'");
    }
  }
}

inline std::string require_string(const nlohmann::json &obj, const char *field,
                                  std::string_view where) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_string()) {
    throw ValidationError(std::string(where) + ": field '" + field +
                          "' must be a string");
  }
  return it->get<std::string>();
}

inline const nlohmann::json *nullable(const nlohmann::json &obj,
                                      const char *field) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

}  // namespace detail

// Builds a token from its JSON object. `where` prefixes error messages.
inline AnnotatedToken token_from_json(const nlohmann::json &j,
                                      std::string_view where,
                                      const LoadOptions &opts = {}) {
  using detail::nullable;
  using detail::require_string;
  if (!j.is_object()) {
    throw ValidationError(std::string(where) + ": token must be an object");
  }
  detail::check_known_keys(
      j, {"surface", "root", "pos", "case", "number", "gender", "compound"},
      where, opts.lenient);

  AnnotatedToken tok;
  tok.surface = require_string(j, "surface", where);
  tok.root = require_string(j, "root", where);
  if (tok.root.empty()) {
    throw ValidationError(std::string(where) + ": field 'root' is empty");
  }
  const std::string pos = require_string(j, "pos", where);
  auto parsed_pos = parse_pos(pos);
  if (!parsed_pos) {
    throw ValidationError(std::string(where) + ": field 'pos' has invalid value '" +
                          pos + "'");
  }
  tok.pos = *parsed_pos;

  if (const auto *c = nullable(j, "case")) {
    if (!c->is_number_integer() || c->get<int>() < 1 || c->get<int>() > 8) {
      throw ValidationError(std::string(where) +
                            ": field 'case' must be an integer in 1..8");
    }
    tok.morph.grammatical_case = c->get<int>();
    if (is_caseless_pos(tok.pos)) {
      throw ValidationError(std::string(where) + ": field 'case' not allowed for pos '" +
                            pos + "'");
    }
  }
  if (const auto *n = nullable(j, "number")) {
    auto v = n->is_string() ? parse_number(n->get<std::string>()) : std::nullopt;
    if (!v) {
      throw ValidationError(std::string(where) +
                            ": field 'number' must be one of sg, du, pl");
    }
    tok.morph.number = v;
  }
  if (const auto *g = nullable(j, "gender")) {
    auto v = g->is_string() ? parse_gender(g->get<std::string>()) : std::nullopt;
    if (!v) {
      throw ValidationError(std::string(where) +
                            ": field 'gender' must be one of m, f, n");
    }
    tok.morph.gender = v;
  }
  if (const auto *c = nullable(j, "compound")) {
    if (!c->is_number_integer()) {
      throw ValidationError(std::string(where) +
                            ": field 'compound' must be an integer");
    }
    tok.compound = c->get<int>();
  }
  return tok;
}

inline nlohmann::ordered_json token_to_json(const AnnotatedToken &tok) {
  nlohmann::ordered_json j;
  j["surface"] = tok.surface;
  j["root"] = tok.root;
  j["pos"] = std::string(to_string(tok.pos));
  const auto &m = tok.morph;
  j["case"] = m.grammatical_case ? nlohmann::ordered_json(*m.grammatical_case)
                                 : nlohmann::ordered_json(nullptr);
  j["number"] = m.number ? nlohmann::ordered_json(std::string(to_string(*m.number)))
                         : nlohmann::ordered_json(nullptr);
  j["gender"] = m.gender ? nlohmann::ordered_json(std::string(to_string(*m.gender)))
                         : nlohmann::ordered_json(nullptr);
  j["compound"] = tok.compound ? nlohmann::ordered_json(*tok.compound)
                               : nlohmann::ordered_json(nullptr);
  return j;
}

// Parses a JSON array of tokens (the question-token format).
inline std::vector<AnnotatedToken> tokens_from_json(const nlohmann::json &j,
                                                    std::string_view where,
                                                    const LoadOptions &opts = {}) {
  if (!j.is_array()) {
    throw ValidationError(std::string(where) + ": 'tokens' must be an array");
  }
  std::vector<AnnotatedToken> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(token_from_json(
        j[i], std::string(where) + ", token " + std::to_string(i), opts));
  }
  return out;
}

inline Sloka sloka_from_json(const nlohmann::json &j, std::string_view where,
                             const LoadOptions &opts = {}) {
  if (!j.is_object()) {
    throw ValidationError(std::string(where) + ": record must be an object");
  }
  detail::check_known_keys(j, {"sloka_id", "chapter", "doc", "text", "tokens"},
                           where, opts.lenient);
  Sloka s;
  s.id = detail::require_string(j, "sloka_id", where);
  s.chapter = detail::require_string(j, "chapter", where);
  s.doc = detail::require_string(j, "doc", where);
  s.text = detail::require_string(j, "text", where);
  auto it = j.find("tokens");
  if (it == j.end()) {
    throw ValidationError(std::string(where) + ": field 'tokens' is missing");
  }
  s.tokens = tokens_from_json(*it, where, opts);
  return s;
}

inline nlohmann::ordered_json sloka_to_json(const Sloka &s) {
  nlohmann::ordered_json j;
  j["sloka_id"] = s.id;
  j["chapter"] = s.chapter;
  j["doc"] = s.doc;
  j["text"] = s.text;
  auto tokens = nlohmann::ordered_json::array();
  for (const auto &t : s.tokens) tokens.push_back(token_to_json(t));
  j["tokens"] = std::move(tokens);
  return j;
}

// Reads one śloka record per line. Blank lines are skipped.
inline Corpus parse_corpus(std::istream &in, const LoadOptions &opts = {}) {
  std::vector<Sloka> slokas;
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
    slokas.push_back(sloka_from_json(j, "line " + std::to_string(line_no), opts));
  }
  return Corpus(std::move(slokas));
}

inline Corpus load_corpus(const std::string &path, const LoadOptions &opts = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file '" + path + "'");
  return parse_corpus(in, opts);
}

// Canonical JSONL: fixed key order, explicit nulls, one record per line.
inline std::string serialize_corpus(const Corpus &corpus) {
  std::string out;
  for (const auto &s : corpus.slokas()) {
    out += sloka_to_json(s).dump();
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Normalization.

struct CompoundNormalization {
  std::vector<AnnotatedToken> tokens;
  // Set when the last member had no case and nothing was changed.
  bool caseless_head = false;
};

// Members of one split compound adopt the case of the last member and become
// singular. Genders are untouched.
inline CompoundNormalization normalize_compound_members(
    std::span<const AnnotatedToken> members) {
  if (members.empty()) throw Error("normalize_compound_members: empty compound");
  CompoundNormalization result{{members.begin(), members.end()}, false};
  const auto head_case = members.back().morph.grammatical_case;
  if (!head_case) {
    result.caseless_head = true;
    return result;
  }
  for (std::size_t i = 0; i < result.tokens.size(); ++i) {
    auto &tok = result.tokens[i];
    if (i + 1 < result.tokens.size() && !is_caseless_pos(tok.pos)) {
      tok.morph.grammatical_case = head_case;
    }
    tok.morph.number = Number::kSingular;
  }
  return result;
}

// Applies normalize_compound_members to every compound group of a token list.
// Returns the number of groups left unchanged because of a caseless head.
inline std::size_t normalize_compounds(std::vector<AnnotatedToken> &tokens) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].compound) groups[*tokens[i].compound].push_back(i);
  }
  std::size_t warnings = 0;
  for (const auto &[id, idx] : groups) {
    std::vector<AnnotatedToken> members;
    members.reserve(idx.size());
    for (auto i : idx) members.push_back(tokens[i]);
    auto norm = normalize_compound_members(members);
    warnings += norm.caseless_head ? 1 : 0;
    for (std::size_t k = 0; k < idx.size(); ++k) tokens[idx[k]] = norm.tokens[k];
  }
  return warnings;
}

inline Corpus normalize_compounds(const Corpus &corpus,
                                  std::size_t *warnings = nullptr) {
  std::vector<Sloka> slokas = corpus.slokas();
  std::size_t total = 0;
  for (auto &s : slokas) total += normalize_compounds(s.tokens);
  if (warnings) *warnings = total;
  return Corpus(std::move(slokas));
}

inline void reclassify_pronouns(std::vector<AnnotatedToken> &tokens,
                                const RootSet &pronouns) {
  for (auto &tok : tokens) {
    if (pronouns.contains(tok.root)) tok.pos = Pos::kPronoun;
  }
}

// The analyser does not separate pronouns from nouns; a fixed pronoun list
// corrects that.
inline Corpus reclassify_pronouns(const Corpus &corpus, const RootSet &pronouns) {
  if (pronouns.empty()) throw Error("reclassify_pronouns: empty pronoun set");
  std::vector<Sloka> slokas = corpus.slokas();
  for (auto &s : slokas) reclassify_pronouns(s.tokens, pronouns);
  return Corpus(std::move(slokas));
}

// ---------------------------------------------------------------------------
// Frequencies and statistics.

using RootCount = std::pair<Root, std::size_t>;

// Noun counts by root, descending by count, ties broken by root.
inline std::vector<RootCount> noun_frequencies(const Corpus &corpus) {
  std::map<Root, std::size_t> counts;
  for (const auto &s : corpus.slokas()) {
    for (const auto &t : s.tokens) {
      if (t.is_noun()) ++counts[t.root];
    }
  }
  std::vector<RootCount> out(counts.begin(), counts.end());
  std::stable_sort(out.begin(), out.end(), [](const auto &a, const auto &b) {
    return a.second > b.second;
  });
  return out;
}

inline RootSet top_property_words(const Corpus &corpus, std::size_t k = 50) {
  if (k == 0) throw Error("top_property_words: k must be positive");
  auto freq = noun_frequencies(corpus);
  RootSet out;
  for (std::size_t i = 0; i < freq.size() && i < k; ++i) out.insert(freq[i].first);
  return out;
}

struct CorpusStats {
  std::size_t docs = 0;
  std::size_t slokas = 0;
  std::size_t words_total = 0;
  std::size_t words_unique = 0;
  std::size_t nouns_total = 0;
  std::size_t nouns_unique = 0;

  bool operator==(const CorpusStats &) const = default;
};

inline CorpusStats corpus_stats(const Corpus &corpus) {
  CorpusStats st;
  st.docs = corpus.doc_count();
  st.slokas = corpus.size();
  RootSet words, nouns;
  for (const auto &s : corpus.slokas()) {
    for (const auto &t : s.tokens) {
      ++st.words_total;
      words.insert(t.root);
      if (t.is_noun()) {
        ++st.nouns_total;
        nouns.insert(t.root);
      }
    }
  }
  st.words_unique = words.size();
  st.nouns_unique = nouns.size();
  return st;
}

}  // namespace kgq
