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

#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgq/corpus.hpp"
#include "kgq/error.hpp"
#include "kgq/kg_store.hpp"
#include "kgq/lexicon.hpp"
#include "kgq/question.hpp"

namespace kgq {

// Gold positives (P), system positives (P'), true positives (TP).
struct TaskCounts {
  std::size_t total = 0;
  std::size_t found = 0;
  std::size_t correct = 0;
  std::optional<std::size_t> test_size;

  void validate() const {
    if (correct > total || correct > found) {
      throw ValidationError("task counts: correct exceeds total or found");
    }
  }

  bool operator==(const TaskCounts &) const = default;
};

struct Prf {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

inline Prf prf(const TaskCounts &c) {
  c.validate();
  Prf r;
  r.precision = c.found == 0 ? 0.0 : static_cast<double>(c.correct) / static_cast<double>(c.found);
  r.recall = c.total == 0 ? 0.0 : static_cast<double>(c.correct) / static_cast<double>(c.total);
  r.f1 = r.precision + r.recall == 0 ? 0.0 : 2 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

// (TP + TN) / N with TN = N - P - P' + TP.
inline double accuracy(const TaskCounts &c) {
  c.validate();
  if (!c.test_size) throw Error("accuracy: test size missing");
  const std::size_t n = *c.test_size;
  if (n == 0 || n + c.correct < c.total + c.found) {
    throw Error("accuracy: test size smaller than P + P' - TP");
  }
  const std::size_t true_negatives = n + c.correct - c.total - c.found;
  return static_cast<double>(c.correct + true_negatives) / static_cast<double>(n);
}

// Half-up rounding to two decimals, as printed in reports.
inline double round2(double x) { return std::floor(x * 100.0 + 0.5 + 1e-9) / 100.0; }

// ---------------------------------------------------------------------------
// Question-answering evaluation.

struct GoldQuestion {
  std::string id;
  std::vector<AnnotatedToken> tokens;
  RenderedPattern gold_pattern;
  std::set<Root> gold_answers;
};

inline std::vector<GoldQuestion> parse_gold_questions(std::istream &in) {
  std::vector<GoldQuestion> out;
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
    std::string where = "gold question on line " + std::to_string(line_no);
    if (j.is_object() && j.contains("id") && j["id"].is_string()) {
      where = "gold question '" + j["id"].get<std::string>() + "'";
    }
    try {
      GoldQuestion q;
      q.id = j.at("id").get<std::string>();
      q.tokens = tokens_from_json(j.at("tokens"), where);
      for (const auto &t : j.at("gold_pattern")) {
        auto triple = t.get<std::vector<std::string>>();
        if (triple.size() != 3) throw ValidationError(where + ": patterns are [s, p, o]");
        q.gold_pattern.push_back({triple[0], triple[1], triple[2]});
      }
      for (const auto &a : j.at("gold_answers")) q.gold_answers.insert(a.get<std::string>());
      if (q.gold_pattern.empty() || q.gold_answers.empty()) {
        throw ValidationError(where + ": empty gold_pattern or gold_answers");
      }
      out.push_back(std::move(q));
    } catch (const nlohmann::json::exception &e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<GoldQuestion> load_gold_questions(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open questions file '" + path + "'");
  return parse_gold_questions(in);
}

struct QuestionOutcome {
  std::string id;
  bool parsed = false;
  bool parse_correct = false;
  std::string parse_error;
  RenderedPattern pattern;
  std::set<Root> answers;
  bool answer_correct = false;
};

struct QaTaskReport {
  TaskCounts parse, conditional, overall;
  std::vector<QuestionOutcome> questions;
};

// QParse counts correctly formed patterns; QCond scores answers among those;
// QAll scores answers over every question regardless of the parse.
inline QaTaskReport evaluate_qa(const std::vector<GoldQuestion> &gold, const KnowledgeGraph &kg,
                                const RelationLexicon &lex) {
  QaTaskReport report;
  report.parse.total = report.overall.total = gold.size();
  for (const auto &g : gold) {
    QuestionOutcome o;
    o.id = g.id;
    try {
      const auto parsed = parse_question(g.tokens, lex);
      o.parsed = true;
      o.pattern = render(parsed.triplets);
      o.parse_correct = o.pattern == g.gold_pattern;
      o.answers = answer_question(kg, parsed, lex).values();
      o.answer_correct = !o.answers.empty() && o.answers == g.gold_answers;
    } catch (const UnparsableQuestion &e) {
      o.parse_error = e.what();
    }
    const bool answered = !o.answers.empty();
    report.parse.found += o.parsed;
    report.parse.correct += o.parse_correct;
    report.overall.found += answered;
    report.overall.correct += o.answer_correct;
    if (o.parse_correct) {
      ++report.conditional.total;
      report.conditional.found += answered;
      report.conditional.correct += o.answer_correct;
    }
    report.questions.push_back(std::move(o));
  }
  return report;
}

inline nlohmann::ordered_json counts_to_json(const std::string &task, const TaskCounts &c) {
  const auto r = prf(c);
  nlohmann::ordered_json j;
  j["task"] = task;
  j["total"] = c.total;
  j["found"] = c.found;
  j["correct"] = c.correct;
  j["precision"] = round2(r.precision);
  j["recall"] = round2(r.recall);
  j["f1"] = round2(r.f1);
  return j;
}

inline nlohmann::ordered_json qa_report_to_json(const QaTaskReport &r) {
  nlohmann::ordered_json j;
  j["tasks"] = nlohmann::ordered_json::array({counts_to_json("QParse", r.parse),
                                              counts_to_json("QCond", r.conditional),
                                              counts_to_json("QAll", r.overall)});
  auto questions = nlohmann::ordered_json::array();
  for (const auto &q : r.questions) {
    nlohmann::ordered_json item;
    item["id"] = q.id;
    item["parsed"] = q.parsed;
    if (!q.parsed) item["error"] = q.parse_error;
    item["pattern"] = q.pattern;
    item["parse_correct"] = q.parse_correct;
    item["answers"] = q.answers;
    item["answer_correct"] = q.answer_correct;
    questions.push_back(std::move(item));
  }
  j["questions"] = std::move(questions);
  return j;
}

}  // namespace kgq
