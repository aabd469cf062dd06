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

// kgq: build a relationship knowledge graph from an annotated Sanskrit corpus,
// answer questions against it, and find synonyms in glossary texts.

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kgq/kgq.hpp"

#ifndef KGQ_DEFAULT_LEXICON
#define KGQ_DEFAULT_LEXICON ""
#endif

namespace kgq {
namespace {

using ojson = nlohmann::ordered_json;

// Values gathered from flags, then from --config, then from defaults.
struct RunConfig {
  std::string config;
  std::string corpus, lexicon, kg, labels, questions, out, report, question_tokens;
  std::string properties = "top50";
  std::string scenario, chapter_a, chapter_b;
  int filter = 2;
  int window = 1;
  bool enhance = false;
  bool lenient = false;
  bool tsv = false;
  bool quiet = false;
  std::size_t epochs = Hyperparameters{}.epochs;
  double learning_rate = Hyperparameters{}.learning_rate;
  double l2 = Hyperparameters{}.l2;
};

RunConfig cfg;

void log(const std::string &msg) {
  if (!cfg.quiet) std::cerr << "kgq: " << msg << "\n";
}

// Writes through a temporary sibling and renames, so a failed run never
// leaves a partial file behind.
void write_file(const std::string &path, const std::string &content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw Error("write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename into '" + path + "': " + ec.message());
  }
}

void emit(const std::string &content) { std::cout << content << std::flush; }

std::string dump(const ojson &j) { return j.dump(2) + "\n"; }

std::string require(const std::string &value, const char *flag) {
  if (value.empty()) throw Error(std::string("missing required option ") + flag);
  return value;
}

// Flag, then config, then $KGQ_LEXICON, then the lexicon shipped with the
// sources.
std::string lexicon_path() {
  if (!cfg.lexicon.empty()) return cfg.lexicon;
  if (const char *env = std::getenv("KGQ_LEXICON"); env && *env) return env;
  if (std::string builtin = KGQ_DEFAULT_LEXICON;
      !builtin.empty() && std::filesystem::exists(builtin)) {
    return builtin;
  }
  throw Error("no lexicon: pass --lexicon or set KGQ_LEXICON");
}

RelationLexicon lexicon() {
  const auto path = lexicon_path();
  log("lexicon " + path);
  return load_lexicon(path);
}

Corpus corpus() {
  auto c = load_corpus(require(cfg.corpus, "--corpus"), {.lenient = cfg.lenient});
  log("loaded " + std::to_string(c.size()) + " slokas from " + cfg.corpus);
  return c;
}

// Pronoun reclassification followed by compound normalization.
Corpus prepare(const Corpus &raw, const RelationLexicon &lex, std::size_t *warnings = nullptr) {
  std::size_t w = 0;
  Corpus out = raw.empty() ? raw : normalize_compounds(reclassify_pronouns(raw, lex.pronouns()), &w);
  if (w) log(std::to_string(w) + " compound(s) with a caseless last member left unchanged");
  if (warnings) *warnings = w;
  return out;
}

std::vector<AnnotatedToken> question_from_json(const nlohmann::json &j, const std::string &where) {
  if (j.is_object() && j.contains("tokens")) return tokens_from_json(j["tokens"], where);
  return tokens_from_json(j, where);
}

// ---------------------------------------------------------------------------

int cmd_stats() {
  Corpus c = corpus();
  if (!cfg.lexicon.empty() && !c.empty()) c = reclassify_pronouns(c, lexicon().pronouns());
  const auto st = corpus_stats(c);
  if (cfg.tsv) {
    std::ostringstream out;
    out << "docs\t" << st.docs << "\nslokas\t" << st.slokas << "\nwords_total\t" << st.words_total
        << "\nwords_unique\t" << st.words_unique << "\nnouns_total\t" << st.nouns_total
        << "\nnouns_unique\t" << st.nouns_unique << "\n";
    emit(out.str());
    return 0;
  }
  ojson j;
  j["docs"] = st.docs;
  j["slokas"] = st.slokas;
  j["words_total"] = st.words_total;
  j["words_unique"] = st.words_unique;
  j["nouns_total"] = st.nouns_total;
  j["nouns_unique"] = st.nouns_unique;
  emit(dump(j));
  return 0;
}

ojson kg_summary(const KnowledgeGraph &kg) {
  ojson j;
  j["entities"] = kg.entities().size();
  j["edges"] = kg.edge_count();
  j["relation_types"] = kg.relation_types().size();
  return j;
}

int cmd_build_kg() {
  if (cfg.window < 0) throw Error("--window must be non-negative");
  const auto filter = FilterSpec::from_id(cfg.filter);
  const auto lex = lexicon();
  const Corpus raw = corpus();
  std::size_t warnings = 0;
  const Corpus c = prepare(raw, lex, &warnings);
  const auto direct = build_kg(extract_triplets(c, lex, filter, static_cast<std::size_t>(cfg.window)));
  KnowledgeGraph kg = direct;
  if (cfg.enhance) kg = enhance_with_inverses(direct, lex, infer_entity_genders(c, direct));
  write_file(require(cfg.out, "--out"), serialize_kg(kg));
  log("wrote " + std::to_string(kg.edge_count()) + " edges to " + cfg.out);

  if (cfg.tsv) {
    std::ostringstream out;
    out << "stage\tentities\tedges\trelation_types\n";
    const KnowledgeGraph *stages[] = {&direct, &kg};
    for (const auto *g : stages) {
      out << (g == &direct ? "before" : "after") << "\t" << g->entities().size() << "\t"
          << g->edge_count() << "\t" << g->relation_types().size() << "\n";
    }
    emit(out.str());
    return 0;
  }
  ojson j;
  j["filter"] = cfg.filter;
  j["window"] = cfg.window;
  j["enhanced"] = cfg.enhance;
  j["compound_warnings"] = warnings;
  j["before"] = kg_summary(direct);
  j["after"] = kg_summary(kg);
  emit(dump(j));
  return 0;
}

std::string render_answer(const AnswerSet &a) {
  if (!cfg.tsv) return answer_to_json(a).dump() + "\n";
  std::string out;
  for (const auto &ans : a.answers) out += ans.value + "\t" + std::to_string(ans.multiplicity) + "\n";
  return out;
}

int cmd_ask() {
  const auto lex = lexicon();
  const auto kg = load_kg(require(cfg.kg, "--kg"));
  const auto &path = require(cfg.question_tokens, "--question-tokens");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open question file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError(0, path + ": " + e.what());
  }
  const auto q = parse_question(question_from_json(j, path), lex);
  log("pattern " + ojson(render(q.triplets)).dump());
  emit(render_answer(answer_question(kg, q, lex)));
  return 0;
}

int cmd_repl() {
  const auto lex = lexicon();
  const auto kg = load_kg(require(cfg.kg, "--kg"));
  std::string line;
  std::size_t line_no = 0;
  int status = 0;
  while (std::getline(std::cin, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto tokens = question_from_json(nlohmann::json::parse(line), "input line " + std::to_string(line_no));
      emit(render_answer(answer_question(kg, parse_question(tokens, lex), lex)));
    } catch (const std::exception &e) {
      // A bad question is reported in-band; the session goes on.
      ojson err;
      err["error"] = e.what();
      emit(err.dump() + "\n");
      status = 1;
    }
  }
  return status;
}

int cmd_eval_qa() {
  const auto lex = lexicon();
  const auto kg = load_kg(require(cfg.kg, "--kg"));
  const auto gold = load_gold_questions(require(cfg.questions, "--questions"));
  const auto report = evaluate_qa(gold, kg, lex);
  const auto j = qa_report_to_json(report);
  if (!cfg.report.empty()) write_file(cfg.report, dump(j));
  if (cfg.tsv) {
    std::ostringstream out;
    out << "task\ttotal\tfound\tcorrect\tprecision\trecall\tf1\n";
    for (const auto &t : j["tasks"]) {
      out << t["task"].get<std::string>() << "\t" << t["total"] << "\t" << t["found"] << "\t"
          << t["correct"] << "\t" << t["precision"] << "\t" << t["recall"] << "\t" << t["f1"] << "\n";
    }
    emit(out.str());
  } else {
    emit(dump(cfg.report.empty() ? j : ojson{{"tasks", j["tasks"]}}));
  }
  return 0;
}

// "topK" selects the K most frequent nouns; anything else is a file with one
// root per line.
RootSet property_words(const Corpus &c) {
  const auto &spec = cfg.properties;
  if (spec.rfind("top", 0) == 0 && spec.size() > 3 &&
      spec.find_first_not_of("0123456789", 3) == std::string::npos) {
    const auto k = std::stoul(spec.substr(3));
    if (k == 0) throw Error("--properties: k must be at least 1");
    return top_property_words(c, k);
  }
  std::ifstream in(spec, std::ios::binary);
  if (!in) throw Error("cannot open properties file '" + spec + "'");
  RootSet out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.insert(line);
  }
  return out;
}

ojson counts_json(const TaskCounts &c) {
  const auto r = prf(c);
  ojson j;
  j["P"] = c.total;
  j["P'"] = c.found;
  j["TP"] = c.correct;
  if (c.test_size) j["N"] = *c.test_size;
  j["precision"] = round2(r.precision);
  j["recall"] = round2(r.recall);
  j["f1"] = round2(r.f1);
  if (c.test_size) j["accuracy"] = round2(accuracy(c));
  return j;
}

int cmd_synonyms_classify() {
  const auto lex = lexicon();
  const Corpus c = prepare(corpus(), lex);
  const auto labels = load_labels(require(cfg.labels, "--labels"));
  const auto scenario = parse_scenario(require(cfg.scenario, "--scenario"));
  const auto split = make_scenario(
      c, labels, scenario, cfg.chapter_a.empty() ? std::nullopt : std::optional(cfg.chapter_a),
      cfg.chapter_b.empty() ? std::nullopt : std::optional(cfg.chapter_b));
  const auto props = property_words(c);

  std::map<std::string, bool> label_of;
  for (const auto &l : labels) label_of[l.sloka_id] = l.is_synonym_sloka;
  auto examples = [&](const std::vector<std::size_t> &idx) {
    std::vector<LabeledExample> out;
    for (auto i : idx) out.push_back({featurize(c[i], props), label_of.at(c[i].id)});
    return out;
  };
  const Hyperparameters hyper{cfg.epochs, cfg.learning_rate, cfg.l2};
  const auto model = train_classifier(examples(split.train), hyper);

  TaskCounts counts;
  counts.test_size = split.test.size();
  ojson predictions = ojson::array();
  for (const auto &e : examples(split.test)) {
    const bool predicted = model.classify(e.features);
    counts.total += e.label;
    counts.found += predicted;
    counts.correct += e.label && predicted;
  }
  for (auto i : split.test) {
    ojson p;
    p["sloka_id"] = c[i].id;
    p["label"] = label_of.at(c[i].id);
    p["predicted"] = model.classify(featurize(c[i], props));
    predictions.push_back(std::move(p));
  }

  ojson j;
  j["scenario"] = cfg.scenario;
  j["chapter_a"] = split.chapter_a;
  j["chapter_b"] = split.chapter_b;
  j["train_size"] = split.train.size();
  j["test_size"] = split.test.size();
  j["hyperparameters"] = {{"epochs", hyper.epochs}, {"learning_rate", hyper.learning_rate}, {"l2", hyper.l2}};
  j["final_loss"] = model.loss_history.back();
  j["counts"] = counts_json(counts);
  ojson full = j;
  full["predictions"] = std::move(predictions);
  if (!cfg.report.empty()) write_file(cfg.report, dump(full));
  if (cfg.tsv) {
    const auto &k = j["counts"];
    std::ostringstream out;
    out << "scenario\ttrain\ttest\tP\tP'\tTP\tprecision\trecall\tf1\taccuracy\n"
        << cfg.scenario << "\t" << split.train.size() << "\t" << split.test.size() << "\t" << k["P"]
        << "\t" << k["P'"] << "\t" << k["TP"] << "\t" << k["precision"] << "\t" << k["recall"]
        << "\t" << k["f1"] << "\t" << k["accuracy"] << "\n";
    emit(out.str());
  } else {
    emit(dump(j));
  }
  return 0;
}

int cmd_synonyms_pairs() {
  const auto lex = lexicon();
  const Corpus c = prepare(corpus(), lex);
  const auto props = property_words(c);

  std::optional<std::vector<SlokaLabel>> labels;
  if (!cfg.labels.empty()) labels = load_labels(cfg.labels);
  std::set<std::string> selected;
  std::vector<std::vector<Root>> gold_groups;
  if (labels) {
    for (const auto &l : *labels) {
      if (!l.is_synonym_sloka) continue;
      selected.insert(l.sloka_id);
      gold_groups.insert(gold_groups.end(), l.groups.begin(), l.groups.end());
    }
  }

  std::map<SynonymPair, std::set<std::string>> found;
  std::size_t considered = 0;
  for (const auto &s : c.slokas()) {
    if (labels && !selected.contains(s.id)) continue;
    ++considered;
    for (const auto &p : extract_synonym_pairs(s, props)) found[p].insert(s.id);
  }
  log(std::to_string(found.size()) + " pairs from " + std::to_string(considered) + " slokas");

  std::string listing;
  if (cfg.tsv) {
    for (const auto &[p, ids] : found) {
      listing += p.first + "\t" + p.second + "\t";
      bool first = true;
      for (const auto &id : ids) {
        listing += (first ? "" : ",") + id;
        first = false;
      }
      listing += "\n";
    }
  } else {
    ojson arr = ojson::array();
    for (const auto &[p, ids] : found) arr.push_back({{"a", p.first}, {"b", p.second}, {"slokas", ids}});
    listing = dump(ojson{{"pairs", arr}});
  }

  ojson summary;
  summary["slokas"] = considered;
  summary["properties"] = props.size();
  summary["pairs"] = found.size();
  if (!gold_groups.empty()) {
    std::set<SynonymPair> pairs;
    for (const auto &[p, ids] : found) pairs.insert(p);
    const auto gold = group_pairs(gold_groups);
    TaskCounts counts{gold.size(), pairs.size(), 0, std::nullopt};
    for (const auto &p : pairs) counts.correct += gold.contains(p);
    const auto cov = group_coverage(gold_groups, pairs);
    summary["groups"] = cov.groups;
    summary["groups_covered"] = cov.covered;
    summary["coverage"] = round2(cov.fraction());
    summary["pair_counts"] = counts_json(counts);
  }

  if (cfg.out.empty()) {
    emit(listing);
  } else {
    write_file(cfg.out, listing);
    emit(dump(summary));
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Configuration file support.

struct ConfigKey {
  std::string key;
  CLI::Option *option;  // nullptr when the key has no flag in this command
  std::function<void(const nlohmann::json &)> assign;
};

template <typename T>
CLI::Option *bind_option(std::vector<ConfigKey> &keys, CLI::App *app, const std::string &key,
               const std::string &flag, T &field, const std::string &help) {
  CLI::Option *opt;
  if constexpr (std::is_same_v<T, bool>) {
    opt = app->add_flag(flag, field, help);
  } else {
    opt = app->add_option(flag, field, help);
  }
  keys.push_back({key, opt, [&field, key](const nlohmann::json &j) {
                    try {
                      field = j.get<T>();
                    } catch (const nlohmann::json::exception &) {
                      throw Error("config: bad value for '" + key + "'");
                    }
                  }});
  return opt;
}

void apply_config(const std::vector<ConfigKey> &keys) {
  if (cfg.config.empty()) return;
  std::ifstream in(cfg.config, std::ios::binary);
  if (!in) throw Error("cannot open config '" + cfg.config + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError(0, "config: " + std::string(e.what()));
  }
  if (!j.is_object()) throw Error("config: top level must be an object");
  for (const auto &[k, v] : j.items()) {
    bool known = false;
    for (const auto &key : keys) {
      if (key.key != k) continue;
      known = true;
      if (key.option->count() == 0) key.assign(v);
    }
    if (!known) log("config key '" + k + "' ignored by this command");
  }
}

int run(int argc, char **argv) {
  CLI::App app{"Relationship knowledge graphs and question answering over annotated Sanskrit text"};
  app.require_subcommand(1);
  app.add_option("--config", cfg.config, "JSON run configuration; flags take precedence");
  app.add_flag("--tsv", cfg.tsv, "Tab-separated output instead of JSON");
  app.add_flag("-q,--quiet", cfg.quiet, "No log messages on stderr");

  std::map<CLI::App *, std::vector<ConfigKey>> keys;
  std::map<CLI::App *, std::function<int()>> actions;

  auto corpus_opts = [&](CLI::App *sub) {
    bind_option(keys[sub], sub, "corpus", "--corpus", cfg.corpus, "Annotated corpus (JSONL)");
    bind_option(keys[sub], sub, "lenient", "--lenient", cfg.lenient, "Ignore unknown fields in the corpus");
  };
  auto lexicon_opt = [&](CLI::App *sub) {
    bind_option(keys[sub], sub, "lexicon", "--lexicon", cfg.lexicon, "Relation lexicon (JSON); default $KGQ_LEXICON");
  };

  auto *stats = app.add_subcommand("stats", "Corpus statistics");
  corpus_opts(stats);
  bind_option(keys[stats], stats, "lexicon", "--lexicon", cfg.lexicon, "Reclassify pronouns with this lexicon first");
  actions[stats] = cmd_stats;

  auto *build = app.add_subcommand("build-kg", "Extract triplets and write a knowledge graph");
  corpus_opts(build);
  lexicon_opt(build);
  bind_option(keys[build], build, "filter", "--filter", cfg.filter, "Extraction filter 1-4")->check(CLI::Range(1, 4));
  bind_option(keys[build], build, "window", "--window", cfg.window, "Context window in slokas")->check(CLI::NonNegativeNumber);
  bind_option(keys[build], build, "out", "--out", cfg.out, "Output KG file (TSV)");
  bind_option(keys[build], build, "enhance", "--enhance", cfg.enhance, "Add inferred inverse relations");
  actions[build] = cmd_build_kg;

  auto *ask = app.add_subcommand("ask", "Answer one annotated question");
  lexicon_opt(ask);
  bind_option(keys[ask], ask, "kg", "--kg", cfg.kg, "Knowledge graph file");
  bind_option(keys[ask], ask, "question_tokens", "--question-tokens", cfg.question_tokens, "Question tokens (JSON)");
  actions[ask] = cmd_ask;

  auto *repl = app.add_subcommand("repl", "Answer annotated questions read one per line from stdin");
  lexicon_opt(repl);
  bind_option(keys[repl], repl, "kg", "--kg", cfg.kg, "Knowledge graph file");
  actions[repl] = cmd_repl;

  auto *eval = app.add_subcommand("eval-qa", "Score question answering against gold questions");
  lexicon_opt(eval);
  bind_option(keys[eval], eval, "kg", "--kg", cfg.kg, "Knowledge graph file");
  bind_option(keys[eval], eval, "questions", "--questions", cfg.questions, "Gold questions (JSONL)");
  bind_option(keys[eval], eval, "report", "--report", cfg.report, "Write the full report here");
  actions[eval] = cmd_eval_qa;

  auto *syn = app.add_subcommand("synonyms", "Synonym sloka classification and pair extraction");
  syn->require_subcommand(1);
  auto *classify = syn->add_subcommand("classify", "Train and test the synonym-sloka classifier");
  corpus_opts(classify);
  lexicon_opt(classify);
  bind_option(keys[classify], classify, "labels", "--labels", cfg.labels, "Sloka labels (JSONL)");
  bind_option(keys[classify], classify, "scenario", "--scenario", cfg.scenario, "S1, S2, S3 or S4")
      ->check(CLI::IsMember({"S1", "S2", "S3", "S4"}));
  bind_option(keys[classify], classify, "chapter_a", "--chapter-a", cfg.chapter_a, "First chapter");
  bind_option(keys[classify], classify, "chapter_b", "--chapter-b", cfg.chapter_b, "Second chapter");
  bind_option(keys[classify], classify, "properties", "--properties", cfg.properties, "topK or a file of roots");
  bind_option(keys[classify], classify, "epochs", "--epochs", cfg.epochs, "Gradient steps");
  bind_option(keys[classify], classify, "learning_rate", "--learning-rate", cfg.learning_rate, "Step size");
  bind_option(keys[classify], classify, "l2", "--l2", cfg.l2, "L2 penalty");
  bind_option(keys[classify], classify, "report", "--report", cfg.report, "Write the full report here");
  actions[classify] = cmd_synonyms_classify;

  auto *pairs = syn->add_subcommand("pairs", "Extract synonym pairs");
  corpus_opts(pairs);
  lexicon_opt(pairs);
  bind_option(keys[pairs], pairs, "properties", "--properties", cfg.properties, "topK or a file of roots");
  bind_option(keys[pairs], pairs, "labels", "--labels", cfg.labels, "Restrict to labeled synonym slokas and score");
  bind_option(keys[pairs], pairs, "out", "--out", cfg.out, "Output file");
  actions[pairs] = cmd_synonyms_pairs;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  CLI::App *chosen = nullptr;
  for (auto &[sub, action] : actions) {
    if (sub->parsed()) chosen = sub;
  }
  if (!chosen) return app.exit(CLI::CallForHelp());
  try {
    apply_config(keys[chosen]);
    if (cfg.filter < 1 || cfg.filter > 4) throw Error("filter must be in 1..4");
    if (cfg.window < 0) throw Error("window must be non-negative");
    return actions[chosen]();
  } catch (const std::exception &e) {
    std::cerr << "kgq: error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace
}  // namespace kgq

int main(int argc, char **argv) { return kgq::run(argc, argv); }
