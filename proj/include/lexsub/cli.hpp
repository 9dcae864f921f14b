/*
 * Copyright 2026 the lexsub authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef LEXSUB_CLI_HPP_
#define LEXSUB_CLI_HPP_

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lexsub/backends.hpp"
#include "lexsub/core.hpp"
#include "lexsub/data_io.hpp"
#include "lexsub/decoder.hpp"
#include "lexsub/metrics.hpp"
#include "lexsub/ranker.hpp"

namespace lexsub::cli {

// Exit codes: 0 success, 2 usage, 3 data error, 4 backend error.
inline int exit_code_for(Errc code) {
  switch (code) {
    case Errc::unknown_feature:
    case Errc::bad_config:
      return 2;
    case Errc::backend_unavailable:
      return 4;
    default:
      return 3;
  }
}

inline const char* kCacheDirEnv = "LEXSUB_CACHE_DIR";

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

namespace detail {

inline void require_file(const std::string& path) {
  if (!std::filesystem::exists(path))
    raise(Errc::dataset_not_found, "no such file: " + path);
}

inline std::vector<BenchmarkInstance> load_dataset(const std::string& path) {
  require_file(path);
  std::ifstream in(path);
  return parse_contexts_jsonl(in);
}

inline std::unique_ptr<TableModel> load_backend(const std::string& spec) {
  constexpr std::string_view kTablePrefix = "table:";
  if (spec.rfind(kTablePrefix, 0) != 0)
    raise(Errc::backend_unavailable,
          "unknown backend '" + spec + "'; expected table:<fixture.json>");
  std::string path = spec.substr(kTablePrefix.size());
  if (!std::filesystem::exists(path))
    raise(Errc::backend_unavailable, "backend fixture not found: " + path);
  return std::make_unique<TableModel>(TableModel::load(path));
}

struct ScorerBox {
  std::unique_ptr<PairScorer> owned;
  NamedScorer named;
};

// --scorers name=kind[,name=kind...]; kinds: mock (token-level), mock-char.
inline std::vector<ScorerBox> build_scorers(const std::string& spec) {
  std::vector<ScorerBox> out;
  std::istringstream in(spec);
  std::string part;
  while (std::getline(in, part, ',')) {
    part = trim(part);
    if (part.empty()) continue;
    std::size_t eq = part.find('=');
    if (eq == std::string::npos)
      raise(Errc::bad_config, "scorer spec must be name=kind, got '" + part + "'");
    ScorerBox box;
    box.named.name = trim(part.substr(0, eq));
    std::string kind = trim(part.substr(eq + 1));
    if (kind == "mock") {
      box.owned = std::make_unique<MockPairScorer>();
    } else if (kind == "mock-char") {
      box.owned = std::make_unique<MockCharPairScorer>();
    } else {
      raise(Errc::backend_unavailable, "unknown scorer kind '" + kind + "'");
    }
    box.named.scorer = box.owned.get();
    out.push_back(std::move(box));
  }
  if (out.empty()) raise(Errc::bad_config, "no scorers given");
  return out;
}

inline std::optional<std::set<std::string>> parse_features(const std::string& csv) {
  if (csv.empty() || csv == "all") return std::nullopt;
  std::set<std::string> out;
  std::istringstream in(csv);
  std::string part;
  while (std::getline(in, part, ',')) {
    part = trim(part);
    if (!part.empty()) out.insert(part);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

inline void parse_weights(const std::string& csv, RunConfig& config) {
  std::vector<double> values;
  std::istringstream in(csv);
  std::string part;
  while (std::getline(in, part, ',')) {
    try {
      values.push_back(std::stod(trim(part)));
    } catch (const std::exception&) {
      raise(Errc::bad_config, "bad weight '" + part + "'");
    }
  }
  if (values.size() != 3)
    raise(Errc::bad_config, "--weights expects three comma-separated values");
  config.weight_paraphraser = values[0];
  config.weight_scorer_a = values[1];
  config.weight_scorer_b = values[2];
}

inline void load_config_file(const std::string& path, RunConfig& config) {
  require_file(path);
  std::ifstream in(path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::bad_config, "unparseable config file " + path + ": " + e.what());
  }
  config.k = doc.value("k", config.k);
  config.lookahead_length = doc.value("lookahead_length", config.lookahead_length);
  config.top_n_eval = doc.value("top_n_eval", config.top_n_eval);
  config.max_word_tokens = doc.value("max_word_tokens", config.max_word_tokens);
  config.normalize_features = doc.value("normalize_features", config.normalize_features);
  if (doc.contains("weights")) {
    const auto& w = doc.at("weights");
    config.weight_paraphraser = w.value("paraphraser", config.weight_paraphraser);
    config.weight_scorer_a = w.value("scorer_a", config.weight_scorer_a);
    config.weight_scorer_b = w.value("scorer_b", config.weight_scorer_b);
  }
  if (doc.contains("features")) {
    if (doc.at("features").is_string()) {
      config.features_enabled = parse_features(doc.at("features").get<std::string>());
    } else {
      std::set<std::string> names;
      for (const auto& f : doc.at("features")) names.insert(f.get<std::string>());
      config.features_enabled = std::move(names);
    }
  }
}

inline nlohmann::json config_to_json(const RunConfig& config, Strategy strategy) {
  nlohmann::json doc;
  doc["k"] = config.k;
  doc["lookahead_length"] = config.lookahead_length;
  doc["top_n_eval"] = config.top_n_eval;
  doc["max_word_tokens"] = config.max_word_tokens;
  doc["weights"] = {{"paraphraser", config.weight_paraphraser},
                    {"scorer_a", config.weight_scorer_a},
                    {"scorer_b", config.weight_scorer_b}};
  doc["normalize_features"] = config.normalize_features;
  if (config.features_enabled) {
    doc["features"] = *config.features_enabled;
  } else {
    doc["features"] = "all";
  }
  doc["strategy"] = strategy_name(strategy);
  return doc;
}

// Instance-parallel map with results landing in input order. The first worker
// exception is rethrown after the pool drains, matching the serial path.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  int n = std::min<int>(jobs, static_cast<int>(count));
  pool.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) raise(Errc::dataset_not_found, "cannot write file: " + path);
  out << content;
}

inline double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string dataset;
  std::string backend;
  std::string out = "predictions.jsonl";
  std::string manifest;
  std::string strategy = "lookahead";
  std::string config_file;
  std::string cache_dir;
  std::optional<int> k;
  std::optional<int> lookahead;
  std::optional<int> max_word_tokens;
  int jobs = 1;
};

inline int run_generate(const GenerateArgs& args) {
  auto strategy = strategy_from_name(args.strategy);
  if (!strategy) raise(Errc::bad_config, "unknown strategy '" + args.strategy + "'");

  RunConfig config;
  if (!args.config_file.empty()) detail::load_config_file(args.config_file, config);
  if (args.k) config.k = *args.k;
  if (args.lookahead) config.lookahead_length = *args.lookahead;
  if (args.max_word_tokens) config.max_word_tokens = *args.max_word_tokens;
  config.validate();

  detail::require_file(args.dataset);
  auto model = detail::load_backend(args.backend);
  std::vector<BenchmarkInstance> instances = detail::load_dataset(args.dataset);

  std::string cache_dir = args.cache_dir;
  if (cache_dir.empty()) {
    if (const char* env = std::getenv(kCacheDirEnv)) cache_dir = env;
  }
  std::optional<ScoreCache> cache;
  if (!cache_dir.empty())
    cache.emplace(cache_dir, model->id(), args.dataset,
                  [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; });
  const std::string cfg_hash = config_hash(config, *strategy);

  struct Result {
    std::optional<PredictionRecord> record;
    std::optional<CandidateSet> to_cache;
    std::vector<std::string> warnings;
    double ms = 0.0;
  };
  std::vector<Result> results(instances.size());

  auto process = [&](std::size_t i) {
    const BenchmarkInstance& inst = instances[i];
    Result& res = results[i];
    auto warn = [&](const std::string& msg) { res.warnings.push_back(msg); };
    auto start = std::chrono::steady_clock::now();
    try {
      std::optional<CandidateSet> cands;
      if (cache) cands = cache->get(inst.instance_id, *strategy, cfg_hash, warn);
      if (!cands) {
        TokenizedSentence sentence =
            make_tokenized_sentence(inst.sentence_text, inst.target_char_span, model->tokenizer());
        cands = generate_candidates(*model, sentence, config, *strategy);
        res.to_cache = cands;
      }
      PredictionRecord record;
      record.instance_id = inst.instance_id;
      record.lexelt = inst.pos_tag ? inst.target_lemma + "." + *inst.pos_tag : inst.target_lemma;
      std::vector<double> scores;
      for (const Candidate& cand : cands->candidates) {
        record.ranked_surfaces.push_back(cand.surface);
        scores.push_back(cand.decode_score);
      }
      record.scores = std::move(scores);
      res.record = std::move(record);
    } catch (const Error& e) {
      warn("skipping instance " + inst.instance_id + ": " + e.what());
    }
    res.ms = detail::ms_since(start);
  };

  auto total_start = std::chrono::steady_clock::now();
  detail::parallel_for(instances.size(), args.jobs, process);
  double total_ms = detail::ms_since(total_start);

  std::vector<PredictionRecord> records;
  nlohmann::json per_instance_ms;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (const std::string& msg : results[i].warnings) std::cerr << "warning: " << msg << '\n';
    per_instance_ms[instances[i].instance_id] = results[i].ms;
    if (cache && results[i].to_cache)
      cache->put(instances[i].instance_id, *strategy, cfg_hash, *results[i].to_cache);
    if (results[i].record) records.push_back(std::move(*results[i].record));
  }
  if (cache) cache->flush();

  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; });
  std::ostringstream body;
  write_predictions(body, records, PredictionStyle::jsonl);
  detail::write_text_file(args.out, body.str());

  nlohmann::json manifest;
  manifest["command"] = "generate";
  manifest["backend"] = {{"id", model->id()},
                         {"fixture_hash", hash_file(args.backend.substr(6))}};
  manifest["dataset"] = {{"path", args.dataset}, {"hash", hash_file(args.dataset)}};
  manifest["config"] = detail::config_to_json(config, *strategy);
  manifest["outputs"] = {{"predictions", args.out}};
  manifest["instances"] = {{"total", instances.size()}, {"answered", records.size()}};
  manifest["timing"] = {{"total_ms", total_ms}, {"per_instance_ms", per_instance_ms}};
  manifest["jobs"] = args.jobs;
  std::string manifest_path = args.manifest.empty() ? args.out + ".manifest.json" : args.manifest;
  detail::write_text_file(manifest_path, manifest.dump(2) + "\n");

  double mean_ms = instances.empty() ? 0.0 : total_ms / static_cast<double>(instances.size());
  std::cout << "generated " << records.size() << "/" << instances.size() << " records ("
            << strategy_name(*strategy) << ", k=" << config.k
            << ", L=" << config.lookahead_length << ") in " << total_ms << " ms, "
            << mean_ms << " ms/instance -> " << args.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// rank
// ---------------------------------------------------------------------------

struct RankArgs {
  std::string dataset;
  std::string predictions;
  std::string out = "ranked.jsonl";
  std::string manifest;
  std::string scorers = "scorer_a=mock,scorer_b=mock-char";
  std::string features = "all";
  std::string weights;
  std::string config_file;
  std::string emit_best;
  std::string emit_oot;
  std::optional<int> top_n;
  bool normalize = false;
  int jobs = 1;
};

inline int run_rank(const RankArgs& args) {
  RunConfig config;
  if (!args.config_file.empty()) detail::load_config_file(args.config_file, config);
  if (!args.weights.empty()) detail::parse_weights(args.weights, config);
  if (args.top_n) config.top_n_eval = *args.top_n;
  if (args.normalize) config.normalize_features = true;
  config.features_enabled = detail::parse_features(args.features);
  config.validate();

  auto boxes = detail::build_scorers(args.scorers);
  std::vector<NamedScorer> scorers;
  for (const auto& box : boxes) scorers.push_back(box.named);
  if (config.features_enabled) {
    for (const std::string& name : *config.features_enabled) {
      if (name == kParaphraserFeature) continue;
      bool known = std::any_of(scorers.begin(), scorers.end(),
                               [&](const NamedScorer& s) { return s.name == name; });
      if (!known) raise(Errc::unknown_feature, "unknown feature: " + name);
    }
  }

  std::vector<BenchmarkInstance> instances = detail::load_dataset(args.dataset);
  std::map<std::string, const BenchmarkInstance*> by_id;
  for (const BenchmarkInstance& inst : instances) by_id[inst.instance_id] = &inst;

  detail::require_file(args.predictions);
  std::ifstream pred_in(args.predictions);
  std::vector<PredictionRecord> records = parse_predictions_jsonl(pred_in);
  for (const PredictionRecord& record : records)
    if (!by_id.count(record.instance_id))
      raise(Errc::id_mismatch, "prediction for unknown instance id: " + record.instance_id);

  struct Result {
    PredictionRecord record;
    std::vector<std::string> warnings;
  };
  std::vector<Result> results(records.size());

  auto process = [&](std::size_t i) {
    const PredictionRecord& record = records[i];
    Result& res = results[i];
    auto warn = [&](const std::string& msg) { res.warnings.push_back(msg); };

    const BenchmarkInstance& inst = *by_id.at(record.instance_id);
    VocabTokenizer tokenizer = VocabTokenizer::for_text(inst.sentence_text);
    TokenizedSentence sentence =
        make_tokenized_sentence(inst.sentence_text, inst.target_char_span, tokenizer);

    CandidateSet cands;
    cands.sentence = &sentence;
    cands.k_requested = static_cast<int>(record.ranked_surfaces.size());
    for (std::size_t c = 0; c < record.ranked_surfaces.size(); ++c) {
      Candidate cand;
      cand.surface = record.ranked_surfaces[c];
      cand.decode_score =
          record.scores && c < record.scores->size() ? (*record.scores)[c] : 0.0;
      cands.candidates.push_back(std::move(cand));
    }
    if (!record.scores && config.feature_enabled(kParaphraserFeature))
      warn("instance " + record.instance_id +
           ": predictions carry no decode scores; paraphraser feature is 0");

    RankedSubstitutes ranked = rank_candidates(scorers, sentence, cands, config, warn);

    PredictionRecord out;
    out.instance_id = record.instance_id;
    out.lexelt = record.lexelt;
    std::vector<double> combined;
    std::size_t keep =
        std::min<std::size_t>(ranked.entries.size(), static_cast<std::size_t>(config.top_n_eval));
    for (std::size_t c = 0; c < keep; ++c) {
      out.ranked_surfaces.push_back(ranked.entries[c].candidate.surface);
      combined.push_back(ranked.entries[c].combined_score);
    }
    out.scores = std::move(combined);
    res.record = std::move(out);
  };

  auto total_start = std::chrono::steady_clock::now();
  detail::parallel_for(records.size(), args.jobs, process);
  double total_ms = detail::ms_since(total_start);

  std::vector<PredictionRecord> ranked_records;
  for (Result& res : results) {
    for (const std::string& msg : res.warnings) std::cerr << "warning: " << msg << '\n';
    ranked_records.push_back(std::move(res.record));
  }
  std::sort(ranked_records.begin(), ranked_records.end(),
            [](const auto& a, const auto& b) { return a.instance_id < b.instance_id; });

  std::ostringstream body;
  write_predictions(body, ranked_records, PredictionStyle::jsonl);
  detail::write_text_file(args.out, body.str());
  if (!args.emit_best.empty()) {
    std::ostringstream legacy;
    write_predictions(legacy, ranked_records, PredictionStyle::best);
    detail::write_text_file(args.emit_best, legacy.str());
  }
  if (!args.emit_oot.empty()) {
    std::ostringstream legacy;
    write_predictions(legacy, ranked_records, PredictionStyle::oot);
    detail::write_text_file(args.emit_oot, legacy.str());
  }

  nlohmann::json manifest;
  manifest["command"] = "rank";
  manifest["dataset"] = {{"path", args.dataset}, {"hash", hash_file(args.dataset)}};
  manifest["predictions"] = {{"path", args.predictions}, {"hash", hash_file(args.predictions)}};
  manifest["scorers"] = args.scorers;
  manifest["config"] = detail::config_to_json(config, Strategy::prefix_only);
  manifest["config"].erase("strategy");
  manifest["outputs"] = {{"ranked", args.out}};
  manifest["timing"] = {{"total_ms", total_ms}};
  std::string manifest_path = args.manifest.empty() ? args.out + ".manifest.json" : args.manifest;
  detail::write_text_file(manifest_path, manifest.dump(2) + "\n");

  std::cout << "ranked " << ranked_records.size() << " records (top " << config.top_n_eval
            << ") in " << total_ms << " ms -> " << args.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string gold;         // legacy gold file
  std::string swords;       // JSONL with vote annotations
  std::string predictions;  // JSONL prediction records
  std::string metric = "semeval";
  std::string report;
  int top_n = 10;
  bool mode_p_at_1 = false;
};

inline int run_evaluate(const EvaluateArgs& args) {
  detail::require_file(args.predictions);
  std::ifstream pred_in(args.predictions);
  std::vector<PredictionRecord> records = parse_predictions_jsonl(pred_in);
  PredictionMap predictions;
  for (const PredictionRecord& record : records) {
    if (predictions.count(record.instance_id))
      raise(Errc::duplicate_id, "duplicate prediction for instance: " + record.instance_id);
    predictions[record.instance_id] = record.ranked_surfaces;
  }

  auto warn = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };

  MetricReport report;
  nlohmann::json inputs;
  inputs["predictions"] = {{"path", args.predictions}, {"hash", hash_file(args.predictions)}};

  if (args.metric == "swords") {
    if (args.swords.empty()) raise(Errc::bad_config, "--metric swords requires --swords");
    detail::require_file(args.swords);
    std::ifstream in(args.swords);
    std::map<std::string, SwordsAnnotation> annotations;
    for (BenchmarkInstance& inst : parse_swords_jsonl(in))
      annotations[inst.instance_id] = std::get<SwordsAnnotation>(std::move(inst.gold));
    report = evaluate_swords(annotations, predictions, warn);
    inputs["gold"] = {{"path", args.swords}, {"hash", hash_file(args.swords)}};
  } else if (args.metric == "semeval" || args.metric == "gap") {
    if (args.gold.empty()) raise(Errc::bad_config, "--metric " + args.metric + " requires --gold");
    detail::require_file(args.gold);
    std::ifstream in(args.gold);
    std::map<std::string, GoldAnnotation> gold = parse_gold_legacy(in, warn);
    report = args.metric == "gap"
                 ? evaluate_gap(gold, predictions, warn)
                 : evaluate_semeval(gold, predictions, args.top_n, args.mode_p_at_1, warn);
    inputs["gold"] = {{"path", args.gold}, {"hash", hash_file(args.gold)}};
  } else {
    raise(Errc::bad_config, "unknown metric '" + args.metric + "'");
  }

  std::cout << report.to_table();
  if (!args.report.empty()) {
    nlohmann::json doc = report.to_json();
    doc["metric"] = args.metric;
    doc["inputs"] = inputs;
    detail::write_text_file(args.report, doc.dump(2) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

inline int run(const std::vector<std::string>& args) {
  CLI::App app{"lexical substitution: candidate generation, ranking, evaluation"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "decode substitute candidates for a dataset");
  generate->add_option("--dataset", gen.dataset, "contexts JSONL file")->required();
  generate->add_option("--backend", gen.backend, "model backend, e.g. table:toy_lm.json")
      ->required();
  generate->add_option("--out", gen.out, "output predictions JSONL");
  generate->add_option("--manifest", gen.manifest, "manifest path (default <out>.manifest.json)");
  generate->add_option("--strategy", gen.strategy, "prefix | lookahead");
  generate->add_option("--k", gen.k, "candidates per instance");
  generate->add_option("--lookahead", gen.lookahead, "lookahead length in words");
  generate->add_option("--max-word-tokens", gen.max_word_tokens, "subword budget per word");
  generate->add_option("--config", gen.config_file, "JSON run-config file");
  generate->add_option("--cache-dir", gen.cache_dir, "candidate cache directory");
  generate->add_option("--jobs", gen.jobs, "parallel workers");

  RankArgs rank;
  auto* rank_cmd = app.add_subcommand("rank", "re-rank generated candidates by features");
  rank_cmd->add_option("--dataset", rank.dataset, "contexts JSONL file")->required();
  rank_cmd->add_option("--predictions", rank.predictions, "generate output JSONL")->required();
  rank_cmd->add_option("--out", rank.out, "output ranked JSONL");
  rank_cmd->add_option("--manifest", rank.manifest, "manifest path");
  rank_cmd->add_option("--scorers", rank.scorers, "name=kind[,name=kind]; kinds: mock, mock-char");
  rank_cmd->add_option("--features", rank.features, "all or comma list of feature names");
  rank_cmd->add_option("--weights", rank.weights, "paraphraser,scorer_a,scorer_b");
  rank_cmd->add_option("--top-n", rank.top_n, "keep this many substitutes");
  rank_cmd->add_flag("--normalize", rank.normalize, "min-max normalize features per instance");
  rank_cmd->add_option("--config", rank.config_file, "JSON run-config file");
  rank_cmd->add_option("--emit-best", rank.emit_best, "also write legacy best-format file");
  rank_cmd->add_option("--emit-oot", rank.emit_oot, "also write legacy oot-format file");
  rank_cmd->add_option("--jobs", rank.jobs, "parallel workers");

  EvaluateArgs eval;
  auto* evaluate = app.add_subcommand("evaluate", "score predictions against gold");
  evaluate->add_option("--predictions", eval.predictions, "prediction JSONL")->required();
  evaluate->add_option("--gold", eval.gold, "legacy gold file");
  evaluate->add_option("--swords", eval.swords, "vote-annotated JSONL");
  evaluate->add_option("--metric", eval.metric, "semeval | gap | swords");
  evaluate->add_option("--report", eval.report, "write JSON report here");
  evaluate->add_option("--top-n", eval.top_n, "guesses used per instance");
  evaluate->add_flag("--mode-p1", eval.mode_p_at_1, "P@1 credits the gold mode only");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (generate->parsed()) return run_generate(gen);
    if (rank_cmd->parsed()) return run_rank(rank);
    if (evaluate->parsed()) return run_evaluate(eval);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}

}  // namespace lexsub::cli

#endif  // LEXSUB_CLI_HPP_
