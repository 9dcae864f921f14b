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
#include <doctest.h>

#include <fstream>

#include "lexsub/cli.hpp"
#include "support.hpp"

using namespace lexsub;
using testsupport::fixture_path;
using testsupport::read_file;

namespace {

std::vector<PredictionRecord> read_predictions(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  return parse_predictions_jsonl(in);
}

}  // namespace

TEST_CASE("generate produces one record per instance") {
  testsupport::TempDir tmp;
  std::string out = tmp.path("preds.jsonl");
  int rc = cli::run({"generate", "--dataset", fixture_path("toy.jsonl"), "--backend",
                     "table:" + fixture_path("toy_lm.json"), "--strategy", "prefix", "--k", "5",
                     "--out", out});
  REQUIRE(rc == 0);

  auto records = read_predictions(out);
  REQUIRE(records.size() == 8);
  CHECK(records[0].instance_id == "t01");
  CHECK(records[0].lexelt == "dry.a");
  CHECK(records[0].ranked_surfaces ==
        std::vector<std::string>{"arid", "parched", "desiccated", "wet"});
  REQUIRE(records[0].scores);
  CHECK(records[0].scores->size() == 4);

  // The repeated-word instance targets the second occurrence.
  CHECK(records[5].instance_id == "t06");
  for (const std::string& s : records[5].ranked_surfaces) CHECK(s != "cat");

  // Manifest captures enough to re-run the command.
  nlohmann::json manifest;
  std::ifstream min(out + ".manifest.json");
  REQUIRE(min);
  min >> manifest;
  CHECK(manifest["command"] == "generate");
  CHECK(manifest["config"]["k"] == 5);
  CHECK(manifest["config"]["strategy"] == "prefix");
  CHECK(manifest["dataset"]["path"] == fixture_path("toy.jsonl"));
  CHECK(manifest["backend"]["id"] == "table:" + fixture_path("toy_lm.json"));
  CHECK(manifest["timing"].contains("per_instance_ms"));
}

TEST_CASE("generate with lookahead 0 equals prefix byte for byte") {
  testsupport::TempDir tmp;
  std::string prefix_out = tmp.path("prefix.jsonl");
  std::string zero_out = tmp.path("zero.jsonl");
  REQUIRE(cli::run({"generate", "--dataset", fixture_path("toy.jsonl"), "--backend",
                    "table:" + fixture_path("toy_lm.json"), "--strategy", "prefix", "--k", "5",
                    "--out", prefix_out}) == 0);
  REQUIRE(cli::run({"generate", "--dataset", fixture_path("toy.jsonl"), "--backend",
                    "table:" + fixture_path("toy_lm.json"), "--strategy", "lookahead",
                    "--lookahead", "0", "--k", "5", "--out", zero_out}) == 0);
  CHECK(read_file(prefix_out) == read_file(zero_out));
  CHECK(read_file(prefix_out).size() > 0);
}

TEST_CASE("generate error paths use the documented exit codes") {
  testsupport::TempDir tmp;
  CHECK(cli::run({"generate", "--dataset", tmp.path("missing.jsonl"), "--backend",
                  "table:" + fixture_path("toy_lm.json"), "--out", tmp.path("x.jsonl")}) == 3);
  CHECK(cli::run({"generate", "--dataset", fixture_path("toy.jsonl"), "--backend",
                  "table:" + tmp.path("missing_model.json"), "--out", tmp.path("x.jsonl")}) == 4);
  CHECK(cli::run({"generate", "--dataset", fixture_path("toy.jsonl"), "--backend",
                  "bogus:thing", "--out", tmp.path("x.jsonl")}) == 4);
  CHECK(cli::run({"generate"}) == 2);  // missing required options
  CHECK(cli::run({"frobnicate"}) == 2);
}

TEST_CASE("generate caches candidate sets") {
  testsupport::TempDir tmp;
  std::string out1 = tmp.path("first.jsonl");
  std::string out2 = tmp.path("second.jsonl");
  std::string cache = tmp.path("cache");
  auto args = [&](const std::string& out) {
    return std::vector<std::string>{"generate", "--dataset", fixture_path("toy.jsonl"),
                                    "--backend", "table:" + fixture_path("toy_lm.json"),
                                    "--strategy", "lookahead", "--k", "5",
                                    "--cache-dir", cache, "--out", out};
  };
  REQUIRE(cli::run(args(out1)) == 0);
  REQUIRE(std::filesystem::exists(cache));
  REQUIRE(cli::run(args(out2)) == 0);  // second run reads the cache
  CHECK(read_file(out1) == read_file(out2));
}

TEST_CASE("rank with only the paraphraser feature keeps decode order") {
  testsupport::TempDir tmp;
  std::string preds = tmp.path("preds.jsonl");
  std::string ranked = tmp.path("ranked.jsonl");
  REQUIRE(cli::run({"generate", "--dataset", fixture_path("toy.jsonl"), "--backend",
                    "table:" + fixture_path("toy_lm.json"), "--strategy", "lookahead", "--k", "5",
                    "--out", preds}) == 0);
  REQUIRE(cli::run({"rank", "--dataset", fixture_path("toy.jsonl"), "--predictions", preds,
                    "--features", "paraphraser", "--out", ranked}) == 0);
  auto before = read_predictions(preds);
  auto after = read_predictions(ranked);
  REQUIRE(before.size() == after.size());
  for (std::size_t i = 0; i < before.size(); ++i)
    CHECK(before[i].ranked_surfaces == after[i].ranked_surfaces);
}

TEST_CASE("rank reorders with meaning scorers and emits legacy formats") {
  testsupport::TempDir tmp;
  std::string preds = tmp.path("preds.jsonl");
  std::string ranked = tmp.path("ranked.jsonl");
  std::string oot = tmp.path("ranked.oot");
  std::string best = tmp.path("ranked.best");
  REQUIRE(cli::run({"generate", "--dataset", fixture_path("toy.jsonl"), "--backend",
                    "table:" + fixture_path("toy_lm.json"), "--strategy", "lookahead", "--k", "5",
                    "--out", preds}) == 0);
  REQUIRE(cli::run({"rank", "--dataset", fixture_path("toy.jsonl"), "--predictions", preds,
                    "--weights", "0.02,1,1", "--out", ranked, "--emit-oot", oot, "--emit-best",
                    best}) == 0);

  auto records = read_predictions(ranked);
  REQUIRE(records.size() == 8);
  for (const auto& record : records) {
    REQUIRE(record.scores);
    for (std::size_t i = 1; i < record.scores->size(); ++i)
      CHECK((*record.scores)[i - 1] >= (*record.scores)[i]);
  }

  std::string oot_text = read_file(oot);
  CHECK(oot_text.find("dry.a t01 ::: ") == 0);
  std::string best_text = read_file(best);
  CHECK(best_text.find("dry.a t01 :: ") == 0);
}

TEST_CASE("cli rank reproduces the library ranker exactly") {
  testsupport::TempDir tmp;
  std::string preds = tmp.path("preds.jsonl");
  std::string ranked = tmp.path("ranked.jsonl");
  REQUIRE(cli::run({"generate", "--dataset", fixture_path("toy.jsonl"), "--backend",
                    "table:" + fixture_path("toy_lm.json"), "--strategy", "lookahead", "--k", "5",
                    "--out", preds}) == 0);
  REQUIRE(cli::run({"rank", "--dataset", fixture_path("toy.jsonl"), "--predictions", preds,
                    "--scorers", "scorer_a=mock,scorer_b=mock-char", "--weights", "0.02,1,1",
                    "--out", ranked}) == 0);

  // Re-derive the expected ordering through the library path.
  std::ifstream din(fixture_path("toy.jsonl"));
  auto instances = parse_contexts_jsonl(din);
  std::map<std::string, BenchmarkInstance> by_id;
  for (auto& inst : instances) by_id[inst.instance_id] = inst;

  MockPairScorer token_scorer;
  MockCharPairScorer char_scorer;
  std::vector<NamedScorer> scorers{{"scorer_a", &token_scorer}, {"scorer_b", &char_scorer}};
  RunConfig config;

  auto generated = read_predictions(preds);
  auto from_cli = read_predictions(ranked);
  REQUIRE(generated.size() == from_cli.size());
  for (std::size_t i = 0; i < generated.size(); ++i) {
    const auto& inst = by_id.at(generated[i].instance_id);
    VocabTokenizer tok = VocabTokenizer::for_text(inst.sentence_text);
    TokenizedSentence sentence =
        make_tokenized_sentence(inst.sentence_text, inst.target_char_span, tok);
    CandidateSet set;
    for (std::size_t c = 0; c < generated[i].ranked_surfaces.size(); ++c) {
      Candidate cand;
      cand.surface = generated[i].ranked_surfaces[c];
      cand.decode_score = (*generated[i].scores)[c];
      set.candidates.push_back(std::move(cand));
    }
    RankedSubstitutes expected = rank_candidates(scorers, sentence, set, config);
    REQUIRE(from_cli[i].ranked_surfaces.size() == expected.entries.size());
    for (std::size_t c = 0; c < expected.entries.size(); ++c) {
      CHECK(from_cli[i].ranked_surfaces[c] == expected.entries[c].candidate.surface);
      CHECK((*from_cli[i].scores)[c] == expected.entries[c].combined_score);
    }
  }
}

TEST_CASE("mode-p1 flag restricts credit to the gold mode") {
  testsupport::TempDir tmp;
  std::string gold_path = tmp.path("gold.txt");
  {
    std::ofstream out(gold_path);
    out << "dry.a x1 :: arid 3;parched 1;\n";
  }
  std::string preds = tmp.path("preds.jsonl");
  {
    std::ofstream out(preds);
    PredictionRecord record;
    record.instance_id = "x1";
    record.ranked_surfaces = {"parched", "arid"};  // gold hit, but not the mode
    write_predictions(out, {record}, PredictionStyle::jsonl);
  }
  std::string report_path = tmp.path("report.json");
  REQUIRE(cli::run({"evaluate", "--gold", gold_path, "--predictions", preds, "--report",
                    report_path}) == 0);
  nlohmann::json report;
  {
    std::ifstream rin(report_path);
    rin >> report;
  }
  CHECK(report["aggregate"]["p@1"].get<double>() == doctest::Approx(100.0));

  REQUIRE(cli::run({"evaluate", "--gold", gold_path, "--predictions", preds, "--mode-p1",
                    "--report", report_path}) == 0);
  {
    std::ifstream rin(report_path);
    rin >> report;
  }
  CHECK(report["aggregate"]["p@1"].get<double>() == doctest::Approx(0.0));
}

TEST_CASE("cache directory can come from the environment") {
  testsupport::TempDir tmp;
  std::string cache = tmp.path("env_cache");
  REQUIRE(setenv(cli::kCacheDirEnv, cache.c_str(), 1) == 0);
  std::string out = tmp.path("preds.jsonl");
  int rc = cli::run({"generate", "--dataset", fixture_path("toy.jsonl"), "--backend",
                     "table:" + fixture_path("toy_lm.json"), "--k", "3", "--out", out});
  unsetenv(cli::kCacheDirEnv);
  REQUIRE(rc == 0);
  CHECK(std::filesystem::exists(cache));
  bool saw_cache_file = false;
  for (const auto& entry : std::filesystem::directory_iterator(cache))
    saw_cache_file |= entry.path().extension() == ".json";
  CHECK(saw_cache_file);
}

TEST_CASE("rank rejects unknown features and scorers") {
  testsupport::TempDir tmp;
  std::string preds = tmp.path("preds.jsonl");
  REQUIRE(cli::run({"generate", "--dataset", fixture_path("toy.jsonl"), "--backend",
                    "table:" + fixture_path("toy_lm.json"), "--k", "3", "--out", preds}) == 0);
  CHECK(cli::run({"rank", "--dataset", fixture_path("toy.jsonl"), "--predictions", preds,
                  "--features", "bogus", "--out", tmp.path("r.jsonl")}) == 2);
  CHECK(cli::run({"rank", "--dataset", fixture_path("toy.jsonl"), "--predictions", preds,
                  "--scorers", "a=nope", "--out", tmp.path("r.jsonl")}) == 4);
  CHECK(cli::run({"rank", "--dataset", fixture_path("toy.jsonl"), "--predictions",
                  tmp.path("nothing.jsonl"), "--out", tmp.path("r.jsonl")}) == 3);
}

TEST_CASE("evaluate scores a perfect system at 100") {
  testsupport::TempDir tmp;

  // Build predictions straight from the gold file, heaviest substitute first.
  std::ifstream gin(fixture_path("toy_gold.txt"));
  auto gold = parse_gold_legacy(gin);
  std::vector<PredictionRecord> records;
  for (const auto& [id, annotation] : gold) {
    PredictionRecord record;
    record.instance_id = id;
    record.lexelt = annotation.lexelt();
    std::vector<std::pair<double, std::string>> by_weight;
    for (const auto& [surface, weight] : annotation.substitutes)
      by_weight.emplace_back(-weight, surface);
    std::sort(by_weight.begin(), by_weight.end());
    for (const auto& [neg, surface] : by_weight) record.ranked_surfaces.push_back(surface);
    records.push_back(std::move(record));
  }
  std::string preds = tmp.path("gold_preds.jsonl");
  {
    std::ofstream out(preds);
    write_predictions(out, records, PredictionStyle::jsonl);
  }

  std::string report_path = tmp.path("report.json");
  REQUIRE(cli::run({"evaluate", "--gold", fixture_path("toy_gold.txt"), "--predictions", preds,
                    "--report", report_path}) == 0);

  nlohmann::json report;
  std::ifstream rin(report_path);
  REQUIRE(rin);
  rin >> report;
  CHECK(report["aggregate"]["best-m"].get<double>() == doctest::Approx(100.0));
  CHECK(report["aggregate"]["oot"].get<double>() == doctest::Approx(100.0));
  CHECK(report["aggregate"]["oot-m"].get<double>() == doctest::Approx(100.0));
  CHECK(report["aggregate"]["p@1"].get<double>() == doctest::Approx(100.0));
  CHECK(report["counts"]["answered"] == 8);
  CHECK(report["inputs"]["gold"]["path"] == fixture_path("toy_gold.txt"));

  REQUIRE(cli::run({"evaluate", "--gold", fixture_path("toy_gold.txt"), "--predictions", preds,
                    "--metric", "gap", "--report", report_path}) == 0);
  std::ifstream gin2(report_path);
  gin2 >> report;
  CHECK(report["aggregate"]["gap"].get<double>() == doctest::Approx(100.0));
}

TEST_CASE("evaluate catches id mismatches") {
  testsupport::TempDir tmp;
  std::string preds = tmp.path("preds.jsonl");
  {
    std::ofstream out(preds);
    PredictionRecord record;
    record.instance_id = "zz99";
    record.ranked_surfaces = {"arid"};
    write_predictions(out, {record}, PredictionStyle::jsonl);
  }
  CHECK(cli::run({"evaluate", "--gold", fixture_path("toy_gold.txt"), "--predictions", preds}) ==
        3);
}

TEST_CASE("evaluate swords fixture") {
  testsupport::TempDir tmp;
  std::string preds = tmp.path("preds.jsonl");
  {
    std::ofstream out(preds);
    std::vector<PredictionRecord> records(3);
    records[0].instance_id = "s01";
    records[0].ranked_surfaces = {"arid", "parched"};  // exactly the acceptable set
    records[1].instance_id = "s02";
    records[1].ranked_surfaces = {"dog", "kitten"};
    records[2].instance_id = "s03";
    records[2].ranked_surfaces = {"hold"};
    write_predictions(out, records, PredictionStyle::jsonl);
  }
  std::string report_path = tmp.path("report.json");
  REQUIRE(cli::run({"evaluate", "--swords", fixture_path("toy_swords.jsonl"), "--predictions",
                    preds, "--metric", "swords", "--report", report_path}) == 0);
  nlohmann::json report;
  std::ifstream rin(report_path);
  rin >> report;
  // s01: f_a = 1. s02: acceptable {dog}: P=1/2, R=1 -> 2/3. s03: {hold, stay}: P=1, R=1/2 -> 2/3.
  CHECK(report["aggregate"]["f_a"].get<double>() ==
        doctest::Approx(100.0 * (1.0 + 2.0 / 3.0 + 2.0 / 3.0) / 3.0));
  CHECK(report["per_instance"]["s01"]["f_a"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("vote-annotated datasets run end to end") {
  testsupport::TempDir tmp;
  std::string preds = tmp.path("swords_preds.jsonl");
  REQUIRE(cli::run({"generate", "--dataset", fixture_path("toy_swords.jsonl"), "--backend",
                    "table:" + fixture_path("toy_lm.json"), "--strategy", "lookahead", "--k", "5",
                    "--out", preds}) == 0);
  auto records = read_predictions(preds);
  REQUIRE(records.size() == 3);
  CHECK(records[0].instance_id == "s01");

  std::string report_path = tmp.path("report.json");
  REQUIRE(cli::run({"evaluate", "--swords", fixture_path("toy_swords.jsonl"), "--predictions",
                    preds, "--metric", "swords", "--report", report_path}) == 0);
  nlohmann::json report;
  std::ifstream rin(report_path);
  rin >> report;
  CHECK(report["aggregate"]["f_a"].get<double>() > 0.0);
  CHECK(report["aggregate"]["f_c"].get<double>() > 0.0);
  CHECK(report["counts"]["total"] == 3);
}

TEST_CASE("config file feeds defaults that flags override") {
  testsupport::TempDir tmp;
  std::string config = tmp.path("config.json");
  {
    std::ofstream out(config);
    out << R"({"k": 2, "lookahead_length": 1, "weights": {"paraphraser": 0.5}})";
  }
  std::string preds = tmp.path("preds.jsonl");
  REQUIRE(cli::run({"generate", "--dataset", fixture_path("toy.jsonl"), "--backend",
                    "table:" + fixture_path("toy_lm.json"), "--config", config, "--out",
                    preds}) == 0);
  auto records = read_predictions(preds);
  for (const auto& record : records) CHECK(record.ranked_surfaces.size() <= 2);

  std::string preds3 = tmp.path("preds3.jsonl");
  REQUIRE(cli::run({"generate", "--dataset", fixture_path("toy.jsonl"), "--backend",
                    "table:" + fixture_path("toy_lm.json"), "--config", config, "--k", "3",
                    "--out", preds3}) == 0);
  auto more = read_predictions(preds3);
  bool saw_three = false;
  for (const auto& record : more) saw_three |= record.ranked_surfaces.size() == 3;
  CHECK(saw_three);
}

TEST_CASE("untokenizable instances are skipped and scored as unanswered") {
  testsupport::TempDir tmp;
  std::string dataset = tmp.path("mixed.jsonl");
  {
    std::ofstream out(dataset);
    out << R"({"id": "a1", "text": "a dry continent", "target_start": 2, "target_end": 5, "lemma": "dry", "pos": "a"})"
        << "\n"
        << R"({"id": "a2", "text": "a zyx continent", "target_start": 2, "target_end": 5, "lemma": "zyx", "pos": "n"})"
        << "\n";
  }
  std::string preds = tmp.path("preds.jsonl");
  REQUIRE(cli::run({"generate", "--dataset", dataset, "--backend",
                    "table:" + fixture_path("toy_lm.json"), "--k", "3", "--out", preds}) == 0);
  auto records = read_predictions(preds);
  REQUIRE(records.size() == 1);  // a2 has an out-of-vocabulary word
  CHECK(records[0].instance_id == "a1");

  std::string gold_path = tmp.path("gold.txt");
  {
    std::ofstream out(gold_path);
    out << "dry.a a1 :: arid 2;\nzyx.n a2 :: abc 1;\n";
  }
  std::string report_path = tmp.path("report.json");
  REQUIRE(cli::run({"evaluate", "--gold", gold_path, "--predictions", preds, "--report",
                    report_path}) == 0);
  nlohmann::json report;
  std::ifstream rin(report_path);
  rin >> report;
  CHECK(report["counts"]["total"] == 2);
  CHECK(report["counts"]["answered"] == 1);
}

TEST_CASE("parallel jobs produce identical artifacts") {
  testsupport::TempDir tmp;
  std::string serial = tmp.path("serial.jsonl");
  std::string parallel = tmp.path("parallel.jsonl");
  auto args = [&](const std::string& out, const char* jobs) {
    return std::vector<std::string>{"generate", "--dataset", fixture_path("toy.jsonl"),
                                    "--backend", "table:" + fixture_path("toy_lm.json"),
                                    "--strategy", "lookahead", "--k", "5",
                                    "--jobs", jobs, "--out", out};
  };
  REQUIRE(cli::run(args(serial, "1")) == 0);
  REQUIRE(cli::run(args(parallel, "4")) == 0);
  CHECK(read_file(serial) == read_file(parallel));
}
