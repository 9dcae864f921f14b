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
#ifndef LEXSUB_METRICS_HPP_
#define LEXSUB_METRICS_HPP_

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lexsub/core.hpp"

namespace lexsub {

// Guesses are matched to gold by case-folded exact string comparison. Duplicate
// guesses keep their first position; out-of-ten lists are truncated to 10.
inline std::vector<std::string> dedupe_guesses(const std::vector<std::string>& guesses,
                                               const WarnFn& warn = {}) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const std::string& g : guesses) {
    std::string folded = casefold(g);
    if (!seen.insert(folded).second) {
      warn_to(warn, "duplicate guess dropped: " + g);
      continue;
    }
    out.push_back(folded);
  }
  return out;
}

inline std::vector<std::string> cap_out_of_ten(std::vector<std::string> guesses,
                                               const WarnFn& warn = {}) {
  if (guesses.size() > 10) {
    warn_to(warn, "more than 10 guesses; truncating to the first 10");
    guesses.resize(10);
  }
  return guesses;
}

// ---------------------------------------------------------------------------
// SemEval-2007 style measures (per instance, all in [0, 1])
// ---------------------------------------------------------------------------

// sum of gold weights over the guesses, divided by |guesses| * total gold weight.
inline double score_best(const GoldAnnotation& gold, const std::vector<std::string>& guesses,
                         const WarnFn& warn = {}) {
  auto clean = dedupe_guesses(guesses, warn);
  if (clean.empty()) return 0.0;  // unanswered: contributes 0, still counted
  double credit = 0.0;
  for (const std::string& g : clean) credit += gold.weight_of(g);
  return credit / (static_cast<double>(clean.size()) * gold.total_weight());
}

// 1 iff the first guess is the unique heaviest gold substitute; absent on ties.
inline std::optional<double> score_best_mode(const GoldAnnotation& gold,
                                             const std::vector<std::string>& guesses) {
  auto mode = gold.mode();
  if (!mode) return std::nullopt;
  if (guesses.empty()) return 0.0;
  return casefold(guesses.front()) == *mode ? 1.0 : 0.0;
}

// Coverage of the gold weight by at most ten guesses; no division by |guesses|.
inline double score_oot(const GoldAnnotation& gold, const std::vector<std::string>& guesses,
                        const WarnFn& warn = {}) {
  auto clean = cap_out_of_ten(dedupe_guesses(guesses, warn), warn);
  double credit = 0.0;
  for (const std::string& g : clean) credit += gold.weight_of(g);
  return credit / gold.total_weight();
}

inline std::optional<double> score_oot_mode(const GoldAnnotation& gold,
                                            const std::vector<std::string>& guesses,
                                            const WarnFn& warn = {}) {
  auto mode = gold.mode();
  if (!mode) return std::nullopt;
  auto clean = cap_out_of_ten(dedupe_guesses(guesses, warn), warn);
  return std::find(clean.begin(), clean.end(), *mode) != clean.end() ? 1.0 : 0.0;
}

inline double score_p_at_1(const GoldAnnotation& gold, const std::vector<std::string>& guesses) {
  if (guesses.empty()) return 0.0;
  return gold.weight_of(casefold(guesses.front())) > 0.0 ? 1.0 : 0.0;
}

// Mode-credit variant of P@1 (config flag; not the default reading).
inline double score_p_at_1_mode(const GoldAnnotation& gold,
                                const std::vector<std::string>& guesses) {
  auto m = score_best_mode(gold, guesses);
  return m ? *m : 0.0;
}

// ---------------------------------------------------------------------------
// Generalized average precision
// ---------------------------------------------------------------------------

// GAP = [sum_i 1(x_i>0) * cum(x)_i / i] / [sum_j 1(y_j>0) * cum(y)_j / j], with
// x the gold weights along the ranking, y the gold weights sorted nonincreasing,
// 1-based indices. Gold entries with weight 0 are ignored on both sides.
inline double score_gap(const GoldAnnotation& gold, const std::vector<std::string>& ranked) {
  std::vector<std::string> clean = dedupe_guesses(ranked);

  double numerator = 0.0;
  double cum = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    double w = gold.weight_of(clean[i]);
    cum += w;
    if (w > 0.0) numerator += cum / static_cast<double>(i + 1);
  }

  std::vector<double> ideal;
  for (const auto& [surface, weight] : gold.substitutes)
    if (weight > 0.0) ideal.push_back(weight);
  std::sort(ideal.begin(), ideal.end(), std::greater<>());

  double denominator = 0.0;
  cum = 0.0;
  for (std::size_t j = 0; j < ideal.size(); ++j) {
    cum += ideal[j];
    denominator += cum / static_cast<double>(j + 1);
  }
  if (denominator == 0.0) return 0.0;
  return numerator / denominator;
}

// ---------------------------------------------------------------------------
// SwordS F-scores
// ---------------------------------------------------------------------------

enum class SwordsGoldMode { acceptable, conceivable };

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

inline Prf score_swords(const SwordsAnnotation& annotation, const std::vector<std::string>& top10,
                        SwordsGoldMode mode, const WarnFn& warn = {}) {
  std::set<std::string> gold =
      mode == SwordsGoldMode::acceptable ? annotation.acceptable() : annotation.conceivable();
  if (gold.empty())
    raise(Errc::empty_gold, "instance " + annotation.instance_id + " has an empty gold set");

  auto clean = cap_out_of_ten(dedupe_guesses(top10, warn), warn);
  std::size_t hits = 0;
  for (const std::string& g : clean)
    if (gold.count(g)) ++hits;

  Prf out;
  if (!clean.empty()) out.precision = static_cast<double>(hits) / static_cast<double>(clean.size());
  out.recall = static_cast<double>(hits) / static_cast<double>(gold.size());
  if (out.precision + out.recall > 0.0)
    out.f = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

struct MetricCounts {
  int answered = 0;
  int total = 0;
  int with_mode = 0;
};

struct MetricReport {
  std::map<std::string, std::map<std::string, double>> per_instance;  // raw [0,1] scores
  std::map<std::string, double> aggregate;                            // percentages [0,100]
  MetricCounts counts;

  nlohmann::json to_json() const {
    nlohmann::json doc;
    doc["aggregate"] = aggregate;
    doc["counts"] = {{"answered", counts.answered},
                     {"total", counts.total},
                     {"with_mode", counts.with_mode}};
    doc["per_instance"] = per_instance;
    return doc;
  }

  std::string to_table() const {
    std::string out;
    char line[128];
    std::snprintf(line, sizeof(line), "%-12s %10s\n", "metric", "aggregate");
    out += line;
    for (const auto& [name, value] : aggregate) {
      std::snprintf(line, sizeof(line), "%-12s %10.2f\n", name.c_str(), value);
      out += line;
    }
    std::snprintf(line, sizeof(line), "answered %d / %d instances (%d with mode)\n",
                  counts.answered, counts.total, counts.with_mode);
    out += line;
    return out;
  }
};

using PredictionMap = std::map<std::string, std::vector<std::string>>;  // id -> ranked surfaces

// Every predicted id must be a gold id; gold instances without predictions are
// scored as unanswered.
inline void require_ids_known(const PredictionMap& predictions,
                              const std::set<std::string>& known_ids) {
  std::vector<std::string> extra;
  for (const auto& [id, surfaces] : predictions)
    if (!known_ids.count(id)) extra.push_back(id);
  if (!extra.empty()) {
    std::string msg = "predictions reference unknown instance ids:";
    for (const auto& id : extra) msg += " " + id;
    raise(Errc::id_mismatch, msg);
  }
}

inline MetricReport evaluate_semeval(const std::map<std::string, GoldAnnotation>& gold,
                                     const PredictionMap& predictions, int top_n = 10,
                                     bool mode_p_at_1 = false, const WarnFn& warn = {}) {
  std::set<std::string> ids;
  for (const auto& [id, annotation] : gold) ids.insert(id);
  require_ids_known(predictions, ids);

  MetricReport report;
  double best_sum = 0, bestm_sum = 0, oot_sum = 0, ootm_sum = 0, p1_sum = 0;
  for (const auto& [id, annotation] : gold) {
    ++report.counts.total;
    std::vector<std::string> guesses;
    if (auto it = predictions.find(id); it != predictions.end()) guesses = it->second;
    if (!guesses.empty()) ++report.counts.answered;
    if (static_cast<int>(guesses.size()) > top_n)
      guesses.resize(static_cast<std::size_t>(top_n));

    std::vector<std::string> first;
    if (!guesses.empty()) first.push_back(guesses.front());

    auto& row = report.per_instance[id];
    row["best"] = score_best(annotation, first, warn);
    row["oot"] = score_oot(annotation, guesses, warn);
    row["p@1"] = mode_p_at_1 ? score_p_at_1_mode(annotation, guesses)
                             : score_p_at_1(annotation, guesses);
    best_sum += row["best"];
    oot_sum += row["oot"];
    p1_sum += row["p@1"];

    if (auto bm = score_best_mode(annotation, guesses)) {
      ++report.counts.with_mode;
      row["best-m"] = *bm;
      bestm_sum += *bm;
      auto om = score_oot_mode(annotation, guesses, warn);
      row["oot-m"] = *om;
      ootm_sum += *om;
    }
  }

  double n = std::max(1, report.counts.total);
  double n_mode = std::max(1, report.counts.with_mode);
  report.aggregate["best"] = 100.0 * best_sum / n;
  report.aggregate["best-m"] = 100.0 * bestm_sum / n_mode;
  report.aggregate["oot"] = 100.0 * oot_sum / n;
  report.aggregate["oot-m"] = 100.0 * ootm_sum / n_mode;
  report.aggregate["p@1"] = 100.0 * p1_sum / n;
  return report;
}

inline MetricReport evaluate_gap(const std::map<std::string, GoldAnnotation>& gold,
                                 const PredictionMap& predictions, const WarnFn& warn = {}) {
  std::set<std::string> ids;
  for (const auto& [id, annotation] : gold) ids.insert(id);
  require_ids_known(predictions, ids);

  MetricReport report;
  double gap_sum = 0;
  for (const auto& [id, annotation] : gold) {
    ++report.counts.total;
    std::vector<std::string> ranked;
    if (auto it = predictions.find(id); it != predictions.end()) ranked = it->second;
    if (!ranked.empty()) ++report.counts.answered;
    double gap = score_gap(annotation, ranked);
    report.per_instance[id]["gap"] = gap;
    gap_sum += gap;
    if (annotation.mode()) ++report.counts.with_mode;
  }
  report.aggregate["gap"] = 100.0 * gap_sum / std::max(1, report.counts.total);
  (void)warn;
  return report;
}

inline MetricReport evaluate_swords(const std::map<std::string, SwordsAnnotation>& annotations,
                                    const PredictionMap& predictions, const WarnFn& warn = {}) {
  std::set<std::string> ids;
  for (const auto& [id, annotation] : annotations) ids.insert(id);
  require_ids_known(predictions, ids);

  MetricReport report;
  double fa_sum = 0, fc_sum = 0;
  int fa_scored = 0, fc_scored = 0;
  for (const auto& [id, annotation] : annotations) {
    ++report.counts.total;
    std::vector<std::string> top10;
    if (auto it = predictions.find(id); it != predictions.end()) top10 = it->second;
    if (!top10.empty()) ++report.counts.answered;
    auto score_one = [&](SwordsGoldMode mode, const char* key, double& sum, int& scored) {
      try {
        Prf prf = score_swords(annotation, top10, mode, warn);
        report.per_instance[id][key] = prf.f;
        sum += prf.f;
        ++scored;
      } catch (const Error& e) {
        if (e.code() != Errc::empty_gold) throw;
        warn_to(warn, std::string(e.what()) + "; skipping for " + key);
      }
    };
    score_one(SwordsGoldMode::acceptable, "f_a", fa_sum, fa_scored);
    score_one(SwordsGoldMode::conceivable, "f_c", fc_sum, fc_scored);
  }
  report.aggregate["f_a"] = 100.0 * fa_sum / std::max(1, fa_scored);
  report.aggregate["f_c"] = 100.0 * fc_sum / std::max(1, fc_scored);
  return report;
}

}  // namespace lexsub

#endif  // LEXSUB_METRICS_HPP_
