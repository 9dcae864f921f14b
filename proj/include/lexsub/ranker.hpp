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
#ifndef LEXSUB_RANKER_HPP_
#define LEXSUB_RANKER_HPP_

#include <algorithm>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "lexsub/backends.hpp"
#include "lexsub/core.hpp"

namespace lexsub {

inline constexpr std::string_view kParaphraserFeature = "paraphraser";

struct NamedScorer {
  std::string name;
  const PairScorer* scorer = nullptr;
};

// Splices the candidate over the target span; every other byte is untouched.
// No article or agreement repair ("a dry" -> "a arid"); scorers see the raw splice.
inline std::string substitute_in_sentence(const TokenizedSentence& sentence,
                                          std::string_view candidate_surface) {
  CharSpan span = sentence.target_char_span();
  std::string out;
  out.reserve(sentence.text.size() + candidate_surface.size());
  out.append(sentence.text, 0, span.begin);
  out.append(candidate_surface);
  out.append(sentence.text, span.end, sentence.text.size() - span.end);
  return out;
}

// The paraphraser feature reuses the decode-time score; it is never re-scored.
// Each enabled scorer sees (original, updated) sentence texts. A scorer that
// throws leaves its feature absent and emits a warning.
inline FeatureVector compute_features(const std::vector<NamedScorer>& scorers,
                                      const TokenizedSentence& sentence, const Candidate& candidate,
                                      const RunConfig& config, const WarnFn& warn = {}) {
  FeatureVector features;
  if (config.feature_enabled(kParaphraserFeature)) features.paraphraser = candidate.decode_score;

  std::string updated;
  for (const NamedScorer& entry : scorers) {
    if (!config.feature_enabled(entry.name)) continue;
    if (updated.empty()) updated = substitute_in_sentence(sentence, candidate.surface);
    try {
      features.meaning_scores[entry.name] = entry.scorer->score(sentence.text, updated);
    } catch (const std::exception& e) {
      warn_to(warn, "scorer '" + entry.name + "' failed on candidate '" + candidate.surface +
                        "': " + e.what());
    }
  }
  return features;
}

// Scorer weights are positional: first scorer takes weight_scorer_a, second
// weight_scorer_b, any further scorer weighs 1. Absent features contribute 0.
inline double combine_features(const FeatureVector& features,
                               const std::vector<NamedScorer>& scorers, const RunConfig& config) {
  double combined = 0.0;
  if (features.paraphraser) combined += config.weight_paraphraser * *features.paraphraser;
  for (std::size_t i = 0; i < scorers.size(); ++i) {
    auto it = features.meaning_scores.find(scorers[i].name);
    if (it == features.meaning_scores.end()) continue;
    double weight = i == 0 ? config.weight_scorer_a : i == 1 ? config.weight_scorer_b : 1.0;
    combined += weight * it->second;
  }
  return combined;
}

// combined desc, then decode_score desc, then surface asc.
inline void sort_ranked_entries(std::vector<RankedEntry>& entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.combined_score != b.combined_score) return a.combined_score > b.combined_score;
    if (a.candidate.decode_score != b.candidate.decode_score)
      return a.candidate.decode_score > b.candidate.decode_score;
    return a.candidate.surface < b.candidate.surface;
  });
}

// Rescales every present feature value to [0, 1] across the candidate set.
// A feature with no spread maps to 0 for all candidates.
inline void normalize_feature_vectors(std::vector<RankedEntry>& entries) {
  auto minmax_apply = [&](const std::function<double*(RankedEntry&)>& field) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (RankedEntry& entry : entries)
      if (double* v = field(entry)) {
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
      }
    if (!(hi > lo)) {
      for (RankedEntry& entry : entries)
        if (double* v = field(entry)) *v = 0.0;
      return;
    }
    for (RankedEntry& entry : entries)
      if (double* v = field(entry)) *v = (*v - lo) / (hi - lo);
  };

  minmax_apply([](RankedEntry& e) -> double* {
    return e.features.paraphraser ? &*e.features.paraphraser : nullptr;
  });
  std::set<std::string> names;
  for (const RankedEntry& entry : entries)
    for (const auto& [name, value] : entry.features.meaning_scores) names.insert(name);
  for (const std::string& name : names) {
    minmax_apply([&name](RankedEntry& e) -> double* {
      auto it = e.features.meaning_scores.find(name);
      return it == e.features.meaning_scores.end() ? nullptr : &it->second;
    });
  }
}

inline RankedSubstitutes rank_candidates(const std::vector<NamedScorer>& scorers,
                                         const TokenizedSentence& sentence,
                                         const CandidateSet& cands, const RunConfig& config,
                                         const WarnFn& warn = {}) {
  if (config.features_enabled) {
    for (const std::string& name : *config.features_enabled) {
      if (name == kParaphraserFeature) continue;
      bool known = std::any_of(scorers.begin(), scorers.end(),
                               [&](const NamedScorer& s) { return s.name == name; });
      if (!known) raise(Errc::unknown_feature, "unknown feature: " + name);
    }
  }

  RankedSubstitutes out;
  out.entries.reserve(cands.candidates.size());
  for (const Candidate& candidate : cands.candidates) {
    RankedEntry entry;
    entry.candidate = candidate;
    entry.features = compute_features(scorers, sentence, candidate, config, warn);
    out.entries.push_back(std::move(entry));
  }
  if (config.normalize_features) normalize_feature_vectors(out.entries);
  for (RankedEntry& entry : out.entries)
    entry.combined_score = combine_features(entry.features, scorers, config);
  sort_ranked_entries(out.entries);
  return out;
}

}  // namespace lexsub

#endif  // LEXSUB_RANKER_HPP_
