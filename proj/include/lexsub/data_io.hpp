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
#ifndef LEXSUB_DATA_IO_HPP_
#define LEXSUB_DATA_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lexsub/core.hpp"

namespace lexsub {

// ---------------------------------------------------------------------------
// Benchmark types
// ---------------------------------------------------------------------------

struct BenchmarkInstance {
  std::string instance_id;
  std::string sentence_text;
  CharSpan target_char_span;
  std::string target_lemma;
  std::optional<std::string> pos_tag;
  std::variant<std::monostate, GoldAnnotation, SwordsAnnotation> gold;
};

struct PredictionRecord {
  std::string instance_id;
  std::optional<std::string> lexelt;  // "lemma.pos", needed for the legacy formats
  std::vector<std::string> ranked_surfaces;
  std::optional<std::vector<double>> scores;

  bool operator==(const PredictionRecord&) const = default;
};

// ---------------------------------------------------------------------------
// Small helpers
// ---------------------------------------------------------------------------

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space_byte(s[b])) ++b;
  while (e > b && is_space_byte(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

inline std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

inline std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::dataset_not_found, "cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return to_hex(fnv1a64(buf.str()));
}

// First whole-word occurrence of `word` (case-folded), for inputs that carry no
// character offsets. Ambiguous sentences resolve to the earliest match.
inline std::optional<CharSpan> locate_word_span(std::string_view text, std::string_view word,
                                                const WarnFn& warn = {}) {
  std::string folded = casefold(word);
  std::optional<CharSpan> found;
  int matches = 0;
  for (const auto& [w, span] : split_words(text)) {
    if (casefold(w) == folded) {
      if (!found) found = span;
      ++matches;
    }
  }
  if (matches > 1)
    warn_to(warn, "word '" + std::string(word) + "' occurs " + std::to_string(matches) +
                      " times; using the first occurrence");
  return found;
}

// ---------------------------------------------------------------------------
// Legacy gold files:  <lexelt> <id> :: (<substitute> <weight>;)+
// ---------------------------------------------------------------------------

inline std::map<std::string, GoldAnnotation> parse_gold_legacy(std::istream& in,
                                                               const WarnFn& warn = {}) {
  std::map<std::string, GoldAnnotation> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fail = [&](const std::string& why) {
      raise(Errc::malformed_line, "gold line " + std::to_string(line_no) + ": " + why);
    };
    if (trim(line).empty()) continue;

    std::size_t sep = line.find("::");
    if (sep == std::string::npos) fail("missing '::' separator");

    std::istringstream head(line.substr(0, sep));
    std::string lexelt, id, extra;
    if (!(head >> lexelt >> id) || (head >> extra)) fail("header is not '<lexelt> <id>'");

    GoldAnnotation gold;
    gold.instance_id = id;
    std::size_t dot = lexelt.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == lexelt.size()) {
      gold.target_lemma = lexelt;
    } else {
      gold.target_lemma = lexelt.substr(0, dot);
      gold.pos_tag = lexelt.substr(dot + 1);
    }

    std::string tail = line.substr(sep + 2);
    std::size_t pos = 0;
    while (pos <= tail.size()) {
      std::size_t semi = tail.find(';', pos);
      std::string chunk = trim(semi == std::string::npos ? tail.substr(pos)
                                                         : tail.substr(pos, semi - pos));
      if (!chunk.empty()) {
        std::size_t cut = chunk.find_last_of(" \t");
        if (cut == std::string::npos) fail("substitute entry lacks a weight: '" + chunk + "'");
        std::string surface = trim(chunk.substr(0, cut));
        double weight = 0.0;
        try {
          std::size_t used = 0;
          weight = std::stod(chunk.substr(cut + 1), &used);
          if (used != chunk.size() - cut - 1) fail("bad weight in '" + chunk + "'");
        } catch (const std::exception&) {
          fail("bad weight in '" + chunk + "'");
        }
        if (weight <= 0.0) fail("weight must be positive in '" + chunk + "'");
        if (surface.empty()) fail("empty substitute in '" + chunk + "'");
        gold.substitutes[casefold(surface)] += weight;
      }
      if (semi == std::string::npos) break;
      pos = semi + 1;
    }
    if (gold.substitutes.empty()) fail("no substitutes");

    if (!out.emplace(id, std::move(gold)).second)
      raise(Errc::duplicate_id, "duplicate instance id in gold file: " + id);
  }
  (void)warn;
  return out;
}

// ---------------------------------------------------------------------------
// Canonical JSONL contexts (one record per line, explicit char spans)
// ---------------------------------------------------------------------------

namespace detail {

inline void validate_span(const BenchmarkInstance& inst) {
  const auto& span = inst.target_char_span;
  if (span.end > inst.sentence_text.size() || span.begin >= span.end)
    raise(Errc::span_out_of_range, "instance " + inst.instance_id + ": span out of range");
  for (const auto& [word, ws] : split_words(inst.sentence_text))
    if (ws == span) return;
  raise(Errc::span_misaligned,
        "instance " + inst.instance_id + ": span does not match a word boundary");
}

inline BenchmarkInstance parse_instance_line(const nlohmann::json& doc, int line_no,
                                             bool require_votes) {
  auto need = [&](const char* field) -> const nlohmann::json& {
    if (!doc.contains(field))
      raise(Errc::missing_field,
            "dataset line " + std::to_string(line_no) + ": missing field '" + field + "'");
    return doc.at(field);
  };

  BenchmarkInstance inst;
  inst.instance_id = need("id").get<std::string>();
  inst.sentence_text = need("text").get<std::string>();
  inst.target_char_span = {need("target_start").get<std::size_t>(),
                           need("target_end").get<std::size_t>()};
  inst.target_lemma = need("lemma").get<std::string>();
  if (doc.contains("pos")) inst.pos_tag = doc.at("pos").get<std::string>();
  validate_span(inst);

  if (doc.contains("substitutes")) {
    SwordsAnnotation votes;
    votes.instance_id = inst.instance_id;
    for (const auto& [surface, entry] : doc.at("substitutes").items()) {
      if (!entry.contains("good") || !entry.contains("total"))
        raise(Errc::missing_votes, "instance " + inst.instance_id + ": substitute '" + surface +
                                       "' lacks good/total vote counts");
      SwordsAnnotation::Votes v;
      v.good = entry.at("good").get<int>();
      v.total = entry.at("total").get<int>();
      if (v.total <= 0 || v.good < 0 || v.good > v.total)
        raise(Errc::missing_votes,
              "instance " + inst.instance_id + ": inconsistent votes for '" + surface + "'");
      votes.votes[casefold(surface)] = v;
    }
    inst.gold = std::move(votes);
  } else if (require_votes) {
    raise(Errc::missing_votes,
          "dataset line " + std::to_string(line_no) + ": missing 'substitutes' votes");
  }
  return inst;
}

inline std::vector<BenchmarkInstance> parse_jsonl(std::istream& in, bool require_votes) {
  std::vector<BenchmarkInstance> out;
  std::set<std::string> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      raise(Errc::malformed_line, "dataset line " + std::to_string(line_no) + ": " + e.what());
    }
    BenchmarkInstance inst = parse_instance_line(doc, line_no, require_votes);
    if (!ids.insert(inst.instance_id).second)
      raise(Errc::duplicate_id, "duplicate instance id: " + inst.instance_id);
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace detail

inline std::vector<BenchmarkInstance> parse_contexts_jsonl(std::istream& in) {
  return detail::parse_jsonl(in, /*require_votes=*/false);
}

inline std::vector<BenchmarkInstance> parse_swords_jsonl(std::istream& in) {
  return detail::parse_jsonl(in, /*require_votes=*/true);
}

// ---------------------------------------------------------------------------
// Prediction serialization
// ---------------------------------------------------------------------------

enum class PredictionStyle { best, oot, jsonl };

inline std::optional<PredictionStyle> prediction_style_from_name(std::string_view name) {
  if (name == "best") return PredictionStyle::best;
  if (name == "oot") return PredictionStyle::oot;
  if (name == "jsonl") return PredictionStyle::jsonl;
  return std::nullopt;
}

inline void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& records,
                              PredictionStyle style) {
  for (const PredictionRecord& record : records) {
    switch (style) {
      case PredictionStyle::best: {
        std::string lexelt = record.lexelt.value_or("?");
        out << lexelt << ' ' << record.instance_id << " :: ";
        if (!record.ranked_surfaces.empty()) out << record.ranked_surfaces.front();
        out << '\n';
        break;
      }
      case PredictionStyle::oot: {
        if (record.ranked_surfaces.size() > 10)
          raise(Errc::too_many_guesses, "instance " + record.instance_id + " has " +
                                            std::to_string(record.ranked_surfaces.size()) +
                                            " guesses; the out-of-ten format allows 10");
        std::string lexelt = record.lexelt.value_or("?");
        out << lexelt << ' ' << record.instance_id << " ::: ";
        for (std::size_t i = 0; i < record.ranked_surfaces.size(); ++i) {
          if (i) out << ';';
          out << record.ranked_surfaces[i];
        }
        out << '\n';
        break;
      }
      case PredictionStyle::jsonl: {
        nlohmann::json doc;
        doc["id"] = record.instance_id;
        if (record.lexelt) doc["lexelt"] = *record.lexelt;
        doc["surfaces"] = record.ranked_surfaces;
        if (record.scores) doc["scores"] = *record.scores;
        out << doc.dump() << '\n';
        break;
      }
    }
  }
}

inline std::vector<PredictionRecord> parse_predictions_jsonl(std::istream& in) {
  std::vector<PredictionRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      raise(Errc::malformed_line, "prediction line " + std::to_string(line_no) + ": " + e.what());
    }
    PredictionRecord record;
    if (!doc.contains("id") || !doc.contains("surfaces"))
      raise(Errc::missing_field,
            "prediction line " + std::to_string(line_no) + ": needs 'id' and 'surfaces'");
    record.instance_id = doc.at("id").get<std::string>();
    record.ranked_surfaces = doc.at("surfaces").get<std::vector<std::string>>();
    if (doc.contains("lexelt")) record.lexelt = doc.at("lexelt").get<std::string>();
    if (doc.contains("scores")) record.scores = doc.at("scores").get<std::vector<double>>();
    out.push_back(std::move(record));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Candidate cache: one file per (model, dataset), atomic replacement on write
// ---------------------------------------------------------------------------

inline std::string config_hash(const RunConfig& config, Strategy strategy) {
  std::ostringstream key;
  key << "k=" << config.k << ";L=" << config.lookahead_length
      << ";mwt=" << config.max_word_tokens << ";w=" << config.weight_paraphraser << ','
      << config.weight_scorer_a << ',' << config.weight_scorer_b
      << ";strategy=" << strategy_name(strategy) << ";features=";
  if (config.features_enabled) {
    for (const auto& f : *config.features_enabled) key << f << ',';
  } else {
    key << "all";
  }
  return to_hex(fnv1a64(key.str()));
}

class ScoreCache {
 public:
  static constexpr int kFormatVersion = 1;

  ScoreCache(const std::string& dir, const std::string& model_id, const std::string& dataset_id,
             const WarnFn& warn = {})
      : model_id_(model_id), dataset_id_(dataset_id) {
    std::filesystem::create_directories(dir);
    path_ = (std::filesystem::path(dir) /
             ("candidates_" + to_hex(fnv1a64(model_id + "|" + dataset_id)) + ".json"))
                .string();
    load(warn);
  }

  std::optional<CandidateSet> get(const std::string& instance_id, Strategy strategy,
                                  const std::string& cfg_hash, const WarnFn& warn = {}) const {
    auto it = entries_.find(instance_id);
    if (it == entries_.end()) return std::nullopt;
    const nlohmann::json& entry = it.value();
    if (entry.value("config_hash", "") != cfg_hash) return std::nullopt;  // stale
    if (entry.value("strategy", "") != strategy_name(strategy)) return std::nullopt;

    try {
      CandidateSet set;
      set.k_requested = entry.value("k_requested", 0);
      for (const auto& c : entry.at("candidates")) {
        Candidate cand;
        cand.surface = c.at("surface").get<std::string>();
        cand.tokens = c.at("tokens").get<std::vector<TokenId>>();
        cand.decode_score = c.at("score").get<double>();
        cand.truncated = c.value("truncated", false);
        auto strat = strategy_from_name(c.value("strategy", "prefix"));
        cand.strategy = strat.value_or(Strategy::prefix_only);
        set.candidates.push_back(std::move(cand));
      }
      return set;
    } catch (const nlohmann::json::exception& e) {
      warn_to(warn, "corrupt cache entry for " + instance_id + ": " + e.what());
      return std::nullopt;
    }
  }

  void put(const std::string& instance_id, Strategy strategy, const std::string& cfg_hash,
           const CandidateSet& set) {
    nlohmann::json entry;
    entry["config_hash"] = cfg_hash;
    entry["strategy"] = strategy_name(strategy);
    entry["k_requested"] = set.k_requested;
    nlohmann::json cands = nlohmann::json::array();
    for (const Candidate& cand : set.candidates) {
      nlohmann::json c;
      c["surface"] = cand.surface;
      c["tokens"] = cand.tokens;
      c["score"] = cand.decode_score;
      c["strategy"] = strategy_name(cand.strategy);
      c["truncated"] = cand.truncated;
      cands.push_back(std::move(c));
    }
    entry["candidates"] = std::move(cands);
    entries_[instance_id] = std::move(entry);
    dirty_ = true;
  }

  // Writes to a temp file and renames over the old one.
  void flush() {
    if (!dirty_) return;
    nlohmann::json doc;
    doc["format_version"] = kFormatVersion;
    doc["model_id"] = model_id_;
    doc["dataset_id"] = dataset_id_;
    doc["entries"] = entries_;
    std::string tmp = path_ + ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << doc.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path_);
    dirty_ = false;
  }

  const std::string& path() const { return path_; }
  std::size_t size() const { return entries_.size(); }

 private:
  void load(const WarnFn& warn) {
    entries_ = nlohmann::json::object();
    std::ifstream in(path_);
    if (!in) return;
    nlohmann::json doc;
    try {
      in >> doc;
      if (doc.value("format_version", -1) != kFormatVersion ||
          doc.value("model_id", "") != model_id_ || !doc.contains("entries"))
        raise(Errc::bad_fixture, "cache metadata mismatch");
      entries_ = doc.at("entries");
    } catch (const std::exception& e) {
      warn_to(warn, "ignoring corrupt cache file " + path_ + ": " + e.what());
      entries_ = nlohmann::json::object();
    }
  }

  std::string model_id_;
  std::string dataset_id_;
  std::string path_;
  nlohmann::json entries_;
  bool dirty_ = false;
};

}  // namespace lexsub

#endif  // LEXSUB_DATA_IO_HPP_
