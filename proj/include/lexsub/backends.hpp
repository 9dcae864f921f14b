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
#ifndef LEXSUB_BACKENDS_HPP_
#define LEXSUB_BACKENDS_HPP_

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lexsub/core.hpp"

namespace lexsub {

// Finite stand-in for log(0); keeps lookahead averages total over zero-probability steps.
inline constexpr double kMinLogProb = -1.0e9;

// ---------------------------------------------------------------------------
// Next-token distribution
// ---------------------------------------------------------------------------

struct LmDistribution {
  std::vector<double> logprobs;  // indexed by token id

  std::size_t vocab_size() const { return logprobs.size(); }

  // Ties resolve to the lowest token id.
  TokenId argmax() const {
    TokenId best = 0;
    for (std::size_t i = 1; i < logprobs.size(); ++i)
      if (logprobs[i] > logprobs[static_cast<std::size_t>(best)]) best = static_cast<TokenId>(i);
    return best;
  }

  void validate(double tol = 1e-6) const {
    double mass = 0.0;
    for (double lp : logprobs) {
      if (lp > tol) raise(Errc::bad_fixture, "log-probability above zero");
      mass += std::exp(lp);
    }
    if (std::abs(mass - 1.0) > tol)
      raise(Errc::bad_fixture, "distribution mass " + std::to_string(mass) + " != 1");
  }
};

// ---------------------------------------------------------------------------
// Conditional sequence-model contract
// ---------------------------------------------------------------------------

class ConditionalModel {
 public:
  virtual ~ConditionalModel() = default;

  // Must be deterministic: identical (source, prefix) yields an identical vector.
  virtual LmDistribution next_distribution(const TokenizedSentence& source,
                                           const DecodePrefix& prefix) const = 0;

  virtual std::vector<LmDistribution> next_distribution_batch(
      const TokenizedSentence& source, const std::vector<DecodePrefix>& prefixes) const {
    std::vector<LmDistribution> out;
    out.reserve(prefixes.size());
    for (const auto& prefix : prefixes) out.push_back(next_distribution(source, prefix));
    return out;
  }

  virtual const Tokenizer& tokenizer() const = 0;
  virtual TokenId eos() const = 0;
  // Stable identity for cache keys and run manifests.
  virtual std::string id() const = 0;
  virtual bool thread_safe() const { return true; }
};

inline double sequence_logprob(const ConditionalModel& model, const TokenizedSentence& source,
                               std::span<const TokenId> tokens) {
  if (tokens.empty()) raise(Errc::empty_text, "sequence_logprob needs at least one token");
  double sum = 0.0;
  DecodePrefix prefix;
  for (TokenId id : tokens) {
    LmDistribution dist = model.next_distribution(source, prefix);
    if (id < 0 || static_cast<std::size_t>(id) >= dist.vocab_size())
      raise(Errc::unknown_token, "token id out of range: " + std::to_string(id));
    sum += dist.logprobs[static_cast<std::size_t>(id)];
    prefix.tokens.push_back(id);
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Table-driven model
// ---------------------------------------------------------------------------

// Enumerable conditional distribution used as the test double for a paraphraser.
// Context lookup is longest-suffix match over the decode prefix, falling back
// to the default distribution; the source sentence is ignored.
class TableModel final : public ConditionalModel {
 public:
  using ProbMap = std::map<std::string, double>;

  TableModel(std::vector<std::string> vocab, const std::string& eos_token,
             const std::map<std::vector<std::string>, ProbMap>& entries, const ProbMap& fallback,
             std::string model_id = "table:inline")
      : tokenizer_(std::move(vocab)), id_(std::move(model_id)) {
    auto eos = tokenizer_.find(eos_token);
    if (!eos) raise(Errc::bad_fixture, "eos token not in vocabulary: " + eos_token);
    eos_ = *eos;
    for (const auto& [context, probs] : entries) {
      std::vector<TokenId> key;
      key.reserve(context.size());
      for (const auto& word : context) key.push_back(require_token(word));
      max_context_ = std::max(max_context_, key.size());
      entries_.emplace(std::move(key), to_sparse(probs));
    }
    default_ = to_sparse(fallback);
  }

  static TableModel from_json(const nlohmann::json& doc, std::string model_id = "table:inline") {
    try {
      std::vector<std::string> vocab = doc.at("vocab").get<std::vector<std::string>>();
      std::string eos = doc.at("eos").get<std::string>();
      std::map<std::vector<std::string>, ProbMap> entries;
      for (const auto& [key, value] : doc.at("entries").items()) {
        std::vector<std::string> context;
        for (const auto& [word, span] : split_words(key)) context.push_back(word);
        entries[context] = value.get<ProbMap>();
      }
      ProbMap fallback = doc.at("default").get<ProbMap>();
      return TableModel(std::move(vocab), eos, entries, fallback, std::move(model_id));
    } catch (const nlohmann::json::exception& e) {
      raise(Errc::bad_fixture, std::string("bad table-model fixture: ") + e.what());
    }
  }

  static TableModel load(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(Errc::backend_unavailable, "cannot open table-model fixture: " + path);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      raise(Errc::bad_fixture, "unparseable table-model fixture " + path + ": " + e.what());
    }
    return from_json(doc, "table:" + path);
  }

  LmDistribution next_distribution(const TokenizedSentence& source,
                                   const DecodePrefix& prefix) const override {
    (void)source;
    for (TokenId id : prefix.tokens)
      if (id < 0 || static_cast<std::size_t>(id) >= tokenizer_.vocab_size())
        raise(Errc::unknown_token, "prefix token out of vocabulary: " + std::to_string(id));

    const SparseDist* dist = &default_;
    std::size_t len = std::min(max_context_, prefix.tokens.size()) + 1;
    while (len-- > 0) {
      std::vector<TokenId> suffix(prefix.tokens.end() - static_cast<std::ptrdiff_t>(len),
                                  prefix.tokens.end());
      auto it = entries_.find(suffix);
      if (it != entries_.end()) {
        dist = &it->second;
        break;
      }
    }

    LmDistribution out;
    out.logprobs.assign(tokenizer_.vocab_size(), kMinLogProb);
    for (const auto& [id, prob] : *dist)
      out.logprobs[static_cast<std::size_t>(id)] = std::log(prob);
    return out;
  }

  const Tokenizer& tokenizer() const override { return tokenizer_; }
  const VocabTokenizer& vocab_tokenizer() const { return tokenizer_; }
  TokenId eos() const override { return eos_; }
  std::string id() const override { return id_; }

 private:
  using SparseDist = std::vector<std::pair<TokenId, double>>;

  TokenId require_token(const std::string& word) const {
    auto id = tokenizer_.find(word);
    if (!id) raise(Errc::bad_fixture, "table entry token not in vocabulary: " + word);
    return *id;
  }

  SparseDist to_sparse(const ProbMap& probs) const {
    if (probs.empty()) raise(Errc::bad_fixture, "empty distribution in table model");
    SparseDist out;
    double mass = 0.0;
    for (const auto& [word, prob] : probs) {
      if (prob <= 0.0) raise(Errc::bad_fixture, "non-positive probability for token: " + word);
      out.emplace_back(require_token(word), prob);
      mass += prob;
    }
    if (std::abs(mass - 1.0) > 1e-9)
      raise(Errc::bad_fixture, "distribution sums to " + std::to_string(mass) + ", expected 1");
    std::sort(out.begin(), out.end());
    return out;
  }

  VocabTokenizer tokenizer_;
  TokenId eos_ = 0;
  std::map<std::vector<TokenId>, SparseDist> entries_;
  SparseDist default_;
  std::size_t max_context_ = 0;
  std::string id_;
};

// ---------------------------------------------------------------------------
// Exhaustive enumeration oracle
// ---------------------------------------------------------------------------

// Scores every vocabulary token by direct stepwise evaluation of the
// lookahead-averaged objective and returns the top k. Exists as an independent
// cross-check for the decoder; only feasible on small vocabularies.
inline std::vector<std::pair<TokenId, double>> oracle_topk_next(
    const ConditionalModel& model, const TokenizedSentence& source,
    const DecodePrefix& forced_prefix, std::size_t k,
    std::span<const TokenId> forced_suffix) {
  const std::size_t vocab = model.tokenizer().vocab_size();
  if (vocab > 64)
    raise(Errc::vocab_too_large,
          "oracle enumeration limited to vocab <= 64, got " + std::to_string(vocab));

  std::vector<std::pair<TokenId, double>> scored;
  scored.reserve(vocab);
  for (std::size_t y = 0; y < vocab; ++y) {
    LmDistribution base = model.next_distribution(source, forced_prefix);
    double acc = base.logprobs[y];
    DecodePrefix rollout = forced_prefix;
    rollout.tokens.push_back(static_cast<TokenId>(y));
    for (TokenId suffix_token : forced_suffix) {
      LmDistribution step = model.next_distribution(source, rollout);
      acc += step.logprobs[static_cast<std::size_t>(suffix_token)];
      rollout.tokens.push_back(suffix_token);
    }
    acc /= static_cast<double>(forced_suffix.size() + 1);
    scored.emplace_back(static_cast<TokenId>(y), acc);
  }

  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

// ---------------------------------------------------------------------------
// Sentence-pair scorer contract
// ---------------------------------------------------------------------------

class PairScorer {
 public:
  virtual ~PairScorer() = default;
  // Higher = more meaning-preserving. Must be deterministic.
  virtual double score(const std::string& original, const std::string& updated) const = 0;
  virtual bool thread_safe() const { return true; }
};

namespace detail {

template <typename Seq>
std::size_t edit_distance(const Seq& a, const Seq& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({row[j - 1] + 1, up + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

}  // namespace detail

// Normalized token-level edit similarity in [0, 1]; 1.0 on identical strings.
class MockPairScorer final : public PairScorer {
 public:
  double score(const std::string& original, const std::string& updated) const override {
    std::vector<std::string> a, b;
    for (const auto& [word, span] : split_words(original)) a.push_back(word);
    for (const auto& [word, span] : split_words(updated)) b.push_back(word);
    std::size_t denom = std::max<std::size_t>(1, std::max(a.size(), b.size()));
    return 1.0 - static_cast<double>(detail::edit_distance(a, b)) / static_cast<double>(denom);
  }
};

// Character-level variant; discriminates between single-word substitutions.
class MockCharPairScorer final : public PairScorer {
 public:
  double score(const std::string& original, const std::string& updated) const override {
    std::size_t denom = std::max<std::size_t>(1, std::max(original.size(), updated.size()));
    return 1.0 -
           static_cast<double>(detail::edit_distance(original, updated)) / static_cast<double>(denom);
  }
};

// ---------------------------------------------------------------------------
// Serializing gates for single-threaded implementations
// ---------------------------------------------------------------------------

class SerializedModel final : public ConditionalModel {
 public:
  explicit SerializedModel(const ConditionalModel& inner) : inner_(inner) {}

  LmDistribution next_distribution(const TokenizedSentence& source,
                                   const DecodePrefix& prefix) const override {
    std::lock_guard<std::mutex> lock(mutex_);
    return inner_.next_distribution(source, prefix);
  }

  const Tokenizer& tokenizer() const override { return inner_.tokenizer(); }
  TokenId eos() const override { return inner_.eos(); }
  std::string id() const override { return inner_.id(); }
  bool thread_safe() const override { return true; }

 private:
  const ConditionalModel& inner_;
  mutable std::mutex mutex_;
};

class SerializedScorer final : public PairScorer {
 public:
  explicit SerializedScorer(const PairScorer& inner) : inner_(inner) {}

  double score(const std::string& original, const std::string& updated) const override {
    std::lock_guard<std::mutex> lock(mutex_);
    return inner_.score(original, updated);
  }

  bool thread_safe() const override { return true; }

 private:
  const PairScorer& inner_;
  mutable std::mutex mutex_;
};

}  // namespace lexsub

#endif  // LEXSUB_BACKENDS_HPP_
