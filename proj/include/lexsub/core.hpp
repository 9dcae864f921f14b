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
#ifndef LEXSUB_CORE_HPP_
#define LEXSUB_CORE_HPP_

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lexsub {

using TokenId = std::int32_t;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class Errc {
  empty_text,
  span_misaligned,
  span_out_of_range,
  unknown_token,
  vocab_too_large,
  empty_word,
  bad_fixture,
  malformed_line,
  duplicate_id,
  missing_field,
  missing_votes,
  too_many_guesses,
  id_mismatch,
  empty_gold,
  unknown_feature,
  dataset_not_found,
  backend_unavailable,
  scorer_failure,
  bad_config,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string msg) : std::runtime_error(std::move(msg)), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, std::string msg) {
  throw Error(code, std::move(msg));
}

// Warning sink. Library code never writes to stderr directly; callers decide.
using WarnFn = std::function<void(const std::string&)>;

inline void warn_to(const WarnFn& warn, std::string msg) {
  if (warn) warn(msg);
}

// ---------------------------------------------------------------------------
// Text helpers
// ---------------------------------------------------------------------------

inline std::string casefold(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline bool is_space_byte(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

// Collapses whitespace runs to a single blank and trims both ends.
inline std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_gap = true;  // swallow leading space
  for (char c : s) {
    if (is_space_byte(c)) {
      in_gap = true;
    } else {
      if (in_gap && !out.empty()) out.push_back(' ');
      in_gap = false;
      out.push_back(c);
    }
  }
  return out;
}

struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
  bool operator==(const CharSpan&) const = default;
};

// Maximal non-space runs with their offsets in the original string.
inline std::vector<std::pair<std::string, CharSpan>> split_words(std::string_view text) {
  std::vector<std::pair<std::string, CharSpan>> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space_byte(text[i])) ++i;
    if (i >= text.size()) break;
    std::size_t start = i;
    while (i < text.size() && !is_space_byte(text[i])) ++i;
    out.emplace_back(std::string(text.substr(start, i - start)), CharSpan{start, i});
  }
  return out;
}

inline bool has_alpha(std::string_view s) {
  return std::any_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isalpha(c) != 0; });
}

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

// Subword pieces carry a "##" marker and glue onto the previous piece without
// an intervening blank; everything else starts a new whitespace-delimited word.
inline constexpr std::string_view kContinuationMark = "##";

inline bool is_continuation_text(std::string_view piece) {
  return piece.size() > kContinuationMark.size() &&
         piece.substr(0, kContinuationMark.size()) == kContinuationMark;
}

inline std::string_view strip_continuation(std::string_view piece) {
  return is_continuation_text(piece) ? piece.substr(kContinuationMark.size()) : piece;
}

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;

  virtual std::size_t vocab_size() const = 0;
  virtual const std::string& token_text(TokenId id) const = 0;
  // Tokenizes a single whitespace-delimited word; throws unknown_token when the
  // word cannot be segmented from the vocabulary.
  virtual std::vector<TokenId> encode_word(std::string_view word) const = 0;

  bool is_continuation(TokenId id) const { return is_continuation_text(token_text(id)); }

  std::string decode(std::span<const TokenId> tokens) const {
    std::string out;
    for (TokenId id : tokens) {
      const std::string& piece = token_text(id);
      if (is_continuation_text(piece)) {
        out.append(strip_continuation(piece));
      } else {
        if (!out.empty()) out.push_back(' ');
        out.append(piece);
      }
    }
    return out;
  }
};

// Fixed-vocabulary tokenizer with greedy longest-match subword segmentation.
class VocabTokenizer final : public Tokenizer {
 public:
  explicit VocabTokenizer(std::vector<std::string> vocab) : vocab_(std::move(vocab)) {
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      if (vocab_[i].empty()) raise(Errc::bad_fixture, "empty token in vocabulary");
      if (!index_.emplace(vocab_[i], static_cast<TokenId>(i)).second)
        raise(Errc::bad_fixture, "duplicate token in vocabulary: " + vocab_[i]);
    }
  }

  // Open-vocabulary whitespace tokenizer over the distinct words of one text.
  static VocabTokenizer for_text(std::string_view text) {
    std::vector<std::string> vocab;
    std::set<std::string> seen;
    for (const auto& [word, span] : split_words(text)) {
      if (seen.insert(word).second) vocab.push_back(word);
    }
    return VocabTokenizer(std::move(vocab));
  }

  std::size_t vocab_size() const override { return vocab_.size(); }

  const std::string& token_text(TokenId id) const override {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_.size())
      raise(Errc::unknown_token, "token id out of range: " + std::to_string(id));
    return vocab_[static_cast<std::size_t>(id)];
  }

  std::optional<TokenId> find(std::string_view piece) const {
    auto it = index_.find(std::string(piece));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<TokenId> encode_word(std::string_view word) const override {
    if (word.empty()) raise(Errc::unknown_token, "cannot encode an empty word");
    std::vector<TokenId> out;
    std::size_t pos = 0;
    while (pos < word.size()) {
      std::string_view rest = word.substr(pos);
      std::optional<TokenId> best;
      std::size_t best_len = 0;
      for (std::size_t len = rest.size(); len >= 1; --len) {
        std::string piece =
            pos == 0 ? std::string(rest.substr(0, len))
                     : std::string(kContinuationMark) + std::string(rest.substr(0, len));
        if (auto id = find(piece)) {
          best = id;
          best_len = len;
          break;
        }
      }
      if (!best) raise(Errc::unknown_token, "cannot segment word: " + std::string(word));
      out.push_back(*best);
      pos += best_len;
    }
    return out;
  }

 private:
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, TokenId> index_;
};

// ---------------------------------------------------------------------------
// Sentence and candidate types
// ---------------------------------------------------------------------------

struct TokenizedSentence {
  std::string text;
  std::vector<TokenId> tokens;
  std::vector<std::string> words;
  std::vector<std::pair<std::size_t, std::size_t>> word_token_spans;  // [begin,end) into tokens
  std::vector<CharSpan> word_char_spans;                              // offsets into text
  std::size_t target_word_index = 0;

  const std::string& target_word() const { return words.at(target_word_index); }
  CharSpan target_char_span() const { return word_char_spans.at(target_word_index); }
  std::size_t target_token_begin() const { return word_token_spans.at(target_word_index).first; }

  // x_<t: every token strictly before the target word.
  std::vector<TokenId> prefix_tokens() const {
    return std::vector<TokenId>(tokens.begin(),
                                tokens.begin() + static_cast<std::ptrdiff_t>(target_token_begin()));
  }
};

struct DecodePrefix {
  std::vector<TokenId> tokens;
};

enum class Strategy { prefix_only, lookahead };

inline std::string_view strategy_name(Strategy s) {
  return s == Strategy::prefix_only ? "prefix" : "lookahead";
}

inline std::optional<Strategy> strategy_from_name(std::string_view name) {
  if (name == "prefix" || name == "prefix_only") return Strategy::prefix_only;
  if (name == "lookahead") return Strategy::lookahead;
  return std::nullopt;
}

struct Candidate {
  std::string surface;
  std::vector<TokenId> tokens;
  double decode_score = 0.0;
  Strategy strategy = Strategy::prefix_only;
  bool truncated = false;  // word boundary never reached within max_word_tokens

  TokenId first_token() const { return tokens.empty() ? -1 : tokens.front(); }
};

struct CandidateSet {
  const TokenizedSentence* sentence = nullptr;  // not owned; may be null after cache load
  std::vector<Candidate> candidates;
  int k_requested = 0;
};

struct FeatureVector {
  std::optional<double> paraphraser;            // decode-time score; absent when disabled
  std::map<std::string, double> meaning_scores; // scorer name -> value; absent when disabled/failed
};

struct RankedEntry {
  Candidate candidate;
  FeatureVector features;
  double combined_score = 0.0;
};

struct RankedSubstitutes {
  std::vector<RankedEntry> entries;
};

// ---------------------------------------------------------------------------
// Gold annotations
// ---------------------------------------------------------------------------

struct GoldAnnotation {
  std::string instance_id;
  std::string target_lemma;
  std::optional<std::string> pos_tag;
  std::map<std::string, double> substitutes;  // surface -> positive weight

  double total_weight() const {
    double sum = 0.0;
    for (const auto& [surface, weight] : substitutes) sum += weight;
    return sum;
  }

  // The unique heaviest substitute, or nullopt on a tie.
  std::optional<std::string> mode() const {
    std::optional<std::string> best;
    double best_weight = 0.0;
    bool tie = false;
    for (const auto& [surface, weight] : substitutes) {
      if (!best || weight > best_weight) {
        best = surface;
        best_weight = weight;
        tie = false;
      } else if (weight == best_weight) {
        tie = true;
      }
    }
    if (tie) return std::nullopt;
    return best;
  }

  double weight_of(std::string_view surface) const {
    auto it = substitutes.find(casefold(surface));
    return it == substitutes.end() ? 0.0 : it->second;
  }

  std::string lexelt() const {
    return pos_tag ? target_lemma + "." + *pos_tag : target_lemma;
  }
};

struct SwordsAnnotation {
  struct Votes {
    int good = 0;
    int total = 0;
  };

  std::string instance_id;
  std::map<std::string, Votes> votes;

  // Strict majority of annotators.
  std::set<std::string> acceptable() const {
    std::set<std::string> out;
    for (const auto& [surface, v] : votes)
      if (2 * v.good > v.total) out.insert(surface);
    return out;
  }

  // At least one annotator.
  std::set<std::string> conceivable() const {
    std::set<std::string> out;
    for (const auto& [surface, v] : votes)
      if (v.good >= 1) out.insert(surface);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct RunConfig {
  int k = 50;
  int lookahead_length = 2;
  int top_n_eval = 10;
  double weight_paraphraser = 0.02;
  double weight_scorer_a = 1.0;
  double weight_scorer_b = 1.0;
  int max_word_tokens = 5;
  // nullopt enables every feature; otherwise only the named ones contribute.
  std::optional<std::set<std::string>> features_enabled;
  // Min-max normalize each feature across the candidate set before combining.
  bool normalize_features = false;

  bool feature_enabled(std::string_view name) const {
    if (!features_enabled) return true;
    return features_enabled->count(std::string(name)) > 0;
  }

  void validate() const {
    if (k < 1) raise(Errc::bad_config, "k must be >= 1");
    if (top_n_eval < 1) raise(Errc::bad_config, "top_n_eval must be >= 1");
    if (max_word_tokens < 1) raise(Errc::bad_config, "max_word_tokens must be >= 1");
    if (lookahead_length < 0) raise(Errc::bad_config, "lookahead_length must be >= 0");
  }
};

// ---------------------------------------------------------------------------
// Sentence construction
// ---------------------------------------------------------------------------

inline TokenizedSentence make_tokenized_sentence(std::string_view text, CharSpan target_span,
                                                 const Tokenizer& tokenizer) {
  auto words = split_words(text);
  if (words.empty()) raise(Errc::empty_text, "sentence has no words");
  if (target_span.end > text.size() || target_span.begin >= target_span.end)
    raise(Errc::span_out_of_range, "target span outside sentence text");

  TokenizedSentence out;
  out.text = std::string(text);
  std::optional<std::size_t> target;
  for (std::size_t w = 0; w < words.size(); ++w) {
    const auto& [word, span] = words[w];
    std::size_t token_begin = out.tokens.size();
    for (TokenId id : tokenizer.encode_word(word)) out.tokens.push_back(id);
    out.word_token_spans.emplace_back(token_begin, out.tokens.size());
    out.word_char_spans.push_back(span);
    out.words.push_back(word);
    if (span == target_span) target = w;
  }
  if (!target)
    raise(Errc::span_misaligned, "target span (" + std::to_string(target_span.begin) + "," +
                                     std::to_string(target_span.end) +
                                     ") does not cover a whole word");
  out.target_word_index = *target;
  return out;
}

}  // namespace lexsub

#endif  // LEXSUB_CORE_HPP_
