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
#ifndef LEXSUB_DECODER_HPP_
#define LEXSUB_DECODER_HPP_

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lexsub/backends.hpp"
#include "lexsub/core.hpp"

namespace lexsub {

// ---------------------------------------------------------------------------
// Lookahead specification
// ---------------------------------------------------------------------------

// The forced continuation after the candidate slot: the tokens of the next
// `length` source words, truncated at sentence end. Length counts words, not
// subword tokens.
struct LookaheadSpec {
  int length = 0;
  std::vector<TokenId> forced_suffix;
};

inline LookaheadSpec make_lookahead_spec(const TokenizedSentence& sentence,
                                         const Tokenizer& tokenizer, int length) {
  if (length < 0) raise(Errc::bad_config, "lookahead length must be >= 0");
  LookaheadSpec spec;
  spec.length = length;
  std::size_t first = sentence.target_word_index + 1;
  std::size_t last = std::min(sentence.words.size(), first + static_cast<std::size_t>(length));
  for (std::size_t w = first; w < last; ++w)
    for (TokenId id : tokenizer.encode_word(sentence.words[w])) spec.forced_suffix.push_back(id);
  return spec;
}

// ---------------------------------------------------------------------------
// Token scoring
// ---------------------------------------------------------------------------

struct TokenScore {
  TokenId token = 0;
  double score = 0.0;
  double base_logprob = 0.0;  // log p(token | prefix), before lookahead averaging
};

// Prefix-only: score(y) = log p(y | x_<t).
// Lookahead:   score(y) = mean of log p over y followed by the forced suffix,
// i.e. (1/(n+1)) * [log p(y|x_<t) + sum_j log p(s_j | x_<t . y . s_<j)] with
// n = |forced_suffix|. n = 0 reduces exactly to the prefix-only score.
inline std::vector<TokenScore> candidate_token_scores(const ConditionalModel& model,
                                                      const TokenizedSentence& sentence,
                                                      Strategy strategy,
                                                      const LookaheadSpec& lookahead = {}) {
  DecodePrefix prefix{sentence.prefix_tokens()};
  LmDistribution base = model.next_distribution(sentence, prefix);

  std::vector<TokenScore> out;
  out.reserve(base.vocab_size());
  bool roll = strategy == Strategy::lookahead && !lookahead.forced_suffix.empty();
  for (std::size_t y = 0; y < base.vocab_size(); ++y) {
    TokenScore ts;
    ts.token = static_cast<TokenId>(y);
    ts.base_logprob = base.logprobs[y];
    double acc = base.logprobs[y];
    if (roll) {
      DecodePrefix rollout = prefix;
      rollout.tokens.push_back(ts.token);
      for (TokenId suffix_token : lookahead.forced_suffix) {
        LmDistribution step = model.next_distribution(sentence, rollout);
        acc += step.logprobs[static_cast<std::size_t>(suffix_token)];
        rollout.tokens.push_back(suffix_token);
      }
      acc /= static_cast<double>(lookahead.forced_suffix.size() + 1);
    }
    ts.score = acc;
    out.push_back(ts);
  }
  return out;
}

// Score descending, then token id ascending.
inline void sort_token_scores(std::vector<TokenScore>& scores) {
  std::sort(scores.begin(), scores.end(), [](const TokenScore& a, const TokenScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.token < b.token;
  });
}

// ---------------------------------------------------------------------------
// Morphology
// ---------------------------------------------------------------------------

// Deterministic suffix-stripping stemmer. Coarse on purpose: it only has to
// group inflections and close derivations of the same base word.
inline std::string stem(std::string_view word) {
  std::string w = casefold(word);
  auto ends_with = [&](std::string_view suffix) {
    return w.size() >= suffix.size() && std::string_view(w).substr(w.size() - suffix.size()) == suffix;
  };
  auto chop = [&](std::size_t n) { w.erase(w.size() - n); };
  auto undouble = [&] {
    if (w.size() >= 2 && w[w.size() - 1] == w[w.size() - 2] &&
        std::string("bdfglmnprt").find(w.back()) != std::string::npos)
      w.pop_back();
  };

  if (ends_with("ies") && w.size() > 4) {
    chop(3);
    w.push_back('i');
  } else if (ends_with("ied") && w.size() > 4) {
    chop(3);
    w.push_back('i');
  } else if (ends_with("sses")) {
    chop(2);
  } else if (ends_with("es") && w.size() > 3) {
    chop(2);
  } else if (ends_with("s") && !ends_with("ss") && w.size() > 3) {
    chop(1);
  } else if (ends_with("ing") && w.size() > 5) {
    chop(3);
    undouble();
  } else if (ends_with("ed") && w.size() > 4) {
    chop(2);
    undouble();
  } else if (ends_with("est") && w.size() > 4) {
    chop(3);
  } else if (ends_with("er") && w.size() > 3) {
    chop(2);
    undouble();
  } else if (ends_with("ly") && w.size() > 4) {
    chop(2);
  }

  if (w.size() > 2 && w.back() == 'y') w.back() = 'i';
  return w;
}

// Optional plug-in lemmatizer; empty means stem-only matching.
using Lemmatizer = std::function<std::string(const std::string&)>;

inline bool is_morphological_variant(std::string_view a, std::string_view b,
                                     const Lemmatizer& lemmatizer = {}) {
  std::string fa = casefold(a);
  std::string fb = casefold(b);
  if (fa == fb) return true;
  if (stem(fa) == stem(fb)) return true;
  if (lemmatizer && lemmatizer(fa) == lemmatizer(fb)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Word completion
// ---------------------------------------------------------------------------

// Greedily extends first_token after x_<t until a word boundary: a
// non-continuation token, EOS, or max_word_tokens. Returns nullopt when the
// completed surface has no alphabetic content. decode_score is the strategy
// score of first_token; continuation tokens never alter it.
inline std::optional<Candidate> complete_word(const ConditionalModel& model,
                                              const TokenizedSentence& sentence,
                                              TokenId first_token, double decode_score,
                                              Strategy strategy, int max_word_tokens) {
  const Tokenizer& tok = model.tokenizer();
  Candidate cand;
  cand.strategy = strategy;
  cand.decode_score = decode_score;
  cand.tokens.push_back(first_token);
  cand.surface = std::string(strip_continuation(tok.token_text(first_token)));

  DecodePrefix prefix{sentence.prefix_tokens()};
  prefix.tokens.push_back(first_token);

  while (true) {
    LmDistribution dist = model.next_distribution(sentence, prefix);
    TokenId next = dist.argmax();
    if (next == model.eos() || !tok.is_continuation(next)) break;
    if (static_cast<int>(cand.tokens.size()) >= max_word_tokens) {
      cand.truncated = true;
      break;
    }
    cand.tokens.push_back(next);
    cand.surface.append(strip_continuation(tok.token_text(next)));
    prefix.tokens.push_back(next);
  }

  if (!has_alpha(cand.surface)) return std::nullopt;
  return cand;
}

// ---------------------------------------------------------------------------
// Candidate generation
// ---------------------------------------------------------------------------

// Examines the top 2k first tokens (reserve k, so filtering rarely starves the
// set), completes each to a word, then drops morphological variants of the
// target, case-folded duplicates (first = highest-scored wins) and non-words.
inline CandidateSet generate_candidates(const ConditionalModel& model,
                                        const TokenizedSentence& sentence,
                                        const RunConfig& config, Strategy strategy,
                                        const Lemmatizer& lemmatizer = {}) {
  config.validate();
  LookaheadSpec spec;
  if (strategy == Strategy::lookahead)
    spec = make_lookahead_spec(sentence, model.tokenizer(), config.lookahead_length);

  std::vector<TokenScore> scores = candidate_token_scores(model, sentence, strategy, spec);
  sort_token_scores(scores);

  CandidateSet out;
  out.sentence = &sentence;
  out.k_requested = config.k;

  const std::string& target = sentence.target_word();
  std::set<std::string> seen;
  std::size_t examined = 0;
  for (const TokenScore& ts : scores) {
    if (static_cast<int>(out.candidates.size()) >= config.k) break;
    if (examined >= 2 * static_cast<std::size_t>(config.k)) break;
    if (ts.base_logprob <= kMinLogProb) continue;  // zero-probability tokens are not candidates
    ++examined;
    if (ts.token == model.eos()) continue;

    auto cand =
        complete_word(model, sentence, ts.token, ts.score, strategy, config.max_word_tokens);
    if (!cand) continue;
    if (is_morphological_variant(cand->surface, target, lemmatizer)) continue;
    if (!seen.insert(casefold(cand->surface)).second) continue;
    out.candidates.push_back(std::move(*cand));
  }
  return out;
}

}  // namespace lexsub

#endif  // LEXSUB_DECODER_HPP_
