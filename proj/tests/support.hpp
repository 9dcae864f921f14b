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
#ifndef LEXSUB_TESTS_SUPPORT_HPP_
#define LEXSUB_TESTS_SUPPORT_HPP_

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lexsub/backends.hpp"
#include "lexsub/core.hpp"

namespace testsupport {

inline std::string fixture_path(const std::string& name) {
  return std::string(LEXSUB_FIXTURES_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    dir_ = std::filesystem::temp_directory_path() /
           ("lexsub_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

 private:
  std::filesystem::path dir_;
};

// Fixture M1: start distribution one-hot on "the", then {cat: 0.6, dog: 0.4}.
// Vocab order: the=0, cat=1, dog=2, sat=3, </s>=4.
inline lexsub::TableModel make_m1() {
  return lexsub::TableModel(
      {"the", "cat", "dog", "sat", "</s>"}, "</s>",
      {
          {{}, {{"the", 1.0}}},
          {{"the"}, {{"cat", 0.6}, {"dog", 0.4}}},
      },
      {{"the", 1.0}}, "table:m1");
}

// Fixture M2: the suffix word "sat" dominates the prefix distribution but has
// a near-zero chance of repeating after itself.
inline lexsub::TableModel make_m2() {
  return lexsub::TableModel(
      {"the", "cat", "dog", "sat", "</s>"}, "</s>",
      {
          {{}, {{"the", 1.0}}},
          {{"the"}, {{"sat", 0.5}, {"dog", 0.3}, {"cat", 0.2}}},
          {{"the", "sat"}, {{"sat", 0.01}, {"the", 0.99}}},
          {{"the", "dog"}, {{"sat", 0.9}, {"the", 0.1}}},
          {{"the", "cat"}, {{"sat", 0.8}, {"the", 0.2}}},
      },
      {{"the", 1.0}}, "table:m2");
}

inline lexsub::TokenizedSentence the_cat_sat(const lexsub::Tokenizer& tokenizer) {
  return lexsub::make_tokenized_sentence("the cat sat", {4, 7}, tokenizer);
}

struct RandomCase {
  lexsub::TableModel model;
  lexsub::TokenizedSentence sentence;
};

// Small fully-enumerable model plus a sentence over its vocabulary. Vocab has
// 3..12 word tokens plus EOS, contexts of length 0..2, sentences of 1..5 words.
inline RandomCase make_random_case(std::mt19937& rng) {
  auto rand_int = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };

  int n_words = rand_int(3, 11);  // plus EOS: vocab stays within 12
  std::vector<std::string> vocab;
  for (int i = 0; i < n_words; ++i) vocab.push_back("w" + std::to_string(i));
  vocab.push_back("</s>");

  auto make_dist = [&]() {
    std::vector<int> ids(vocab.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    std::shuffle(ids.begin(), ids.end(), rng);
    int support = rand_int(1, static_cast<int>(vocab.size()));
    double total = 0.0;
    std::vector<std::pair<int, double>> raw;
    for (int i = 0; i < support; ++i) {
      double w = rand_int(1, 9);
      raw.emplace_back(ids[static_cast<std::size_t>(i)], w);
      total += w;
    }
    lexsub::TableModel::ProbMap dist;
    for (auto& [id, w] : raw) dist[vocab[static_cast<std::size_t>(id)]] = w / total;
    return dist;
  };

  std::map<std::vector<std::string>, lexsub::TableModel::ProbMap> entries;
  int n_entries = rand_int(2, 6);
  for (int e = 0; e < n_entries; ++e) {
    std::vector<std::string> context;
    int len = rand_int(0, 2);
    for (int i = 0; i < len; ++i) context.push_back(vocab[static_cast<std::size_t>(
        rand_int(0, n_words - 1))]);
    entries[context] = make_dist();
  }
  lexsub::TableModel::ProbMap uniform;
  for (const auto& token : vocab) uniform[token] = 1.0 / static_cast<double>(vocab.size());

  lexsub::TableModel model(vocab, "</s>", entries, uniform, "table:random");

  int n_sentence = rand_int(1, 5);
  std::vector<std::string> words;
  for (int i = 0; i < n_sentence; ++i)
    words.push_back(vocab[static_cast<std::size_t>(rand_int(0, n_words - 1))]);
  int target = rand_int(0, n_sentence - 1);

  std::string text;
  std::size_t target_begin = 0;
  for (int i = 0; i < n_sentence; ++i) {
    if (i) text.push_back(' ');
    if (i == target) target_begin = text.size();
    text += words[static_cast<std::size_t>(i)];
  }
  lexsub::CharSpan span{target_begin, target_begin + words[static_cast<std::size_t>(target)].size()};
  lexsub::TokenizedSentence sentence =
      lexsub::make_tokenized_sentence(text, span, model.tokenizer());
  return RandomCase{std::move(model), std::move(sentence)};
}

}  // namespace testsupport

#endif  // LEXSUB_TESTS_SUPPORT_HPP_
