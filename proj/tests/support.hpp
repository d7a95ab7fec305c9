// Copyright 2026 The Storyfier Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "storyfier/corpus.hpp"
#include "storyfier/lexicon.hpp"
#include "storyfier/rng.hpp"

namespace storyfier::testing {

inline std::string data_path(std::string_view rel) { return std::string(STORYFIER_DATA_DIR) + "/" + std::string(rel); }

inline const lexicon::VocabPool& sample_vocab() {
  static const lexicon::VocabPool pool = lexicon::load_vocab_file(data_path("vocab_sample.ndjson"));
  return pool;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("storyfier-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(std::string_view name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// -- generators --------------------------------------------------------------

/// A small word list so random texts repeat tokens and trigrams often.
inline const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> w = {"the", "a",   "cat",  "dog",  "ran",   "home", "to",    "and",
                                             "she", "saw", "big",  "red",  "house", "it",   "was",   "very",
                                             "Tom", "Ann", "rain", "fell", "on",    "we",   "happy", "café"};
  return w;
}

/// Random text of 1..max_tokens tokens mixing filler words, vocabulary
/// words (sometimes inflected or capitalised), punctuation and sentence
/// breaks.
inline std::string random_text(Rng& rng, std::size_t max_tokens, const std::vector<std::string>& vocab_words = {}) {
  static const std::vector<std::string> kSuffix = {"", "", "", "s", "ed", "ing", "es", "d"};
  static const std::vector<std::string> kPunct = {"", "", "", "", ",", ".", "!", "?", "\"", "'s", "..."};
  const std::size_t n = 1 + rng.below(max_tokens);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string w;
    if (!vocab_words.empty() && rng.chance(0.3)) {
      w = vocab_words[rng.below(vocab_words.size())] + kSuffix[rng.below(kSuffix.size())];
    } else {
      w = filler_words()[rng.below(filler_words().size())];
    }
    if (rng.chance(0.1) && !w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
    if (rng.chance(0.05)) w = "(" + w;
    w += kPunct[rng.below(kPunct.size())];
    if (!out.empty()) out += rng.chance(0.05) ? "  " : " ";
    out += w;
  }
  return out;
}

/// Five-sentence story whose sentences use filler and vocabulary words.
inline corpus::Story random_story(Rng& rng, const std::vector<std::string>& vocab_words, std::string id = "r") {
  corpus::Story s;
  s.id = std::move(id);
  s.title = rng.chance(0.2) ? "" : "Story " + std::to_string(rng.below(1000));
  for (int i = 0; i < 5; ++i) {
    std::string sentence;
    const std::size_t n = 3 + rng.below(8);
    for (std::size_t t = 0; t < n; ++t) {
      std::string w = (!vocab_words.empty() && rng.chance(0.25)) ? vocab_words[rng.below(vocab_words.size())]
                                                                 : filler_words()[rng.below(filler_words().size())];
      if (t == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
      if (!sentence.empty()) sentence += ' ';
      sentence += w;
      if (t + 1 < n && rng.chance(0.1)) sentence += ',';
    }
    sentence += rng.chance(0.8) ? "." : "!";
    s.sentences.push_back(std::move(sentence));
  }
  return s;
}

}  // namespace storyfier::testing
