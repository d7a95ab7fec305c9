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

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "storyfier/rng.hpp"

namespace storyfier::lexicon {

struct VocabEntry {
  std::string headword;  // lowercase
  std::string definition;
  std::string part_of_speech;
  std::string phonetic;
  std::string usage_example;
  std::string gloss_zh;
  int frequency_rank = 0;  // 1 = most frequent

  bool operator==(const VocabEntry&) const = default;
};

/// Immutable after load; safe for concurrent reads.
class VocabPool {
 public:
  VocabPool() = default;

  /// Throws Error on a duplicate headword or duplicate rank.
  explicit VocabPool(std::vector<VocabEntry> entries);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  bool contains(std::string_view headword) const { return entries_.count(std::string(headword)) != 0; }

  /// Exact lowercase key lookup; nullptr when absent.
  const VocabEntry* find(std::string_view headword) const;

  const std::map<std::string, VocabEntry>& entries() const noexcept { return entries_; }

  /// Headwords in ascending lexicographic order.
  std::vector<std::string> headwords() const;

 private:
  std::map<std::string, VocabEntry> entries_;
};

/// Ordered list of distinct headwords studied together.
struct WordSet {
  std::vector<std::string> words;

  std::size_t size() const noexcept { return words.size(); }
  bool contains(std::string_view w) const;
  bool operator==(const WordSet&) const = default;
};

/// Validates distinctness and pool membership; throws PreconditionError.
WordSet make_word_set(const VocabPool& pool, std::vector<std::string> words);

/// Newline-delimited JSON with keys headword, definition, pos, phonetic,
/// example, gloss_zh, rank. Blank lines are skipped.
VocabPool load_vocab(std::istream& in);
VocabPool load_vocab_file(const std::string& path);

/// Case-folding lookup; throws NotFoundError.
const VocabEntry& lookup(const VocabPool& pool, std::string_view word);

/// Headwords whose frequency_rank lies in [lo, hi], sorted by rank. An
/// inverted interval (lo > hi) is empty.
std::vector<std::string> filter_by_difficulty(const VocabPool& pool, int lo, int hi);

/// k distinct words drawn uniformly without replacement from pool \ exclude.
WordSet sample_word_set(const VocabPool& pool, std::size_t k, Rng& rng,
                        const std::set<std::string>& exclude = {});

}  // namespace storyfier::lexicon
