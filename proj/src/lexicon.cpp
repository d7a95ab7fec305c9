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

#include "storyfier/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "storyfier/error.hpp"
#include "storyfier/text.hpp"

namespace storyfier::lexicon {

VocabPool::VocabPool(std::vector<VocabEntry> entries) {
  std::unordered_set<int> ranks;
  for (auto& e : entries) {
    if (e.headword.empty()) throw Error("empty headword");
    if (!ranks.insert(e.frequency_rank).second) {
      throw Error("duplicate frequency rank " + std::to_string(e.frequency_rank) + " for '" + e.headword + "'");
    }
    auto key = e.headword;
    if (!entries_.emplace(key, std::move(e)).second) throw Error("duplicate headword '" + key + "'");
  }
}

const VocabEntry* VocabPool::find(std::string_view headword) const {
  auto it = entries_.find(std::string(headword));
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> VocabPool::headwords() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [k, _] : entries_) out.push_back(k);
  return out;
}

bool WordSet::contains(std::string_view w) const {
  return std::find(words.begin(), words.end(), w) != words.end();
}

WordSet make_word_set(const VocabPool& pool, std::vector<std::string> words) {
  std::set<std::string> seen;
  for (auto& w : words) {
    w = text::to_lower(text::trim(w));
    if (!pool.contains(w)) throw PreconditionError("word '" + w + "' is not in the vocabulary");
    if (!seen.insert(w).second) throw PreconditionError("word '" + w + "' appears twice in the word set");
  }
  return WordSet{std::move(words)};
}

namespace {

std::string required_string(const nlohmann::json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ParseError(std::string("missing required field '") + key + "'", line);
  }
  return it->get<std::string>();
}

std::string optional_string(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  return it != obj.end() && it->is_string() ? it->get<std::string>() : std::string();
}

}  // namespace

VocabPool load_vocab(std::istream& in) {
  std::vector<VocabEntry> entries;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
    }
    if (!obj.is_object()) throw ParseError("record is not a JSON object", lineno);
    VocabEntry e;
    e.headword = text::to_lower(text::trim(required_string(obj, "headword", lineno)));
    if (e.headword.empty()) throw ParseError("empty headword", lineno);
    e.definition = required_string(obj, "definition", lineno);
    e.part_of_speech = required_string(obj, "pos", lineno);
    e.gloss_zh = required_string(obj, "gloss_zh", lineno);
    e.phonetic = optional_string(obj, "phonetic");
    e.usage_example = optional_string(obj, "example");
    auto rank = obj.find("rank");
    if (rank == obj.end() || !rank->is_number_integer() || rank->get<long long>() < 1) {
      throw ParseError("missing or non-positive 'rank'", lineno);
    }
    e.frequency_rank = rank->get<int>();
    if (!seen.insert(e.headword).second) throw Error("duplicate headword '" + e.headword + "'");
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw Error("empty vocabulary");
  return VocabPool(std::move(entries));
}

VocabPool load_vocab_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file '" + path + "'");
  return load_vocab(in);
}

const VocabEntry& lookup(const VocabPool& pool, std::string_view word) {
  const auto key = text::to_lower(text::trim(word));
  if (const auto* e = pool.find(key)) return *e;
  throw NotFoundError("word '" + key + "' not found");
}

std::vector<std::string> filter_by_difficulty(const VocabPool& pool, int lo, int hi) {
  std::vector<const VocabEntry*> hits;
  for (const auto& [_, e] : pool.entries()) {
    if (e.frequency_rank >= lo && e.frequency_rank <= hi) hits.push_back(&e);
  }
  std::sort(hits.begin(), hits.end(),
            [](const VocabEntry* a, const VocabEntry* b) { return a->frequency_rank < b->frequency_rank; });
  std::vector<std::string> out;
  out.reserve(hits.size());
  for (const auto* e : hits) out.push_back(e->headword);
  return out;
}

WordSet sample_word_set(const VocabPool& pool, std::size_t k, Rng& rng, const std::set<std::string>& exclude) {
  std::vector<std::string> candidates;
  for (const auto& [w, _] : pool.entries()) {
    if (!exclude.count(w)) candidates.push_back(w);
  }
  if (candidates.size() < k) {
    throw PreconditionError("cannot sample " + std::to_string(k) + " words from " +
                            std::to_string(candidates.size()) + " candidates");
  }
  // Partial Fisher-Yates: the first k slots are a uniform k-subset in random order.
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + rng.below(candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(k);
  return WordSet{std::move(candidates)};
}

}  // namespace storyfier::lexicon
