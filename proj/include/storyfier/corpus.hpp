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
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "storyfier/lexicon.hpp"
#include "storyfier/rng.hpp"

namespace storyfier::corpus {

/// Mask marker substituted for the hidden span of an infill input.
inline constexpr std::string_view kMaskMarker = "[MASK]";

/// Title placeholder used in prompts for untitled stories.
inline constexpr std::string_view kNoTitle = "no title";

struct Story {
  std::string id;
  std::string title;  // may be empty
  std::vector<std::string> sentences;

  /// Sentences joined by single spaces.
  std::string text() const;
  bool operator==(const Story&) const = default;
};

/// Throws PreconditionError when there are no sentences or one is blank.
void validate(const Story& story);

struct WordOccurrence {
  std::string word;             // vocabulary headword
  std::size_t sentence_index = 0;
  std::size_t token_index = 0;  // position within the sentence's tokens
  std::string surface;          // token text exactly as written

  bool operator==(const WordOccurrence&) const = default;
};

/// A story with its vocabulary occurrences in reading order.
struct StoryTuple {
  Story story;
  std::vector<WordOccurrence> occurrences;
};

struct CorpusStats {
  std::size_t story_count = 0;
  std::size_t word_count = 0;
  double avg_story_length = 0;
  double avg_sentence_length = 0;
  double avg_readability = 0;
  double vocab_coverage = 0;
};

enum class Task { generate, infill };

struct TrainingExample {
  Task task = Task::generate;
  std::string input_text;
  std::string target_text;

  bool operator==(const TrainingExample&) const = default;
};

std::string_view to_string(Task t);

/// Column layout of a story CSV. The default is the ROCStory layout
/// `storyid,storytitle,sentence1..sentence5`.
struct CorpusFormat {
  std::size_t sentence_columns = 5;
};

struct RecordError {
  std::size_t line = 0;
  std::string message;
};

struct ParsedCorpus {
  std::vector<Story> stories;
  std::vector<RecordError> errors;
};

/// Parses a header-led RFC-4180 CSV. Malformed rows are reported per record
/// and skipped; a bad header or unterminated quote is fatal (ParseError).
ParsedCorpus parse_corpus(std::istream& in, const CorpusFormat& format = {});

/// Like parse_corpus but any record error is fatal.
std::vector<Story> parse_corpus_strict(std::istream& in, const CorpusFormat& format = {});
std::vector<Story> load_corpus_file(const std::string& path, const CorpusFormat& format = {});

/// Writes stories in the same CSV layout parse_corpus reads. Short stories
/// are padded with empty columns, which parse_corpus then rejects, so only
/// stories with exactly `format.sentence_columns` sentences round-trip.
void write_corpus(std::ostream& out, const std::vector<Story>& stories, const CorpusFormat& format = {});

/// Headword matched by `token` in `vocab`, exact form preferred; empty if none.
std::string match_vocab(const lexicon::VocabPool& vocab, std::string_view token);

StoryTuple extract_tuple(const Story& story, const lexicon::VocabPool& vocab);

CorpusStats dataset_stats(const std::vector<Story>& corpus, const lexicon::VocabPool& vocab);

/// 206.835 - 1.015 * words/sentences - 84.6 * syllables/words.
/// Sentences are counted from terminal punctuation. Throws
/// PreconditionError when the text has no words.
double flesch_reading_ease(std::string_view text);

/// Same formula with the story's own sentence segmentation.
double flesch_reading_ease(const Story& story);

/// "title: <title> | words: <w1>, <w2>, ..."
std::string generation_prompt(std::string_view title, const std::vector<std::string>& words);

TrainingExample make_generation_example(const StoryTuple& tuple);

std::vector<TrainingExample> make_infill_examples(const StoryTuple& tuple, Rng& rng, std::size_t per_sentence);

/// One JSON object per line: {"task":..., "input":..., "target":...}.
void write_examples(std::ostream& out, const std::vector<TrainingExample>& examples);

}  // namespace storyfier::corpus
