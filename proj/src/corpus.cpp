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

#include "storyfier/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "storyfier/csv.hpp"
#include "storyfier/error.hpp"
#include "storyfier/text.hpp"

namespace storyfier::corpus {

std::string Story::text() const { return text::join(sentences, " "); }

void validate(const Story& story) {
  if (story.sentences.empty()) throw PreconditionError("story '" + story.id + "' has no sentences");
  for (std::size_t i = 0; i < story.sentences.size(); ++i) {
    if (text::trim(story.sentences[i]).empty()) {
      throw PreconditionError("story '" + story.id + "' sentence " + std::to_string(i + 1) + " is blank");
    }
  }
}

std::string_view to_string(Task t) { return t == Task::generate ? "generate" : "infill"; }

namespace {

std::vector<std::string> header_for(const CorpusFormat& format) {
  std::vector<std::string> h{"storyid", "storytitle"};
  for (std::size_t i = 1; i <= format.sentence_columns; ++i) h.push_back("sentence" + std::to_string(i));
  return h;
}

}  // namespace

ParsedCorpus parse_corpus(std::istream& in, const CorpusFormat& format) {
  if (!in) throw IoError("unreadable corpus stream");
  csv::Reader reader(in);
  const auto header = header_for(format);
  csv::expect_header(reader, header);
  ParsedCorpus out;
  while (auto rec = reader.next()) {
    if (rec->fields.size() == 1 && text::trim(rec->fields[0]).empty()) continue;
    if (rec->fields.size() != header.size()) {
      out.errors.push_back({rec->line, "column count mismatch at line " + std::to_string(rec->line)});
      continue;
    }
    Story s;
    s.id = rec->fields[0];
    s.title = text::trim(rec->fields[1]);
    for (std::size_t i = 2; i < rec->fields.size(); ++i) s.sentences.push_back(text::trim(rec->fields[i]));
    try {
      validate(s);
    } catch (const PreconditionError& e) {
      out.errors.push_back({rec->line, std::string(e.what()) + " at line " + std::to_string(rec->line)});
      continue;
    }
    out.stories.push_back(std::move(s));
  }
  return out;
}

std::vector<Story> parse_corpus_strict(std::istream& in, const CorpusFormat& format) {
  auto parsed = parse_corpus(in, format);
  if (!parsed.errors.empty()) throw ParseError(parsed.errors.front().message, 0);
  return std::move(parsed.stories);
}

std::vector<Story> load_corpus_file(const std::string& path, const CorpusFormat& format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file '" + path + "'");
  return parse_corpus_strict(in, format);
}

void write_corpus(std::ostream& out, const std::vector<Story>& stories, const CorpusFormat& format) {
  out << csv::format_row(header_for(format)) << '\n';
  for (const auto& s : stories) {
    std::vector<std::string> row{s.id, s.title};
    for (std::size_t i = 0; i < format.sentence_columns; ++i) {
      row.push_back(i < s.sentences.size() ? s.sentences[i] : std::string());
    }
    out << csv::format_row(row) << '\n';
  }
}

std::string match_vocab(const lexicon::VocabPool& vocab, std::string_view token) {
  const auto lower = text::to_lower(token);
  for (const auto& cand : text::headword_candidates(lower)) {
    if (vocab.contains(cand) && text::matches_headword(lower, cand)) return cand;
  }
  return {};
}

StoryTuple extract_tuple(const Story& story, const lexicon::VocabPool& vocab) {
  StoryTuple tuple{story, {}};
  for (std::size_t si = 0; si < story.sentences.size(); ++si) {
    const auto tokens = text::tokenize(story.sentences[si]);
    for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
      auto hw = match_vocab(vocab, tokens[ti].text);
      if (!hw.empty()) tuple.occurrences.push_back({std::move(hw), si, ti, std::string(tokens[ti].text)});
    }
  }
  return tuple;
}

double flesch_reading_ease(std::string_view s) {
  const auto tokens = text::tokenize(s);
  if (tokens.empty()) throw PreconditionError("readability of text with no words");
  long syllables = 0;
  for (const auto& t : tokens) syllables += text::count_syllables(t.text);
  const double words = static_cast<double>(tokens.size());
  const double sentences = static_cast<double>(text::count_sentences(s));
  return 206.835 - 1.015 * (words / sentences) - 84.6 * (static_cast<double>(syllables) / words);
}

double flesch_reading_ease(const Story& story) {
  std::size_t words = 0;
  std::size_t sentences = 0;
  long syllables = 0;
  for (const auto& sent : story.sentences) {
    const auto tokens = text::tokenize(sent);
    if (tokens.empty()) continue;
    ++sentences;
    words += tokens.size();
    for (const auto& t : tokens) syllables += text::count_syllables(t.text);
  }
  if (words == 0) throw PreconditionError("readability of text with no words");
  const double w = static_cast<double>(words);
  return 206.835 - 1.015 * (w / static_cast<double>(sentences)) - 84.6 * (static_cast<double>(syllables) / w);
}

CorpusStats dataset_stats(const std::vector<Story>& corpus, const lexicon::VocabPool& vocab) {
  if (corpus.empty()) throw PreconditionError("empty corpus");
  CorpusStats st;
  st.story_count = corpus.size();
  std::size_t sentence_count = 0;
  double readability = 0;
  std::set<std::string> seen;
  for (const auto& story : corpus) {
    for (const auto& sent : story.sentences) {
      const auto tokens = text::tokenize(sent);
      st.word_count += tokens.size();
      ++sentence_count;
      for (const auto& t : tokens) {
        auto hw = match_vocab(vocab, t.text);
        if (!hw.empty()) seen.insert(std::move(hw));
      }
    }
    readability += flesch_reading_ease(story);
  }
  const double n = static_cast<double>(st.story_count);
  st.avg_story_length = static_cast<double>(st.word_count) / n;
  st.avg_sentence_length = sentence_count ? static_cast<double>(st.word_count) / static_cast<double>(sentence_count) : 0;
  st.avg_readability = readability / n;
  st.vocab_coverage = vocab.empty() ? 0.0 : static_cast<double>(seen.size()) / static_cast<double>(vocab.size());
  return st;
}

std::string generation_prompt(std::string_view title, const std::vector<std::string>& words) {
  std::string out = "title: ";
  out += title.empty() ? kNoTitle : title;
  out += " | words: ";
  out += text::join(words, ", ");
  return out;
}

TrainingExample make_generation_example(const StoryTuple& tuple) {
  if (tuple.occurrences.empty()) throw PreconditionError("no target words in story");
  std::vector<std::string> words;
  words.reserve(tuple.occurrences.size());
  for (const auto& o : tuple.occurrences) words.push_back(o.word);
  return {Task::generate, generation_prompt(tuple.story.title, words), tuple.story.text()};
}

std::vector<TrainingExample> make_infill_examples(const StoryTuple& tuple, Rng& rng, std::size_t per_sentence) {
  if (per_sentence < 1) throw PreconditionError("per_sentence must be at least 1");
  const auto& sentences = tuple.story.sentences;
  std::vector<TrainingExample> out;
  for (std::size_t si = 0; si < sentences.size(); ++si) {
    // Headwords still to be used when the writer reaches sentence si.
    std::set<std::string> used_before;
    for (const auto& o : tuple.occurrences) {
      if (o.sentence_index < si) used_before.insert(o.word);
    }
    std::vector<std::string> unused;
    for (const auto& o : tuple.occurrences) {
      if (o.sentence_index >= si && !used_before.count(o.word) &&
          std::find(unused.begin(), unused.end(), o.word) == unused.end()) {
        unused.push_back(o.word);
      }
    }
    std::string before;
    for (std::size_t j = 0; j < si; ++j) before += sentences[j] + " ";
    std::string after;
    for (std::size_t j = si + 1; j < sentences.size(); ++j) after += " " + sentences[j];

    const auto& sent = sentences[si];
    const auto tokens = text::tokenize(sent);
    if (tokens.empty()) continue;
    for (std::size_t k = 0; k < per_sentence; ++k) {
      const std::size_t n = tokens.size();
      const std::size_t len = 1 + rng.below(n);
      const std::size_t first = rng.below(n - len + 1);
      const std::size_t begin = tokens[first].offset;
      const auto& last = tokens[first + len - 1];
      const std::size_t end = last.offset + last.text.size();

      std::string masked = sent.substr(0, begin);
      masked += kMaskMarker;
      masked += sent.substr(end);
      out.push_back({Task::infill, generation_prompt(tuple.story.title, unused) + " | story: " + before + masked + after,
                     sent.substr(begin, end - begin)});
    }
  }
  return out;
}

void write_examples(std::ostream& out, const std::vector<TrainingExample>& examples) {
  for (const auto& ex : examples) {
    nlohmann::ordered_json j;
    j["task"] = to_string(ex.task);
    j["input"] = ex.input_text;
    j["target"] = ex.target_text;
    out << j.dump() << '\n';
  }
}

}  // namespace storyfier::corpus
