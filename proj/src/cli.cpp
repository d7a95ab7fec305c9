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

#include "storyfier/cli.hpp"

#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "storyfier/error.hpp"
#include "storyfier/grammar.hpp"
#include "storyfier/lexicon.hpp"
#include "storyfier/simulate.hpp"
#include "storyfier/storyeval.hpp"
#include "storyfier/wordselect.hpp"

namespace storyfier::cli {

Format format_from_string(std::string_view s) {
  if (s == "json") return Format::json;
  if (s == "table") return Format::table;
  throw PreconditionError("unknown format '" + std::string(s) + "' (json or table)");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const ParseError*>(&e)) return kExitUsage;
  return kExitDomain;
}

int guarded(std::ostream& err, const std::function<void()>& fn) {
  try {
    fn();
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

void cmd_corpus_stats(const std::string& corpus_path, const std::string& vocab_path, Format format,
                      std::ostream& out) {
  const auto vocab = lexicon::load_vocab_file(vocab_path);
  const auto stories = corpus::load_corpus_file(corpus_path);
  const auto st = corpus::dataset_stats(stories, vocab);
  nlohmann::ordered_json j;
  j["story_count"] = st.story_count;
  j["word_count"] = st.word_count;
  j["avg_story_length"] = st.avg_story_length;
  j["avg_sentence_length"] = st.avg_sentence_length;
  j["avg_readability"] = st.avg_readability;
  j["vocab_coverage"] = st.vocab_coverage;
  if (format == Format::json) {
    out << j.dump(2) << '\n';
    return;
  }
  // Same number rendering as the JSON output.
  for (const auto& [key, value] : j.items()) out << std::left << std::setw(22) << key << value.dump() << '\n';
}

std::size_t cmd_export_training(const ExportOptions& o, std::ostream& log) {
  if (o.per_sentence == 0) throw PreconditionError("--per-sentence must be at least 1");
  const auto vocab = lexicon::load_vocab_file(o.vocab_path);
  const auto stories = corpus::load_corpus_file(o.corpus_path);
  std::vector<corpus::TrainingExample> examples;
  std::size_t skipped = 0;
  Rng rng(o.seed);
  for (const auto& story : stories) {
    const auto tuple = corpus::extract_tuple(story, vocab);
    if (o.task == corpus::Task::generate) {
      if (tuple.occurrences.empty()) {
        ++skipped;
        continue;
      }
      examples.push_back(corpus::make_generation_example(tuple));
    } else {
      auto batch = corpus::make_infill_examples(tuple, rng, o.per_sentence);
      examples.insert(examples.end(), batch.begin(), batch.end());
    }
  }
  std::ofstream out(o.out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + o.out_path + "'");
  corpus::write_examples(out, examples);
  if (!out) throw IoError("write to '" + o.out_path + "' failed");
  if (skipped) log << "skipped " << skipped << " stories without vocabulary words\n";
  return examples.size();
}

void cmd_eval(const EvalOptions& o, std::ostream& out) {
  const auto a = corpus::load_corpus_file(o.stories_a);
  const auto b = corpus::load_corpus_file(o.stories_b);
  std::unique_ptr<wordselect::EmbeddingProvider> provider;
  if (o.embeddings_path.empty()) {
    provider = std::make_unique<wordselect::HashingEmbedder>();
  } else {
    provider = std::make_unique<wordselect::FileEmbeddingStore>(
        wordselect::FileEmbeddingStore::from_file(o.embeddings_path));
  }
  std::unique_ptr<grammar::Checker> checker;
  if (o.grammar_url.empty()) {
    checker = std::make_unique<grammar::NullChecker>();
  } else {
    checker = std::make_unique<grammar::LanguageToolClient>(o.grammar_url);
  }
  std::vector<storyeval::HumanRating> ratings;
  if (!o.ratings_path.empty()) {
    std::ifstream in(o.ratings_path);
    if (!in) throw IoError("cannot open '" + o.ratings_path + "'");
    ratings = storyeval::load_ratings(in);
  }
  const auto report = storyeval::compare_sources(o.name_a, a, o.name_b, b, *provider, *checker, ratings);
  if (o.format == Format::json) {
    out << storyeval::to_json(report).dump(2) << '\n';
  } else {
    out << storyeval::format_table(report);
  }
}

void cmd_simulate_study(const std::string& vocab_path, std::size_t participants, std::uint64_t seed,
                        std::ostream& out) {
  const auto vocab = lexicon::load_vocab_file(vocab_path);
  const auto result = study::simulate_study(vocab, participants, seed);
  study::write_simulation_csv(out, result.rows);
}

}  // namespace storyfier::cli
