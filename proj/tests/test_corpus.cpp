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

#include <doctest.h>

#include <set>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "storyfier/corpus.hpp"
#include "storyfier/error.hpp"
#include "storyfier/text.hpp"
#include "support.hpp"

using namespace storyfier;

namespace {

lexicon::VocabPool pool_of(const std::vector<std::string>& words) {
  std::vector<lexicon::VocabEntry> entries;
  int rank = 1;
  for (const auto& w : words) entries.push_back({w, "d", "noun", "", "", "g" + w, rank++});
  return lexicon::VocabPool(entries);
}

corpus::Story story(std::vector<std::string> sentences, std::string title = "") {
  return corpus::Story{"s", std::move(title), std::move(sentences)};
}

constexpr const char* kHeader = "storyid,storytitle,sentence1,sentence2,sentence3,sentence4,sentence5\n";

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("parse maps columns and keeps empty titles") {
    std::istringstream in(std::string(kHeader) + "1,Walk,A.,B.,C.,D.,E.\n2,,F.,G.,H.,I.,J.\n");
    const auto parsed = corpus::parse_corpus(in);
    REQUIRE(parsed.errors.empty());
    REQUIRE(parsed.stories.size() == 2);
    CHECK(parsed.stories[0].id == "1");
    CHECK(parsed.stories[0].title == "Walk");
    CHECK(parsed.stories[0].sentences.size() == 5);
    CHECK(parsed.stories[1].title.empty());
    CHECK(parsed.stories[1].sentences[4] == "J.");
  }

  TEST_CASE("a short row is a record error naming its line") {
    std::istringstream in(std::string(kHeader) + "1,T,A.,B.,C.,D.,E.\n2,T,A.,B.,C.,D.\n");
    const auto parsed = corpus::parse_corpus(in);
    CHECK(parsed.stories.size() == 1);
    REQUIRE(parsed.errors.size() == 1);
    CHECK(parsed.errors[0].message == "column count mismatch at line 3");
    std::istringstream again(std::string(kHeader) + "2,T,A.,B.,C.,D.\n");
    CHECK_THROWS_AS(corpus::parse_corpus_strict(again), ParseError);
    CHECK_THROWS_AS(corpus::load_corpus_file("/nonexistent.csv"), IoError);
  }

  TEST_CASE("write then parse round-trips") {
    Rng rng(3);
    std::vector<corpus::Story> stories;
    for (int i = 0; i < 10; ++i) stories.push_back(testing::random_story(rng, {"avid"}, "id" + std::to_string(i)));
    stories[0].sentences[1] = "He said, \"fine\".";
    std::stringstream io;
    corpus::write_corpus(io, stories);
    CHECK(corpus::parse_corpus_strict(io) == stories);
  }

  TEST_CASE("extract_tuple finds inflected forms") {
    const auto t = corpus::extract_tuple(story({"Tom ran fast.", "He hastened home."}), pool_of({"hasten"}));
    REQUIRE(t.occurrences.size() == 1);
    CHECK(t.occurrences[0].word == "hasten");
    CHECK(t.occurrences[0].sentence_index == 1);
    CHECK(t.occurrences[0].token_index == 1);
    CHECK(t.occurrences[0].surface == "hastened");
  }

  TEST_CASE("extract_tuple orders repeated words by position") {
    const auto t = corpus::extract_tuple(story({"A cat.", "B.", "C.", "Two cats sat."}), pool_of({"cat", "zebra"}));
    REQUIRE(t.occurrences.size() == 2);
    CHECK(t.occurrences[0].sentence_index == 0);
    CHECK(t.occurrences[1].sentence_index == 3);
    CHECK(t.occurrences[1].surface == "cats");
    CHECK(corpus::extract_tuple(story({"Nothing here."}), pool_of({"cat"})).occurrences.empty());
  }

  TEST_CASE("dataset stats on a hand-counted toy corpus") {
    const auto st = corpus::dataset_stats({story({"The cat sat.", "The dog ran."})}, pool_of({"cat", "zebra"}));
    CHECK(st.story_count == 1);
    CHECK(st.word_count == 6);
    CHECK(st.avg_story_length == doctest::Approx(6.0));
    CHECK(st.avg_sentence_length == doctest::Approx(3.0));
    CHECK(st.vocab_coverage == doctest::Approx(0.5));
    CHECK_THROWS_WITH_AS(corpus::dataset_stats({}, pool_of({"cat"})), "empty corpus", PreconditionError);
  }

  TEST_CASE("coverage is one when every vocabulary word appears") {
    const auto st = corpus::dataset_stats({story({"Cats chase dogs."})}, pool_of({"cat", "dog", "chase"}));
    CHECK(st.vocab_coverage == 1.0);
  }

  TEST_CASE("flesch reading ease") {
    // 206.835 - 1.015 * 3/1 - 84.6 * 3/3
    CHECK(corpus::flesch_reading_ease("The cat sat.") == doctest::Approx(119.19).epsilon(1e-4));
    CHECK(corpus::flesch_reading_ease("The cat sat. The cat sat.") ==
          doctest::Approx(corpus::flesch_reading_ease("The cat sat.")));
    CHECK_THROWS_AS(corpus::flesch_reading_ease("... !"), PreconditionError);
  }

  TEST_CASE("generation prompt and example") {
    CHECK(corpus::generation_prompt("Marathon", {"athlete", "avid"}) == "title: Marathon | words: athlete, avid");
    CHECK(corpus::generation_prompt("", {"cat"}) == "title: no title | words: cat");

    corpus::StoryTuple t;
    t.story = story({"The athlete ran.", "She was avid."}, "Marathon");
    t.occurrences = {{"athlete", 0, 1, "athlete"}, {"avid", 1, 2, "avid"}};
    const auto ex = corpus::make_generation_example(t);
    CHECK(ex.task == corpus::Task::generate);
    CHECK(ex.input_text == "title: Marathon | words: athlete, avid");
    CHECK(ex.target_text == "The athlete ran. She was avid.");

    t.story.title = "";
    CHECK(corpus::make_generation_example(t).input_text.rfind("title: no title", 0) == 0);

    corpus::StoryTuple none;
    none.story = story({"Nothing."});
    CHECK_THROWS_WITH_AS(corpus::make_generation_example(none), "no target words in story", Error);
  }

  TEST_CASE("duplicate occurrences are listed once per occurrence") {
    const auto t = corpus::extract_tuple(story({"A cat.", "Another cat."}, "Cats"), pool_of({"cat"}));
    CHECK(corpus::make_generation_example(t).input_text == "title: Cats | words: cat, cat");
  }

  TEST_CASE("infill examples have one mask and reconstruct their sentence") {
    const auto pool = pool_of({"avid", "athlete"});
    const auto t = corpus::extract_tuple(story({"The athlete trained hard.", "She was avid."}, "Run"), pool);
    Rng rng(9);
    const auto ex = corpus::make_infill_examples(t, rng, 1);
    REQUIRE(ex.size() == 2);
    for (const auto& e : ex) {
      CHECK(e.task == corpus::Task::infill);
      const auto first = e.input_text.find(corpus::kMaskMarker);
      REQUIRE(first != std::string::npos);
      CHECK(e.input_text.find(corpus::kMaskMarker, first + 1) == std::string::npos);
      CHECK_FALSE(e.target_text.empty());
    }
    // The second sentence no longer lists "athlete" as unused.
    CHECK(ex[1].input_text.find("words: avid |") != std::string::npos);
    Rng again(9);
    CHECK(corpus::make_infill_examples(t, again, 1) == ex);
  }

  TEST_CASE("masking a one-token sentence yields the sentence verbatim") {
    const auto t = corpus::extract_tuple(story({"Hello!"}), pool_of({"cat"}));
    Rng rng(1);
    const auto ex = corpus::make_infill_examples(t, rng, 3);
    REQUIRE(ex.size() == 3);
    for (const auto& e : ex) CHECK(e.target_text == "Hello");
  }

  TEST_CASE("examples serialize as one JSON object per line") {
    std::ostringstream out;
    corpus::write_examples(out, {{corpus::Task::generate, "in", "out"}, {corpus::Task::infill, "a [MASK]", "b"}});
    CHECK(out.str() ==
          "{\"task\":\"generate\",\"input\":\"in\",\"target\":\"out\"}\n"
          "{\"task\":\"infill\",\"input\":\"a [MASK]\",\"target\":\"b\"}\n");
  }

  TEST_CASE("coverage matches a brute-force oracle on small corpora") {
    Rng rng(21);
    const auto words = testing::sample_vocab().headwords();
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<std::string> vocab_words;
      for (int i = 0; i < 8; ++i) vocab_words.push_back(words[rng.below(words.size())]);
      std::sort(vocab_words.begin(), vocab_words.end());
      vocab_words.erase(std::unique(vocab_words.begin(), vocab_words.end()), vocab_words.end());
      const auto pool = pool_of(vocab_words);
      std::vector<corpus::Story> stories;
      std::vector<std::string> texts;
      const auto n = 1 + rng.below(10);
      for (std::size_t i = 0; i < n; ++i) {
        stories.push_back(testing::random_story(rng, vocab_words));
        texts.push_back(stories.back().text());
      }
      CHECK(corpus::dataset_stats(stories, pool).vocab_coverage == oracle::vocab_coverage(texts, vocab_words));
    }
  }
}
