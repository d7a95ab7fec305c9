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

#include "oracles.hpp"
#include "storyfier/error.hpp"
#include "storyfier/study.hpp"
#include "support.hpp"

using namespace storyfier;
using namespace storyfier::study;
using session::Mode;

namespace {

std::vector<std::string> first_words(std::size_t n) {
  std::vector<std::string> out;
  for (const auto& [hw, e] : testing::sample_vocab().entries()) {
    if (out.size() == n) break;
    out.push_back(hw);
  }
  return out;
}

PosttestRecord rec(std::string w, bool choice, std::optional<int> g = std::nullopt, std::optional<int> c = std::nullopt) {
  PosttestRecord r;
  r.word = std::move(w);
  r.choice_correct = choice;
  if (g) r.sentence = "A sentence.";
  r.grammar_score = g;
  r.context_score = c;
  return r;
}

}  // namespace

TEST_SUITE("study") {
  TEST_CASE("latin square of order four") {
    const std::vector<std::vector<std::size_t>> expected = {{0, 1, 3, 2}, {1, 2, 0, 3}, {2, 3, 1, 0}, {3, 0, 2, 1}};
    CHECK(latin_square(4) == expected);
    CHECK(oracle::is_latin_square(latin_square(4)));
    CHECK(oracle::williams_balanced(latin_square(4)));
  }

  TEST_CASE("even orders are Williams designs, odd orders are Latin squares") {
    for (std::size_t n = 1; n <= 9; ++n) {
      const auto sq = latin_square(n);
      CHECK(oracle::is_latin_square(sq));
      if (n % 2 == 0) CHECK(oracle::williams_balanced(sq));
    }
    CHECK_THROWS_AS(latin_square(0), PreconditionError);
  }

  TEST_CASE("condition indices") {
    for (std::size_t i = 0; i < kConditions; ++i) CHECK(condition_index(condition_mode(i)) == i);
    CHECK(condition_mode(0) == Mode::read_sen);
    CHECK(condition_mode(3) == Mode::storyfier_ai);
    CHECK_THROWS_AS(condition_mode(4), PreconditionError);
  }

  TEST_CASE("pretest items offer four distinct glosses and a don't-know option") {
    Rng rng(1);
    const auto& pool = testing::sample_vocab();
    const auto words = first_words(60);
    const auto items = build_pretest(pool, words, rng);
    REQUIRE(items.size() == 60);
    for (const auto& item : items) {
      CHECK(item.options[4] == kDontKnow);
      CHECK(item.correct_index < 4);
      CHECK(item.options[item.correct_index] == pool.find(item.word)->gloss_zh);
      std::set<std::string> distinct(item.options.begin(), item.options.end());
      CHECK(distinct.size() == 5);
    }
    std::map<std::string, std::size_t> answers;
    for (std::size_t i = 0; i < items.size(); ++i) {
      answers[items[i].word] = i % 3 == 0 ? items[i].correct_index : (i % 3 == 1 ? 4 : (items[i].correct_index + 1) % 4);
    }
    const auto unknown = score_pretest(items, answers);
    CHECK(unknown.size() == 40);
    CHECK(unknown.front() == items[1].word);

    answers.erase(items[0].word);
    CHECK_THROWS_AS(score_pretest(items, answers), PreconditionError);
    answers[items[0].word] = 5;
    CHECK_THROWS_AS(score_pretest(items, answers), PreconditionError);
  }

  TEST_CASE("study plans over many seeds") {
    const auto words = first_words(70);
    const auto square = latin_square(4);
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
      Rng rng(seed);
      const auto plan = plan_study("p", seed, words, rng);
      REQUIRE(plan.sets.size() == kSetCount);
      std::set<std::string> all;
      for (const auto& s : plan.sets) {
        CHECK(s.words.size() == kWordsPerSet);
        all.insert(s.words.begin(), s.words.end());
      }
      CHECK(all.size() == kStudyWords);
      for (const auto& w : all) CHECK(std::find(words.begin(), words.end(), w) != words.end());
      for (std::size_t pos = 0; pos < kConditions; ++pos) {
        CHECK(condition_index(plan.condition_order[pos]) == square[seed % 4][pos]);
        CHECK(plan.set_to_condition[2 * pos] == plan.condition_order[pos]);
        CHECK(plan.set_to_condition[2 * pos + 1] == plan.condition_order[pos]);
        CHECK(plan.sets_for(plan.condition_order[pos]) == std::vector<std::size_t>{2 * pos, 2 * pos + 1});
      }
    }
  }

  TEST_CASE("plans are deterministic and serialize") {
    const auto words = first_words(50);
    Rng a(9), b(9);
    const auto p = plan_study("p7", 2, words, a);
    const auto q = plan_study("p7", 2, words, b);
    CHECK(to_json(p) == to_json(q));
    CHECK(to_json(plan_from_json(nlohmann::json::parse(to_json(p).dump()))) == to_json(p));
  }

  TEST_CASE("participants with fewer than forty unknown words are ineligible") {
    Rng rng(1);
    CHECK_THROWS_AS(plan_study("p", 0, first_words(39), rng), IneligibleParticipant);
    auto dup = first_words(39);
    dup.push_back(dup.front());
    CHECK_THROWS_AS(plan_study("p", 0, dup, rng), IneligibleParticipant);
    CHECK_NOTHROW(plan_study("p", 0, first_words(40), rng));
  }

  TEST_CASE("posttest scoring and bounds") {
    std::map<Mode, std::vector<PosttestRecord>> r;
    r[Mode::read_sen] = {rec("a", true, 2, 2), rec("b", false, 1, 2), rec("c", true), rec("d", false, 0, 0)};
    const auto out = score_posttest(r);
    const auto& o = out.at(Mode::read_sen);
    CHECK(o.correct_choices == 2);
    CHECK(o.correct_sentences == 1);
    CHECK(o.total_sentence_score == 7);
    CHECK(o.sentences_written == 3);

    auto too_many = r;
    too_many[Mode::read_sen].resize(11, rec("x", true));
    CHECK_THROWS_AS(score_posttest(too_many), PreconditionError);
    CHECK_THROWS_AS(score_posttest({{Mode::read_ai, {rec("a", true, 3, 0)}}}), PreconditionError);
    CHECK_THROWS_AS(score_posttest({{Mode::read_ai, {rec("a", true, -1, 0)}}}), PreconditionError);
    auto mismatch = rec("a", true);
    mismatch.grammar_score = 1;
    CHECK_THROWS_AS(score_posttest({{Mode::read_ai, {mismatch}}}), PreconditionError);
  }

  TEST_CASE("posttest outcomes stay within bounds for random records") {
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
      std::vector<PosttestRecord> v;
      const auto n = rng.below(kMaxPosttestRecords + 1);
      for (std::size_t k = 0; k < n; ++k) {
        if (rng.chance(0.5)) v.push_back(rec("w", rng.chance(0.5), static_cast<int>(rng.below(3)), static_cast<int>(rng.below(3))));
        else v.push_back(rec("w", rng.chance(0.5)));
      }
      const auto o = score_posttest({{Mode::storyfier_ai, v}}).at(Mode::storyfier_ai);
      CHECK(o.correct_choices <= n);
      CHECK(o.correct_sentences <= o.sentences_written);
      CHECK(o.total_sentence_score <= kMaxSentenceScore * o.sentences_written);
    }
  }

  TEST_CASE("questionnaire means") {
    const auto m = aggregate_questionnaire({{"ease", {4, 5, 6, 7}}, {"fun", {1}}});
    CHECK(m.at("ease") == doctest::Approx(5.5));
    CHECK(m.at("fun") == doctest::Approx(1.0));
    CHECK_THROWS_AS(aggregate_questionnaire({{"x", {8}}}), PreconditionError);
    CHECK_THROWS_AS(aggregate_questionnaire({{"x", {}}}), PreconditionError);
  }

  TEST_CASE("cronbach alpha") {
    Eigen::MatrixXd m(3, 2);
    m << 1, 2, 2, 3, 3, 3;
    CHECK(cronbach_alpha(m) == doctest::Approx(6.0 / 7.0));
    Eigen::MatrixXi identical(4, 3);
    identical << 1, 1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 4;
    CHECK(cronbach_alpha(identical) == doctest::Approx(1.0));
    Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(3, 3, 4.0);
    CHECK_THROWS_AS(cronbach_alpha(flat), DegenerateInputError);
    CHECK_THROWS_AS(cronbach_alpha(Eigen::MatrixXd::Ones(1, 3)), PreconditionError);
  }

  TEST_CASE("answer files load and merge") {
    std::istringstream pre("participant_id,word,choice\np1,abandon,2\np1,ability,4\n");
    const auto pa = load_pretest_answers(pre);
    CHECK(pa.at("p1").at("ability") == 4);
    std::istringstream bad_pre("participant_id,word,choice\np1,abandon,x\n");
    CHECK_THROWS_AS(load_pretest_answers(bad_pre), ParseError);

    std::istringstream post(
        "participant_id,condition,word,choice_correct,sentence\n"
        "p1,read_sen,abandon,1,They abandon ship.\n"
        "p1,read_sen,ability,0,nothing\n"
        "p1,storyfier_ai,absorb,1,\n");
    const auto answers = load_posttest_answers(post);
    REQUIRE(answers.size() == 3);
    CHECK(answers[0].record.sentence == "They abandon ship.");
    CHECK_FALSE(answers[1].record.sentence);
    CHECK_FALSE(answers[2].record.sentence);
    CHECK(answers[2].condition == Mode::storyfier_ai);

    std::istringstream ratings_in("participant_id,word,grammar_score,context_score\np1,abandon,2,1\n");
    const auto ratings = load_sentence_ratings(ratings_in);
    const auto merged = merge_posttest(answers, ratings);
    const auto& rs = merged.at("p1").at(Mode::read_sen);
    CHECK(rs[0].grammar_score == 2);
    CHECK(rs[0].context_score == 1);
    CHECK(score_posttest(merged.at("p1")).at(Mode::read_sen).total_sentence_score == 3);

    CHECK_THROWS_AS(merge_posttest(answers, {}), PreconditionError);
    auto orphan = ratings;
    orphan.push_back({"p1", "ability", 1, 1});
    CHECK_THROWS_AS(merge_posttest(answers, orphan), PreconditionError);
  }
}
