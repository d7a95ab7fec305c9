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

#include <array>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "storyfier/error.hpp"
#include "storyfier/lexicon.hpp"
#include "storyfier/rng.hpp"
#include "storyfier/session.hpp"

namespace storyfier::study {

/// Fixed last option of every pretest item.
inline constexpr std::string_view kDontKnow = "I do not know this word";

inline constexpr std::size_t kWordsPerSet = 5;
inline constexpr std::size_t kSetCount = 8;
inline constexpr std::size_t kStudyWords = kWordsPerSet * kSetCount;
inline constexpr std::size_t kConditions = 4;

/// Condition index used by the Latin square: 0 read_sen, 1 read_ai,
/// 2 storyfier_sen, 3 storyfier_ai.
session::Mode condition_mode(std::size_t index);
std::size_t condition_index(session::Mode mode);

class IneligibleParticipant : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

struct PretestItem {
  std::string word;
  std::array<std::string, 5> options;  // four glosses, then kDontKnow
  std::size_t correct_index = 0;       // 0..3
};

/// One multiple-choice item per candidate. Distractors are glosses of other
/// entries, drawn from the same part of speech first.
std::vector<PretestItem> build_pretest(const lexicon::VocabPool& pool, const std::vector<std::string>& candidates,
                                       Rng& rng);

/// Words answered wrongly or with the don't-know option, in item order.
/// `answers` maps word -> chosen option index (0..4).
std::vector<std::string> score_pretest(const std::vector<PretestItem>& items,
                                       const std::map<std::string, std::size_t>& answers);

/// n x n Williams design: a Latin square in which, for even n, every
/// condition immediately precedes every other condition exactly once.
std::vector<std::vector<std::size_t>> latin_square(std::size_t n);

struct StudyPlan {
  std::string participant_id;
  std::size_t sequence_number = 0;
  std::vector<std::string> unknown_words;
  std::vector<lexicon::WordSet> sets;               // kSetCount sets of kWordsPerSet
  std::array<session::Mode, kConditions> condition_order{};
  std::vector<session::Mode> set_to_condition;      // parallel to sets

  /// Indices into `sets` studied under `mode`, in study order.
  std::vector<std::size_t> sets_for(session::Mode mode) const;
};

/// Samples 40 unknown words, splits them into 8 sets of 5 and assigns two
/// consecutive sets to each condition in Latin-square order; the square row
/// is sequence_number mod 4. Throws IneligibleParticipant below 40 words.
StudyPlan plan_study(std::string participant_id, std::size_t sequence_number, std::vector<std::string> unknown_words,
                     Rng& rng);

nlohmann::ordered_json to_json(const StudyPlan& plan);
StudyPlan plan_from_json(const nlohmann::json& j);

struct PosttestRecord {
  std::string word;
  bool choice_correct = false;
  std::optional<std::string> sentence;  // nullopt: the learner wrote "nothing"
  std::optional<int> grammar_score;     // 0..2, present iff sentence present
  std::optional<int> context_score;
};

struct ConditionOutcome {
  std::size_t correct_choices = 0;       // 0..10
  std::size_t correct_sentences = 0;     // 0..10, both scores 2
  std::size_t total_sentence_score = 0;  // 0..40
  std::size_t sentences_written = 0;

  bool operator==(const ConditionOutcome&) const = default;
};

inline constexpr std::size_t kMaxPosttestRecords = 10;
inline constexpr int kMaxSentenceScore = 4;

/// Throws PreconditionError for more than 10 records in a condition, a
/// score outside 0..2, or scores that do not match sentence presence.
std::map<session::Mode, ConditionOutcome> score_posttest(
    const std::map<session::Mode, std::vector<PosttestRecord>>& records);

/// Mean of each construct's 1..7 item scores.
std::map<std::string, double> aggregate_questionnaire(const std::map<std::string, std::vector<int>>& responses);

/// (k/(k-1)) * (1 - sum of item variances / variance of totals), with
/// n-1 sample variances. Rows are participants, columns items. Throws
/// PreconditionError for fewer than 2 rows or columns and
/// DegenerateInputError when total-score variance is zero.
template <typename Derived>
double cronbach_alpha(const Eigen::MatrixBase<Derived>& items);

// -- answer and rating files -------------------------------------------------

/// `participant_id,word,choice` -> participant -> word -> choice.
std::map<std::string, std::map<std::string, std::size_t>> load_pretest_answers(std::istream& in);

struct PosttestAnswer {
  std::string participant_id;
  session::Mode condition = session::Mode::read_sen;
  PosttestRecord record;
};

/// `participant_id,condition,word,choice_correct,sentence`; a sentence of
/// "nothing" or empty means none was written.
std::vector<PosttestAnswer> load_posttest_answers(std::istream& in);

struct SentenceRating {
  std::string participant_id;
  std::string word;
  int grammar_score = 0;
  int context_score = 0;
};

/// `participant_id,word,grammar_score,context_score`.
std::vector<SentenceRating> load_sentence_ratings(std::istream& in);

/// Attaches rater scores to written sentences. Throws PreconditionError
/// when a written sentence has no rating or a rating has no sentence.
std::map<std::string, std::map<session::Mode, std::vector<PosttestRecord>>> merge_posttest(
    const std::vector<PosttestAnswer>& answers, const std::vector<SentenceRating>& ratings);

// -- implementation --------------------------------------------------------

template <typename Derived>
double cronbach_alpha(const Eigen::MatrixBase<Derived>& items) {
  const Eigen::MatrixXd m = items.template cast<double>();
  const auto n = m.rows();
  const auto k = m.cols();
  if (n < 2 || k < 2) throw PreconditionError("Cronbach's alpha needs at least 2 participants and 2 items");
  auto sample_var = [n](const Eigen::VectorXd& v) { return (v.array() - v.mean()).square().sum() / static_cast<double>(n - 1); };
  double item_var = 0;
  for (Eigen::Index c = 0; c < k; ++c) item_var += sample_var(m.col(c));
  const double total_var = sample_var(m.rowwise().sum());
  if (total_var == 0.0) throw DegenerateInputError("total-score variance is zero");
  const double kk = static_cast<double>(k);
  return (kk / (kk - 1.0)) * (1.0 - item_var / total_var);
}

}  // namespace storyfier::study
