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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "storyfier/corpus.hpp"
#include "storyfier/grammar.hpp"
#include "storyfier/wordselect.hpp"

namespace storyfier::storyeval {

// -- lexical metrics ---------------------------------------------------------

/// Unique lowercase tokens / total tokens. Throws PreconditionError on
/// text without tokens.
double type_token_ratio(std::string_view text);

/// (total - unique) / total over consecutive lowercase token trigrams; 0 when the
/// text has fewer than three tokens.
double trigram_repetition(std::string_view text);

/// Mean cosine similarity of adjacent sentence embeddings. Throws
/// PreconditionError with fewer than two sentences or an unembeddable one.
double sentence_coherence(const std::vector<std::string>& sentences, const wordselect::EmbeddingProvider& provider);

/// Fraction of sentences on which the checker reports no matches.
double grammar_fraction(const std::vector<std::string>& sentences, grammar::Checker& checker);

struct LexicalReport {
  double grammar = 0;
  double type_token_ratio = 0;
  double trigram_repetition = 0;
  std::optional<double> sentence_coherence;  // absent for one-sentence stories
};

LexicalReport lexical_report(const corpus::Story& story, const wordselect::EmbeddingProvider& provider,
                             grammar::Checker& checker);

nlohmann::json to_json(const LexicalReport& r);

// -- human ratings -----------------------------------------------------------

inline constexpr std::array<std::string_view, 4> kRatingDimensions = {"coherence", "relevance", "interestingness",
                                                                      "overall"};

struct HumanRating {
  std::string story_id;
  std::string rater_id;
  std::string source;
  std::array<int, 4> scores{};  // indexed like kRatingDimensions, each 1..5
};

/// CSV `story_id,rater_id,source,coherence,relevance,interestingness,overall`.
std::vector<HumanRating> load_ratings(std::istream& in);

struct RatingMeans {
  std::array<double, 4> means{};
  std::size_t count = 0;
};

/// Per-source arithmetic means of each dimension. Throws PreconditionError
/// on an empty list.
std::map<std::string, RatingMeans> aggregate_ratings(const std::vector<HumanRating>& ratings);

// -- paired significance -----------------------------------------------------

struct WilcoxonResult {
  double w_plus = 0;
  double w_minus = 0;
  double statistic = 0;  // min(w_plus, w_minus)
  double p_value = 1;    // two-sided
  std::size_t n_effective = 0;
  bool exact = false;
};

/// Largest n_effective that uses the exact null distribution.
inline constexpr std::size_t kWilcoxonExactMax = 12;

/// Wilcoxon signed-rank test on (x, y) pairs using d = x - y. Zero
/// differences are dropped and tied magnitudes get mid-ranks. Exact
/// two-sided p for n_effective <= 12, otherwise the normal approximation
/// with tie-corrected variance. Throws DegenerateInputError when every
/// difference is zero.
WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs);

// -- source comparison report ------------------------------------------------

struct SourceSummary {
  std::string name;
  std::size_t stories = 0;
  double grammar = 0;
  double type_token_ratio = 0;
  double trigram_repetition = 0;
  std::optional<double> sentence_coherence;
  std::vector<LexicalReport> per_story;
};

struct PairedTest {
  std::string metric;
  std::optional<WilcoxonResult> result;  // nullopt: all differences zero
  std::size_t pairs = 0;
};

struct ComparisonReport {
  SourceSummary a;
  SourceSummary b;
  std::vector<PairedTest> metric_tests;
  std::map<std::string, RatingMeans> ratings;
  std::vector<PairedTest> rating_tests;
};

/// Lexical summary of two story lists paired by position, with a Wilcoxon
/// test per metric. When ratings are given, they are aggregated per source
/// and dimensions are tested pairing ratings of `a.name` and `b.name` that
/// share (story_id, rater_id).
ComparisonReport compare_sources(std::string name_a, const std::vector<corpus::Story>& a, std::string name_b,
                                 const std::vector<corpus::Story>& b, const wordselect::EmbeddingProvider& provider,
                                 grammar::Checker& checker, const std::vector<HumanRating>& ratings = {});

nlohmann::ordered_json to_json(const ComparisonReport& r);
std::string format_table(const ComparisonReport& r);

}  // namespace storyfier::storyeval
