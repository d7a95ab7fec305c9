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

#include "storyfier/storyeval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <set>
#include <sstream>
#include <tuple>

#include "storyfier/csv.hpp"
#include "storyfier/error.hpp"
#include "storyfier/text.hpp"

namespace storyfier::storyeval {

double type_token_ratio(std::string_view s) {
  const auto tokens = text::normalized_tokens(s);
  if (tokens.empty()) throw PreconditionError("type-token ratio of empty text");
  const std::set<std::string> unique(tokens.begin(), tokens.end());
  return static_cast<double>(unique.size()) / static_cast<double>(tokens.size());
}

double trigram_repetition(std::string_view s) {
  const auto tokens = text::normalized_tokens(s);
  if (tokens.size() < 3) return 0.0;
  std::set<std::tuple<std::string_view, std::string_view, std::string_view>> unique;
  const std::size_t total = tokens.size() - 2;
  for (std::size_t i = 0; i < total; ++i) unique.emplace(tokens[i], tokens[i + 1], tokens[i + 2]);
  return static_cast<double>(total - unique.size()) / static_cast<double>(total);
}

double sentence_coherence(const std::vector<std::string>& sentences, const wordselect::EmbeddingProvider& provider) {
  if (sentences.size() < 2) throw PreconditionError("coherence needs at least two sentences");
  std::vector<wordselect::EmbeddingVector> vecs;
  vecs.reserve(sentences.size());
  for (const auto& s : sentences) {
    auto v = provider.embed(s);
    if (!v || v->norm() == 0.0) throw PreconditionError("cannot embed sentence '" + s + "'");
    vecs.push_back(std::move(*v));
  }
  double sum = 0;
  for (std::size_t i = 0; i + 1 < vecs.size(); ++i) sum += wordselect::cosine(vecs[i], vecs[i + 1]);
  return sum / static_cast<double>(vecs.size() - 1);
}

double grammar_fraction(const std::vector<std::string>& sentences, grammar::Checker& checker) {
  if (sentences.empty()) throw PreconditionError("grammar fraction of zero sentences");
  std::size_t clean = 0;
  for (const auto& s : sentences) {
    if (checker.check(s).empty()) ++clean;
  }
  return static_cast<double>(clean) / static_cast<double>(sentences.size());
}

LexicalReport lexical_report(const corpus::Story& story, const wordselect::EmbeddingProvider& provider,
                             grammar::Checker& checker) {
  LexicalReport r;
  const auto txt = story.text();
  r.grammar = grammar_fraction(story.sentences, checker);
  r.type_token_ratio = type_token_ratio(txt);
  r.trigram_repetition = trigram_repetition(txt);
  if (story.sentences.size() >= 2) r.sentence_coherence = sentence_coherence(story.sentences, provider);
  return r;
}

nlohmann::json to_json(const LexicalReport& r) {
  nlohmann::json j{{"grammar", r.grammar},
                   {"type_token_ratio", r.type_token_ratio},
                   {"trigram_repetition", r.trigram_repetition}};
  j["sentence_coherence"] = r.sentence_coherence ? nlohmann::json(*r.sentence_coherence) : nlohmann::json(nullptr);
  return j;
}

// -- ratings -----------------------------------------------------------------

std::vector<HumanRating> load_ratings(std::istream& in) {
  csv::Reader reader(in);
  csv::expect_header(reader, {"story_id", "rater_id", "source", "coherence", "relevance", "interestingness", "overall"});
  std::vector<HumanRating> out;
  while (auto rec = reader.next()) {
    if (rec->fields.size() == 1 && text::trim(rec->fields[0]).empty()) continue;
    if (rec->fields.size() != 7) throw ParseError("column count mismatch", rec->line);
    HumanRating r{text::trim(rec->fields[0]), text::trim(rec->fields[1]), text::trim(rec->fields[2]), {}};
    for (std::size_t d = 0; d < 4; ++d) {
      const auto& f = rec->fields[3 + d];
      int v = 0;
      try {
        std::size_t used = 0;
        v = std::stoi(f, &used);
        if (text::trim(f.substr(used)) != "") throw std::invalid_argument(f);
      } catch (const std::exception&) {
        throw ParseError("rating '" + f + "' is not an integer", rec->line);
      }
      if (v < 1 || v > 5) throw ParseError("rating " + std::to_string(v) + " outside 1..5", rec->line);
      r.scores[d] = v;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::map<std::string, RatingMeans> aggregate_ratings(const std::vector<HumanRating>& ratings) {
  if (ratings.empty()) throw PreconditionError("no ratings to aggregate");
  std::map<std::string, RatingMeans> out;
  for (const auto& r : ratings) {
    auto& m = out[r.source];
    for (std::size_t d = 0; d < 4; ++d) m.means[d] += r.scores[d];
    ++m.count;
  }
  for (auto& [_, m] : out) {
    for (auto& v : m.means) v /= static_cast<double>(m.count);
  }
  return out;
}

// -- Wilcoxon ----------------------------------------------------------------

WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs) {
  std::vector<double> diffs;
  for (const auto& [x, y] : pairs) {
    const double d = x - y;
    if (d != 0.0) diffs.push_back(d);
  }
  const std::size_t n = diffs.size();
  if (n == 0) throw DegenerateInputError("all paired differences are zero");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(diffs[a]) < std::abs(diffs[b]); });

  // Ranks are stored doubled so mid-ranks stay integral.
  std::vector<std::int64_t> rank2(n);
  double tie_term = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]])) ++j;
    const auto r2 = static_cast<std::int64_t>(i + 1 + j + 1);  // 2 * mean of ranks i+1..j+1
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = r2;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }

  std::int64_t plus2 = 0;
  std::int64_t total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += rank2[i];
    if (diffs[i] > 0) plus2 += rank2[i];
  }

  WilcoxonResult res;
  res.n_effective = n;
  res.w_plus = static_cast<double>(plus2) / 2.0;
  res.w_minus = static_cast<double>(total2 - plus2) / 2.0;
  res.statistic = std::min(res.w_plus, res.w_minus);

  if (n <= kWilcoxonExactMax) {
    // counts[s] = number of sign assignments whose doubled positive-rank sum is s.
    std::vector<double> counts(static_cast<std::size_t>(total2) + 1, 0.0);
    counts[0] = 1.0;
    std::int64_t reach = 0;
    for (auto r : rank2) {
      for (std::int64_t s = reach; s >= 0; --s) counts[static_cast<std::size_t>(s + r)] += counts[static_cast<std::size_t>(s)];
      reach += r;
    }
    const std::int64_t observed = std::abs(2 * plus2 - total2);
    double extreme = 0;
    for (std::int64_t s = 0; s <= total2; ++s) {
      if (std::abs(2 * s - total2) >= observed) extreme += counts[static_cast<std::size_t>(s)];
    }
    res.p_value = std::min(1.0, extreme / std::ldexp(1.0, static_cast<int>(n)));
    res.exact = true;
  } else {
    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1) / 4.0;
    const double var = nn * (nn + 1) * (2 * nn + 1) / 24.0 - tie_term / 48.0;
    const double z = (res.w_plus - mean) / std::sqrt(var);
    res.p_value = std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
    res.exact = false;
  }
  return res;
}

// -- comparison report -------------------------------------------------------

namespace {

SourceSummary summarize(std::string name, const std::vector<corpus::Story>& stories,
                        const wordselect::EmbeddingProvider& provider, grammar::Checker& checker) {
  SourceSummary s;
  s.name = std::move(name);
  s.stories = stories.size();
  double coh = 0;
  std::size_t coh_n = 0;
  for (const auto& story : stories) {
    auto r = lexical_report(story, provider, checker);
    s.grammar += r.grammar;
    s.type_token_ratio += r.type_token_ratio;
    s.trigram_repetition += r.trigram_repetition;
    if (r.sentence_coherence) {
      coh += *r.sentence_coherence;
      ++coh_n;
    }
    s.per_story.push_back(r);
  }
  if (!stories.empty()) {
    const double n = static_cast<double>(stories.size());
    s.grammar /= n;
    s.type_token_ratio /= n;
    s.trigram_repetition /= n;
  }
  if (coh_n) s.sentence_coherence = coh / static_cast<double>(coh_n);
  return s;
}

PairedTest paired(std::string metric, const std::vector<std::pair<double, double>>& pairs) {
  PairedTest t{std::move(metric), std::nullopt, pairs.size()};
  try {
    if (!pairs.empty()) t.result = wilcoxon_signed_rank(pairs);
  } catch (const DegenerateInputError&) {
  }
  return t;
}

nlohmann::ordered_json test_json(const PairedTest& t) {
  nlohmann::ordered_json j;
  j["metric"] = t.metric;
  j["pairs"] = t.pairs;
  if (t.result) {
    j["w_plus"] = t.result->w_plus;
    j["w_minus"] = t.result->w_minus;
    j["statistic"] = t.result->statistic;
    j["p_value"] = t.result->p_value;
    j["n_effective"] = t.result->n_effective;
    j["exact"] = t.result->exact;
  } else {
    j["degenerate"] = true;
    j["notice"] = "all paired differences are zero; test not applicable";
  }
  return j;
}

nlohmann::ordered_json summary_json(const SourceSummary& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["stories"] = s.stories;
  j["grammar"] = s.grammar;
  j["type_token_ratio"] = s.type_token_ratio;
  j["trigram_repetition"] = s.trigram_repetition;
  j["sentence_coherence"] = s.sentence_coherence ? nlohmann::ordered_json(*s.sentence_coherence) : nlohmann::ordered_json(nullptr);
  return j;
}

}  // namespace

ComparisonReport compare_sources(std::string name_a, const std::vector<corpus::Story>& a, std::string name_b,
                                 const std::vector<corpus::Story>& b, const wordselect::EmbeddingProvider& provider,
                                 grammar::Checker& checker, const std::vector<HumanRating>& ratings) {
  if (a.size() != b.size()) {
    throw PreconditionError("story lists must pair up: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  ComparisonReport rep;
  rep.a = summarize(std::move(name_a), a, provider, checker);
  rep.b = summarize(std::move(name_b), b, provider, checker);

  std::vector<std::pair<double, double>> g, ttr, tri, coh;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& ra = rep.a.per_story[i];
    const auto& rb = rep.b.per_story[i];
    g.emplace_back(ra.grammar, rb.grammar);
    ttr.emplace_back(ra.type_token_ratio, rb.type_token_ratio);
    tri.emplace_back(ra.trigram_repetition, rb.trigram_repetition);
    if (ra.sentence_coherence && rb.sentence_coherence) coh.emplace_back(*ra.sentence_coherence, *rb.sentence_coherence);
  }
  rep.metric_tests = {paired("grammar", g), paired("type_token_ratio", ttr), paired("trigram_repetition", tri),
                      paired("sentence_coherence", coh)};

  if (!ratings.empty()) {
    rep.ratings = aggregate_ratings(ratings);
    std::map<std::pair<std::string, std::string>, const HumanRating*> of_a, of_b;
    for (const auto& r : ratings) {
      if (r.source == rep.a.name) of_a[{r.story_id, r.rater_id}] = &r;
      if (r.source == rep.b.name) of_b[{r.story_id, r.rater_id}] = &r;
    }
    for (std::size_t d = 0; d < kRatingDimensions.size(); ++d) {
      std::vector<std::pair<double, double>> pairs;
      for (const auto& [key, ra] : of_a) {
        if (auto it = of_b.find(key); it != of_b.end()) pairs.emplace_back(ra->scores[d], it->second->scores[d]);
      }
      rep.rating_tests.push_back(paired(std::string(kRatingDimensions[d]), pairs));
    }
  }
  return rep;
}

nlohmann::ordered_json to_json(const ComparisonReport& r) {
  nlohmann::ordered_json j;
  j["sources"] = {summary_json(r.a), summary_json(r.b)};
  j["metric_tests"] = nlohmann::ordered_json::array();
  for (const auto& t : r.metric_tests) j["metric_tests"].push_back(test_json(t));
  if (!r.ratings.empty()) {
    nlohmann::ordered_json rj;
    for (const auto& [source, m] : r.ratings) {
      nlohmann::ordered_json row;
      for (std::size_t d = 0; d < kRatingDimensions.size(); ++d) row[std::string(kRatingDimensions[d])] = m.means[d];
      row["count"] = m.count;
      rj[source] = row;
    }
    j["ratings"] = rj;
    j["rating_tests"] = nlohmann::ordered_json::array();
    for (const auto& t : r.rating_tests) j["rating_tests"].push_back(test_json(t));
  }
  return j;
}

std::string format_table(const ComparisonReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  auto star = [&](const std::string& metric, const std::vector<PairedTest>& tests) {
    for (const auto& t : tests) {
      if (t.metric == metric && t.result && t.result->p_value < 0.05) return "*";
    }
    return "";
  };
  auto coh = [](const SourceSummary& s) {
    std::ostringstream c;
    if (s.sentence_coherence) c << std::fixed << std::setprecision(2) << *s.sentence_coherence;
    else c << "n/a";
    return c.str();
  };
  os << std::left << std::setw(16) << "source" << std::setw(10) << "grammar" << std::setw(10) << "ttr" << std::setw(10)
     << "trigram" << "coherence\n";
  for (const auto* s : {&r.a, &r.b}) {
    os << std::left << std::setw(16) << s->name << std::setw(10) << s->grammar << std::setw(10) << s->type_token_ratio
       << std::setw(10) << s->trigram_repetition << coh(*s) << '\n';
  }
  os << "\npaired Wilcoxon signed-rank (two-sided)\n";
  for (const auto& t : r.metric_tests) {
    os << "  " << std::setw(20) << t.metric;
    if (t.result) os << "W=" << t.result->statistic << " p=" << std::setprecision(4) << t.result->p_value << std::setprecision(2) << " n=" << t.result->n_effective << star(t.metric, r.metric_tests);
    else os << "degenerate: all paired differences are zero";
    os << '\n';
  }
  if (!r.ratings.empty()) {
    os << "\naverage human ratings\n" << std::setw(16) << "source";
    for (auto d : kRatingDimensions) os << std::setw(17) << d;
    os << '\n';
    for (const auto& [source, m] : r.ratings) {
      os << std::setw(16) << source;
      for (std::size_t d = 0; d < 4; ++d) {
        std::ostringstream cell;
        cell << std::fixed << std::setprecision(2) << m.means[d] << star(std::string(kRatingDimensions[d]), r.rating_tests);
        os << std::setw(17) << cell.str();
      }
      os << '\n';
    }
    for (const auto& t : r.rating_tests) {
      os << "  " << std::setw(20) << t.metric;
      if (t.result) os << "W=" << t.result->statistic << " p=" << std::setprecision(4) << t.result->p_value << std::setprecision(2) << " n=" << t.result->n_effective;
      else os << "degenerate: all paired differences are zero";
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace storyfier::storyeval
