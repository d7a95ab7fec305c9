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

#include "storyfier/study.hpp"

#include <algorithm>
#include <set>

#include "storyfier/csv.hpp"
#include "storyfier/text.hpp"

namespace storyfier::study {

session::Mode condition_mode(std::size_t index) {
  static constexpr std::array<session::Mode, kConditions> kOrder = {
      session::Mode::read_sen, session::Mode::read_ai, session::Mode::storyfier_sen, session::Mode::storyfier_ai};
  if (index >= kConditions) throw PreconditionError("condition index out of range");
  return kOrder[index];
}

std::size_t condition_index(session::Mode mode) {
  for (std::size_t i = 0; i < kConditions; ++i) {
    if (condition_mode(i) == mode) return i;
  }
  throw PreconditionError("unknown condition");
}

// -- pretest -----------------------------------------------------------------

std::vector<PretestItem> build_pretest(const lexicon::VocabPool& pool, const std::vector<std::string>& candidates,
                                       Rng& rng) {
  std::vector<PretestItem> items;
  items.reserve(candidates.size());
  for (const auto& raw : candidates) {
    const auto& entry = lexicon::lookup(pool, raw);
    // Distinct glosses of other entries, same part of speech first.
    std::vector<std::string> same, other;
    std::set<std::string> seen{entry.gloss_zh};
    for (const auto& [w, e] : pool.entries()) {
      if (w == entry.headword || e.gloss_zh.empty() || !seen.insert(e.gloss_zh).second) continue;
      (e.part_of_speech == entry.part_of_speech ? same : other).push_back(e.gloss_zh);
    }
    if (same.size() + other.size() < 3) {
      throw PreconditionError("not enough distractor glosses for '" + entry.headword + "'");
    }
    std::vector<std::string> picks;
    auto draw = [&](std::vector<std::string>& from) {
      while (picks.size() < 3 && !from.empty()) {
        const auto j = rng.below(from.size());
        picks.push_back(from[j]);
        from.erase(from.begin() + static_cast<std::ptrdiff_t>(j));
      }
    };
    draw(same);
    draw(other);

    std::array<std::string, 4> four{entry.gloss_zh, picks[0], picks[1], picks[2]};
    rng.shuffle(std::span<std::string>(four));
    PretestItem item;
    item.word = entry.headword;
    for (std::size_t i = 0; i < 4; ++i) {
      item.options[i] = four[i];
      if (four[i] == entry.gloss_zh) item.correct_index = i;
    }
    item.options[4] = std::string(kDontKnow);
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<std::string> score_pretest(const std::vector<PretestItem>& items,
                                       const std::map<std::string, std::size_t>& answers) {
  std::vector<std::string> unknown;
  for (const auto& item : items) {
    auto it = answers.find(item.word);
    if (it == answers.end()) throw PreconditionError("no pretest answer for '" + item.word + "'");
    if (it->second > 4) throw PreconditionError("pretest answer for '" + item.word + "' is not an option index");
    if (it->second != item.correct_index) unknown.push_back(item.word);
  }
  return unknown;
}

// -- counterbalancing --------------------------------------------------------

std::vector<std::vector<std::size_t>> latin_square(std::size_t n) {
  if (n == 0) throw PreconditionError("latin square of order 0");
  // First row 0, 1, n-1, 2, n-2, ...; each later row adds 1 mod n.
  std::vector<std::size_t> first;
  first.reserve(n);
  std::size_t lo = 1;
  std::size_t hi = n - 1;
  first.push_back(0);
  for (std::size_t j = 1; j < n; ++j) first.push_back(j % 2 == 1 ? lo++ : hi--);
  std::vector<std::vector<std::size_t>> rows(n, std::vector<std::size_t>(n));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) rows[r][c] = (first[c] + r) % n;
  }
  return rows;
}

std::vector<std::size_t> StudyPlan::sets_for(session::Mode mode) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < set_to_condition.size(); ++i) {
    if (set_to_condition[i] == mode) out.push_back(i);
  }
  return out;
}

StudyPlan plan_study(std::string participant_id, std::size_t sequence_number, std::vector<std::string> unknown_words,
                     Rng& rng) {
  std::vector<std::string> distinct;
  std::set<std::string> seen;
  for (const auto& w : unknown_words) {
    if (seen.insert(w).second) distinct.push_back(w);
  }
  if (distinct.size() < kStudyWords) {
    throw IneligibleParticipant("participant '" + participant_id + "' has " + std::to_string(distinct.size()) +
                                " unknown words; " + std::to_string(kStudyWords) + " are needed");
  }
  StudyPlan plan;
  plan.participant_id = std::move(participant_id);
  plan.sequence_number = sequence_number;
  plan.unknown_words = std::move(unknown_words);

  for (std::size_t i = 0; i < kStudyWords; ++i) {
    std::swap(distinct[i], distinct[i + rng.below(distinct.size() - i)]);
  }
  for (std::size_t s = 0; s < kSetCount; ++s) {
    lexicon::WordSet set;
    set.words.assign(distinct.begin() + static_cast<std::ptrdiff_t>(s * kWordsPerSet),
                     distinct.begin() + static_cast<std::ptrdiff_t>((s + 1) * kWordsPerSet));
    plan.sets.push_back(std::move(set));
  }
  const auto row = latin_square(kConditions)[sequence_number % kConditions];
  for (std::size_t i = 0; i < kConditions; ++i) plan.condition_order[i] = condition_mode(row[i]);
  const std::size_t per_condition = kSetCount / kConditions;
  for (std::size_t s = 0; s < kSetCount; ++s) plan.set_to_condition.push_back(plan.condition_order[s / per_condition]);
  return plan;
}

nlohmann::ordered_json to_json(const StudyPlan& plan) {
  nlohmann::ordered_json j;
  j["participant_id"] = plan.participant_id;
  j["sequence_number"] = plan.sequence_number;
  j["unknown_words"] = plan.unknown_words;
  auto sets = nlohmann::ordered_json::array();
  for (const auto& s : plan.sets) sets.push_back(s.words);
  j["sets"] = std::move(sets);
  auto order = nlohmann::ordered_json::array();
  for (auto m : plan.condition_order) order.push_back(session::to_string(m));
  j["condition_order"] = std::move(order);
  auto assign = nlohmann::ordered_json::array();
  for (auto m : plan.set_to_condition) assign.push_back(session::to_string(m));
  j["set_to_condition"] = std::move(assign);
  return j;
}

StudyPlan plan_from_json(const nlohmann::json& j) {
  StudyPlan p;
  p.participant_id = j.at("participant_id").get<std::string>();
  p.sequence_number = j.at("sequence_number").get<std::size_t>();
  p.unknown_words = j.at("unknown_words").get<std::vector<std::string>>();
  for (const auto& s : j.at("sets")) p.sets.push_back(lexicon::WordSet{s.get<std::vector<std::string>>()});
  const auto& order = j.at("condition_order");
  if (order.size() != kConditions) throw PreconditionError("condition_order must list 4 conditions");
  for (std::size_t i = 0; i < kConditions; ++i) p.condition_order[i] = session::mode_from_string(order[i].get<std::string>());
  for (const auto& m : j.at("set_to_condition")) p.set_to_condition.push_back(session::mode_from_string(m.get<std::string>()));
  if (p.set_to_condition.size() != p.sets.size()) throw PreconditionError("set_to_condition must parallel sets");
  return p;
}

// -- posttest ----------------------------------------------------------------

std::map<session::Mode, ConditionOutcome> score_posttest(
    const std::map<session::Mode, std::vector<PosttestRecord>>& records) {
  std::map<session::Mode, ConditionOutcome> out;
  for (const auto& [mode, recs] : records) {
    if (recs.size() > kMaxPosttestRecords) {
      throw PreconditionError(std::string(session::to_string(mode)) + " has " + std::to_string(recs.size()) +
                              " posttest records; at most 10 allowed");
    }
    ConditionOutcome o;
    for (const auto& r : recs) {
      if (r.choice_correct) ++o.correct_choices;
      if (!r.sentence) {
        if (r.grammar_score || r.context_score) throw PreconditionError("scores given for '" + r.word + "' without a sentence");
        continue;
      }
      if (!r.grammar_score || !r.context_score) throw PreconditionError("sentence for '" + r.word + "' is not rated");
      for (int s : {*r.grammar_score, *r.context_score}) {
        if (s < 0 || s > 2) throw PreconditionError("score " + std::to_string(s) + " for '" + r.word + "' outside 0..2");
      }
      ++o.sentences_written;
      if (*r.grammar_score == 2 && *r.context_score == 2) ++o.correct_sentences;
      o.total_sentence_score += static_cast<std::size_t>(*r.grammar_score + *r.context_score);
    }
    out[mode] = o;
  }
  return out;
}

std::map<std::string, double> aggregate_questionnaire(const std::map<std::string, std::vector<int>>& responses) {
  std::map<std::string, double> out;
  for (const auto& [construct, items] : responses) {
    if (items.empty()) throw PreconditionError("construct '" + construct + "' has no items");
    double sum = 0;
    for (int v : items) {
      if (v < 1 || v > 7) throw PreconditionError("item score " + std::to_string(v) + " outside 1..7");
      sum += v;
    }
    out[construct] = sum / static_cast<double>(items.size());
  }
  return out;
}

// -- files -------------------------------------------------------------------

namespace {

bool skip_blank(const csv::Record& r) { return r.fields.size() == 1 && text::trim(r.fields[0]).empty(); }

long parse_int(const std::string& f, std::size_t line) {
  try {
    std::size_t used = 0;
    const long v = std::stol(f, &used);
    if (!text::trim(f.substr(used)).empty()) throw std::invalid_argument(f);
    return v;
  } catch (const std::exception&) {
    throw ParseError("'" + f + "' is not an integer", line);
  }
}

bool parse_bool(const std::string& f, std::size_t line) {
  const auto v = text::to_lower(text::trim(f));
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ParseError("'" + f + "' is not a boolean", line);
}

}  // namespace

std::map<std::string, std::map<std::string, std::size_t>> load_pretest_answers(std::istream& in) {
  csv::Reader reader(in);
  csv::expect_header(reader, {"participant_id", "word", "choice"});
  std::map<std::string, std::map<std::string, std::size_t>> out;
  while (auto rec = reader.next()) {
    if (skip_blank(*rec)) continue;
    if (rec->fields.size() != 3) throw ParseError("column count mismatch", rec->line);
    const long choice = parse_int(rec->fields[2], rec->line);
    if (choice < 0 || choice > 4) throw ParseError("choice must be 0..4", rec->line);
    out[text::trim(rec->fields[0])][text::to_lower(text::trim(rec->fields[1]))] = static_cast<std::size_t>(choice);
  }
  return out;
}

std::vector<PosttestAnswer> load_posttest_answers(std::istream& in) {
  csv::Reader reader(in);
  csv::expect_header(reader, {"participant_id", "condition", "word", "choice_correct", "sentence"});
  std::vector<PosttestAnswer> out;
  while (auto rec = reader.next()) {
    if (skip_blank(*rec)) continue;
    if (rec->fields.size() != 5) throw ParseError("column count mismatch", rec->line);
    PosttestAnswer a;
    a.participant_id = text::trim(rec->fields[0]);
    try {
      a.condition = session::mode_from_string(text::trim(rec->fields[1]));
    } catch (const PreconditionError& e) {
      throw ParseError(e.what(), rec->line);
    }
    a.record.word = text::to_lower(text::trim(rec->fields[2]));
    a.record.choice_correct = parse_bool(rec->fields[3], rec->line);
    const auto sentence = text::trim(rec->fields[4]);
    if (!sentence.empty() && text::to_lower(sentence) != "nothing") a.record.sentence = sentence;
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<SentenceRating> load_sentence_ratings(std::istream& in) {
  csv::Reader reader(in);
  csv::expect_header(reader, {"participant_id", "word", "grammar_score", "context_score"});
  std::vector<SentenceRating> out;
  while (auto rec = reader.next()) {
    if (skip_blank(*rec)) continue;
    if (rec->fields.size() != 4) throw ParseError("column count mismatch", rec->line);
    SentenceRating r{text::trim(rec->fields[0]), text::to_lower(text::trim(rec->fields[1])),
                     static_cast<int>(parse_int(rec->fields[2], rec->line)),
                     static_cast<int>(parse_int(rec->fields[3], rec->line))};
    if (r.grammar_score < 0 || r.grammar_score > 2 || r.context_score < 0 || r.context_score > 2) {
      throw ParseError("scores must be 0..2", rec->line);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::map<std::string, std::map<session::Mode, std::vector<PosttestRecord>>> merge_posttest(
    const std::vector<PosttestAnswer>& answers, const std::vector<SentenceRating>& ratings) {
  std::map<std::pair<std::string, std::string>, const SentenceRating*> by_key;
  for (const auto& r : ratings) by_key[{r.participant_id, r.word}] = &r;
  std::set<std::pair<std::string, std::string>> used;
  std::map<std::string, std::map<session::Mode, std::vector<PosttestRecord>>> out;
  for (const auto& a : answers) {
    auto rec = a.record;
    if (rec.sentence) {
      auto it = by_key.find({a.participant_id, rec.word});
      if (it == by_key.end()) throw PreconditionError("no rating for " + a.participant_id + "/" + rec.word);
      rec.grammar_score = it->second->grammar_score;
      rec.context_score = it->second->context_score;
      used.insert(it->first);
    }
    out[a.participant_id][a.condition].push_back(std::move(rec));
  }
  for (const auto& [key, _] : by_key) {
    if (!used.count(key)) throw PreconditionError("rating for " + key.first + "/" + key.second + " has no written sentence");
  }
  return out;
}

}  // namespace storyfier::study
