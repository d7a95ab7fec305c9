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

#include "storyfier/simulate.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "storyfier/csv.hpp"
#include "storyfier/genclient.hpp"
#include "storyfier/grammar.hpp"
#include "storyfier/text.hpp"

namespace storyfier::study {

namespace {

constexpr std::int64_t kEpochMs = 1'700'000'000'000;
constexpr std::int64_t kDayMs = 86'400'000;
constexpr std::size_t kPretestSize = 100;
constexpr double kKnownRate = 0.25;

// Scripted learner tendencies per condition index (read_sen, read_ai,
// storyfier_sen, storyfier_ai).
constexpr std::array<double, 4> kChoiceRate = {0.45, 0.50, 0.60, 0.65};
constexpr std::array<double, 4> kSentenceRate = {0.50, 0.55, 0.70, 0.75};
constexpr double kClozeFirstTryRate = 0.8;

constexpr std::array<const char*, 4> kOpeners = {"Yesterday I saw the", "My sister found the", "We talked about the",
                                                 "Everyone liked the"};

int draw_score(Rng& rng) {
  const double u = rng.unit();
  return u < 0.6 ? 2 : (u < 0.9 ? 1 : 0);
}

void run_cloze(session::SessionState& s, Rng& rng, std::int64_t& clock) {
  const auto blanks = s.cloze->blanks();
  std::map<std::size_t, std::string> first;
  std::map<std::size_t, std::string> fixed;
  for (const auto& b : blanks) {
    clock += 4000 + static_cast<std::int64_t>(rng.below(4000));
    fixed[b.index] = b.expected_surface;
    if (rng.chance(kClozeFirstTryRate)) {
      first[b.index] = b.expected_surface;
      continue;
    }
    std::string wrong = "something";
    for (const auto& w : s.cloze->bank) {
      if (w != b.headword) {
        wrong = w;
        break;
      }
    }
    first[b.index] = wrong;
  }
  session::submit_cloze(s, first, clock);
  if (!s.cloze_attempts.back().all_correct) {
    clock += 3000 + static_cast<std::int64_t>(rng.below(3000));
    session::submit_cloze(s, fixed, clock);
  }
}

void run_writing(session::SessionState& s, genclient::Backend& backend, grammar::Checker& checker, Rng& rng,
                 std::int64_t& clock) {
  bool tried_suggestion = false;
  for (std::size_t round = 0; round < 20 && !s.writing->unused.empty(); ++round) {
    const auto word = s.writing->unused.front();
    clock += 20000 + static_cast<std::int64_t>(rng.below(20000));
    const std::string opener = kOpeners[rng.below(kOpeners.size())];
    session::write_turn(s, opener + " " + word + " in the park.", checker, clock);
    if (s.writing->unused.empty()) break;

    if (!tried_suggestion) {
      tried_suggestion = true;
      clock += 5000 + static_cast<std::int64_t>(rng.below(5000));
      session::suggest(s, "Then we saw the", backend, clock);
      clock += 2000;
      if (!s.pending_suggestion->error && !s.pending_suggestion->covered_words.empty()) {
        session::accept_pending_suggestion(s, clock);
      } else {
        session::reject_pending_suggestion(s, clock);
      }
    } else if (round % 2 == 1) {
      clock += 1500;
      session::write_machine_turn(s, backend, clock);
    }
  }
  if (!s.writing->unused.empty()) session::finish_early(s, clock);
}

std::int64_t timer(const session::SessionState& s, session::Step step) {
  const auto it = s.timer_ms.find(step);
  return it == s.timer_ms.end() ? 0 : it->second;
}

std::string seconds(std::int64_t ms) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", static_cast<double>(ms) / 1000.0);
  return buf;
}

}  // namespace

SimulationResult simulate_study(const lexicon::VocabPool& pool, std::size_t participants, std::uint64_t seed) {
  SimulationResult result;
  genclient::TemplateBackend backend;
  grammar::NullChecker checker;
  Rng master(seed);

  for (std::size_t p = 0; p < participants; ++p) {
    Rng rng(master.next());
    char pid_buf[32];
    std::snprintf(pid_buf, sizeof pid_buf, "p%02zu", p + 1);
    const std::string pid = pid_buf;
    std::int64_t clock = kEpochMs + static_cast<std::int64_t>(p) * kDayMs;

    // Pretest: the learner knows a random quarter of the candidates.
    const auto candidates = lexicon::sample_word_set(pool, std::min(kPretestSize, pool.size()), rng).words;
    const auto items = build_pretest(pool, candidates, rng);
    std::map<std::string, std::size_t> answers;
    for (const auto& item : items) {
      if (rng.chance(kKnownRate)) {
        answers[item.word] = item.correct_index;
      } else {
        answers[item.word] = rng.chance(0.7) ? 4 : (item.correct_index + 1 + rng.below(3)) % 4;
      }
    }
    auto plan = plan_study(pid, p, score_pretest(items, answers), rng);

    // Eight sessions in study order.
    std::map<session::Mode, std::array<std::int64_t, 4>> time;  // read, cloze, write, wall
    for (std::size_t i = 0; i < plan.sets.size(); ++i) {
      const auto mode = plan.set_to_condition[i];
      session::SessionState s;
      session::StartRequest req;
      req.session_id = pid + "-" + std::to_string(i + 1);
      req.word_set = plan.sets[i];
      req.mode = mode;
      req.seed = rng.next();
      session::start_session(s, req, pool, &backend, clock);

      std::size_t tokens = 0;
      for (const auto& sentence : s.material) tokens += text::token_count(sentence);
      clock += static_cast<std::int64_t>(tokens) * 300 + static_cast<std::int64_t>(rng.below(2000));
      session::advance(s, clock);
      if (session::is_interactive(mode)) {
        run_cloze(s, rng, clock);
        session::advance(s, clock);
        run_writing(s, backend, checker, rng, clock);
        session::advance(s, clock);
      }
      auto& t = time[mode];
      t[0] += timer(s, session::Step::read);
      t[1] += timer(s, session::Step::cloze);
      t[2] += timer(s, session::Step::write);
      t[3] += s.wall_ms();
      result.sessions.push_back({pid, std::move(s)});
      clock += 60'000;
    }

    // Posttest over each condition's ten words.
    std::map<session::Mode, std::vector<PosttestRecord>> records;
    for (std::size_t i = 0; i < plan.sets.size(); ++i) {
      const auto mode = plan.set_to_condition[i];
      const auto c = condition_index(mode);
      for (const auto& w : plan.sets[i].words) {
        PosttestRecord r;
        r.word = w;
        r.choice_correct = rng.chance(kChoiceRate[c]);
        if (rng.chance(kSentenceRate[c])) {
          r.sentence = "I used the word " + w + " today.";
          r.grammar_score = draw_score(rng);
          r.context_score = draw_score(rng);
        }
        records[mode].push_back(std::move(r));
      }
    }
    const auto outcomes = score_posttest(records);

    for (std::size_t pos = 0; pos < kConditions; ++pos) {
      const auto mode = plan.condition_order[pos];
      const auto& t = time[mode];
      result.rows.push_back(SimulationRow{pid, mode, pos + 1, outcomes.at(mode), t[0], t[1], t[2], t[3]});
    }
    result.plans.push_back(std::move(plan));
  }
  return result;
}

void write_simulation_csv(std::ostream& out, const std::vector<SimulationRow>& rows) {
  out << csv::format_row({"participant", "condition", "order_position", "correct_choices", "correct_sentences",
                          "total_sentence_score", "read_seconds", "cloze_seconds", "write_seconds", "wall_seconds"})
      << '\n';
  for (const auto& r : rows) {
    out << csv::format_row({r.participant, std::string(session::to_string(r.condition)),
                            std::to_string(r.order_position), std::to_string(r.outcome.correct_choices),
                            std::to_string(r.outcome.correct_sentences),
                            std::to_string(r.outcome.total_sentence_score), seconds(r.read_ms), seconds(r.cloze_ms),
                            seconds(r.write_ms), seconds(r.wall_ms)})
        << '\n';
  }
}

}  // namespace storyfier::study
