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
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "storyfier/lexicon.hpp"
#include "storyfier/session.hpp"
#include "storyfier/study.hpp"

namespace storyfier::study {

/// One participant x condition outcome of a simulated study.
struct SimulationRow {
  std::string participant;
  session::Mode condition = session::Mode::read_sen;
  std::size_t order_position = 0;  // 1..4 within the participant's condition order
  ConditionOutcome outcome;
  std::int64_t read_ms = 0;
  std::int64_t cloze_ms = 0;
  std::int64_t write_ms = 0;
  std::int64_t wall_ms = 0;  // summed session wall time
};

struct SimulatedSession {
  std::string participant;
  session::SessionState state;
};

struct SimulationResult {
  std::vector<StudyPlan> plans;
  std::vector<SimulatedSession> sessions;  // eight per participant, study order
  std::vector<SimulationRow> rows;         // four per participant, order position
};

/// Runs scripted learners through pretest, planning, eight sessions with
/// the template backend on a simulated clock, and the posttest. Fully
/// determined by (pool, participants, seed). The pool needs at least 40
/// entries with distinct glosses and example sentences.
SimulationResult simulate_study(const lexicon::VocabPool& pool, std::size_t participants, std::uint64_t seed);

/// CSV with header participant,condition,order_position,correct_choices,
/// correct_sentences,total_sentence_score,read_seconds,cloze_seconds,
/// write_seconds,wall_seconds.
void write_simulation_csv(std::ostream& out, const std::vector<SimulationRow>& rows);

}  // namespace storyfier::study
