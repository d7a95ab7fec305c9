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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "storyfier/genclient.hpp"
#include "storyfier/grammar.hpp"
#include "storyfier/lexicon.hpp"
#include "storyfier/rng.hpp"

namespace storyfier::session {

/// The four study conditions: example sentences vs generated story,
/// crossed with read-only vs read-cloze-write.
enum class Mode { read_sen, read_ai, storyfier_sen, storyfier_ai };
enum class Step { read, cloze, write, done };

std::string_view to_string(Mode m);
std::string_view to_string(Step s);
Mode mode_from_string(std::string_view s);
Step step_from_string(std::string_view s);

/// Modes that continue past reading into cloze and writing.
constexpr bool is_interactive(Mode m) { return m == Mode::storyfier_sen || m == Mode::storyfier_ai; }
/// Modes that read a generated story rather than dictionary examples.
constexpr bool uses_story(Mode m) { return m == Mode::read_ai || m == Mode::storyfier_ai; }

// -- cloze -------------------------------------------------------------------

struct Blank {
  std::size_t index = 0;
  std::string expected_surface;  // token text removed from the material
  std::string headword;

  bool operator==(const Blank&) const = default;
};

using ClozeSegment = std::variant<std::string, Blank>;

struct ClozeTest {
  std::vector<ClozeSegment> segments;  // literal text and blanks in reading order
  std::vector<std::string> bank;       // distinct blank headwords, shuffled
  std::vector<std::string> warnings;   // target words absent from the material

  std::size_t blank_count() const;
  std::vector<Blank> blanks() const;
  /// Material with every blank replaced by its expected surface.
  std::string reconstruct() const;

  bool operator==(const ClozeTest&) const = default;
};

/// Blanks every occurrence of every target word (corpus matching rule) in
/// the sentences joined by single spaces. The bank order is drawn from `rng`.
ClozeTest build_cloze(const std::vector<std::string>& material, const lexicon::WordSet& words, Rng& rng);

struct BlankResult {
  std::size_t index = 0;
  std::string submitted;
  bool correct = false;

  bool operator==(const BlankResult&) const = default;
};

struct ClozeResult {
  std::vector<BlankResult> per_blank;
  bool all_correct = false;

  bool operator==(const ClozeResult&) const = default;
};

/// A blank is correct when the trimmed, case-folded submission equals its
/// expected surface. Throws PreconditionError if a blank is missing from the
/// submission or the submission names an unknown blank.
ClozeResult check_cloze(const ClozeTest& test, const std::map<std::size_t, std::string>& submission);

// -- turn-taking writing -----------------------------------------------------

enum class Author { human, machine, machine_assisted };
std::string_view to_string(Author a);
Author author_from_string(std::string_view s);

struct Turn {
  Author author = Author::human;
  std::string text;
  std::vector<std::string> words_used;  // target words newly consumed by this turn
  std::vector<grammar::Alert> alerts;
  std::size_t human_words = 0;
  std::size_t machine_words = 0;

  bool operator==(const Turn&) const = default;
};

struct WritingSession {
  std::optional<std::string> title;
  lexicon::WordSet target_words;
  std::vector<Turn> turns;
  std::vector<std::string> unused;  // in word-set order
  std::size_t human_word_count = 0;
  std::size_t machine_word_count = 0;

  bool operator==(const WritingSession&) const = default;
};

/// Pending inline suggestion. Advisory until accepted.
struct Suggestion {
  std::string prefix;
  std::string span;
  std::vector<std::string> covered_words;
  bool error = false;
  std::string error_message;

  bool operator==(const Suggestion&) const = default;
};

struct WritingStats {
  std::size_t used_count = 0;
  std::size_t unused_count = 0;
  std::size_t human_words = 0;
  std::size_t machine_words = 0;
  bool complete = false;

  bool operator==(const WritingStats&) const = default;
};

WritingSession begin_writing(const lexicon::WordSet& words, std::optional<std::string> title);

/// Appends a human turn. Throws PreconditionError on blank text; checker
/// failures propagate and leave `ws` untouched.
WritingSession submit_human_turn(WritingSession ws, const std::string& text, grammar::Checker& checker);

/// Appends one generated sentence. Throws OrderingError before the first
/// human turn and PreconditionError when no word is left.
WritingSession machine_turn(WritingSession ws, genclient::Backend& backend, const genclient::ClientOptions& options = {});

/// Span completing `partial`. Backend failures yield an empty span with the
/// error flag set rather than an exception.
Suggestion inline_suggestion(const WritingSession& ws, const std::string& partial, genclient::Backend& backend,
                             const genclient::ClientOptions& options = {});

/// Appends prefix + span as a machine-assisted turn. The prefix's tokens
/// count as human words, the rest as machine words.
WritingSession accept_suggestion(WritingSession ws, const Suggestion& s);

WritingStats writing_stats(const WritingSession& ws);

/// Applies a turn whose text and alerts are already known. The single
/// code path behind every turn, live or replayed.
void append_turn(WritingSession& ws, Author author, const std::string& text, std::vector<grammar::Alert> alerts,
                 std::size_t human_prefix_tokens = 0);

// -- session state and events ------------------------------------------------

/// One state change. `ts_ms` is milliseconds since the Unix epoch.
struct Event {
  std::int64_t ts_ms = 0;
  std::string session_id;
  std::string kind;
  nlohmann::ordered_json payload;

  bool operator==(const Event&) const = default;
};

nlohmann::ordered_json to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);

struct SessionState {
  std::string session_id;
  lexicon::WordSet word_set;
  Mode mode = Mode::storyfier_ai;
  Step step = Step::read;
  std::optional<std::string> title;
  std::vector<std::string> material;  // story sentences, or one example per word
  bool material_is_story = false;
  bool generation_fallback = false;
  std::vector<std::string> uncovered_words;  // target words the material lacks
  std::uint64_t seed = 0;
  std::optional<ClozeTest> cloze;
  std::vector<ClozeResult> cloze_attempts;
  std::optional<WritingSession> writing;
  std::optional<Suggestion> pending_suggestion;
  bool finished_early = false;
  std::map<Step, std::int64_t> timer_ms;  // closed activity durations
  std::optional<Step> open_activity;
  std::int64_t open_since_ms = 0;
  std::int64_t created_ms = 0;
  std::int64_t last_ms = 0;
  std::vector<Event> event_log;

  std::int64_t wall_ms() const { return last_ms - created_ms; }
  double activity_seconds(Step step) const;
};

/// Canonical serialization; equal states dump to identical bytes.
nlohmann::ordered_json to_json(const SessionState& s);

/// Learner-facing view of a cloze test: text segments, blank indices and
/// the bank, never the expected answers.
nlohmann::ordered_json to_public_json(const ClozeTest& t);
nlohmann::ordered_json to_json(const ClozeResult& r);
nlohmann::ordered_json to_json(const WritingSession& ws);
nlohmann::ordered_json to_json(const WritingStats& st);
nlohmann::ordered_json to_json(const Suggestion& s);

/// Evolves `state` by one event. Throws PreconditionError when the event
/// is not legal in the current state. Live operations and replay both go
/// through here.
void apply(SessionState& state, const Event& event);

/// Rebuilds a state from its events.
SessionState replay_session(const std::vector<Event>& events);

struct StartRequest {
  std::string session_id;
  lexicon::WordSet word_set;
  Mode mode = Mode::storyfier_ai;
  std::optional<std::string> title;
  std::uint64_t seed = 0;
};

/// Live operations. Each validates, performs any backend calls, then
/// applies its events to `state` and returns them for persistence. On
/// error `state` is unchanged.
std::vector<Event> start_session(SessionState& state, const StartRequest& request, const lexicon::VocabPool& pool,
                                 genclient::Backend* backend, std::int64_t now_ms,
                                 const genclient::ClientOptions& options = {});
std::vector<Event> advance(SessionState& state, std::int64_t now_ms);
std::vector<Event> submit_cloze(SessionState& state, const std::map<std::size_t, std::string>& answers,
                                std::int64_t now_ms);
std::vector<Event> write_turn(SessionState& state, const std::string& text, grammar::Checker& checker,
                              std::int64_t now_ms);
std::vector<Event> write_machine_turn(SessionState& state, genclient::Backend& backend, std::int64_t now_ms,
                                      const genclient::ClientOptions& options = {});
std::vector<Event> suggest(SessionState& state, const std::string& prefix, genclient::Backend& backend,
                           std::int64_t now_ms, const genclient::ClientOptions& options = {});
std::vector<Event> accept_pending_suggestion(SessionState& state, std::int64_t now_ms);
std::vector<Event> reject_pending_suggestion(SessionState& state, std::int64_t now_ms);
std::vector<Event> finish_early(SessionState& state, std::int64_t now_ms);

/// Whether `advance` would succeed now.
bool can_advance(const SessionState& state);

}  // namespace storyfier::session
