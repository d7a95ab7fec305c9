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

#include "storyfier/session.hpp"

#include <algorithm>
#include <set>

#include "storyfier/error.hpp"
#include "storyfier/text.hpp"

namespace storyfier::session {

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::array<std::pair<Enum, std::string_view>, N>& table, const char* what) {
  for (const auto& [e, name] : table) {
    if (name == s) return e;
  }
  throw PreconditionError(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

constexpr std::array<std::pair<Mode, std::string_view>, 4> kModes = {{{Mode::read_sen, "read_sen"},
                                                                      {Mode::read_ai, "read_ai"},
                                                                      {Mode::storyfier_sen, "storyfier_sen"},
                                                                      {Mode::storyfier_ai, "storyfier_ai"}}};
constexpr std::array<std::pair<Step, std::string_view>, 4> kSteps = {
    {{Step::read, "read"}, {Step::cloze, "cloze"}, {Step::write, "write"}, {Step::done, "done"}}};
constexpr std::array<std::pair<Author, std::string_view>, 3> kAuthors = {
    {{Author::human, "human"}, {Author::machine, "machine"}, {Author::machine_assisted, "machine_assisted"}}};

template <typename Enum, std::size_t N>
std::string_view name_of(Enum e, const std::array<std::pair<Enum, std::string_view>, N>& table) {
  for (const auto& [v, name] : table) {
    if (v == e) return name;
  }
  return "?";
}

/// Target word matched by a token, exact form preferred; empty if none.
std::string match_target(std::string_view token, const std::vector<std::string>& words) {
  const auto lower = text::to_lower(token);
  for (const auto& w : words) {
    if (lower == w) return w;
  }
  for (const auto& w : words) {
    if (text::matches_headword(lower, w)) return w;
  }
  return {};
}

}  // namespace

std::string_view to_string(Mode m) { return name_of(m, kModes); }
std::string_view to_string(Step s) { return name_of(s, kSteps); }
std::string_view to_string(Author a) { return name_of(a, kAuthors); }
Mode mode_from_string(std::string_view s) { return parse_enum(s, kModes, "mode"); }
Step step_from_string(std::string_view s) { return parse_enum(s, kSteps, "step"); }
Author author_from_string(std::string_view s) { return parse_enum(s, kAuthors, "author"); }

// -- cloze -------------------------------------------------------------------

std::size_t ClozeTest::blank_count() const {
  return static_cast<std::size_t>(
      std::count_if(segments.begin(), segments.end(), [](const auto& s) { return std::holds_alternative<Blank>(s); }));
}

std::vector<Blank> ClozeTest::blanks() const {
  std::vector<Blank> out;
  for (const auto& s : segments) {
    if (const auto* b = std::get_if<Blank>(&s)) out.push_back(*b);
  }
  return out;
}

std::string ClozeTest::reconstruct() const {
  std::string out;
  for (const auto& s : segments) {
    if (const auto* b = std::get_if<Blank>(&s)) out += b->expected_surface;
    else out += std::get<std::string>(s);
  }
  return out;
}

ClozeTest build_cloze(const std::vector<std::string>& material, const lexicon::WordSet& words, Rng& rng) {
  const std::string joined = text::join(material, " ");
  ClozeTest t;
  std::size_t cursor = 0;
  std::set<std::string> seen;
  for (const auto& tok : text::tokenize(joined)) {
    auto hw = match_target(tok.text, words.words);
    if (hw.empty()) continue;
    if (tok.offset > cursor) t.segments.emplace_back(joined.substr(cursor, tok.offset - cursor));
    if (seen.insert(hw).second) t.bank.push_back(hw);
    t.segments.emplace_back(Blank{t.blank_count(), std::string(tok.text), std::move(hw)});
    cursor = tok.offset + tok.text.size();
  }
  if (cursor < joined.size()) t.segments.emplace_back(joined.substr(cursor));
  for (const auto& w : words.words) {
    if (!seen.count(w)) t.warnings.push_back(w);
  }
  rng.shuffle(std::span<std::string>(t.bank));
  return t;
}

ClozeResult check_cloze(const ClozeTest& test, const std::map<std::size_t, std::string>& submission) {
  const auto blanks = test.blanks();
  for (const auto& [idx, _] : submission) {
    if (idx >= blanks.size()) throw PreconditionError("no blank with index " + std::to_string(idx));
  }
  ClozeResult r;
  r.all_correct = true;
  for (const auto& b : blanks) {
    auto it = submission.find(b.index);
    if (it == submission.end()) throw PreconditionError("missing answer for blank " + std::to_string(b.index));
    const bool ok = text::to_lower(text::trim(it->second)) == text::to_lower(b.expected_surface);
    r.per_blank.push_back({b.index, it->second, ok});
    r.all_correct = r.all_correct && ok;
  }
  return r;
}

// -- writing -----------------------------------------------------------------

WritingSession begin_writing(const lexicon::WordSet& words, std::optional<std::string> title) {
  WritingSession ws;
  ws.title = std::move(title);
  ws.target_words = words;
  ws.unused = words.words;
  return ws;
}

void append_turn(WritingSession& ws, Author author, const std::string& text, std::vector<grammar::Alert> alerts,
                 std::size_t human_prefix_tokens) {
  if (text::trim(text).empty()) throw PreconditionError("turn text is empty");
  if (author == Author::machine &&
      std::none_of(ws.turns.begin(), ws.turns.end(), [](const Turn& t) { return t.author != Author::machine; })) {
    throw OrderingError("the learner writes the first sentence");
  }
  Turn turn{author, text, {}, std::move(alerts), 0, 0};
  const auto tokens = text::tokenize(text);
  for (const auto& w : ws.unused) {
    const bool hit =
        std::any_of(tokens.begin(), tokens.end(), [&](const auto& t) { return text::matches_headword(text::to_lower(t.text), w); });
    if (hit) turn.words_used.push_back(w);
  }
  std::erase_if(ws.unused, [&](const std::string& w) {
    return std::find(turn.words_used.begin(), turn.words_used.end(), w) != turn.words_used.end();
  });
  switch (author) {
    case Author::human:
      turn.human_words = tokens.size();
      break;
    case Author::machine:
      turn.machine_words = tokens.size();
      break;
    case Author::machine_assisted:
      turn.human_words = std::min(human_prefix_tokens, tokens.size());
      turn.machine_words = tokens.size() - turn.human_words;
      break;
  }
  ws.human_word_count += turn.human_words;
  ws.machine_word_count += turn.machine_words;
  ws.turns.push_back(std::move(turn));
}

WritingSession submit_human_turn(WritingSession ws, const std::string& text, grammar::Checker& checker) {
  if (text::trim(text).empty()) throw PreconditionError("turn text is empty");
  auto alerts = checker.check(text);
  append_turn(ws, Author::human, text, std::move(alerts));
  return ws;
}

namespace {

std::vector<std::string> turn_texts(const WritingSession& ws) {
  std::vector<std::string> out;
  out.reserve(ws.turns.size());
  for (const auto& t : ws.turns) out.push_back(t.text);
  return out;
}

void require_machine_turn_allowed(const WritingSession& ws) {
  if (std::none_of(ws.turns.begin(), ws.turns.end(), [](const Turn& t) { return t.author != Author::machine; })) {
    throw OrderingError("the learner writes the first sentence");
  }
  if (ws.unused.empty()) throw PreconditionError("every target word is already used");
}

}  // namespace

WritingSession machine_turn(WritingSession ws, genclient::Backend& backend, const genclient::ClientOptions& options) {
  require_machine_turn_allowed(ws);
  auto gen = genclient::next_sentence(backend, ws.title, turn_texts(ws), ws.unused, options);
  append_turn(ws, Author::machine, gen.sentences.front(), {});
  return ws;
}

Suggestion inline_suggestion(const WritingSession& ws, const std::string& partial, genclient::Backend& backend,
                             const genclient::ClientOptions& options) {
  Suggestion s;
  s.prefix = partial;
  try {
    auto gen = genclient::infill(backend, turn_texts(ws), {}, ws.unused, ws.title, partial, options);
    s.span = gen.sentences.front();
    s.covered_words = gen.covered_words;
  } catch (const BackendError& e) {
    s.span.clear();
    s.error = true;
    s.error_message = e.what();
  }
  return s;
}

WritingSession accept_suggestion(WritingSession ws, const Suggestion& s) {
  if (s.error) throw PreconditionError("cannot accept a failed suggestion");
  append_turn(ws, Author::machine_assisted, text::trim(s.prefix + s.span), {}, text::token_count(s.prefix));
  return ws;
}

WritingStats writing_stats(const WritingSession& ws) {
  WritingStats st;
  st.unused_count = ws.unused.size();
  st.used_count = ws.target_words.size() - ws.unused.size();
  st.human_words = ws.human_word_count;
  st.machine_words = ws.machine_word_count;
  st.complete = ws.unused.empty();
  return st;
}

// -- serialization -----------------------------------------------------------

nlohmann::ordered_json to_json(const Event& e) {
  nlohmann::ordered_json j;
  j["ts"] = e.ts_ms;
  j["session_id"] = e.session_id;
  j["kind"] = e.kind;
  j["payload"] = e.payload;
  return j;
}

Event event_from_json(const nlohmann::json& j) {
  Event e;
  e.ts_ms = j.at("ts").get<std::int64_t>();
  e.session_id = j.at("session_id").get<std::string>();
  e.kind = j.at("kind").get<std::string>();
  e.payload = nlohmann::ordered_json::parse(j.at("payload").dump());
  return e;
}

namespace {

nlohmann::ordered_json optional_string(const std::optional<std::string>& s) {
  return s ? nlohmann::ordered_json(*s) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json alerts_json(const std::vector<grammar::Alert>& alerts) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& a : alerts) {
    nlohmann::ordered_json j;
    j["message"] = a.message;
    j["offset"] = a.offset;
    j["length"] = a.length;
    j["rule"] = a.rule_id;
    arr.push_back(std::move(j));
  }
  return arr;
}

nlohmann::ordered_json internal_json(const ClozeTest& t) {
  nlohmann::ordered_json j;
  auto segs = nlohmann::ordered_json::array();
  for (const auto& s : t.segments) {
    nlohmann::ordered_json sj;
    if (const auto* b = std::get_if<Blank>(&s)) {
      sj["blank"] = b->index;
      sj["surface"] = b->expected_surface;
      sj["headword"] = b->headword;
    } else {
      sj["text"] = std::get<std::string>(s);
    }
    segs.push_back(std::move(sj));
  }
  j["segments"] = std::move(segs);
  j["bank"] = t.bank;
  j["warnings"] = t.warnings;
  return j;
}

}  // namespace

nlohmann::ordered_json to_public_json(const ClozeTest& t) {
  nlohmann::ordered_json j;
  auto segs = nlohmann::ordered_json::array();
  for (const auto& s : t.segments) {
    nlohmann::ordered_json sj;
    if (const auto* b = std::get_if<Blank>(&s)) sj["blank"] = b->index;
    else sj["text"] = std::get<std::string>(s);
    segs.push_back(std::move(sj));
  }
  j["segments"] = std::move(segs);
  j["blank_count"] = t.blank_count();
  j["bank"] = t.bank;
  j["warnings"] = t.warnings;
  return j;
}

nlohmann::ordered_json to_json(const ClozeResult& r) {
  nlohmann::ordered_json j;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& b : r.per_blank) {
    nlohmann::ordered_json bj;
    bj["index"] = b.index;
    bj["submitted"] = b.submitted;
    bj["correct"] = b.correct;
    arr.push_back(std::move(bj));
  }
  j["per_blank"] = std::move(arr);
  j["all_correct"] = r.all_correct;
  return j;
}

nlohmann::ordered_json to_json(const WritingStats& st) {
  nlohmann::ordered_json j;
  j["used_count"] = st.used_count;
  j["unused_count"] = st.unused_count;
  j["human_words"] = st.human_words;
  j["machine_words"] = st.machine_words;
  j["complete"] = st.complete;
  return j;
}

nlohmann::ordered_json to_json(const WritingSession& ws) {
  nlohmann::ordered_json j;
  j["title"] = optional_string(ws.title);
  j["target_words"] = ws.target_words.words;
  auto turns = nlohmann::ordered_json::array();
  for (const auto& t : ws.turns) {
    nlohmann::ordered_json tj;
    tj["author"] = to_string(t.author);
    tj["text"] = t.text;
    tj["words_used"] = t.words_used;
    tj["alerts"] = alerts_json(t.alerts);
    tj["human_words"] = t.human_words;
    tj["machine_words"] = t.machine_words;
    turns.push_back(std::move(tj));
  }
  j["turns"] = std::move(turns);
  j["unused"] = ws.unused;
  j["human_word_count"] = ws.human_word_count;
  j["machine_word_count"] = ws.machine_word_count;
  return j;
}

nlohmann::ordered_json to_json(const Suggestion& s) {
  nlohmann::ordered_json j;
  j["prefix"] = s.prefix;
  j["span"] = s.span;
  j["covered_words"] = s.covered_words;
  j["error"] = s.error;
  j["error_message"] = s.error_message;
  return j;
}

nlohmann::ordered_json to_json(const SessionState& s) {
  nlohmann::ordered_json j;
  j["session_id"] = s.session_id;
  j["word_set"] = s.word_set.words;
  j["mode"] = to_string(s.mode);
  j["step"] = to_string(s.step);
  j["title"] = optional_string(s.title);
  j["material"] = s.material;
  j["material_is_story"] = s.material_is_story;
  j["generation_fallback"] = s.generation_fallback;
  j["uncovered_words"] = s.uncovered_words;
  j["seed"] = s.seed;
  j["cloze"] = s.cloze ? internal_json(*s.cloze) : nlohmann::ordered_json(nullptr);
  auto attempts = nlohmann::ordered_json::array();
  for (const auto& a : s.cloze_attempts) attempts.push_back(to_json(a));
  j["cloze_attempts"] = std::move(attempts);
  j["writing"] = s.writing ? to_json(*s.writing) : nlohmann::ordered_json(nullptr);
  j["writing_stats"] = s.writing ? to_json(writing_stats(*s.writing)) : nlohmann::ordered_json(nullptr);
  j["pending_suggestion"] = s.pending_suggestion ? to_json(*s.pending_suggestion) : nlohmann::ordered_json(nullptr);
  j["finished_early"] = s.finished_early;
  nlohmann::ordered_json timers;
  for (auto step : {Step::read, Step::cloze, Step::write}) {
    if (auto it = s.timer_ms.find(step); it != s.timer_ms.end()) {
      timers[std::string(to_string(step))] = static_cast<double>(it->second) / 1000.0;
    }
  }
  j["timers"] = timers.is_null() ? nlohmann::ordered_json::object() : timers;
  j["open_activity"] = s.open_activity ? nlohmann::ordered_json(to_string(*s.open_activity)) : nlohmann::ordered_json(nullptr);
  j["open_since_ms"] = s.open_since_ms;
  j["created_ms"] = s.created_ms;
  j["last_ms"] = s.last_ms;
  auto log = nlohmann::ordered_json::array();
  for (const auto& e : s.event_log) log.push_back(to_json(e));
  j["event_log"] = std::move(log);
  return j;
}

double SessionState::activity_seconds(Step step) const {
  auto it = timer_ms.find(step);
  return it == timer_ms.end() ? 0.0 : static_cast<double>(it->second) / 1000.0;
}

// -- event application -------------------------------------------------------

namespace {

std::optional<Step> successor(Mode mode, Step step) {
  switch (step) {
    case Step::read:
      return is_interactive(mode) ? Step::cloze : Step::done;
    case Step::cloze:
      return Step::write;
    case Step::write:
      return Step::done;
    case Step::done:
      return std::nullopt;
  }
  return std::nullopt;
}

std::vector<std::string> strings_of(const nlohmann::ordered_json& j) {
  std::vector<std::string> out;
  for (const auto& v : j) out.push_back(v.get<std::string>());
  return out;
}

void require(bool cond, const std::string& what) {
  if (!cond) throw PreconditionError(what);
}

void apply_created(SessionState& s, const Event& e) {
  require(s.session_id.empty(), "session already exists");
  const auto& p = e.payload;
  s.session_id = e.session_id;
  s.word_set = lexicon::WordSet{strings_of(p.at("word_set"))};
  s.mode = mode_from_string(p.at("mode").get<std::string>());
  s.step = Step::read;
  if (p.at("title").is_string()) s.title = p.at("title").get<std::string>();
  s.material = strings_of(p.at("material"));
  s.material_is_story = p.at("material_is_story").get<bool>();
  s.generation_fallback = p.at("generation_fallback").get<bool>();
  s.seed = p.at("seed").get<std::uint64_t>();
  s.created_ms = e.ts_ms;
  const auto covered = genclient::covered_words(s.material, s.word_set.words);
  for (const auto& w : s.word_set.words) {
    if (std::find(covered.begin(), covered.end(), w) == covered.end()) s.uncovered_words.push_back(w);
  }
  if (is_interactive(s.mode)) {
    Rng rng(s.seed);
    s.cloze = build_cloze(s.material, s.word_set, rng);
  }
}

void apply_step_enter(SessionState& s, const Event& e) {
  const auto step = step_from_string(e.payload.at("step").get<std::string>());
  require(!s.open_activity, "cannot enter a step while another is open");
  if (step == Step::read) {
    require(s.step == Step::read && s.timer_ms.empty(), "read step entered twice");
  } else {
    const auto next = successor(s.mode, s.step);
    require(next && *next == step && s.timer_ms.count(s.step), std::string("illegal transition to ") + std::string(to_string(step)));
  }
  s.step = step;
  if (step != Step::done) {
    s.open_activity = step;
    s.open_since_ms = e.ts_ms;
  }
  if (step == Step::write) s.writing = begin_writing(s.word_set, s.title);
}

void apply_step_exit(SessionState& s, const Event& e) {
  const auto step = step_from_string(e.payload.at("step").get<std::string>());
  require(s.open_activity && *s.open_activity == step, "step exit without a matching enter");
  require(!s.timer_ms.count(step), "activity timer closed twice");
  s.timer_ms[step] = e.ts_ms - s.open_since_ms;
  s.open_activity.reset();
}

void apply_cloze_submit(SessionState& s, const Event& e) {
  require(s.step == Step::cloze && s.cloze, "cloze submission outside the cloze step");
  std::map<std::size_t, std::string> answers;
  for (const auto& [k, v] : e.payload.at("answers").items()) answers[std::stoul(k)] = v.get<std::string>();
  s.cloze_attempts.push_back(check_cloze(*s.cloze, answers));
}

void apply_turn(SessionState& s, const Event& e) {
  require(s.step == Step::write && s.writing, "writing turn outside the write step");
  std::vector<grammar::Alert> alerts;
  for (const auto& a : e.payload.at("alerts")) alerts.push_back(grammar::alert_from_json(nlohmann::json::parse(a.dump())));
  append_turn(*s.writing, author_from_string(e.payload.at("author").get<std::string>()), e.payload.at("text").get<std::string>(),
              std::move(alerts));
  s.pending_suggestion.reset();
}

void apply_suggestion_shown(SessionState& s, const Event& e) {
  require(s.step == Step::write && s.writing, "suggestion outside the write step");
  Suggestion sg;
  sg.prefix = e.payload.at("prefix").get<std::string>();
  sg.span = e.payload.at("span").get<std::string>();
  sg.covered_words = strings_of(e.payload.at("covered_words"));
  sg.error = e.payload.at("error").get<bool>();
  sg.error_message = e.payload.at("error_message").get<std::string>();
  s.pending_suggestion = std::move(sg);
}

void apply_suggestion_accepted(SessionState& s, const Event&) {
  require(s.step == Step::write && s.writing, "suggestion outside the write step");
  require(s.pending_suggestion && !s.pending_suggestion->error, "no suggestion to accept");
  *s.writing = accept_suggestion(std::move(*s.writing), *s.pending_suggestion);
  s.pending_suggestion.reset();
}

}  // namespace

void apply(SessionState& s, const Event& e) {
  if (e.kind != "session_created") {
    require(!s.session_id.empty(), "event for a session that was never created");
    require(e.session_id == s.session_id, "event for session '" + e.session_id + "' applied to '" + s.session_id + "'");
    require(e.ts_ms >= s.last_ms, "event timestamp goes backwards");
  }
  if (e.kind == "session_created") {
    apply_created(s, e);
  } else if (e.kind == "step_enter") {
    apply_step_enter(s, e);
  } else if (e.kind == "step_exit") {
    apply_step_exit(s, e);
  } else if (e.kind == "cloze_submit") {
    apply_cloze_submit(s, e);
  } else if (e.kind == "turn") {
    apply_turn(s, e);
  } else if (e.kind == "suggestion_shown") {
    apply_suggestion_shown(s, e);
  } else if (e.kind == "suggestion_accepted") {
    apply_suggestion_accepted(s, e);
  } else if (e.kind == "suggestion_rejected") {
    require(s.step == Step::write, "suggestion outside the write step");
    s.pending_suggestion.reset();
  } else if (e.kind == "finish_early") {
    require(s.step == Step::write, "finish early outside the write step");
    s.finished_early = true;
  } else {
    throw PreconditionError("unknown event kind '" + e.kind + "'");
  }
  s.last_ms = e.ts_ms;
  // Payload keys are stored sorted, the order a JSON round-trip yields, so
  // live and replayed states serialize identically.
  Event stored = e;
  stored.payload = nlohmann::ordered_json::parse(nlohmann::json(e.payload).dump());
  s.event_log.push_back(std::move(stored));
}

SessionState replay_session(const std::vector<Event>& events) {
  SessionState s;
  for (const auto& e : events) apply(s, e);
  return s;
}

// -- live operations ---------------------------------------------------------

namespace {

Event make_event(const SessionState& s, std::int64_t now, std::string kind, nlohmann::ordered_json payload) {
  return Event{std::max(now, s.last_ms), s.session_id, std::move(kind), std::move(payload)};
}

/// Applies events to a copy so a failure leaves `state` untouched.
std::vector<Event> commit(SessionState& state, std::vector<Event> events) {
  SessionState next = state;
  for (const auto& e : events) apply(next, e);
  state = std::move(next);
  return events;
}

void require_step(const SessionState& s, Step step) {
  if (s.step != step) {
    throw PreconditionError(std::string("operation needs the ") + std::string(to_string(step)) + " step, session is at " +
                            std::string(to_string(s.step)));
  }
}

nlohmann::ordered_json step_payload(Step s) {
  nlohmann::ordered_json p;
  p["step"] = to_string(s);
  return p;
}

}  // namespace

std::vector<Event> start_session(SessionState& state, const StartRequest& req, const lexicon::VocabPool& pool,
                                 genclient::Backend* backend, std::int64_t now_ms,
                                 const genclient::ClientOptions& options) {
  if (!state.session_id.empty()) throw PreconditionError("session already started");
  if (req.session_id.empty()) throw PreconditionError("session id is empty");
  if (req.word_set.words.empty()) throw PreconditionError("word set is empty");
  for (const auto& w : req.word_set.words) {
    if (!pool.contains(w)) throw PreconditionError("word '" + w + "' is not in the vocabulary");
  }

  auto examples = [&] {
    std::vector<std::string> out;
    for (const auto& w : req.word_set.words) {
      const auto* entry = pool.find(w);
      if (entry->usage_example.empty()) throw PreconditionError("no example sentence for '" + w + "'");
      out.push_back(entry->usage_example);
    }
    return out;
  };

  std::vector<std::string> material;
  bool is_story = false;
  bool fallback = false;
  if (uses_story(req.mode)) {
    if (!backend) throw PreconditionError("story modes need a generation backend");
    try {
      material = genclient::generate_story(*backend, req.title, req.word_set.words, options).sentences;
      is_story = true;
    } catch (const BackendError&) {
      material = examples();
      fallback = true;
    }
  } else {
    material = examples();
  }

  nlohmann::ordered_json p;
  p["word_set"] = req.word_set.words;
  p["mode"] = to_string(req.mode);
  p["title"] = optional_string(req.title);
  p["material"] = material;
  p["material_is_story"] = is_story;
  p["generation_fallback"] = fallback;
  p["seed"] = req.seed;
  SessionState fresh;
  std::vector<Event> events{Event{now_ms, req.session_id, "session_created", std::move(p)},
                            Event{now_ms, req.session_id, "step_enter", step_payload(Step::read)}};
  for (const auto& e : events) apply(fresh, e);
  state = std::move(fresh);
  return events;
}

bool can_advance(const SessionState& s) {
  switch (s.step) {
    case Step::read:
      return true;
    case Step::cloze:
      return !s.cloze_attempts.empty();
    case Step::write:
      return s.finished_early || (s.writing && s.writing->unused.empty());
    case Step::done:
      return false;
  }
  return false;
}

std::vector<Event> advance(SessionState& state, std::int64_t now_ms) {
  if (state.step == Step::done) throw PreconditionError("session is already done");
  if (!can_advance(state)) {
    throw PreconditionError(state.step == Step::cloze ? "submit the cloze test before moving on"
                                                      : "use every target word or finish early before moving on");
  }
  const auto next = *successor(state.mode, state.step);
  return commit(state, {make_event(state, now_ms, "step_exit", step_payload(state.step)),
                        make_event(state, now_ms, "step_enter", step_payload(next))});
}

std::vector<Event> submit_cloze(SessionState& state, const std::map<std::size_t, std::string>& answers,
                                std::int64_t now_ms) {
  require_step(state, Step::cloze);
  check_cloze(*state.cloze, answers);
  nlohmann::ordered_json a = nlohmann::ordered_json::object();
  for (const auto& [k, v] : answers) a[std::to_string(k)] = v;
  nlohmann::ordered_json p;
  p["answers"] = std::move(a);
  return commit(state, {make_event(state, now_ms, "cloze_submit", std::move(p))});
}

namespace {

nlohmann::ordered_json turn_payload(Author author, const std::string& text, const std::vector<grammar::Alert>& alerts) {
  nlohmann::ordered_json p;
  p["author"] = to_string(author);
  p["text"] = text;
  p["alerts"] = alerts_json(alerts);
  return p;
}

}  // namespace

std::vector<Event> write_turn(SessionState& state, const std::string& text, grammar::Checker& checker,
                              std::int64_t now_ms) {
  require_step(state, Step::write);
  if (text::trim(text).empty()) throw PreconditionError("turn text is empty");
  const auto alerts = checker.check(text);
  return commit(state, {make_event(state, now_ms, "turn", turn_payload(Author::human, text, alerts))});
}

std::vector<Event> write_machine_turn(SessionState& state, genclient::Backend& backend, std::int64_t now_ms,
                                      const genclient::ClientOptions& options) {
  require_step(state, Step::write);
  require_machine_turn_allowed(*state.writing);
  auto gen = genclient::next_sentence(backend, state.writing->title, turn_texts(*state.writing), state.writing->unused,
                                      options);
  auto p = turn_payload(Author::machine, gen.sentences.front(), {});
  p["coverage_warning"] = gen.coverage_warning;
  return commit(state, {make_event(state, now_ms, "turn", std::move(p))});
}

std::vector<Event> suggest(SessionState& state, const std::string& prefix, genclient::Backend& backend,
                           std::int64_t now_ms, const genclient::ClientOptions& options) {
  require_step(state, Step::write);
  const auto s = inline_suggestion(*state.writing, prefix, backend, options);
  return commit(state, {make_event(state, now_ms, "suggestion_shown", to_json(s))});
}

std::vector<Event> accept_pending_suggestion(SessionState& state, std::int64_t now_ms) {
  require_step(state, Step::write);
  if (!state.pending_suggestion || state.pending_suggestion->error) throw PreconditionError("no suggestion to accept");
  return commit(state, {make_event(state, now_ms, "suggestion_accepted", nlohmann::ordered_json::object())});
}

std::vector<Event> reject_pending_suggestion(SessionState& state, std::int64_t now_ms) {
  require_step(state, Step::write);
  if (!state.pending_suggestion) throw PreconditionError("no suggestion to reject");
  return commit(state, {make_event(state, now_ms, "suggestion_rejected", nlohmann::ordered_json::object())});
}

std::vector<Event> finish_early(SessionState& state, std::int64_t now_ms) {
  require_step(state, Step::write);
  return commit(state, {make_event(state, now_ms, "finish_early", nlohmann::ordered_json::object())});
}

}  // namespace storyfier::session
