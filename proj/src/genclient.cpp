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

#include "storyfier/genclient.hpp"

#include <algorithm>
#include <array>

#include "storyfier/error.hpp"
#include "storyfier/http.hpp"
#include "storyfier/text.hpp"

namespace storyfier::genclient {

void GenerationRequest::validate(std::size_t max_words) const {
  switch (mode) {
    case Mode::full_story:
      if (words.empty()) throw PreconditionError("full story generation needs at least one word");
      if (words.size() > max_words) {
        throw PreconditionError("at most " + std::to_string(max_words) + " words per story, got " +
                                std::to_string(words.size()));
      }
      break;
    case Mode::next_sentence:
      if (words.empty()) throw PreconditionError("next sentence needs at least one unused word");
      break;
    case Mode::infill:
      break;
  }
}

namespace {

nlohmann::json optional_title(const std::optional<std::string>& t) {
  return t ? nlohmann::json(*t) : nlohmann::json(nullptr);
}

std::optional<std::string> read_title(const nlohmann::json& j) {
  auto it = j.find("title");
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw PreconditionError("'title' must be a string or null");
  return it->get<std::string>();
}

std::vector<std::string> read_strings(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) return {};
  if (!it->is_array()) throw PreconditionError(std::string("'") + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) throw PreconditionError(std::string("'") + key + "' must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

nlohmann::json to_json(const StoryCall& c) {
  return nlohmann::json{{"title", optional_title(c.title)}, {"words", c.words}};
}

nlohmann::json to_json(const InfillCall& c) {
  return nlohmann::json{{"title", optional_title(c.title)},
                        {"preceding", c.preceding},
                        {"following", c.following},
                        {"unused_words", c.unused_words},
                        {"prefix", c.prefix}};
}

StoryCall story_call_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw PreconditionError("request body must be a JSON object");
  return {read_title(j), read_strings(j, "words")};
}

InfillCall infill_call_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw PreconditionError("request body must be a JSON object");
  InfillCall c{read_title(j), read_strings(j, "preceding"), read_strings(j, "following"),
               read_strings(j, "unused_words"), ""};
  if (auto it = j.find("prefix"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw PreconditionError("'prefix' must be a string");
    c.prefix = it->get<std::string>();
  }
  return c;
}

// -- template backend ------------------------------------------------------

namespace {

constexpr std::array<std::string_view, 6> kSubjects = {"Tom", "Anna", "The teacher", "My friend", "The old man", "Lily"};
constexpr std::array<std::string_view, 7> kVerbs = {"saw",          "liked",   "found",  "talked about",
                                                    "remembered",   "wanted",  "asked about"};

bool text_uses(const std::string& s, const std::string& word) {
  for (const auto& tok : text::normalized_tokens(s)) {
    if (text::matches_headword(tok, word)) return true;
  }
  return false;
}

}  // namespace

std::string TemplateBackend::sentence_for(std::size_t index, const std::string& word) {
  std::string s(kSubjects[index % kSubjects.size()]);
  s += ' ';
  s += kVerbs[index % kVerbs.size()];
  s += " the ";
  s += word;
  s += '.';
  return s;
}

std::vector<std::string> TemplateBackend::generate(const StoryCall& call) {
  std::vector<std::string> out;
  out.reserve(call.words.size());
  for (std::size_t i = 0; i < call.words.size(); ++i) out.push_back(sentence_for(i, call.words[i]));
  return out;
}

std::string TemplateBackend::infill(const InfillCall& call) {
  const std::string* pick = nullptr;
  for (const auto& w : call.unused_words) {
    if (!text_uses(call.prefix, w)) {
      pick = &w;
      break;
    }
  }
  if (text::trim(call.prefix).empty()) {
    if (!pick) return "The story went on.";
    return sentence_for(call.preceding.size(), *pick);
  }
  if (!pick) return ".";
  const bool needs_space = !call.prefix.empty() && call.prefix.back() != ' ';
  return (needs_space ? " " : "") + *pick + ".";
}

// -- HTTP backend ----------------------------------------------------------

HttpBackend::HttpBackend(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
  http::parse_url(base_url_);
}

nlohmann::json HttpBackend::post(const std::string& path, const nlohmann::json& body) const {
  http::Response res;
  try {
    res = http::post(base_url_, path, body.dump(), "application/json", timeout_);
  } catch (const BackendError&) {
    res = http::post(base_url_, path, body.dump(), "application/json", timeout_);
  }
  if (res.status != 200) throw BackendError(path + " returned HTTP " + std::to_string(res.status));
  try {
    return nlohmann::json::parse(res.body);
  } catch (const nlohmann::json::parse_error&) {
    throw BackendError(path + " returned a body that is not JSON");
  }
}

std::vector<std::string> HttpBackend::generate(const StoryCall& call) {
  const auto j = post("/v1/generate", to_json(call));
  auto it = j.find("sentences");
  if (!j.is_object() || it == j.end() || !it->is_array()) throw BackendError("/v1/generate response lacks 'sentences'");
  std::vector<std::string> out;
  for (const auto& s : *it) {
    if (!s.is_string()) throw BackendError("/v1/generate 'sentences' must hold strings");
    out.push_back(s.get<std::string>());
  }
  if (out.empty()) throw BackendError("/v1/generate returned no sentences");
  return out;
}

std::string HttpBackend::infill(const InfillCall& call) {
  const auto j = post("/v1/infill", to_json(call));
  auto it = j.find("text");
  if (!j.is_object() || it == j.end() || !it->is_string()) throw BackendError("/v1/infill response lacks 'text'");
  return it->get<std::string>();
}

bool HttpBackend::reachable() const {
  try {
    http::get(base_url_, "/", std::chrono::milliseconds(1000));
    return true;
  } catch (const BackendError&) {
    return false;
  }
}

// -- client policy ---------------------------------------------------------

std::vector<std::string> covered_words(const std::vector<std::string>& sentences,
                                       const std::vector<std::string>& words) {
  std::vector<std::string> tokens;
  for (const auto& s : sentences) {
    auto t = text::normalized_tokens(s);
    tokens.insert(tokens.end(), t.begin(), t.end());
  }
  std::vector<std::string> out;
  for (const auto& w : words) {
    const bool hit = std::any_of(tokens.begin(), tokens.end(), [&](const auto& t) { return text::matches_headword(t, w); });
    if (hit && std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
  }
  return out;
}

namespace {

/// Calls `attempt` until `wanted` words are covered or the budget is spent;
/// keeps the first result with the highest coverage.
template <typename Attempt>
GeneratedText with_retries(std::size_t max_retries, std::size_t wanted, Attempt attempt) {
  GeneratedText best;
  bool have = false;
  const std::size_t budget = std::max<std::size_t>(max_retries, 1);
  for (std::size_t i = 1; i <= budget; ++i) {
    auto r = attempt();
    r.attempts = i;
    if (!have || r.covered_words.size() > best.covered_words.size()) {
      best = std::move(r);
      have = true;
    }
    best.attempts = i;
    if (best.covered_words.size() >= wanted) break;
  }
  best.coverage_warning = best.covered_words.size() < wanted;
  return best;
}

}  // namespace

GeneratedText generate_story(Backend& backend, const std::optional<std::string>& title,
                             const std::vector<std::string>& words, const ClientOptions& options) {
  GenerationRequest{title, words, Mode::full_story, {}, {}, {}}.validate(options.max_words);
  return with_retries(options.max_retries, words.size(), [&] {
    GeneratedText r;
    r.sentences = backend.generate({title, words});
    if (r.sentences.empty()) throw BackendError("backend returned an empty story");
    r.covered_words = covered_words(r.sentences, words);
    return r;
  });
}

GeneratedText next_sentence(Backend& backend, const std::optional<std::string>& title,
                            const std::vector<std::string>& prior, const std::vector<std::string>& unused,
                            const ClientOptions& options) {
  GenerationRequest{title, unused, Mode::next_sentence, prior, {}, {}}.validate(options.max_words);
  return with_retries(options.max_retries, 1, [&] {
    GeneratedText r;
    auto s = text::trim(backend.infill({title, prior, {}, unused, ""}));
    if (s.empty()) throw BackendError("backend returned an empty sentence");
    r.sentences = {std::move(s)};
    r.covered_words = covered_words(r.sentences, unused);
    return r;
  });
}

GeneratedText infill(Backend& backend, const std::vector<std::string>& preceding,
                     const std::vector<std::string>& following, const std::vector<std::string>& unused,
                     const std::optional<std::string>& title, const std::string& prefix,
                     const ClientOptions& options) {
  // Only words the prefix has not already used can count as new coverage.
  std::vector<std::string> open;
  for (const auto& w : unused) {
    if (!text_uses(prefix, w)) open.push_back(w);
  }
  // Nothing left to cover: a single call, flagged as zero new coverage.
  const std::size_t budget = open.empty() ? 1 : options.max_retries;
  return with_retries(budget, 1, [&] {
    GeneratedText r;
    r.sentences = {backend.infill({title, preceding, following, unused, prefix})};
    r.covered_words = covered_words({prefix + r.sentences.front()}, open);
    return r;
  });
}

GeneratedText run(Backend& backend, const GenerationRequest& request, const ClientOptions& options) {
  request.validate(options.max_words);
  switch (request.mode) {
    case Mode::full_story:
      return generate_story(backend, request.title, request.words, options);
    case Mode::next_sentence:
      return next_sentence(backend, request.title, request.preceding, request.words, options);
    case Mode::infill:
      return infill(backend, request.preceding, request.following, request.words, request.title, request.prefix,
                    options);
  }
  throw PreconditionError("unknown generation mode");
}

std::unique_ptr<Backend> make_backend(const std::string& url_or_template) {
  if (url_or_template.empty() || url_or_template == "template") return std::make_unique<TemplateBackend>();
  return std::make_unique<HttpBackend>(url_or_template);
}

}  // namespace storyfier::genclient
