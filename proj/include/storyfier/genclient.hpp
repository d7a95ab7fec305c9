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

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace storyfier::genclient {

enum class Mode { full_story, next_sentence, infill };

struct GenerationRequest {
  std::optional<std::string> title;
  std::vector<std::string> words;  // headwords to cover (unused words for next_sentence/infill)
  Mode mode = Mode::full_story;
  std::vector<std::string> preceding;
  std::vector<std::string> following;
  std::string prefix;  // infill only

  /// Throws PreconditionError when the request violates its mode's contract.
  void validate(std::size_t max_words) const;
};

/// Body of POST /v1/generate.
struct StoryCall {
  std::optional<std::string> title;
  std::vector<std::string> words;
};

/// Body of POST /v1/infill.
struct InfillCall {
  std::optional<std::string> title;
  std::vector<std::string> preceding;
  std::vector<std::string> following;
  std::vector<std::string> unused_words;
  std::string prefix;
};

nlohmann::json to_json(const StoryCall& c);
nlohmann::json to_json(const InfillCall& c);
StoryCall story_call_from_json(const nlohmann::json& j);
InfillCall infill_call_from_json(const nlohmann::json& j);

/// One generation service. Both calls throw BackendError on failure.
/// Implementations must support concurrent independent calls.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::vector<std::string> generate(const StoryCall& call) = 0;
  /// Returns the span that completes `call.prefix`, without the prefix.
  virtual std::string infill(const InfillCall& call) = 0;
  /// Short status string for health reports.
  virtual std::string describe() const = 0;
};

/// Deterministic offline backend. Each word yields
/// "<Subject i> <verb i> the <word>." with subject and verb taken
/// cyclically from fixed lists.
class TemplateBackend : public Backend {
 public:
  std::vector<std::string> generate(const StoryCall& call) override;
  std::string infill(const InfillCall& call) override;
  std::string describe() const override { return "template"; }

  static std::string sentence_for(std::size_t index, const std::string& word);
};

/// Client for a remote service speaking the /v1/generate and /v1/infill
/// JSON protocol. A transport failure is retried once.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(std::string base_url, std::chrono::milliseconds timeout = std::chrono::seconds(30));
  std::vector<std::string> generate(const StoryCall& call) override;
  std::string infill(const InfillCall& call) override;
  std::string describe() const override { return base_url_; }

  /// True when the base URL accepts a TCP connection.
  bool reachable() const;

 private:
  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;

  std::string base_url_;
  std::chrono::milliseconds timeout_;
};

struct GeneratedText {
  std::vector<std::string> sentences;
  std::vector<std::string> covered_words;  // requested words found in the output, request order
  std::size_t attempts = 1;
  bool coverage_warning = false;
};

struct ClientOptions {
  std::size_t max_words = 10;
  std::size_t max_retries = 3;
};

/// Requested words found in `sentences` under the corpus matching rule.
std::vector<std::string> covered_words(const std::vector<std::string>& sentences,
                                       const std::vector<std::string>& words);

/// Full story covering `words`. Retries up to max_retries attempts while
/// coverage is incomplete, then returns the best attempt flagged.
GeneratedText generate_story(Backend& backend, const std::optional<std::string>& title,
                             const std::vector<std::string>& words, const ClientOptions& options = {});

/// One sentence continuing `prior` that should use at least one unused word.
GeneratedText next_sentence(Backend& backend, const std::optional<std::string>& title,
                            const std::vector<std::string>& prior, const std::vector<std::string>& unused,
                            const ClientOptions& options = {});

/// Span completing `prefix`. covered_words lists unused words newly
/// introduced by the span (words already in the prefix do not count).
GeneratedText infill(Backend& backend, const std::vector<std::string>& preceding,
                     const std::vector<std::string>& following, const std::vector<std::string>& unused,
                     const std::optional<std::string>& title, const std::string& prefix,
                     const ClientOptions& options = {});

/// Dispatch on request.mode.
GeneratedText run(Backend& backend, const GenerationRequest& request, const ClientOptions& options = {});

std::unique_ptr<Backend> make_backend(const std::string& url_or_template);

}  // namespace storyfier::genclient
