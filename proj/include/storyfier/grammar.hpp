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
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace storyfier::grammar {

struct Alert {
  std::string message;
  std::size_t offset = 0;
  std::size_t length = 0;
  std::string rule_id;

  bool operator==(const Alert&) const = default;
};

nlohmann::json to_json(const Alert& a);
Alert alert_from_json(const nlohmann::json& j);

/// Grammar checking service. `check` throws BackendError when the service
/// is unreachable.
class Checker {
 public:
  virtual ~Checker() = default;
  virtual std::vector<Alert> check(std::string_view text) = 0;
  virtual std::string describe() const = 0;
};

/// Reports no problems. Used for offline runs.
class NullChecker : public Checker {
 public:
  std::vector<Alert> check(std::string_view) override { return {}; }
  std::string describe() const override { return "none"; }
};

/// Client for LanguageTool's HTTP API (POST /v2/check).
class LanguageToolClient : public Checker {
 public:
  explicit LanguageToolClient(std::string base_url, std::string language = "en-US",
                              std::chrono::milliseconds timeout = std::chrono::seconds(30));
  std::vector<Alert> check(std::string_view text) override;
  std::string describe() const override { return base_url_; }

  /// Parses a /v2/check response body.
  static std::vector<Alert> parse_matches(const nlohmann::json& body);

 private:
  std::string base_url_;
  std::string language_;
  std::chrono::milliseconds timeout_;
};

}  // namespace storyfier::grammar
