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

#include "storyfier/grammar.hpp"

#include "storyfier/error.hpp"
#include "storyfier/http.hpp"

namespace storyfier::grammar {

nlohmann::json to_json(const Alert& a) {
  return nlohmann::json{{"message", a.message}, {"offset", a.offset}, {"length", a.length}, {"rule", a.rule_id}};
}

Alert alert_from_json(const nlohmann::json& j) {
  return {j.at("message").get<std::string>(), j.at("offset").get<std::size_t>(), j.at("length").get<std::size_t>(),
          j.value("rule", std::string())};
}

LanguageToolClient::LanguageToolClient(std::string base_url, std::string language, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), language_(std::move(language)), timeout_(timeout) {
  http::parse_url(base_url_);
}

std::vector<Alert> LanguageToolClient::parse_matches(const nlohmann::json& body) {
  auto it = body.find("matches");
  if (!body.is_object() || it == body.end() || !it->is_array()) throw BackendError("grammar response lacks 'matches'");
  std::vector<Alert> out;
  for (const auto& m : *it) {
    Alert a;
    a.message = m.value("message", std::string());
    a.offset = m.value("offset", std::size_t{0});
    a.length = m.value("length", std::size_t{0});
    if (auto r = m.find("rule"); r != m.end() && r->is_object()) a.rule_id = r->value("id", std::string());
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<Alert> LanguageToolClient::check(std::string_view text) {
  const std::string body =
      "language=" + http::form_encode(language_) + "&text=" + http::form_encode(std::string(text));
  const auto res = http::post(base_url_, "/v2/check", body, "application/x-www-form-urlencoded", timeout_);
  if (res.status != 200) throw BackendError("grammar check returned HTTP " + std::to_string(res.status));
  try {
    return parse_matches(nlohmann::json::parse(res.body));
  } catch (const nlohmann::json::exception&) {
    throw BackendError("grammar check returned malformed JSON");
  }
}

}  // namespace storyfier::grammar
