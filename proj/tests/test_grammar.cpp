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

#include <doctest.h>

#include <json.hpp>

#include "http_stub.hpp"
#include "storyfier/grammar.hpp"

using namespace storyfier;

TEST_SUITE("grammar") {
  TEST_CASE("parse_matches reads LanguageTool matches") {
    const auto body = nlohmann::json::parse(R"({"matches":[
      {"message":"Possible typo","offset":4,"length":3,"rule":{"id":"MORFOLOGIK_RULE_EN_US"}},
      {"message":"Use 'an'","offset":0,"length":1}]})");
    const auto alerts = grammar::LanguageToolClient::parse_matches(body);
    REQUIRE(alerts.size() == 2);
    CHECK(alerts[0].message == "Possible typo");
    CHECK(alerts[0].offset == 4);
    CHECK(alerts[0].length == 3);
    CHECK(alerts[0].rule_id == "MORFOLOGIK_RULE_EN_US");
    CHECK(alerts[1].rule_id.empty());
    CHECK_THROWS_AS(grammar::LanguageToolClient::parse_matches(nlohmann::json::object()), BackendError);
  }

  TEST_CASE("alert JSON round-trip") {
    const grammar::Alert a{"msg", 2, 5, "R1"};
    CHECK(grammar::alert_from_json(grammar::to_json(a)) == a);
  }

  TEST_CASE("null checker reports nothing") {
    grammar::NullChecker c;
    CHECK(c.check("me and him goes there").empty());
  }

  TEST_CASE("client posts a form body to /v2/check") {
    testing::StubServer stub;
    std::string language, text;
    stub.server().Post("/v2/check", [&](const httplib::Request& req, httplib::Response& res) {
      language = req.get_param_value("language");
      text = req.get_param_value("text");
      nlohmann::json out{{"matches", nlohmann::json::array()}};
      if (text.find("a apple") != std::string::npos) {
        out["matches"].push_back({{"message", "Use 'an'"}, {"offset", text.find("a apple")}, {"length", 1},
                                  {"rule", {{"id", "EN_A_VS_AN"}}}});
      }
      res.set_content(out.dump(), "application/json");
    });
    stub.start();
    grammar::LanguageToolClient client(stub.url());
    CHECK(client.check("All good & fine = yes.").empty());
    CHECK(text == "All good & fine = yes.");
    CHECK(language == "en-US");
    const auto alerts = client.check("I ate a apple.");
    REQUIRE(alerts.size() == 1);
    CHECK(alerts[0].rule_id == "EN_A_VS_AN");
    CHECK(alerts[0].offset == 6);
  }

  TEST_CASE("client errors become BackendError") {
    testing::StubServer stub;
    stub.server().Post("/v2/check", [](const httplib::Request&, httplib::Response& res) {
      res.status = 503;
    });
    stub.start();
    grammar::LanguageToolClient client(stub.url());
    CHECK_THROWS_AS(client.check("x"), BackendError);
    const auto url = stub.url();
    stub.stop();
    grammar::LanguageToolClient dead(url, "en-US", std::chrono::milliseconds(300));
    CHECK_THROWS_AS(dead.check("x"), BackendError);
  }
}
