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

#include <atomic>

#include <json.hpp>

#include "http_stub.hpp"
#include "storyfier/error.hpp"
#include "storyfier/genclient.hpp"

using namespace storyfier;
using genclient::TemplateBackend;
using testing::ScriptedBackend;

TEST_SUITE("genclient") {
  TEST_CASE("template backend writes one sentence per word") {
    TemplateBackend t;
    const auto s = t.generate({"Race", {"athlete", "avid"}});
    CHECK(s == std::vector<std::string>{"Tom saw the athlete.", "Anna liked the avid."});
    CHECK(genclient::covered_words(s, {"athlete", "avid", "zebra"}) == std::vector<std::string>{"athlete", "avid"});
  }

  TEST_CASE("template infill completes a prefix with an unused word") {
    TemplateBackend t;
    CHECK(t.infill({std::nullopt, {"A."}, {}, {"trolley"}, "He picked up the"}) == " trolley.");
    CHECK(t.infill({std::nullopt, {"A."}, {}, {"trolley"}, "He picked up the "}) == "trolley.");
    CHECK(t.infill({std::nullopt, {"A."}, {}, {"trolley"}, ""}) == "Anna liked the trolley.");
    CHECK(t.infill({std::nullopt, {}, {}, {}, ""}) == "The story went on.");
    CHECK(t.infill({std::nullopt, {}, {}, {"cat"}, "The cat"}) == ".");
  }

  TEST_CASE("request validation") {
    genclient::GenerationRequest r;
    CHECK_THROWS_AS(r.validate(10), PreconditionError);
    r.words = std::vector<std::string>(11, "w");
    CHECK_THROWS_AS(r.validate(10), PreconditionError);
    r.words.resize(10);
    CHECK_NOTHROW(r.validate(10));
    r.mode = genclient::Mode::next_sentence;
    r.words.clear();
    CHECK_THROWS_AS(r.validate(10), PreconditionError);
  }

  TEST_CASE("generate_story retries until every word is covered") {
    ScriptedBackend b;
    b.stories = {std::vector<std::string>{"A cat."}, std::vector<std::string>{"A cat and a dog."}};
    const auto r = genclient::generate_story(b, "T", {"cat", "dog"});
    CHECK(r.attempts == 2);
    CHECK_FALSE(r.coverage_warning);
    CHECK(r.sentences == std::vector<std::string>{"A cat and a dog."});
    CHECK(b.story_calls.size() == 2);
  }

  TEST_CASE("generate_story keeps the first best attempt and flags partial coverage") {
    ScriptedBackend b;
    b.stories = {std::vector<std::string>{"A cat."}, std::vector<std::string>{"A dog."},
                 std::vector<std::string>{"Nothing."}};
    const auto r = genclient::generate_story(b, std::nullopt, {"cat", "dog"}, {10, 3});
    CHECK(r.attempts == 3);
    CHECK(r.coverage_warning);
    CHECK(r.sentences == std::vector<std::string>{"A cat."});
    CHECK(r.covered_words == std::vector<std::string>{"cat"});
  }

  TEST_CASE("backend failures propagate as BackendError") {
    ScriptedBackend b;
    b.stories = {std::nullopt};
    CHECK_THROWS_AS(genclient::generate_story(b, std::nullopt, {"cat"}), BackendError);
  }

  TEST_CASE("infill counts only words the prefix does not already use") {
    ScriptedBackend b;
    b.spans = {std::string(" dog.")};
    const auto r = genclient::infill(b, {}, {}, {"cat", "dog"}, std::nullopt, "The cat saw a");
    CHECK(r.covered_words == std::vector<std::string>{"dog"});
    CHECK_FALSE(r.coverage_warning);

    ScriptedBackend none;
    none.spans = {std::string(" ran."), std::string(" again.")};
    const auto only = genclient::infill(none, {}, {}, {"cat"}, std::nullopt, "The cat");
    CHECK(only.attempts == 1);
    CHECK(only.coverage_warning);
    CHECK(none.infill_calls.size() == 1);
  }

  TEST_CASE("next_sentence goes through the infill endpoint with an empty prefix") {
    ScriptedBackend b;
    b.spans = {std::string("  Then nothing happened.  "), std::string("Then the dog barked.")};
    const auto r = genclient::next_sentence(b, "T", {"A cat sat."}, {"dog"});
    CHECK(r.sentences == std::vector<std::string>{"Then the dog barked."});
    CHECK(r.attempts == 2);
    REQUIRE(b.infill_calls.size() == 2);
    CHECK(b.infill_calls[0].prefix.empty());
    CHECK(b.infill_calls[0].preceding == std::vector<std::string>{"A cat sat."});
  }

  TEST_CASE("wire bodies round-trip through JSON") {
    genclient::InfillCall c{"T", {"a"}, {"b"}, {"w"}, "pre"};
    const auto back = genclient::infill_call_from_json(genclient::to_json(c));
    CHECK(back.title == c.title);
    CHECK(back.preceding == c.preceding);
    CHECK(back.following == c.following);
    CHECK(back.unused_words == c.unused_words);
    CHECK(back.prefix == c.prefix);
    const auto s = genclient::story_call_from_json(genclient::to_json(genclient::StoryCall{std::nullopt, {"x"}}));
    CHECK_FALSE(s.title);
    CHECK(s.words == std::vector<std::string>{"x"});
  }

  TEST_CASE("http backend speaks the generate and infill protocol") {
    testing::StubServer stub;
    stub.server().Post("/v1/generate", [](const httplib::Request& req, httplib::Response& res) {
      const auto call = genclient::story_call_from_json(nlohmann::json::parse(req.body));
      nlohmann::json out;
      for (const auto& w : call.words) out["sentences"].push_back("I like the " + w + ".");
      res.set_content(out.dump(), "application/json");
    });
    stub.server().Post("/v1/infill", [](const httplib::Request& req, httplib::Response& res) {
      const auto call = genclient::infill_call_from_json(nlohmann::json::parse(req.body));
      res.set_content(nlohmann::json{{"text", " " + call.unused_words.at(0) + "."}}.dump(), "application/json");
    });
    stub.start();
    genclient::HttpBackend b(stub.url());
    CHECK(b.reachable());
    const auto story = genclient::generate_story(b, "T", {"cat", "dog"});
    CHECK(story.sentences == std::vector<std::string>{"I like the cat.", "I like the dog."});
    CHECK(b.infill({std::nullopt, {}, {}, {"dog"}, "A"}) == " dog.");
  }

  TEST_CASE("http backend reports bad status, bad schema and dead servers") {
    testing::StubServer stub;
    stub.server().Post("/v1/generate", [](const httplib::Request&, httplib::Response& res) {
      res.status = 500;
      res.set_content("oops", "text/plain");
    });
    stub.server().Post("/v1/infill", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"wrong":1})", "application/json");
    });
    stub.start();
    genclient::HttpBackend b(stub.url());
    CHECK_THROWS_AS(b.generate({std::nullopt, {"cat"}}), BackendError);
    CHECK_THROWS_AS(b.infill({std::nullopt, {}, {}, {"cat"}, ""}), BackendError);
    const auto dead_url = stub.url();
    stub.stop();
    genclient::HttpBackend dead(dead_url, std::chrono::milliseconds(300));
    CHECK_FALSE(dead.reachable());
    CHECK_THROWS_AS(dead.generate({std::nullopt, {"cat"}}), BackendError);
  }

  TEST_CASE("http backend retries one transport failure") {
    testing::StubServer stub;
    std::atomic<int> calls{0};
    stub.server().Post("/v1/infill", [&](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"text":"ok."})", "application/json");
      ++calls;
    });
    stub.start();
    genclient::HttpBackend b(stub.url());
    CHECK(b.infill({std::nullopt, {}, {}, {}, ""}) == "ok.");
    CHECK(calls == 1);
  }

  TEST_CASE("make_backend picks the template for the keyword") {
    CHECK(genclient::make_backend("template")->describe() == "template");
    CHECK(genclient::make_backend("http://127.0.0.1:9")->describe() == "http://127.0.0.1:9");
  }
}
