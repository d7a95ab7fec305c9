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

#include <cstdio>
#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "storyfier/cli.hpp"
#include "storyfier/csv.hpp"
#include "storyfier/error.hpp"
#include "support.hpp"

using namespace storyfier;
using namespace storyfier::cli;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

/// Runs the built binary with `args`, capturing stdout.
RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(STORYFIER_CLI_PATH) + " " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

const std::string kVocab = testing::data_path("vocab_sample.ndjson");
const std::string kToy = testing::data_path("corpus_toy.csv");

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("exit codes by error kind") {
    CHECK(exit_code_for(IoError("x")) == kExitUsage);
    CHECK(exit_code_for(ParseError("x", 3)) == kExitUsage);
    CHECK(exit_code_for(PreconditionError("x")) == kExitDomain);
    CHECK(exit_code_for(std::runtime_error("x")) == kExitDomain);
    std::ostringstream err;
    CHECK(guarded(err, [] { throw IoError("gone"); }) == kExitUsage);
    CHECK(err.str().find("gone") != std::string::npos);
    CHECK(guarded(err, [] {}) == kExitOk);
    CHECK_THROWS_AS(format_from_string("xml"), PreconditionError);
  }

  TEST_CASE("stats json and table report the same numbers") {
    std::ostringstream js, tb;
    cmd_corpus_stats(kToy, kVocab, Format::json, js);
    cmd_corpus_stats(kToy, kVocab, Format::table, tb);
    const auto j = nlohmann::ordered_json::parse(js.str());
    CHECK(j["story_count"] == 4);
    std::istringstream lines(tb.str());
    std::string key, value;
    std::size_t rows = 0;
    while (lines >> key >> value) {
      CHECK(j.at(key).dump() == value);
      ++rows;
    }
    CHECK(rows == j.size());
  }

  TEST_CASE("export is deterministic for a seed") {
    testing::TempDir dir;
    ExportOptions o{kToy, kVocab, corpus::Task::infill, 5, 2, dir.file("a.ndjson")};
    std::ostringstream log;
    const auto n = cmd_export_training(o, log);
    CHECK(n > 0);
    o.out_path = dir.file("b.ndjson");
    CHECK(cmd_export_training(o, log) == n);
    CHECK(testing::read_file(dir.file("a.ndjson")) == testing::read_file(dir.file("b.ndjson")));

    ExportOptions g{kToy, kVocab, corpus::Task::generate, 0, 1, dir.file("g.ndjson")};
    std::ostringstream glog;
    CHECK(cmd_export_training(g, glog) == 3);
    CHECK(glog.str().find("skipped 1") != std::string::npos);
    std::istringstream lines(testing::read_file(dir.file("g.ndjson")));
    std::string line;
    while (std::getline(lines, line)) {
      const auto j = nlohmann::json::parse(line);
      CHECK(j.contains("input"));
      CHECK(j.contains("target"));
    }
    g.per_sentence = 0;
    CHECK_THROWS_AS(cmd_export_training(g, glog), PreconditionError);
  }

  TEST_CASE("eval prints both sources") {
    EvalOptions o;
    o.stories_a = testing::data_path("eval/handwritten.csv");
    o.stories_b = testing::data_path("eval/template.csv");
    o.name_a = "handwritten";
    o.name_b = "template";
    o.ratings_path = testing::data_path("eval/ratings_sample.csv");
    o.format = Format::json;
    std::ostringstream out;
    cmd_eval(o, out);
    const auto j = nlohmann::json::parse(out.str());
    CHECK(j["sources"][0]["grammar"] == 1.0);
    CHECK(j["sources"][1]["grammar"] == 1.0);
  }

  TEST_CASE("simulate writes one row per participant and condition") {
    std::ostringstream empty;
    cmd_simulate_study(kVocab, 0, 1, empty);
    CHECK(empty.str().find('\n') == empty.str().size() - 1);

    std::ostringstream out;
    cmd_simulate_study(kVocab, 4, 1, out);
    std::istringstream in(out.str());
    csv::Reader reader(in);
    std::size_t records = 0;
    while (auto r = reader.next()) {
      CHECK(r->fields.size() == 10);
      ++records;
    }
    CHECK(records == 17);
    std::ostringstream again;
    cmd_simulate_study(kVocab, 4, 1, again);
    CHECK(again.str() == out.str());
  }

  TEST_CASE("binary exit codes") {
    CHECK(run_cli("stats --corpus " + kToy + " --vocab " + kVocab).code == 0);
    CHECK(run_cli("stats --corpus /nonexistent.csv --vocab " + kVocab).code == 2);
    CHECK(run_cli("stats --corpus " + kToy).code == 2);
    CHECK(run_cli("frobnicate").code == 2);
    CHECK(run_cli("export --corpus " + kToy + " --vocab " + kVocab + " --out /nonexistent-dir/x.ndjson").code == 2);
    const auto sim = run_cli("simulate --vocab " + kVocab + " -n 2 --seed 3");
    CHECK(sim.code == 0);
    CHECK(std::count(sim.out.begin(), sim.out.end(), '\n') == 9);
    CHECK(run_cli("serve --vocab " + kVocab + " --data-dir /tmp/storyfier-cli-test").code == 1);
  }
}
