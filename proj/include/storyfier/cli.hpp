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
#include <exception>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "storyfier/corpus.hpp"

namespace storyfier::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;  // bad flags, unreadable or malformed input files

enum class Format { json, table };
Format format_from_string(std::string_view s);

/// 2 for IoError and ParseError, 1 for every other error.
int exit_code_for(const std::exception& e);

/// Runs `fn`, reporting any exception on `err`; returns the exit code.
int guarded(std::ostream& err, const std::function<void()>& fn);

void cmd_corpus_stats(const std::string& corpus_path, const std::string& vocab_path, Format format, std::ostream& out);

struct ExportOptions {
  std::string corpus_path;
  std::string vocab_path;
  corpus::Task task = corpus::Task::generate;
  std::uint64_t seed = 0;
  std::size_t per_sentence = 1;
  std::string out_path;
};

/// Writes training examples as NDJSON and returns how many. Stories with
/// no vocabulary word are skipped for the generate task and counted on `log`.
std::size_t cmd_export_training(const ExportOptions& options, std::ostream& log);

struct EvalOptions {
  std::string stories_a;
  std::string stories_b;
  std::string name_a = "a";
  std::string name_b = "b";
  std::string embeddings_path;  // empty: hashing embedder
  std::string grammar_url;      // empty: no-error checker
  std::string ratings_path;     // optional human ratings CSV
  Format format = Format::table;
};

void cmd_eval(const EvalOptions& options, std::ostream& out);

/// Simulated study outcomes as CSV.
void cmd_simulate_study(const std::string& vocab_path, std::size_t participants, std::uint64_t seed,
                        std::ostream& out);

}  // namespace storyfier::cli
