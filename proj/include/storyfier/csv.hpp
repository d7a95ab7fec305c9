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
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace storyfier::csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line where the record starts
};

/// Incremental RFC-4180 reader (quoted fields, doubled quotes, embedded
/// newlines, CRLF or LF line ends).
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at end of input. Throws ParseError on an
  /// unterminated quoted field.
  std::optional<Record> next();

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

/// Quote a field only when it needs it.
std::string escape(std::string_view field);

std::string format_row(const std::vector<std::string>& fields);

/// Reads a header row and checks it against `expected` (exact, in order).
/// Throws ParseError naming the first mismatch.
void expect_header(Reader& reader, const std::vector<std::string>& expected);

}  // namespace storyfier::csv
