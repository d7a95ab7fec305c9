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

#include "storyfier/csv.hpp"

#include "storyfier/error.hpp"
#include "storyfier/text.hpp"

namespace storyfier::csv {

std::optional<Record> Reader::next() {
  Record rec;
  rec.line = line_;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  bool field_quoted = false;
  int c;
  while ((c = in_.get()) != std::char_traits<char>::eof()) {
    any = true;
    const char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line_;
        field += ch;
      }
      continue;
    }
    if (ch == '"' && field.empty() && !field_quoted) {
      in_quotes = true;
      field_quoted = true;
    } else if (ch == ',') {
      rec.fields.push_back(std::move(field));
      field.clear();
      field_quoted = false;
    } else if (ch == '\r' && in_.peek() == '\n') {
      continue;
    } else if (ch == '\n') {
      ++line_;
      rec.fields.push_back(std::move(field));
      return rec;
    } else {
      field += ch;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", rec.line);
  if (!any) return std::nullopt;
  rec.fields.push_back(std::move(field));
  return rec;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += escape(fields[i]);
  }
  return out;
}

void expect_header(Reader& reader, const std::vector<std::string>& expected) {
  auto header = reader.next();
  if (!header) throw ParseError("missing header row", 1);
  if (header->fields.size() != expected.size()) {
    throw ParseError("header has " + std::to_string(header->fields.size()) + " columns, expected " +
                         std::to_string(expected.size()),
                     header->line);
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (text::to_lower(text::trim(header->fields[i])) != expected[i]) {
      throw ParseError("unexpected header column '" + header->fields[i] + "', expected '" + expected[i] + "'",
                       header->line);
    }
  }
}

}  // namespace storyfier::csv
