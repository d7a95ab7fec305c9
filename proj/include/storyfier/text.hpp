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
#include <string>
#include <string_view>
#include <vector>

namespace storyfier::text {

/// One token of a sentence: the stripped text and its byte offset.
struct Token {
  std::string_view text;
  std::size_t offset = 0;
};

/// Whitespace split, leading/trailing non-alphanumerics stripped, empty
/// pieces dropped. Views point into `s`. Non-ASCII bytes count as
/// alphanumeric so UTF-8 words survive intact.
std::vector<Token> tokenize(std::string_view s);

/// Lowercased token strings, the form used by every lexical metric.
std::vector<std::string> normalized_tokens(std::string_view s);

std::size_t token_count(std::string_view s);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// True when lowercase `token` is `headword` or one of its regular
/// inflections: +s, +es, +ed, +d, +ing, with final-consonant doubling
/// (stop -> stopped) and silent-e drop (make -> making) before -ed/-ing.
bool matches_headword(std::string_view token, std::string_view headword);

/// Headwords that `token` could be an inflection of under
/// matches_headword, exact form first. Callers intersect with a vocabulary.
std::vector<std::string> headword_candidates(std::string_view token);

/// Maximal vowel groups (a e i o u y), minus one for a trailing silent
/// "e" unless the word ends in "le"; never below 1.
int count_syllables(std::string_view word);

/// Number of sentences in free text: segments terminated by runs of
/// . ! ? that contain at least one token. Text without a terminator
/// counts as one sentence if it has tokens.
std::size_t count_sentences(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace storyfier::text
