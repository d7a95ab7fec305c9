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

#include "storyfier/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace storyfier::text {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) != 0;
}

bool is_vowel(char c) {
  switch (c) {
    case 'a': case 'e': case 'i': case 'o': case 'u': case 'y':
      return true;
    default:
      return false;
  }
}

bool doubles(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) != 0 && !is_vowel(c) && c != 'w' && c != 'x';
}

constexpr std::array<std::string_view, 5> kSuffixes = {"s", "es", "ed", "d", "ing"};
constexpr std::array<std::string_view, 2> kStemChangingSuffixes = {"ed", "ing"};

}  // namespace

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t end = i;
    while (end < s.size() && !is_space(s[end])) ++end;
    std::size_t b = i;
    std::size_t e = end;
    while (b < e && !is_word_char(s[b])) ++b;
    while (e > b && !is_word_char(s[e - 1])) --e;
    if (e > b) out.push_back({s.substr(b, e - b), b});
    i = end;
  }
  return out;
}

std::vector<std::string> normalized_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& t : tokenize(s)) out.push_back(to_lower(t.text));
  return out;
}

std::size_t token_count(std::string_view s) { return tokenize(s).size(); }

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

bool matches_headword(std::string_view token, std::string_view headword) {
  if (headword.empty()) return false;
  if (token == headword) return true;
  if (token.size() <= headword.size() || token.substr(0, headword.size()) != headword) {
    // Silent-e drop is the only rule where the token does not start with
    // the full headword.
    if (headword.size() >= 2 && headword.back() == 'e') {
      const auto stem = headword.substr(0, headword.size() - 1);
      for (auto suf : kStemChangingSuffixes) {
        if (token.size() == stem.size() + suf.size() && token.substr(0, stem.size()) == stem &&
            token.substr(stem.size()) == suf) {
          return true;
        }
      }
    }
    return false;
  }
  const auto rest = token.substr(headword.size());
  for (auto suf : kSuffixes) {
    if (rest == suf) return true;
  }
  const char last = headword.back();
  if (doubles(last) && rest.size() >= 2 && rest[0] == last) {
    for (auto suf : kStemChangingSuffixes) {
      if (rest.substr(1) == suf) return true;
    }
  }
  return false;
}

std::vector<std::string> headword_candidates(std::string_view token) {
  std::vector<std::string> out{std::string(token)};
  auto add = [&out](std::string c) {
    if (!c.empty() && std::find(out.begin(), out.end(), c) == out.end()) out.push_back(std::move(c));
  };
  for (auto suf : kSuffixes) {
    if (token.size() <= suf.size() || token.substr(token.size() - suf.size()) != suf) continue;
    std::string base(token.substr(0, token.size() - suf.size()));
    add(base);
    if (suf == "ed" || suf == "ing") {
      if (base.size() >= 2 && base.back() == base[base.size() - 2]) add(base.substr(0, base.size() - 1));
      add(base + "e");
    }
  }
  return out;
}

int count_syllables(std::string_view word) {
  const std::string w = to_lower(word);
  int groups = 0;
  bool in_group = false;
  for (char c : w) {
    const bool v = is_vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  const bool ends_le = w.size() >= 2 && w.compare(w.size() - 2, 2, "le") == 0;
  if (!w.empty() && w.back() == 'e' && !ends_le) --groups;
  return std::max(groups, 1);
}

std::size_t count_sentences(std::string_view s) {
  std::size_t count = 0;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    if (!tokenize(s.substr(start, end - start)).empty()) ++count;
  };
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '.' || s[i] == '!' || s[i] == '?') {
      std::size_t j = i;
      while (j < s.size() && (s[j] == '.' || s[j] == '!' || s[j] == '?')) ++j;
      flush(i);
      start = j;
      i = j;
    } else {
      ++i;
    }
  }
  flush(s.size());
  return count;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace storyfier::text
