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

#include "storyfier/wordselect.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "storyfier/error.hpp"
#include "storyfier/text.hpp"

namespace storyfier::wordselect {

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.size() != v.size()) {
    throw PreconditionError("dimension mismatch: " + std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  }
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw PreconditionError("cosine of a zero vector");
  return u.dot(v) / (nu * nv);
}

FileEmbeddingStore::FileEmbeddingStore(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    if (dim_ == 0) {
      if (line.rfind("dim=", 0) != 0) throw ParseError("expected 'dim=<d>' header", lineno);
      try {
        dim_ = std::stol(line.substr(4));
      } catch (const std::exception&) {
        throw ParseError("bad dimension in header", lineno);
      }
      if (dim_ < 1) throw ParseError("dimension must be positive", lineno);
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("missing tab separator", lineno);
    const auto word = text::to_lower(text::trim(line.substr(0, tab)));
    std::istringstream values(line.substr(tab + 1));
    EmbeddingVector v(dim_);
    for (Eigen::Index i = 0; i < dim_; ++i) {
      if (!(values >> v[i])) throw ParseError("expected " + std::to_string(dim_) + " values", lineno);
      if (!std::isfinite(v[i])) throw ParseError("non-finite value", lineno);
    }
    double extra;
    if (values >> extra) throw ParseError("more than " + std::to_string(dim_) + " values", lineno);
    vectors_[word] = std::move(v);
  }
  if (dim_ == 0) throw ParseError("empty embedding file", 0);
}

FileEmbeddingStore FileEmbeddingStore::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file '" + path + "'");
  return FileEmbeddingStore(in);
}

std::optional<EmbeddingVector> FileEmbeddingStore::embed(std::string_view s) const {
  const auto key = text::to_lower(text::trim(s));
  if (auto it = vectors_.find(key); it != vectors_.end()) return it->second;
  EmbeddingVector sum = EmbeddingVector::Zero(dim_);
  int found = 0;
  for (const auto& tok : text::normalized_tokens(s)) {
    if (auto it = vectors_.find(tok); it != vectors_.end()) {
      sum += it->second;
      ++found;
    }
  }
  if (found == 0) return std::nullopt;
  return sum / found;
}

std::optional<EmbeddingVector> HashingEmbedder::embed(std::string_view s) const {
  const auto tokens = text::normalized_tokens(s);
  if (tokens.empty()) return std::nullopt;
  EmbeddingVector v = EmbeddingVector::Zero(dim_);
  for (const auto& tok : tokens) {
    const std::string padded = "#" + tok + "#";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      // FNV-1a over the trigram bytes.
      std::uint64_t h = 1469598103934665603ULL;
      for (std::size_t j = i; j < i + 3; ++j) {
        h ^= static_cast<unsigned char>(padded[j]);
        h *= 1099511628211ULL;
      }
      v[static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dim_))] += 1.0;
    }
  }
  return v;
}

Ranking rank_by_title(std::string_view title, const lexicon::VocabPool& pool, std::size_t k,
                      const EmbeddingProvider& provider) {
  if (k > pool.size()) {
    throw PreconditionError("k=" + std::to_string(k) + " exceeds pool size " + std::to_string(pool.size()));
  }
  const auto anchor = provider.embed(title);
  if (!anchor || anchor->norm() == 0.0) throw PreconditionError("cannot embed title '" + std::string(title) + "'");

  Ranking out;
  std::vector<std::pair<double, const std::string*>> scored;
  scored.reserve(pool.size());
  for (const auto& [word, _] : pool.entries()) {
    std::optional<EmbeddingVector> v;
    try {
      v = provider.embed(word);
    } catch (const std::exception& e) {
      throw BackendError("embedding provider failed on '" + word + "': " + e.what());
    }
    if (!v || v->norm() == 0.0) {
      out.warnings.push_back(word);
      continue;
    }
    scored.emplace_back(cosine(*anchor, *v), &word);
  }
  const auto take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                    [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : *a.second < *b.second; });
  for (std::size_t i = 0; i < take; ++i) {
    out.words.push_back(*scored[i].second);
    out.scores.push_back(scored[i].first);
  }
  return out;
}

}  // namespace storyfier::wordselect
