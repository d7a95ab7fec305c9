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
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "storyfier/lexicon.hpp"

namespace storyfier::wordselect {

/// Embeddings are plain dense Eigen vectors; scalar type is a template
/// parameter of the free functions so float stores work too.
using EmbeddingVector = Eigen::VectorXd;

/// Source of text embeddings. `embed` is deterministic for a given
/// instance and returns nullopt for text the provider cannot encode.
/// Implementations must tolerate concurrent const calls.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual Eigen::Index dimension() const = 0;
  virtual std::optional<EmbeddingVector> embed(std::string_view text) const = 0;
};

/// Cosine similarity. Throws PreconditionError on dimension mismatch or a
/// zero vector.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& u, const Eigen::MatrixBase<DerivedB>& v);

double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

/// Precomputed vectors read from `dim=<d>` followed by `word<TAB>v1 ... vd`
/// lines. Multi-word text that is not itself a key embeds as the mean of
/// its known token vectors.
class FileEmbeddingStore : public EmbeddingProvider {
 public:
  explicit FileEmbeddingStore(std::istream& in);
  static FileEmbeddingStore from_file(const std::string& path);

  Eigen::Index dimension() const override { return dim_; }
  std::optional<EmbeddingVector> embed(std::string_view text) const override;
  std::size_t size() const noexcept { return vectors_.size(); }

 private:
  Eigen::Index dim_ = 0;
  std::unordered_map<std::string, EmbeddingVector> vectors_;
};

/// Hashes lowercase character trigrams of the padded text into a fixed
/// number of buckets. Deterministic and dependency-free; similar spellings
/// land close together, which is all the tests need.
class HashingEmbedder : public EmbeddingProvider {
 public:
  explicit HashingEmbedder(Eigen::Index dim = 64) : dim_(dim) {}
  Eigen::Index dimension() const override { return dim_; }
  std::optional<EmbeddingVector> embed(std::string_view text) const override;

 private:
  Eigen::Index dim_;
};

struct Ranking {
  std::vector<std::string> words;     // best first
  std::vector<double> scores;         // parallel to words
  std::vector<std::string> warnings;  // words the provider could not embed
};

/// The k headwords most similar to `title`, descending by cosine, ties
/// broken by ascending headword. Words the provider cannot embed are
/// skipped with a warning. Throws PreconditionError when k exceeds the
/// pool or the title cannot be embedded; provider exceptions are rethrown
/// as BackendError naming the word.
Ranking rank_by_title(std::string_view title, const lexicon::VocabPool& pool, std::size_t k,
                      const EmbeddingProvider& provider);

// -- implementation --------------------------------------------------------

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& u, const Eigen::MatrixBase<DerivedB>& v) {
  return cosine(EmbeddingVector(u.template cast<double>()), EmbeddingVector(v.template cast<double>()));
}

}  // namespace storyfier::wordselect
