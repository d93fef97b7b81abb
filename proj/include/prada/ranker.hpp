// Copyright 2026 The Prada Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Differentiable relevance model shared by the hidden target and the
// attacker's surrogate.
//
// Each text is a bag of in-vocabulary token embeddings. With q the mean
// query embedding and e_i the embedding of document token i,
//
//   s_i   = q^T W e_i
//   score = (1/n) sum_i phi(s_i),   phi(s) = 2 (log 2 - softplus(-g s)) / g
//
// where g >= 0 is the saturation. At g = 0, phi is the identity and the score
// reduces to the plain bilinear form q^T W mean(e). For g > 0 a token's
// contribution flattens once it already matches the query well, so
// phi'(s) = 2 sigmoid(-g s) is largest for the poorly matching tokens.

#ifndef PRADA_RANKER_HPP_
#define PRADA_RANKER_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "prada/corpus.hpp"

namespace prada {

inline constexpr double kDefaultMargin = 1.0;

class BilinearRanker {
 public:
  BilinearRanker(EmbeddingStore embeddings, Eigen::MatrixXd interaction,
                 double saturation = 0.0);

  // Identity plus N(0, noise_sigma^2) entries drawn from `seed`.
  static BilinearRanker near_identity(EmbeddingStore embeddings,
                                      std::uint64_t seed,
                                      double noise_sigma = 0.01,
                                      double saturation = 0.0);

  Eigen::Index dim() const { return embeddings_.dim(); }
  double saturation() const { return saturation_; }

  const EmbeddingStore& embeddings() const { return embeddings_; }
  EmbeddingStore& embeddings() { return embeddings_; }
  const Eigen::MatrixXd& interaction() const { return interaction_; }
  Eigen::MatrixXd& interaction() { return interaction_; }

  double phi(double s) const;
  double phi_prime(double s) const;

 private:
  EmbeddingStore embeddings_;
  Eigen::MatrixXd interaction_;
  double saturation_;
};

// Checkpoint text format (see README):
//   prada-ranker 1
//   dim <D>
//   saturation <g>
//   W            followed by D lines of D numbers, row-major
//   embeddings <V> followed by V lines "word f1 ... fD"
void save_ranker(const BilinearRanker& ranker, std::ostream& out);
void save_ranker(const BilinearRanker& ranker, const std::filesystem::path& path);
BilinearRanker load_ranker(std::istream& in, const std::string& space_name = "model");
BilinearRanker load_ranker(const std::filesystem::path& path);

// A text resolved against a ranker's embedding table. Columns of `vectors`
// are the in-vocabulary tokens in order; `column[i]` maps token i to its
// column or -1 when out of vocabulary. `rows[c]` is the table row behind
// column c.
struct EncodedText {
  Eigen::MatrixXd vectors;
  std::vector<Eigen::Index> column;
  std::vector<std::size_t> rows;

  Eigen::Index in_vocab() const { return vectors.cols(); }
  bool representable() const { return vectors.cols() > 0; }
};

EncodedText encode(const TokenSeq& text, const BilinearRanker& ranker);

// Copy of `text` with token vectors replaced, keyed by token index.
EncodedText with_overrides(EncodedText text,
                           const std::map<std::size_t, Eigen::VectorXd>& overrides);

// Mean of in-vocabulary token embeddings; throws "unrepresentable text".
Eigen::VectorXd pooled_embedding(const TokenSeq& text, const BilinearRanker& ranker);
Eigen::VectorXd pooled_embedding(const EncodedText& text);

double score(const EncodedText& query, const EncodedText& doc,
             const BilinearRanker& ranker);
double score(const TokenSeq& query, const TokenSeq& doc,
             const BilinearRanker& ranker);

// Pairwise hinge objective pushing one document above a fixed reference set:
//   L = sum_{d'} max(0, beta - score(q, d) + score(q, d'))
// Reference scores are computed once at construction.
class RankObjective {
 public:
  RankObjective(const EncodedText& query, std::span<const EncodedText> others,
                const BilinearRanker& ranker, double beta = kDefaultMargin);

  double loss(const EncodedText& doc) const;
  int active_terms(const EncodedText& doc) const;

  // dim x in_vocab matrix; column c is dL/d(vector of column c).
  Eigen::MatrixXd gradient(const EncodedText& doc) const;

  double score(const EncodedText& doc) const;

 private:
  int active_terms_at(double doc_score) const;

  const BilinearRanker& ranker_;
  Eigen::VectorXd query_direction_;  // W^T q
  std::vector<double> other_scores_;
  double beta_;
};

double rank_loss(const EncodedText& query, const EncodedText& doc,
                 std::span<const EncodedText> others, const BilinearRanker& ranker,
                 double beta = kDefaultMargin);

struct TokenGradient {
  Eigen::VectorXd value;
  bool has_gradient = false;  // false for out-of-vocabulary tokens
};

TokenGradient grad_rank_loss_wrt_token(const EncodedText& query,
                                       const EncodedText& doc,
                                       std::span<const EncodedText> others,
                                       const BilinearRanker& ranker, double beta,
                                       std::size_t token_index);

// One (query, more relevant, less relevant) training example.
struct TrainingTriple {
  const TokenSeq* query;
  const TokenSeq* positive;
  const TokenSeq* negative;
};

struct ParamGradient {
  Eigen::MatrixXd interaction;
  std::map<std::size_t, Eigen::VectorXd> rows;  // embedding table row -> grad
  double loss = 0.0;                            // mean hinge over the batch
  int active = 0;
};

// Gradient of the mean pairwise hinge
//   (1/B) sum max(0, beta - score(q, d+) + score(q, d-))
// with respect to W and every embedding row the batch touches.
ParamGradient grad_surrogate_loss_wrt_params(std::span<const TrainingTriple> batch,
                                             const BilinearRanker& ranker,
                                             double beta = kDefaultMargin);

struct ScoredEntry {
  std::string doc_id;
  double score;
};

// Score-descending, doc-id-ascending among ties.
struct ScoredList {
  std::string query_id;
  std::vector<ScoredEntry> entries;
};

void sort_scored(std::vector<ScoredEntry>& entries);

}  // namespace prada

#endif  // PRADA_RANKER_HPP_
