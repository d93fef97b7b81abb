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

// Gradient-guided synonym substitution against a rank-only oracle:
// token importance from surrogate gradients, joint gradient steps on the
// important tokens' embeddings, then greedy oracle-verified replacement.

#ifndef PRADA_ATTACK_HPP_
#define PRADA_ATTACK_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prada/attack_result.hpp"
#include "prada/corpus.hpp"
#include "prada/oracle.hpp"
#include "prada/ranker.hpp"

namespace prada {

enum class StepNormalization {
  kSquaredNorm,  // v <- v - alpha g / ||g||^2
  kNorm,         // v <- v - alpha g / ||g||
};

struct AttackConfig {
  std::size_t max_tokens = 20;      // m
  std::size_t max_synonyms = 10;    // S
  double min_synonym_cosine = 0.5;  // lambda, counter-fitted space
  double min_doc_similarity = 0.8;  // epsilon, as a fraction
  double step_size = 45.0;          // alpha
  int iterations = 3;               // eta
  double margin = kDefaultMargin;   // beta
  StepNormalization normalization = StepNormalization::kSquaredNorm;
  std::uint64_t seed = 0;

  // Throws Error naming the offending field.
  void validate() const;
};

// Which stages run as designed; the others are replaced by the ablation
// stand-ins (random token choice, random perturbation, unverified
// replacement).
enum class AttackVariant { kFull, kNoTir, kNoEsp, kNoIwr, kNoEspIwr };

const char* variant_name(AttackVariant v);

// Squared L2 norm of dL/d(token embedding) per token; 0 for tokens without an
// embedding and everywhere the loss is flat.
std::vector<double> token_importance(const EncodedText& query, const EncodedText& doc,
                                     std::span<const EncodedText> others,
                                     const BilinearRanker& surrogate, double beta);

// Indices of the `m` largest nonzero importances, largest first, ties by
// position.
std::vector<std::size_t> top_m_tokens(std::span<const double> importance,
                                      std::size_t m);

struct PgdOptions {
  double step_size = 45.0;
  int iterations = 3;
  double margin = kDefaultMargin;
  StepNormalization normalization = StepNormalization::kSquaredNorm;
};

using PerturbedTokens = std::map<std::size_t, Eigen::VectorXd>;

// Unclipped gradient descent on the chosen tokens' vectors jointly; the
// normalizer is taken over the concatenated gradient. Stops early on a zero
// gradient.
PerturbedTokens pgd_perturb(const EncodedText& query, const EncodedText& doc,
                            std::span<const EncodedText> others,
                            const BilinearRanker& surrogate,
                            std::span<const std::size_t> tokens,
                            const PgdOptions& options);

struct SynonymChoice {
  std::string word;
  double cf_cosine = 0.0;
  double model_cosine = 0.0;  // against the perturbed vector
};

// Among the counter-fitted synonyms of `word` that the surrogate can embed,
// the one closest (cosine) to `perturbed`; ties lexicographic.
std::optional<SynonymChoice> choose_synonym(std::string_view word,
                                            const Eigen::VectorXd& perturbed,
                                            const EmbeddingStore& counter_fitted,
                                            const BilinearRanker& surrogate,
                                            std::size_t max_synonyms,
                                            double min_cosine);

// Everything an attack reads. The oracle is the only channel to the target.
struct AttackEnvironment {
  const TargetOracle& oracle;
  const BilinearRanker& surrogate;
  const EmbeddingStore& counter_fitted;
  const EmbeddingStore& general;
  const Corpus& corpus;
  const QuerySet& queries;
};

// Walks `tokens` in order; each substitution is kept only if the oracle rank
// strictly improves and document similarity stays at or above epsilon.
// `oracle_queries` counts this stage's probes only.
AttackResult greedy_replace(const AttackEnvironment& env, std::string_view query_id,
                            const TokenSeq& doc, std::span<const std::size_t> tokens,
                            const PerturbedTokens& perturbed, const AttackConfig& config,
                            int rank_before);

// The end-to-end attack on one (query, document) pair. One ranked_list call
// fixes the reference documents; every further oracle call is a probe.
AttackResult prada_attack(const AttackEnvironment& env, std::string_view query_id,
                          std::string_view doc_id, const AttackConfig& config,
                          AttackVariant variant = AttackVariant::kFull);

}  // namespace prada

#endif  // PRADA_ATTACK_HPP_
