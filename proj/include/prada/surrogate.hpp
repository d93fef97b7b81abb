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

// Surrogate ranker trained from pseudo-relevance feedback: the top-k of each
// observed list is treated as relevant, the rest as irrelevant.

#ifndef PRADA_SURROGATE_HPP_
#define PRADA_SURROGATE_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prada/corpus.hpp"
#include "prada/oracle.hpp"
#include "prada/ranker.hpp"

namespace prada {

struct PrfTriple {
  std::string query_id;
  std::string positive;
  std::string negative;
  bool operator==(const PrfTriple&) const = default;
};

struct PrfDataset {
  std::vector<PrfTriple> triples;
  std::size_t k = 1;
  std::size_t list_length = 0;
  std::map<std::string, RankedList> lists;  // the observed lists, for audit
};

struct PrfOptions {
  std::size_t k = 1;
  std::size_t list_length = 100;
  // Negatives per query drawn uniformly from positions k+1..N; nullopt keeps
  // the full positive x negative cross product.
  std::optional<std::size_t> negatives = 10;
  std::uint64_t seed = 0;
};

// Exactly one ranked_list call per served query in `query_ids`.
PrfDataset collect_prf_labels(const TargetOracle& oracle,
                              std::span<const std::string> query_ids,
                              const PrfOptions& options);

void save_prf(const PrfDataset& dataset, const std::filesystem::path& path);
std::vector<PrfTriple> load_prf(const std::filesystem::path& path);

struct SurrogateConfig {
  int epochs = 20;
  double learning_rate = 0.05;
  double margin = kDefaultMargin;
  double embedding_learning_rate = 0.0;
  std::uint64_t seed = 0;
};

struct SurrogateTraining {
  BilinearRanker ranker;
  std::vector<double> epoch_losses;  // mean pre-update hinge per epoch
  double final_loss = 0.0;           // mean hinge after the last epoch
};

SurrogateTraining train_surrogate(std::span<const PrfTriple> triples,
                                  const Corpus& corpus, const QuerySet& queries,
                                  BilinearRanker init, const SurrogateConfig& config);

// Ordering a ranker induces over a fixed candidate set (ties by doc id).
std::vector<std::string> rank_candidates(const TokenSeq& query,
                                         std::span<const std::string> doc_ids,
                                         const Corpus& corpus,
                                         const BilinearRanker& ranker);

// Kendall tau-a between two orderings of the same item set.
double kendall_tau(std::span<const std::string> a, std::span<const std::string> b);

}  // namespace prada

#endif  // PRADA_SURROGATE_HPP_
