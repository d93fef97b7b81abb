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

// The black-box target. Callers see rank positions only; the hidden model and
// its scores never cross the public surface.

#ifndef PRADA_ORACLE_HPP_
#define PRADA_ORACLE_HPP_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "prada/corpus.hpp"
#include "prada/ranker.hpp"

namespace prada {

struct RankedList {
  std::string query_id;
  std::vector<std::string> doc_ids;  // position p is doc_ids[p - 1]

  std::size_t size() const { return doc_ids.size(); }
  // 1-based position; throws when absent.
  int position(std::string_view doc_id) const;
};

struct RankProbe {
  int position = 0;
  bool unrepresentable = false;  // text had no in-vocabulary token; ranked last
};

using CandidatePools = std::map<std::string, std::vector<std::string>>;

// Top-`depth` documents per query by query-term frequency in the document,
// ties by doc id. Queries matching no document are dropped with a warning.
CandidatePools build_candidate_pools(const Corpus& corpus, const QuerySet& queries,
                                     std::size_t depth);

class TargetOracle {
 public:
  TargetOracle(BilinearRanker hidden, const Corpus& corpus, const QuerySet& queries,
               CandidatePools pools);
  TargetOracle(const TargetOracle&) = delete;
  TargetOracle& operator=(const TargetOracle&) = delete;

  RankedList ranked_list(std::string_view query_id) const;

  // Position `doc_id` would take if its text were `replacement`, against the
  // other candidates unchanged.
  RankProbe rank_of(std::string_view query_id, const TokenSeq& replacement,
                    std::string_view doc_id) const;
  RankProbe rank_of(std::string_view query_id, std::string_view replacement_text,
                    std::string_view doc_id) const;

  std::uint64_t query_count() const { return query_count_.load(); }
  bool has_query(std::string_view query_id) const;
  std::vector<std::string> query_ids() const;
  std::size_t list_length(std::string_view query_id) const;

  friend void save_oracle(const TargetOracle& oracle,
                          const std::filesystem::path& checkpoint,
                          const std::filesystem::path& pools);

 private:
  struct PoolState {
    EncodedText query;
    std::vector<std::string> doc_ids;
    std::vector<ScoredEntry> ranking;  // sorted
  };
  const PoolState& pool(std::string_view query_id) const;

  BilinearRanker hidden_;
  std::map<std::string, PoolState, std::less<>> pools_;
  mutable std::atomic<std::uint64_t> query_count_{0};
};

void save_oracle(const TargetOracle& oracle, const std::filesystem::path& checkpoint,
                 const std::filesystem::path& pools);

struct TargetConfig {
  std::size_t list_length = 100;
  int epochs = 30;
  double learning_rate = 0.2;
  std::size_t negatives = 10;
  double margin = kDefaultMargin;
  double saturation = 0.0;
  double init_noise = 0.01;
  double embedding_learning_rate = 0.0;
  double plateau_tolerance = 1e-4;  // relative epoch-loss improvement
  std::uint64_t seed = 0;
};

struct TargetTraining {
  std::unique_ptr<TargetOracle> oracle;
  std::vector<double> epoch_losses;
};

// Trains the hidden ranker on (query, relevant, pool negative) triples from
// `train_queries`/`qrels` and serves pools for `train_queries` + `pool_queries`.
TargetTraining build_target(const Corpus& corpus, const QuerySet& train_queries,
                            const std::map<std::string, std::vector<std::string>>& qrels,
                            const QuerySet& pool_queries,
                            const EmbeddingStore& model_embeddings,
                            const TargetConfig& config);

void save_pools(const CandidatePools& pools, const std::filesystem::path& path);
CandidatePools load_pools(const std::filesystem::path& path);

std::unique_ptr<TargetOracle> load_oracle(const std::filesystem::path& checkpoint,
                                          const std::filesystem::path& pools,
                                          const Corpus& corpus,
                                          const QuerySet& queries);

}  // namespace prada

#endif  // PRADA_ORACLE_HPP_
