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

// Seeded synthetic retrieval world: a topical corpus, query splits with one
// designated relevant document each, and three aligned word-vector spaces
// (model, counter-fitted synonym space, general space).

#ifndef PRADA_SYNTHETIC_HPP_
#define PRADA_SYNTHETIC_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "prada/corpus.hpp"

namespace prada {

struct SyntheticParams {
  std::size_t num_docs = 200;
  std::size_t vocab_size = 500;
  std::size_t num_topics = 10;
  double doc_length_mean = 60.0;
  std::size_t target_queries = 60;      // train the hidden target
  std::size_t collection_queries = 40;  // the attacker's PRF collection
  std::size_t eval_queries = 20;        // attacked
  Eigen::Index dim = 50;                // model and general spaces
  Eigen::Index cf_dim = 100;            // counter-fitted space
  double topical_vocab_fraction = 0.6;
  double topical_token_rate = 0.35;
  double synonym_frequency_decay = 0.3;  // relative frequency of each rarer synonym
  double background_scale = 0.3;         // model-space norm of non-topical words

  void validate() const;
};

struct SyntheticData {
  Corpus corpus;
  QuerySet target_queries;
  QuerySet collection_queries;
  QuerySet eval_queries;
  std::map<std::string, std::vector<std::string>> qrels;
  EmbeddingStore model{"model", 1};
  EmbeddingStore counter_fitted{"counter-fitted", 1};
  EmbeddingStore general{"general", 1};
};

SyntheticData generate_synthetic_corpus(const SyntheticParams& params,
                                        std::uint64_t seed);

// File names used by write_synthetic / the harness data layout.
struct DataFiles {
  std::filesystem::path corpus, target_queries, collection_queries, eval_queries,
      qrels, model_embeddings, cf_embeddings, general_embeddings;

  static DataFiles in(const std::filesystem::path& dir);
};

void write_synthetic(const SyntheticData& data, const DataFiles& files);

}  // namespace prada

#endif  // PRADA_SYNTHETIC_HPP_
