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

#include "prada/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "json.hpp"
#include "prada/common.hpp"
#include "prada/training.hpp"

namespace prada {

int RankedList::position(std::string_view doc_id) const {
  for (std::size_t i = 0; i < doc_ids.size(); ++i) {
    if (doc_ids[i] == doc_id) return static_cast<int>(i + 1);
  }
  throw Error("document '" + std::string(doc_id) + "' not in ranked list for '" +
              query_id + "'");
}

CandidatePools build_candidate_pools(const Corpus& corpus, const QuerySet& queries,
                                     std::size_t depth) {
  if (depth == 0) throw Error("candidate list length must be positive");
  if (depth > corpus.size()) {
    throw Error("candidate list length " + std::to_string(depth) +
                " exceeds corpus size " + std::to_string(corpus.size()));
  }
  std::vector<TokenSeq> docs;
  docs.reserve(corpus.size());
  for (const auto& d : corpus.items()) docs.push_back(tokenize(d.text, d.id));

  CandidatePools pools;
  for (const auto& q : queries.items()) {
    const auto qt = tokenize(q.text, q.id);
    const std::set<std::string> terms(qt.tokens.begin(), qt.tokens.end());
    std::vector<std::pair<std::size_t, const std::string*>> overlap;
    overlap.reserve(docs.size());
    std::size_t matching = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      std::size_t hits = 0;
      for (const auto& t : docs[i].tokens) hits += terms.count(t);
      if (hits) ++matching;
      overlap.emplace_back(hits, &corpus.items()[i].id);
    }
    if (matching == 0) {
      warn("query '" + q.id + "' overlaps no document; excluded");
      continue;
    }
    std::sort(overlap.begin(), overlap.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return *a.second < *b.second;
    });
    auto& pool = pools[q.id];
    for (std::size_t i = 0; i < depth; ++i) pool.push_back(*overlap[i].second);
  }
  return pools;
}

namespace {

constexpr double kUnrepresentableScore = -std::numeric_limits<double>::infinity();

double hidden_score(const EncodedText& q, const EncodedText& d,
                    const BilinearRanker& ranker) {
  return d.representable() ? score(q, d, ranker) : kUnrepresentableScore;
}

}  // namespace

TargetOracle::TargetOracle(BilinearRanker hidden, const Corpus& corpus,
                           const QuerySet& queries, CandidatePools pools)
    : hidden_(std::move(hidden)) {
  std::unordered_map<std::string, EncodedText> doc_cache;
  for (auto& [qid, doc_ids] : pools) {
    PoolState state;
    state.query = encode(tokenize(queries.at(qid).text, qid), hidden_);
    if (!state.query.representable()) {
      warn("query '" + qid + "' has no in-vocabulary token; excluded");
      continue;
    }
    state.ranking.reserve(doc_ids.size());
    for (const auto& id : doc_ids) {
      auto it = doc_cache.find(id);
      if (it == doc_cache.end()) {
        it = doc_cache.emplace(id, encode(tokenize(corpus.at(id).text, id), hidden_))
                 .first;
      }
      state.ranking.push_back({id, hidden_score(state.query, it->second, hidden_)});
    }
    sort_scored(state.ranking);
    state.doc_ids = std::move(doc_ids);
    pools_.emplace(qid, std::move(state));
  }
}

const TargetOracle::PoolState& TargetOracle::pool(std::string_view query_id) const {
  auto it = pools_.find(query_id);
  if (it == pools_.end()) {
    throw Error("unknown query '" + std::string(query_id) + "'");
  }
  return it->second;
}

bool TargetOracle::has_query(std::string_view query_id) const {
  return pools_.find(query_id) != pools_.end();
}

std::vector<std::string> TargetOracle::query_ids() const {
  std::vector<std::string> out;
  for (const auto& [qid, _] : pools_) out.push_back(qid);
  return out;
}

std::size_t TargetOracle::list_length(std::string_view query_id) const {
  return pool(query_id).ranking.size();
}

RankedList TargetOracle::ranked_list(std::string_view query_id) const {
  const auto& p = pool(query_id);
  query_count_.fetch_add(1);
  RankedList out{std::string(query_id), {}};
  out.doc_ids.reserve(p.ranking.size());
  for (const auto& e : p.ranking) out.doc_ids.push_back(e.doc_id);
  return out;
}

RankProbe TargetOracle::rank_of(std::string_view query_id, const TokenSeq& replacement,
                                std::string_view doc_id) const {
  const auto& p = pool(query_id);
  if (replacement.tokens.empty()) throw Error("empty replacement text");
  if (std::find(p.doc_ids.begin(), p.doc_ids.end(), doc_id) == p.doc_ids.end()) {
    throw Error("document '" + std::string(doc_id) + "' not a candidate of '" +
                std::string(query_id) + "'");
  }
  query_count_.fetch_add(1);
  const auto encoded = encode(replacement, hidden_);
  RankProbe probe;
  probe.unrepresentable = !encoded.representable();
  const double s = hidden_score(p.query, encoded, hidden_);
  int position = 1;
  for (const auto& e : p.ranking) {
    if (e.doc_id == doc_id) continue;
    if (e.score > s || (e.score == s && e.doc_id < doc_id)) ++position;
  }
  probe.position = probe.unrepresentable ? static_cast<int>(p.ranking.size()) : position;
  return probe;
}

RankProbe TargetOracle::rank_of(std::string_view query_id,
                                std::string_view replacement_text,
                                std::string_view doc_id) const {
  if (replacement_text.empty()) throw Error("empty replacement text");
  return rank_of(query_id, tokenize(replacement_text, std::string(doc_id)), doc_id);
}

TargetTraining build_target(const Corpus& corpus, const QuerySet& train_queries,
                            const std::map<std::string, std::vector<std::string>>& qrels,
                            const QuerySet& pool_queries,
                            const EmbeddingStore& model_embeddings,
                            const TargetConfig& config) {
  if (config.list_length > corpus.size()) {
    throw Error("candidate list length " + std::to_string(config.list_length) +
                " exceeds corpus size " + std::to_string(corpus.size()));
  }
  std::vector<Query> all = train_queries.items();
  for (const auto& q : pool_queries.items()) {
    if (!train_queries.contains(q.id)) all.push_back(q);
  }
  const QuerySet served(std::move(all));
  auto pools = build_candidate_pools(corpus, served, config.list_length);

  std::unordered_map<std::string, TokenSeq> doc_tokens;
  for (const auto& d : corpus.items()) doc_tokens.emplace(d.id, tokenize(d.text, d.id));

  struct Group {
    TokenSeq query;
    const TokenSeq* relevant;
    std::vector<const TokenSeq*> negatives;
  };
  std::vector<Group> groups;
  for (const auto& q : train_queries.items()) {
    auto rel = qrels.find(q.id);
    auto pool = pools.find(q.id);
    if (rel == qrels.end() || rel->second.empty() || pool == pools.end()) continue;
    const auto& rel_id = rel->second.front();
    if (!corpus.contains(rel_id)) continue;
    Group g{tokenize(q.text, q.id), &doc_tokens.at(rel_id), {}};
    for (const auto& id : pool->second) {
      if (std::find(rel->second.begin(), rel->second.end(), id) == rel->second.end()) {
        g.negatives.push_back(&doc_tokens.at(id));
      }
    }
    if (!g.negatives.empty()) groups.push_back(std::move(g));
  }

  auto ranker = BilinearRanker::near_identity(model_embeddings, config.seed,
                                              config.init_noise, config.saturation);
  Rng rng(derive_seed(config.seed, "target-training"));
  SgdOptions sgd{config.learning_rate, config.margin, config.embedding_learning_rate};
  std::vector<double> losses;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<TrainingTriple> triples;
    for (const auto& g : groups) {
      std::vector<std::size_t> idx(g.negatives.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::shuffle(idx.begin(), idx.end(), rng);
      const auto take = std::min(config.negatives, idx.size());
      for (std::size_t i = 0; i < take; ++i) {
        triples.push_back({&g.query, g.relevant, g.negatives[idx[i]]});
      }
    }
    std::shuffle(triples.begin(), triples.end(), rng);
    const double loss = sgd_epoch(triples, ranker, sgd);
    losses.push_back(loss);
    if (config.plateau_tolerance > 0 && losses.size() >= 3) {
      const auto n = losses.size();
      const double a = losses[n - 3], b = losses[n - 2], c = losses[n - 1];
      if (a - b < config.plateau_tolerance * a && b - c < config.plateau_tolerance * b) {
        break;
      }
    }
  }

  TargetTraining out;
  out.epoch_losses = std::move(losses);
  out.oracle = std::make_unique<TargetOracle>(std::move(ranker), corpus, served,
                                              std::move(pools));
  return out;
}

void save_pools(const CandidatePools& pools, const std::filesystem::path& path) {
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  for (const auto& [qid, ids] : pools) obj[qid] = ids;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << obj.dump(1) << '\n';
}

CandidatePools load_pools(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  nlohmann::json obj;
  try {
    in >> obj;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed pool file " + path.string() + ": " + e.what());
  }
  CandidatePools pools;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    pools[it.key()] = it.value().get<std::vector<std::string>>();
  }
  return pools;
}

void save_oracle(const TargetOracle& oracle, const std::filesystem::path& checkpoint,
                 const std::filesystem::path& pools) {
  save_ranker(oracle.hidden_, checkpoint);
  CandidatePools out;
  for (const auto& [qid, state] : oracle.pools_) out[qid] = state.doc_ids;
  save_pools(out, pools);
}

std::unique_ptr<TargetOracle> load_oracle(const std::filesystem::path& checkpoint,
                                          const std::filesystem::path& pools,
                                          const Corpus& corpus,
                                          const QuerySet& queries) {
  return std::make_unique<TargetOracle>(load_ranker(checkpoint), corpus, queries,
                                        load_pools(pools));
}

}  // namespace prada
