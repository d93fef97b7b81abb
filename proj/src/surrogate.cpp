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

#include "prada/surrogate.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "prada/common.hpp"
#include "prada/training.hpp"

namespace prada {

PrfDataset collect_prf_labels(const TargetOracle& oracle,
                              std::span<const std::string> query_ids,
                              const PrfOptions& options) {
  if (options.k < 1 || options.k >= options.list_length) {
    throw Error("PRF cutoff must satisfy 1 <= k < N");
  }
  PrfDataset ds;
  ds.k = options.k;
  ds.list_length = options.list_length;
  for (const auto& qid : query_ids) {
    if (!oracle.has_query(qid)) {
      warn("query '" + qid + "' not served by the target; skipped");
      continue;
    }
    auto list = oracle.ranked_list(qid);
    if (list.size() < options.list_length) {
      throw Error("ranked list for '" + qid + "' shorter than N");
    }
    list.doc_ids.resize(options.list_length);
    const auto k = options.k;
    std::vector<std::size_t> negatives(options.list_length - k);
    std::iota(negatives.begin(), negatives.end(), k);
    if (options.negatives && *options.negatives < negatives.size()) {
      Rng rng(derive_seed(options.seed, "prf", qid));
      std::shuffle(negatives.begin(), negatives.end(), rng);
      negatives.resize(*options.negatives);
      std::sort(negatives.begin(), negatives.end());
    }
    for (std::size_t p = 0; p < k; ++p) {
      for (auto n : negatives) {
        ds.triples.push_back({qid, list.doc_ids[p], list.doc_ids[n]});
      }
    }
    ds.lists.emplace(qid, std::move(list));
  }
  return ds;
}

void save_prf(const PrfDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& t : dataset.triples) {
    out << t.query_id << '\t' << t.positive << '\t' << t.negative << '\n';
  }
}

std::vector<PrfTriple> load_prf(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<PrfTriple> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    PrfTriple t;
    if (!std::getline(ss, t.query_id, '\t') || !std::getline(ss, t.positive, '\t') ||
        !std::getline(ss, t.negative)) {
      throw Error("malformed PRF line in " + path.string());
    }
    out.push_back(std::move(t));
  }
  return out;
}

SurrogateTraining train_surrogate(std::span<const PrfTriple> triples,
                                  const Corpus& corpus, const QuerySet& queries,
                                  BilinearRanker init, const SurrogateConfig& config) {
  if (config.epochs < 1) throw Error("surrogate epochs must be at least 1");
  if (!(config.learning_rate > 0)) throw Error("learning rate must be positive");

  std::unordered_map<std::string, TokenSeq> texts;
  auto tokens_of = [&](const std::string& id, const TextCollection& from) {
    auto it = texts.find(id);
    if (it == texts.end()) it = texts.emplace(id, tokenize(from.at(id).text, id)).first;
    return &it->second;
  };
  std::vector<TrainingTriple> resolved;
  resolved.reserve(triples.size());
  for (const auto& t : triples) {
    // Query and document ids share one cache; prefix queries to keep them apart.
    auto qit = texts.find("\x01" + t.query_id);
    if (qit == texts.end()) {
      qit = texts.emplace("\x01" + t.query_id,
                          tokenize(queries.at(t.query_id).text, t.query_id))
                .first;
    }
    const TokenSeq* q = &qit->second;
    const TokenSeq* pos = tokens_of(t.positive, corpus);
    const TokenSeq* neg = tokens_of(t.negative, corpus);
    resolved.push_back({q, pos, neg});
  }

  SurrogateTraining out{std::move(init), {}, 0.0};
  Rng rng(derive_seed(config.seed, "surrogate-training"));
  const SgdOptions sgd{config.learning_rate, config.margin, config.embedding_learning_rate};
  std::vector<std::size_t> order(resolved.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<TrainingTriple> epoch(resolved.size());
  for (int e = 0; e < config.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < order.size(); ++i) epoch[i] = resolved[order[i]];
    out.epoch_losses.push_back(sgd_epoch(epoch, out.ranker, sgd));
  }
  out.final_loss = mean_hinge(resolved, out.ranker, config.margin);
  return out;
}

std::vector<std::string> rank_candidates(const TokenSeq& query,
                                         std::span<const std::string> doc_ids,
                                         const Corpus& corpus,
                                         const BilinearRanker& ranker) {
  const auto q = encode(query, ranker);
  std::vector<ScoredEntry> entries;
  entries.reserve(doc_ids.size());
  for (const auto& id : doc_ids) {
    const auto d = encode(tokenize(corpus.at(id).text, id), ranker);
    const double s = d.representable() && q.representable()
                         ? score(q, d, ranker)
                         : -std::numeric_limits<double>::infinity();
    entries.push_back({id, s});
  }
  sort_scored(entries);
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (auto& e : entries) out.push_back(std::move(e.doc_id));
  return out;
}

double kendall_tau(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() != b.size()) throw Error("kendall_tau: orderings differ in length");
  const auto n = a.size();
  if (n < 2) throw Error("kendall_tau: need at least two items");
  std::unordered_map<std::string, std::size_t> pos_b;
  for (std::size_t i = 0; i < n; ++i) pos_b.emplace(b[i], i);
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = pos_b.find(a[i]);
    if (it == pos_b.end()) throw Error("kendall_tau: orderings differ in items");
    perm[i] = it->second;
  }
  long long concordant = 0, discordant = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      (perm[i] < perm[j] ? concordant : discordant) += 1;
    }
  }
  return static_cast<double>(concordant - discordant) /
         static_cast<double>(concordant + discordant);
}

}  // namespace prada
