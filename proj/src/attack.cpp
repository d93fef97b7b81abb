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

#include "prada/attack.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prada/common.hpp"
#include "prada/metrics.hpp"

namespace prada {

void AttackConfig::validate() const {
  if (max_tokens < 1) throw Error("attack config: m must be at least 1");
  if (max_synonyms < 1) throw Error("attack config: S must be at least 1");
  if (!(min_synonym_cosine >= 0.0 && min_synonym_cosine <= 1.0)) {
    throw Error("attack config: lambda must lie in [0, 1]");
  }
  if (!(min_doc_similarity >= 0.0 && min_doc_similarity <= 1.0)) {
    throw Error("attack config: epsilon must lie in [0, 1]");
  }
  if (!(step_size > 0.0)) throw Error("attack config: alpha must be positive");
  if (iterations < 1) throw Error("attack config: eta must be at least 1");
  if (!(margin > 0.0)) throw Error("attack config: beta must be positive");
}

const char* variant_name(AttackVariant v) {
  switch (v) {
    case AttackVariant::kFull: return "prada";
    case AttackVariant::kNoTir: return "prada_no_tir";
    case AttackVariant::kNoEsp: return "prada_no_esp";
    case AttackVariant::kNoIwr: return "prada_no_iwr";
    case AttackVariant::kNoEspIwr: return "prada_no_esp_iwr";
  }
  return "unknown";
}

std::vector<double> token_importance(const EncodedText& query, const EncodedText& doc,
                                     std::span<const EncodedText> others,
                                     const BilinearRanker& surrogate, double beta) {
  std::vector<double> importance(doc.column.size(), 0.0);
  if (!doc.representable()) return importance;
  const RankObjective objective(query, others, surrogate, beta);
  const Eigen::MatrixXd grad = objective.gradient(doc);
  for (std::size_t i = 0; i < doc.column.size(); ++i) {
    if (doc.column[i] >= 0) importance[i] = grad.col(doc.column[i]).squaredNorm();
  }
  return importance;
}

std::vector<std::size_t> top_m_tokens(std::span<const double> importance,
                                      std::size_t m) {
  if (m < 1) throw Error("m must be at least 1");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < importance.size(); ++i) {
    if (importance[i] > 0.0) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return importance[a] > importance[b];
  });
  if (idx.size() > m) idx.resize(m);
  return idx;
}

PerturbedTokens pgd_perturb(const EncodedText& query, const EncodedText& doc,
                            std::span<const EncodedText> others,
                            const BilinearRanker& surrogate,
                            std::span<const std::size_t> tokens,
                            const PgdOptions& options) {
  if (tokens.empty()) throw Error("pgd_perturb: no tokens to perturb");
  PerturbedTokens current;
  for (auto i : tokens) {
    if (i >= doc.column.size() || doc.column[i] < 0) {
      throw Error("pgd_perturb: token " + std::to_string(i) + " has no embedding");
    }
    current.emplace(i, doc.vectors.col(doc.column[i]));
  }
  const RankObjective objective(query, others, surrogate, options.margin);
  for (int t = 0; t < options.iterations; ++t) {
    const auto adv = with_overrides(doc, current);
    const Eigen::MatrixXd grad = objective.gradient(adv);
    double sq_norm = 0.0;
    for (const auto& [i, _] : current) sq_norm += grad.col(doc.column[i]).squaredNorm();
    if (sq_norm == 0.0) break;
    const double denom = options.normalization == StepNormalization::kSquaredNorm
                             ? sq_norm
                             : std::sqrt(sq_norm);
    // A gradient too small to normalize has effectively vanished.
    const double scale = options.step_size / denom;
    if (!std::isfinite(scale)) break;
    for (auto& [i, v] : current) {
      v -= scale * grad.col(doc.column[i]);
      if (!v.allFinite()) {
        throw Error("pgd_perturb: non-finite vector at step " + std::to_string(t + 1) +
                    " for token " + std::to_string(i));
      }
    }
  }
  return current;
}

std::optional<SynonymChoice> choose_synonym(std::string_view word,
                                            const Eigen::VectorXd& perturbed,
                                            const EmbeddingStore& counter_fitted,
                                            const BilinearRanker& surrogate,
                                            std::size_t max_synonyms,
                                            double min_cosine) {
  const auto syns = synonyms(word, counter_fitted, max_synonyms, min_cosine);
  std::optional<SynonymChoice> best;
  for (const auto& [candidate, cf_cos] : syns.entries) {
    const auto* e = surrogate.embeddings().find(candidate);
    if (e == nullptr) continue;
    const auto c = cosine(*e, perturbed);
    if (!c) continue;
    if (!best || *c > best->model_cosine ||
        (*c == best->model_cosine && candidate < best->word)) {
      best = SynonymChoice{candidate, cf_cos, *c};
    }
  }
  return best;
}

namespace {

bool similar_enough(const TokenSeq& original, const TokenSeq& candidate,
                    const EmbeddingStore& general, double epsilon) {
  try {
    return semantic_sim_doc(original, candidate, general) >= epsilon * 100.0;
  } catch (const Error&) {
    return false;
  }
}

struct AttackInputs {
  TokenSeq doc;
  EncodedText query;
  EncodedText encoded_doc;
  std::vector<EncodedText> others;
  int rank_before = 0;
};

}  // namespace

AttackResult greedy_replace(const AttackEnvironment& env, std::string_view query_id,
                            const TokenSeq& doc, std::span<const std::size_t> tokens,
                            const PerturbedTokens& perturbed, const AttackConfig& config,
                            int rank_before) {
  AttackResult result;
  result.query_id = std::string(query_id);
  result.doc_id = doc.source_doc;
  result.rank_before = rank_before;
  result.rank_after = rank_before;
  result.adversarial = doc;

  TokenSeq best = doc;
  int best_rank = rank_before;
  for (auto i : tokens) {
    auto it = perturbed.find(i);
    if (it == perturbed.end()) continue;
    const auto choice = choose_synonym(doc.tokens[i], it->second, env.counter_fitted,
                                       env.surrogate, config.max_synonyms,
                                       config.min_synonym_cosine);
    if (!choice) continue;
    TokenSeq trial = best;
    trial.tokens[i] = choice->word;
    RankProbe probe;
    try {
      probe = env.oracle.rank_of(query_id, trial, result.doc_id);
    } catch (const Error& e) {
      warn(std::string("oracle failure during attack: ") + e.what());
      result.partial = true;
      break;
    }
    ++result.oracle_queries;
    if (probe.position < best_rank &&
        similar_enough(doc, trial, env.general, config.min_doc_similarity)) {
      best = std::move(trial);
      best_rank = probe.position;
      result.replacements.push_back({i, doc.tokens[i], choice->word, choice->cf_cosine});
    }
  }
  result.rank_after = best_rank;
  result.adversarial = std::move(best);
  result.success = result.rank_after < result.rank_before;
  return result;
}

AttackResult prada_attack(const AttackEnvironment& env, std::string_view query_id,
                          std::string_view doc_id, const AttackConfig& config,
                          AttackVariant variant) {
  config.validate();
  const std::string qid(query_id), did(doc_id);
  Rng rng(derive_seed(config.seed, variant_name(variant), qid, did));

  const auto list = env.oracle.ranked_list(qid);
  AttackInputs in;
  in.rank_before = list.position(did);
  in.doc = tokenize(env.corpus.at(did).text, did);
  in.query = encode(tokenize(env.queries.at(qid).text, qid), env.surrogate);
  in.encoded_doc = encode(in.doc, env.surrogate);
  for (const auto& other : list.doc_ids) {
    if (other == did) continue;
    auto enc = encode(tokenize(env.corpus.at(other).text, other), env.surrogate);
    if (enc.representable()) in.others.push_back(std::move(enc));
  }

  auto no_op = [&] {
    AttackResult r;
    r.method = variant_name(variant);
    r.query_id = qid;
    r.doc_id = did;
    r.rank_before = r.rank_after = in.rank_before;
    r.oracle_queries = 1;
    r.adversarial = in.doc;
    return r;
  };
  if (!in.query.representable() || !in.encoded_doc.representable() ||
      in.others.empty()) {
    return no_op();
  }

  // Token selection.
  std::vector<std::size_t> chosen;
  if (variant == AttackVariant::kNoTir) {
    for (std::size_t i = 0; i < in.encoded_doc.column.size(); ++i) {
      if (in.encoded_doc.column[i] >= 0) chosen.push_back(i);
    }
    std::shuffle(chosen.begin(), chosen.end(), rng);
    if (chosen.size() > config.max_tokens) chosen.resize(config.max_tokens);
  } else {
    const auto importance = token_importance(in.query, in.encoded_doc, in.others,
                                             env.surrogate, config.margin);
    chosen = top_m_tokens(importance, config.max_tokens);
  }
  if (chosen.empty()) return no_op();

  // Embedding-space perturbation.
  const PgdOptions pgd{config.step_size, config.iterations, config.margin,
                       config.normalization};
  auto perturbed = pgd_perturb(in.query, in.encoded_doc, in.others, env.surrogate,
                               chosen, pgd);
  if (variant == AttackVariant::kNoEsp || variant == AttackVariant::kNoEspIwr) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& [i, v] : perturbed) {
      const Eigen::VectorXd original = in.encoded_doc.vectors.col(in.encoded_doc.column[i]);
      const double magnitude = (v - original).norm();
      Eigen::VectorXd z(v.size());
      for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = gauss(rng);
      v = original + (magnitude / z.norm()) * z;
    }
  }

  // Word replacement.
  AttackResult result;
  if (variant == AttackVariant::kNoIwr || variant == AttackVariant::kNoEspIwr) {
    result = no_op();
    result.oracle_queries = 1;
    TokenSeq adv = in.doc;
    for (auto i : chosen) {
      const auto choice = choose_synonym(in.doc.tokens[i], perturbed.at(i),
                                         env.counter_fitted, env.surrogate,
                                         config.max_synonyms, config.min_synonym_cosine);
      if (!choice) continue;
      adv.tokens[i] = choice->word;
      result.replacements.push_back({i, in.doc.tokens[i], choice->word, choice->cf_cosine});
    }
    if (!result.replacements.empty()) {
      try {
        result.rank_after = env.oracle.rank_of(qid, adv, did).position;
        ++result.oracle_queries;
      } catch (const Error& e) {
        warn(std::string("oracle failure during attack: ") + e.what());
        result.partial = true;
      }
    }
    result.adversarial = std::move(adv);
    result.success = result.rank_after < result.rank_before;
  } else {
    result = greedy_replace(env, qid, in.doc, chosen, perturbed, config, in.rank_before);
    result.oracle_queries += 1;
  }
  result.method = variant_name(variant);
  return result;
}

}  // namespace prada
