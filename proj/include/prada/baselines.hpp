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

// Comparison attacks: step-wise word selection x replacement, and the two
// term-spamming attacks (query-term repetition, sentence stitching).

#ifndef PRADA_BASELINES_HPP_
#define PRADA_BASELINES_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "prada/attack.hpp"
#include "prada/attack_result.hpp"
#include "prada/common.hpp"
#include "prada/corpus.hpp"

namespace prada {

enum class Selection { kFirst, kLast, kTfidf, kTextRank };
enum class Substitution { kRandom, kNearest };

struct CorpusStats {
  std::size_t num_docs = 0;
  std::unordered_map<std::string, std::size_t> doc_freq;

  static CorpusStats from(const Corpus& corpus);
  double idf(const std::string& word) const;
};

struct TextRankOptions {
  std::size_t window = 4;
  double damping = 0.85;
  double tolerance = 1e-6;
  int max_iterations = 100;
};

// Scores of the distinct words of `doc` on its undirected co-occurrence graph
// (edges between tokens fewer than `window` positions apart).
std::map<std::string, double> textrank_scores(const TokenSeq& doc,
                                              const TextRankOptions& options = {});

// min(n, |doc|) distinct token indices, best first, ties by position.
std::vector<std::size_t> select_words(Selection method, const TokenSeq& doc,
                                      std::size_t n, const CorpusStats& stats);

TokenSeq replace_words(Substitution strategy, const TokenSeq& doc,
                       std::span<const std::size_t> indices,
                       const EmbeddingStore& general, Rng& rng);

// Replaces `n` successive tokens starting at a random (or forced) position
// with the query terms, cycling through them in order.
TokenSeq term_spam_repetition(const TokenSeq& doc, const TokenSeq& query,
                              std::size_t n, Rng& rng,
                              std::optional<std::size_t> start = std::nullopt);

struct SentencePool {
  std::vector<TokenSeq> sentences;
  std::vector<std::string> provenance;  // source doc id per sentence
};

// Sentences of every document ranked strictly above `doc_id` in `list`.
SentencePool build_sentence_pool(const RankedList& list, std::string_view doc_id,
                                 const Corpus& corpus);

// Replaces `n` successive tokens with tokens taken from randomly chosen pool
// sentences, concatenated until `n` tokens are collected.
TokenSeq term_spam_stitching(const TokenSeq& doc, const SentencePool& pool,
                             std::size_t n, Rng& rng,
                             std::optional<std::size_t> start = std::nullopt);

struct BaselineMethod {
  enum class Kind { kStepwise, kRepetition, kStitching } kind;
  Selection selection = Selection::kFirst;
  Substitution substitution = Substitution::kRandom;
};

// Recognizes first_rr, first_nr, last_rr, last_nr, tfidf_rr, tfidf_nr,
// textrank_rr, textrank_nr, ts_rep and ts_sti.
std::optional<BaselineMethod> parse_baseline(std::string_view name);
std::vector<std::string> baseline_names();

// One oracle list call before and one probe after the modification.
AttackResult run_baseline(const AttackEnvironment& env, std::string_view method_name,
                          std::string_view query_id, std::string_view doc_id,
                          std::size_t n, const CorpusStats& stats, std::uint64_t seed);

}  // namespace prada

#endif  // PRADA_BASELINES_HPP_
