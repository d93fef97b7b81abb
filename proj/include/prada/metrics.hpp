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

// Attack evaluation: success rate, perturbation percentage, semantic
// similarity, and a query-term-density spam detector.

#ifndef PRADA_METRICS_HPP_
#define PRADA_METRICS_HPP_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "prada/attack_result.hpp"
#include "prada/corpus.hpp"

namespace prada {

// Mean over queries of the per-query fraction of promoted documents, x100.
// Every query must contribute the same number of results.
double success_rate(std::span<const AttackResult> results);

// Percentage of positions whose token differs.
double perturbation_pct(const TokenSeq& original, const TokenSeq& adversarial);

// Cosine of mean-pooled general-space vectors, clamped to [0, 1], x100.
// Identical in-vocabulary token sequences score exactly 100.
double semantic_sim_doc(const TokenSeq& a, const TokenSeq& b,
                        const EmbeddingStore& general);

// Mean of semantic_sim_doc over index-paired sentences; falls back to the
// document-level value (with a warning) when sentence counts differ.
double semantic_sim_sen(const TokenSeq& a, const TokenSeq& b,
                        const EmbeddingStore& general);

// Fraction of positions in `doc` holding any query term.
double spamicity(const TokenSeq& doc, const TokenSeq& query);

struct SpamVerdict {
  std::string doc_id;
  double spamicity = 0.0;
  double tau = 0.0;
  bool detected = false;  // spamicity > tau
};

SpamVerdict detect_spam(const TokenSeq& doc, const TokenSeq& query, double tau);

// Percentage of adversarial documents flagged at threshold `tau`.
double detection_rate(std::span<const AttackResult> results,
                      const std::map<std::string, TokenSeq>& queries, double tau);

// 0.050, 0.055, ..., 0.080
std::vector<double> default_tau_grid();

struct EvalReport {
  std::string method;
  double sr = 0.0;
  double pp = 0.0;
  double ss_doc = 0.0;
  double ss_sen = 0.0;
  std::size_t num_queries = 0;
  std::size_t docs_per_query = 0;
};

EvalReport evaluate(const std::string& method, std::span<const AttackResult> results,
                    const std::map<std::string, TokenSeq>& originals,
                    const EmbeddingStore& general);

// CSV "method,SR,PP,SS_doc,SS_sen" with a header row.
void write_report_csv(std::span<const EvalReport> rows, std::ostream& out);

struct SpamSweepRow {
  double tau;
  std::string method;
  double detection_rate;
};

// CSV "tau,method,detection_rate" with a header row.
void write_spam_sweep_csv(std::span<const SpamSweepRow> rows, std::ostream& out);

}  // namespace prada

#endif  // PRADA_METRICS_HPP_
