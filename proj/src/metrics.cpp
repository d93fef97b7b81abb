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

#include "prada/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <set>

#include "prada/common.hpp"

namespace prada {

namespace {

Eigen::VectorXd general_pool(const TokenSeq& text, const EmbeddingStore& general) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(general.dim());
  std::size_t n = 0;
  for (const auto& t : text.tokens) {
    if (const auto* v = general.find(t)) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) throw Error("unrepresentable text");
  return sum / static_cast<double>(n);
}

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

double success_rate(std::span<const AttackResult> results) {
  if (results.empty()) throw Error("no attack results");
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_query;
  for (const auto& r : results) {
    auto& [wins, total] = per_query[r.query_id];
    wins += r.rank_after < r.rank_before ? 1 : 0;
    total += 1;
  }
  double sum = 0.0;
  for (const auto& [qid, counts] : per_query) {
    sum += static_cast<double>(counts.first) / static_cast<double>(counts.second);
  }
  return sum / static_cast<double>(per_query.size()) * 100.0;
}

double perturbation_pct(const TokenSeq& original, const TokenSeq& adversarial) {
  if (original.tokens.size() != adversarial.tokens.size()) {
    throw Error("perturbation_pct: token counts differ");
  }
  if (original.tokens.empty()) throw Error("perturbation_pct: empty text");
  std::size_t changed = 0;
  for (std::size_t i = 0; i < original.tokens.size(); ++i) {
    changed += original.tokens[i] != adversarial.tokens[i] ? 1 : 0;
  }
  return static_cast<double>(changed) / static_cast<double>(original.tokens.size()) *
         100.0;
}

double semantic_sim_doc(const TokenSeq& a, const TokenSeq& b,
                        const EmbeddingStore& general) {
  const auto pa = general_pool(a, general);
  const auto pb = general_pool(b, general);
  if (a.tokens == b.tokens) return 100.0;
  const auto c = cosine(pa, pb);
  if (!c) return 0.0;
  return std::clamp(*c, 0.0, 1.0) * 100.0;
}

double semantic_sim_sen(const TokenSeq& a, const TokenSeq& b,
                        const EmbeddingStore& general) {
  const auto sa = split_sentences(a);
  const auto sb = split_sentences(b);
  if (sa.size() != sb.size()) {
    warn("sentence counts differ (" + std::to_string(sa.size()) + " vs " +
         std::to_string(sb.size()) + "); using document-level similarity");
    return semantic_sim_doc(a, b, general);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    sum += semantic_sim_doc(sa[i], sb[i], general);
  }
  return sum / static_cast<double>(sa.size());
}

double spamicity(const TokenSeq& doc, const TokenSeq& query) {
  if (doc.tokens.empty()) throw Error("spamicity: empty document");
  const std::set<std::string> terms(query.tokens.begin(), query.tokens.end());
  std::size_t hits = 0;
  for (const auto& t : doc.tokens) hits += terms.count(t);
  return static_cast<double>(hits) / static_cast<double>(doc.tokens.size());
}

SpamVerdict detect_spam(const TokenSeq& doc, const TokenSeq& query, double tau) {
  SpamVerdict v;
  v.doc_id = doc.source_doc;
  v.spamicity = spamicity(doc, query);
  v.tau = tau;
  v.detected = v.spamicity > tau;
  return v;
}

double detection_rate(std::span<const AttackResult> results,
                      const std::map<std::string, TokenSeq>& queries, double tau) {
  if (tau < 0.0 || tau > 1.0) throw Error("tau must lie in [0, 1]");
  if (results.empty()) return 0.0;
  std::size_t detected = 0;
  for (const auto& r : results) {
    auto it = queries.find(r.query_id);
    if (it == queries.end()) throw Error("no query text for '" + r.query_id + "'");
    detected += detect_spam(r.adversarial, it->second, tau).detected ? 1 : 0;
  }
  return static_cast<double>(detected) / static_cast<double>(results.size()) * 100.0;
}

std::vector<double> default_tau_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 6; ++i) grid.push_back((50 + 5 * i) / 1000.0);
  return grid;
}

EvalReport evaluate(const std::string& method, std::span<const AttackResult> results,
                    const std::map<std::string, TokenSeq>& originals,
                    const EmbeddingStore& general) {
  EvalReport rep;
  rep.method = method;
  rep.sr = success_rate(results);
  std::map<std::string, std::size_t> per_query;
  double pp = 0, ss_doc = 0, ss_sen = 0;
  for (const auto& r : results) {
    auto it = originals.find(r.doc_id);
    if (it == originals.end()) throw Error("no original text for '" + r.doc_id + "'");
    pp += perturbation_pct(it->second, r.adversarial);
    ss_doc += semantic_sim_doc(it->second, r.adversarial, general);
    ss_sen += semantic_sim_sen(it->second, r.adversarial, general);
    per_query[r.query_id] += 1;
  }
  const auto n = static_cast<double>(results.size());
  rep.pp = pp / n;
  rep.ss_doc = ss_doc / n;
  rep.ss_sen = ss_sen / n;
  rep.num_queries = per_query.size();
  rep.docs_per_query = per_query.empty() ? 0 : per_query.begin()->second;
  return rep;
}

void write_report_csv(std::span<const EvalReport> rows, std::ostream& out) {
  out << "method,SR,PP,SS_doc,SS_sen\n";
  for (const auto& r : rows) {
    out << r.method << ',' << fixed4(r.sr) << ',' << fixed4(r.pp) << ','
        << fixed4(r.ss_doc) << ',' << fixed4(r.ss_sen) << '\n';
  }
}

void write_spam_sweep_csv(std::span<const SpamSweepRow> rows, std::ostream& out) {
  out << "tau,method,detection_rate\n";
  for (const auto& r : rows) {
    char tau[32];
    std::snprintf(tau, sizeof tau, "%.3f", r.tau);
    out << tau << ',' << r.method << ',' << fixed4(r.detection_rate) << '\n';
  }
}

}  // namespace prada
