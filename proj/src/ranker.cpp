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

#include "prada/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "prada/common.hpp"

namespace prada {

BilinearRanker::BilinearRanker(EmbeddingStore embeddings,
                               Eigen::MatrixXd interaction, double saturation)
    : embeddings_(std::move(embeddings)),
      interaction_(std::move(interaction)),
      saturation_(saturation) {
  if (interaction_.rows() != embeddings_.dim() ||
      interaction_.cols() != embeddings_.dim()) {
    throw Error("interaction matrix must be dim x dim");
  }
  if (!interaction_.allFinite()) throw Error("non-finite interaction matrix");
  if (!(saturation_ >= 0.0) || !std::isfinite(saturation_)) {
    throw Error("saturation must be finite and non-negative");
  }
}

BilinearRanker BilinearRanker::near_identity(EmbeddingStore embeddings,
                                             std::uint64_t seed,
                                             double noise_sigma,
                                             double saturation) {
  const auto d = embeddings.dim();
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma);
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) w(r, c) += noise(rng);
  }
  return BilinearRanker(std::move(embeddings), std::move(w), saturation);
}

namespace {

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double BilinearRanker::phi(double s) const {
  if (saturation_ == 0.0) return s;
  return 2.0 * (std::log(2.0) - softplus(-saturation_ * s)) / saturation_;
}

double BilinearRanker::phi_prime(double s) const {
  return saturation_ == 0.0 ? 1.0 : 2.0 * sigmoid(-saturation_ * s);
}

void save_ranker(const BilinearRanker& ranker, std::ostream& out) {
  std::ostringstream buf;
  buf << std::setprecision(std::numeric_limits<double>::max_digits10);
  const auto d = ranker.dim();
  buf << "prada-ranker 1\n";
  buf << "dim " << d << '\n';
  buf << "saturation " << ranker.saturation() << '\n';
  buf << "W\n";
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      if (c) buf << ' ';
      buf << ranker.interaction()(r, c);
    }
    buf << '\n';
  }
  buf << "embeddings " << ranker.embeddings().size() << '\n';
  out << buf.str();
  write_embeddings(ranker.embeddings(), out);
}

void save_ranker(const BilinearRanker& ranker, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  save_ranker(ranker, out);
}

BilinearRanker load_ranker(std::istream& in, const std::string& space_name) {
  auto expect = [&](const std::string& keyword) {
    std::string got;
    if (!(in >> got) || got != keyword) {
      throw Error("ranker checkpoint: expected '" + keyword + "'");
    }
  };
  expect("prada-ranker");
  int version = 0;
  if (!(in >> version) || version != 1) {
    throw Error("ranker checkpoint: unsupported version");
  }
  Eigen::Index d = 0;
  double saturation = 0;
  expect("dim");
  if (!(in >> d) || d <= 0) throw Error("ranker checkpoint: bad dim");
  expect("saturation");
  if (!(in >> saturation)) throw Error("ranker checkpoint: bad saturation");
  expect("W");
  Eigen::MatrixXd w(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      if (!(in >> w(r, c))) throw Error("ranker checkpoint: truncated W");
    }
  }
  expect("embeddings");
  std::size_t count = 0;
  if (!(in >> count)) throw Error("ranker checkpoint: bad embedding count");
  in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
  auto store = parse_embeddings(in, space_name, "checkpoint");
  if (store.size() != count || store.dim() != d) {
    throw Error("ranker checkpoint: embedding table does not match header");
  }
  return BilinearRanker(std::move(store), std::move(w), saturation);
}

BilinearRanker load_ranker(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return load_ranker(in);
}

EncodedText encode(const TokenSeq& text, const BilinearRanker& ranker) {
  const auto& table = ranker.embeddings();
  EncodedText out;
  out.column.assign(text.tokens.size(), -1);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < text.tokens.size(); ++i) {
    if (auto r = table.row_of(text.tokens[i])) {
      out.column[i] = static_cast<Eigen::Index>(rows.size());
      rows.push_back(*r);
    }
  }
  out.vectors.resize(table.dim(), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t c = 0; c < rows.size(); ++c) {
    out.vectors.col(static_cast<Eigen::Index>(c)) = table.row(rows[c]);
  }
  out.rows = std::move(rows);
  return out;
}

EncodedText with_overrides(EncodedText text,
                           const std::map<std::size_t, Eigen::VectorXd>& overrides) {
  for (const auto& [index, vec] : overrides) {
    if (index >= text.column.size() || text.column[index] < 0) {
      throw Error("override for token " + std::to_string(index) +
                  " which has no embedding");
    }
    if (vec.size() != text.vectors.rows()) throw Error("override dimension mismatch");
    text.vectors.col(text.column[index]) = vec;
  }
  return text;
}

Eigen::VectorXd pooled_embedding(const EncodedText& text) {
  if (!text.representable()) throw Error("unrepresentable text");
  return text.vectors.rowwise().mean();
}

Eigen::VectorXd pooled_embedding(const TokenSeq& text, const BilinearRanker& ranker) {
  return pooled_embedding(encode(text, ranker));
}

namespace {

double score_from_direction(const Eigen::VectorXd& query_direction,
                            const EncodedText& doc, const BilinearRanker& ranker) {
  if (!doc.representable()) throw Error("unrepresentable text");
  const Eigen::VectorXd s = doc.vectors.transpose() * query_direction;
  double total = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) total += ranker.phi(s[i]);
  return total / static_cast<double>(s.size());
}

Eigen::VectorXd query_direction(const EncodedText& query,
                                const BilinearRanker& ranker) {
  return ranker.interaction().transpose() * pooled_embedding(query);
}

}  // namespace

double score(const EncodedText& query, const EncodedText& doc,
             const BilinearRanker& ranker) {
  return score_from_direction(query_direction(query, ranker), doc, ranker);
}

double score(const TokenSeq& query, const TokenSeq& doc,
             const BilinearRanker& ranker) {
  return score(encode(query, ranker), encode(doc, ranker), ranker);
}

RankObjective::RankObjective(const EncodedText& query,
                             std::span<const EncodedText> others,
                             const BilinearRanker& ranker, double beta)
    : ranker_(ranker), query_direction_(query_direction(query, ranker)), beta_(beta) {
  if (others.empty()) throw Error("no reference documents");
  if (!(beta > 0.0)) throw Error("hinge margin must be positive");
  other_scores_.reserve(others.size());
  for (const auto& o : others) {
    other_scores_.push_back(score_from_direction(query_direction_, o, ranker_));
  }
}

double RankObjective::score(const EncodedText& doc) const {
  return score_from_direction(query_direction_, doc, ranker_);
}

int RankObjective::active_terms_at(double doc_score) const {
  int active = 0;
  for (double s : other_scores_) {
    if (beta_ - doc_score + s > 0.0) ++active;
  }
  return active;
}

double RankObjective::loss(const EncodedText& doc) const {
  const double sd = score(doc);
  double total = 0.0;
  for (double s : other_scores_) total += std::max(0.0, beta_ - sd + s);
  return total;
}

int RankObjective::active_terms(const EncodedText& doc) const {
  return active_terms_at(score(doc));
}

Eigen::MatrixXd RankObjective::gradient(const EncodedText& doc) const {
  const auto n = doc.in_vocab();
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(query_direction_.size(), n);
  if (n == 0) return grad;
  const Eigen::VectorXd s = doc.vectors.transpose() * query_direction_;
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) total += ranker_.phi(s[i]);
  const int active = active_terms_at(total / static_cast<double>(n));
  if (active == 0) return grad;
  const double scale = -static_cast<double>(active) / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    grad.col(i) = (scale * ranker_.phi_prime(s[i])) * query_direction_;
  }
  return grad;
}

double rank_loss(const EncodedText& query, const EncodedText& doc,
                 std::span<const EncodedText> others, const BilinearRanker& ranker,
                 double beta) {
  return RankObjective(query, others, ranker, beta).loss(doc);
}

TokenGradient grad_rank_loss_wrt_token(const EncodedText& query,
                                       const EncodedText& doc,
                                       std::span<const EncodedText> others,
                                       const BilinearRanker& ranker, double beta,
                                       std::size_t token_index) {
  if (token_index >= doc.column.size()) throw Error("token index out of range");
  TokenGradient out;
  const auto col = doc.column[token_index];
  if (col < 0) {
    out.value = Eigen::VectorXd::Zero(ranker.dim());
    return out;
  }
  out.value = RankObjective(query, others, ranker, beta).gradient(doc).col(col);
  out.has_gradient = true;
  return out;
}

namespace {

// Accumulates sign * d score(q, d) / d params into `grad`.
void accumulate_score_gradient(const EncodedText& q, const EncodedText& d,
                               const BilinearRanker& ranker, double sign,
                               ParamGradient& grad) {
  const Eigen::VectorXd pq = pooled_embedding(q);
  const Eigen::VectorXd hq = ranker.interaction().transpose() * pq;
  const auto n = d.in_vocab();
  const Eigen::VectorXd s = d.vectors.transpose() * hq;
  Eigen::VectorXd weights(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    weights[i] = ranker.phi_prime(s[i]) / static_cast<double>(n);
  }
  const Eigen::VectorXd weighted_doc = d.vectors * weights;
  grad.interaction.noalias() += sign * pq * weighted_doc.transpose();

  auto add_row = [&](std::size_t row, const Eigen::VectorXd& g) {
    auto it = grad.rows.find(row);
    if (it == grad.rows.end()) {
      grad.rows.emplace(row, g);
    } else {
      it->second += g;
    }
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    add_row(d.rows[i], (sign * weights[i]) * hq);
  }
  const Eigen::VectorXd query_grad =
      (sign / static_cast<double>(q.in_vocab())) * (ranker.interaction() * weighted_doc);
  for (Eigen::Index j = 0; j < q.in_vocab(); ++j) add_row(q.rows[j], query_grad);
}

}  // namespace

ParamGradient grad_surrogate_loss_wrt_params(std::span<const TrainingTriple> batch,
                                             const BilinearRanker& ranker,
                                             double beta) {
  ParamGradient grad;
  grad.interaction = Eigen::MatrixXd::Zero(ranker.dim(), ranker.dim());
  if (batch.empty()) return grad;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (const auto& t : batch) {
    const auto q = encode(*t.query, ranker);
    const auto pos = encode(*t.positive, ranker);
    const auto neg = encode(*t.negative, ranker);
    const Eigen::VectorXd hq = query_direction(q, ranker);
    const double margin = beta - score_from_direction(hq, pos, ranker) +
                          score_from_direction(hq, neg, ranker);
    if (margin <= 0.0) continue;
    grad.loss += margin * inv_b;
    ++grad.active;
    accumulate_score_gradient(q, pos, ranker, -inv_b, grad);
    accumulate_score_gradient(q, neg, ranker, inv_b, grad);
  }
  return grad;
}

void sort_scored(std::vector<ScoredEntry>& entries) {
  std::sort(entries.begin(), entries.end(),
            [](const ScoredEntry& a, const ScoredEntry& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.doc_id < b.doc_id;
            });
}

}  // namespace prada
