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

#include "prada/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace prada {

CorpusStats CorpusStats::from(const Corpus& corpus) {
  CorpusStats stats;
  stats.num_docs = corpus.size();
  for (const auto& d : corpus.items()) {
    const auto seq = tokenize(d.text, d.id);
    const std::set<std::string> distinct(seq.tokens.begin(), seq.tokens.end());
    for (const auto& w : distinct) ++stats.doc_freq[w];
  }
  return stats;
}

double CorpusStats::idf(const std::string& word) const {
  auto it = doc_freq.find(word);
  const std::size_t df = it == doc_freq.end() ? 1 : std::max<std::size_t>(1, it->second);
  return std::log(static_cast<double>(num_docs) / static_cast<double>(df));
}

std::map<std::string, double> textrank_scores(const TokenSeq& doc,
                                              const TextRankOptions& options) {
  std::map<std::string, std::size_t> vertex;
  for (const auto& t : doc.tokens) vertex.emplace(t, 0);
  std::vector<std::string> names;
  for (auto& [w, id] : vertex) {
    id = names.size();
    names.push_back(w);
  }
  const auto n = names.size();
  std::vector<std::set<std::size_t>> adj(n);
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    for (std::size_t j = i + 1; j < doc.tokens.size() && j - i < options.window; ++j) {
      const auto a = vertex.at(doc.tokens[i]);
      const auto b = vertex.at(doc.tokens[j]);
      if (a == b) continue;
      adj[a].insert(b);
      adj[b].insert(a);
    }
  }
  std::vector<double> s(n, 1.0), next(n);
  for (int it = 0; it < options.max_iterations; ++it) {
    double delta = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      double acc = 0.0;
      for (auto u : adj[v]) acc += s[u] / static_cast<double>(adj[u].size());
      next[v] = (1.0 - options.damping) + options.damping * acc;
      delta = std::max(delta, std::abs(next[v] - s[v]));
    }
    s.swap(next);
    if (delta < options.tolerance) break;
  }
  std::map<std::string, double> out;
  for (std::size_t v = 0; v < n; ++v) out.emplace(names[v], s[v]);
  return out;
}

std::vector<std::size_t> select_words(Selection method, const TokenSeq& doc,
                                      std::size_t n, const CorpusStats& stats) {
  if (n < 1) throw Error("select_words: n must be at least 1");
  const auto len = doc.tokens.size();
  const auto take = std::min(n, len);
  std::vector<std::size_t> idx(len);
  std::iota(idx.begin(), idx.end(), 0);
  switch (method) {
    case Selection::kFirst:
      idx.resize(take);
      return idx;
    case Selection::kLast:
      return {idx.end() - static_cast<std::ptrdiff_t>(take), idx.end()};
    case Selection::kTfidf: {
      std::map<std::string, double> tf;
      for (const auto& t : doc.tokens) tf[t] += 1.0;
      std::vector<double> score(len);
      for (std::size_t i = 0; i < len; ++i) {
        score[i] = tf[doc.tokens[i]] * stats.idf(doc.tokens[i]);
      }
      std::stable_sort(idx.begin(), idx.end(),
                       [&](auto a, auto b) { return score[a] > score[b]; });
      break;
    }
    case Selection::kTextRank: {
      const auto tr = textrank_scores(doc);
      std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) {
        return tr.at(doc.tokens[a]) > tr.at(doc.tokens[b]);
      });
      break;
    }
  }
  idx.resize(take);
  return idx;
}

TokenSeq replace_words(Substitution strategy, const TokenSeq& doc,
                       std::span<const std::size_t> indices,
                       const EmbeddingStore& general, Rng& rng) {
  if (general.empty()) throw Error("replace_words: empty vocabulary");
  TokenSeq out = doc;
  std::uniform_int_distribution<std::size_t> pick(0, general.size() - 1);
  for (auto i : indices) {
    if (i >= out.tokens.size()) throw Error("replace_words: index out of range");
    if (strategy == Substitution::kRandom) {
      out.tokens[i] = general.words()[pick(rng)];
    } else if (const auto* v = general.find(doc.tokens[i])) {
      out.tokens[i] = nearest_word(*v, general, {doc.tokens[i]});
    }
  }
  return out;
}

namespace {

std::size_t spam_start(const TokenSeq& doc, std::size_t n, Rng& rng,
                       std::optional<std::size_t> start) {
  if (n < 1) throw Error("term spamming: n must be at least 1");
  if (n > doc.tokens.size()) {
    throw Error("term spamming: n = " + std::to_string(n) +
                " exceeds document length " + std::to_string(doc.tokens.size()));
  }
  const auto last = doc.tokens.size() - n;
  if (start) {
    if (*start > last) throw Error("term spamming: start position out of range");
    return *start;
  }
  return std::uniform_int_distribution<std::size_t>(0, last)(rng);
}

}  // namespace

TokenSeq term_spam_repetition(const TokenSeq& doc, const TokenSeq& query,
                              std::size_t n, Rng& rng,
                              std::optional<std::size_t> start) {
  if (query.tokens.empty()) throw Error("term spamming: empty query");
  const auto s = spam_start(doc, n, rng, start);
  TokenSeq out = doc;
  for (std::size_t k = 0; k < n; ++k) {
    out.tokens[s + k] = query.tokens[k % query.tokens.size()];
  }
  return out;
}

SentencePool build_sentence_pool(const RankedList& list, std::string_view doc_id,
                                 const Corpus& corpus) {
  SentencePool pool;
  for (const auto& id : list.doc_ids) {
    if (id == doc_id) break;
    for (auto& s : split_sentences(tokenize(corpus.at(id).text, id))) {
      pool.sentences.push_back(std::move(s));
      pool.provenance.push_back(id);
    }
  }
  return pool;
}

TokenSeq term_spam_stitching(const TokenSeq& doc, const SentencePool& pool,
                             std::size_t n, Rng& rng,
                             std::optional<std::size_t> start) {
  if (pool.sentences.empty()) throw Error("no higher-ranked documents");
  const auto s = spam_start(doc, n, rng, start);
  std::uniform_int_distribution<std::size_t> pick(0, pool.sentences.size() - 1);
  std::vector<std::string> collected;
  while (collected.size() < n) {
    const auto& sentence = pool.sentences[pick(rng)];
    for (const auto& t : sentence.tokens) {
      if (collected.size() == n) break;
      collected.push_back(t);
    }
  }
  TokenSeq out = doc;
  for (std::size_t k = 0; k < n; ++k) out.tokens[s + k] = collected[k];
  return out;
}

std::optional<BaselineMethod> parse_baseline(std::string_view name) {
  using Kind = BaselineMethod::Kind;
  if (name == "ts_rep") return BaselineMethod{Kind::kRepetition};
  if (name == "ts_sti") return BaselineMethod{Kind::kStitching};
  const auto us = name.rfind('_');
  if (us == std::string_view::npos) return std::nullopt;
  const auto sel = name.substr(0, us);
  const auto sub = name.substr(us + 1);
  BaselineMethod m{Kind::kStepwise};
  if (sel == "first") m.selection = Selection::kFirst;
  else if (sel == "last") m.selection = Selection::kLast;
  else if (sel == "tfidf") m.selection = Selection::kTfidf;
  else if (sel == "textrank") m.selection = Selection::kTextRank;
  else return std::nullopt;
  if (sub == "rr") m.substitution = Substitution::kRandom;
  else if (sub == "nr") m.substitution = Substitution::kNearest;
  else return std::nullopt;
  return m;
}

std::vector<std::string> baseline_names() {
  return {"first_rr", "first_nr", "last_rr",     "last_nr",     "tfidf_rr",
          "tfidf_nr", "textrank_rr", "textrank_nr", "ts_rep", "ts_sti"};
}

AttackResult run_baseline(const AttackEnvironment& env, std::string_view method_name,
                          std::string_view query_id, std::string_view doc_id,
                          std::size_t n, const CorpusStats& stats, std::uint64_t seed) {
  const auto method = parse_baseline(method_name);
  if (!method) throw Error("unknown baseline '" + std::string(method_name) + "'");
  const std::string qid(query_id), did(doc_id), name(method_name);
  Rng rng(derive_seed(seed, name, qid, did));

  const auto list = env.oracle.ranked_list(qid);
  const auto doc = tokenize(env.corpus.at(did).text, did);
  TokenSeq adv;
  switch (method->kind) {
    case BaselineMethod::Kind::kStepwise: {
      const auto idx = select_words(method->selection, doc, n, stats);
      adv = replace_words(method->substitution, doc, idx, env.general, rng);
      break;
    }
    case BaselineMethod::Kind::kRepetition:
      adv = term_spam_repetition(doc, tokenize(env.queries.at(qid).text, qid),
                                 std::min(n, doc.size()), rng);
      break;
    case BaselineMethod::Kind::kStitching:
      adv = term_spam_stitching(doc, build_sentence_pool(list, did, env.corpus),
                                std::min(n, doc.size()), rng);
      break;
  }

  AttackResult r;
  r.method = name;
  r.query_id = qid;
  r.doc_id = did;
  r.rank_before = list.position(did);
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (doc.tokens[i] == adv.tokens[i]) continue;
    Replacement rep{i, doc.tokens[i], adv.tokens[i], std::nullopt};
    const auto* a = env.counter_fitted.find(rep.old_word);
    const auto* b = env.counter_fitted.find(rep.new_word);
    if (a && b) rep.cf_cosine = cosine(*a, *b);
    r.replacements.push_back(std::move(rep));
  }
  r.rank_after = env.oracle.rank_of(qid, adv, did).position;
  r.oracle_queries = 2;
  r.success = r.rank_after < r.rank_before;
  r.adversarial = std::move(adv);
  return r;
}

}  // namespace prada
