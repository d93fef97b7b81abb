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

#include "prada/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "prada/common.hpp"

namespace prada {

void SyntheticParams::validate() const {
  if (num_docs < 1) throw Error("synthetic: need at least one document");
  if (num_topics < 1) throw Error("synthetic: need at least one topic");
  if (vocab_size < 4 * num_topics) {
    throw Error("synthetic: vocabulary must hold at least 4 words per topic");
  }
  if (!(doc_length_mean >= 5.0)) throw Error("synthetic: mean doc length must be >= 5");
  if (target_queries + collection_queries + eval_queries == 0) {
    throw Error("synthetic: no queries requested");
  }
  if (dim < 2 || cf_dim < 2) throw Error("synthetic: embedding dims must be >= 2");
  if (!(topical_vocab_fraction > 0.0 && topical_vocab_fraction < 1.0)) {
    throw Error("synthetic: topical vocabulary fraction must lie in (0, 1)");
  }
  if (!(topical_token_rate > 0.0 && topical_token_rate < 1.0)) {
    throw Error("synthetic: topical token rate must lie in (0, 1)");
  }
  if (!(background_scale > 0.0)) throw Error("synthetic: background scale must be positive");
  if (!(synonym_frequency_decay > 0.0 && synonym_frequency_decay <= 1.0)) {
    throw Error("synthetic: synonym frequency decay must lie in (0, 1]");
  }
}

DataFiles DataFiles::in(const std::filesystem::path& dir) {
  return {dir / "corpus.jsonl",        dir / "queries_target.jsonl",
          dir / "queries_collection.jsonl", dir / "queries_eval.jsonl",
          dir / "qrels.tsv",           dir / "emb_model.txt",
          dir / "emb_cf.txt",          dir / "emb_general.txt"};
}

namespace {

struct Word {
  std::string text;
  std::size_t concept_id;
  int topic;  // -1 for background vocabulary
  double topical_strength;
};

Eigen::VectorXd unit_gaussian(Eigen::Index dim, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = g(rng);
  return v / v.norm();
}

// Stored vectors are rounded to 6 decimals so files round-trip exactly.
Eigen::VectorXd rounded(const Eigen::VectorXd& v) {
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = std::round(v[i] * 1e6) / 1e6;
  return out;
}

std::string pseudo_word(Rng& rng) {
  static constexpr std::string_view kOnsets = "bdfgklmnprstvz";
  static constexpr std::string_view kVowels = "aeiou";
  std::uniform_int_distribution<int> syllables(2, 3);
  std::uniform_int_distribution<std::size_t> onset(0, kOnsets.size() - 1);
  std::uniform_int_distribution<std::size_t> vowel(0, kVowels.size() - 1);
  std::string w;
  for (int s = syllables(rng); s > 0; --s) {
    w += kOnsets[onset(rng)];
    w += kVowels[vowel(rng)];
  }
  return w;
}

std::vector<double> zipf_weights(std::size_t n, double exponent) {
  std::vector<double> w(n);
  for (std::size_t r = 0; r < n; ++r) w[r] = 1.0 / std::pow(double(r + 1), exponent);
  return w;
}

}  // namespace

SyntheticData generate_synthetic_corpus(const SyntheticParams& p, std::uint64_t seed) {
  p.validate();
  Rng rng(derive_seed(seed, "synthetic"));

  // Vocabulary: synonym groups ("concepts") of 1-4 surface forms.
  std::set<std::string> seen;
  std::vector<Word> words;
  words.reserve(p.vocab_size);
  const auto topical_words =
      static_cast<std::size_t>(std::round(p.topical_vocab_fraction * p.vocab_size));
  std::discrete_distribution<int> group_size({0.2, 0.3, 0.3, 0.2});
  std::uniform_real_distribution<double> strength(0.2, 1.0);
  std::size_t concept_count = 0;
  while (words.size() < p.vocab_size) {
    const bool topical = words.size() < topical_words;
    const int topic = topical ? static_cast<int>(concept_count % p.num_topics) : -1;
    const auto limit = topical ? topical_words : p.vocab_size;
    const auto size = std::min<std::size_t>(group_size(rng) + 1, limit - words.size());
    for (std::size_t k = 0; k < size; ++k) {
      std::string w;
      do {
        w = pseudo_word(rng);
      } while (!seen.insert(w).second);
      words.push_back({w, concept_count, topic, topical ? strength(rng) : 0.0});
    }
    ++concept_count;
  }

  // Vector spaces.
  std::vector<Eigen::VectorXd> topic_model, topic_general;
  for (std::size_t k = 0; k < p.num_topics; ++k) {
    topic_model.push_back(unit_gaussian(p.dim, rng));
    topic_general.push_back(unit_gaussian(p.dim, rng));
  }
  std::vector<Eigen::VectorXd> concept_model, concept_general, concept_cf;
  for (std::size_t c = 0; c < concept_count; ++c) {
    concept_model.push_back(unit_gaussian(p.dim, rng));
    concept_general.push_back(unit_gaussian(p.dim, rng));
    concept_cf.push_back(unit_gaussian(p.cf_dim, rng));
  }
  SyntheticData data;
  data.model = EmbeddingStore("model", p.dim);
  data.general = EmbeddingStore("general", p.dim);
  data.counter_fitted = EmbeddingStore("counter-fitted", p.cf_dim);
  for (const auto& w : words) {
    Eigen::VectorXd m = 0.5 * concept_model[w.concept_id] + 0.3 * unit_gaussian(p.dim, rng);
    Eigen::VectorXd g =
        0.9 * concept_general[w.concept_id] + 0.25 * unit_gaussian(p.dim, rng);
    if (w.topic < 0) m *= p.background_scale;
    if (w.topic >= 0) {
      m += w.topical_strength * topic_model[w.topic];
      g += 0.8 * topic_general[w.topic];
    }
    Eigen::VectorXd cf = concept_cf[w.concept_id] + 0.3 * unit_gaussian(p.cf_dim, rng);
    data.model.insert(w.text, rounded(m));
    data.general.insert(w.text, rounded(g));
    data.counter_fitted.insert(w.text, rounded(cf));
  }

  // Per-topic and background samplers with Zipf-like frequencies.
  std::vector<std::vector<std::size_t>> by_topic(p.num_topics);
  std::vector<std::size_t> background;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i].topic >= 0) {
      by_topic[words[i].topic].push_back(i);
    } else {
      background.push_back(i);
    }
  }
  // Within a topical concept the commonest surface form is the least
  // topic-specific one; stronger synonyms are progressively rarer.
  std::vector<std::discrete_distribution<std::size_t>> topic_pick;
  for (auto& ids : by_topic) {
    std::vector<std::vector<std::size_t>> groups;
    for (auto id : ids) {
      if (groups.empty() || words[groups.back().front()].concept_id != words[id].concept_id) {
        groups.emplace_back();
      }
      groups.back().push_back(id);
    }
    std::shuffle(groups.begin(), groups.end(), rng);
    const auto cw = zipf_weights(groups.size(), 0.8);
    ids.clear();
    std::vector<double> w;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      auto& group = groups[g];
      std::sort(group.begin(), group.end(), [&](std::size_t a, std::size_t b) {
        return words[a].topical_strength < words[b].topical_strength;
      });
      double share = 1.0;
      for (auto id : group) {
        ids.push_back(id);
        w.push_back(cw[g] * share);
        share *= p.synonym_frequency_decay;
      }
    }
    topic_pick.emplace_back(w.begin(), w.end());
  }
  std::shuffle(background.begin(), background.end(), rng);
  const auto bw = zipf_weights(background.size(), 1.0);
  std::discrete_distribution<std::size_t> background_pick(bw.begin(), bw.end());

  std::uniform_int_distribution<std::size_t> topic_of_doc(0, p.num_topics - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> length_scale(0.6, 1.4);
  std::uniform_int_distribution<int> sentence_length(6, 14);

  std::vector<Document> docs;
  std::vector<std::vector<std::size_t>> doc_words;
  std::vector<std::size_t> doc_topic;
  const int id_width = static_cast<int>(std::to_string(p.num_docs).size());
  for (std::size_t d = 0; d < p.num_docs; ++d) {
    const auto topic = topic_of_doc(rng);
    const auto len = std::max<std::size_t>(
        5, static_cast<std::size_t>(std::lround(p.doc_length_mean * length_scale(rng))));
    std::vector<std::size_t> ids;
    std::string text;
    int until_break = sentence_length(rng);
    bool sentence_start = true;
    for (std::size_t t = 0; t < len; ++t) {
      const auto wid = unit(rng) < p.topical_token_rate
                           ? by_topic[topic][topic_pick[topic](rng)]
                           : background[background_pick(rng)];
      ids.push_back(wid);
      std::string w = words[wid].text;
      if (sentence_start) w[0] = static_cast<char>(w[0] - 'a' + 'A');
      sentence_start = false;
      if (!text.empty()) text += ' ';
      text += w;
      if (--until_break == 0 || t + 1 == len) {
        text += '.';
        sentence_start = true;
        until_break = sentence_length(rng);
      }
    }
    char id[32];
    std::snprintf(id, sizeof id, "D%0*zu", id_width, d);
    docs.push_back({id, text});
    doc_words.push_back(std::move(ids));
    doc_topic.push_back(topic);
  }

  // Queries: 2-4 distinct topical words of one designated relevant document.
  const std::size_t total_queries =
      p.target_queries + p.collection_queries + p.eval_queries;
  std::vector<std::size_t> relevant(p.num_docs);
  std::iota(relevant.begin(), relevant.end(), 0);
  std::shuffle(relevant.begin(), relevant.end(), rng);
  std::uniform_int_distribution<std::size_t> any_doc(0, p.num_docs - 1);
  std::uniform_int_distribution<std::size_t> query_len(2, 4);
  std::vector<Query> target, collection, eval;
  const int qid_width = static_cast<int>(std::to_string(total_queries).size());
  for (std::size_t q = 0; q < total_queries; ++q) {
    const auto d = q < relevant.size() ? relevant[q] : any_doc(rng);
    std::vector<std::size_t> candidates;
    for (auto wid : doc_words[d]) {
      if (words[wid].topic >= 0 &&
          std::find(candidates.begin(), candidates.end(), wid) == candidates.end()) {
        candidates.push_back(wid);
      }
    }
    if (candidates.empty()) candidates = {doc_words[d].front()};
    std::shuffle(candidates.begin(), candidates.end(), rng);
    candidates.resize(std::min(candidates.size(), query_len(rng)));
    std::string text;
    for (auto wid : candidates) {
      if (!text.empty()) text += ' ';
      text += words[wid].text;
    }
    char id[32];
    std::snprintf(id, sizeof id, "Q%0*zu", qid_width, q);
    Query query{id, text};
    data.qrels[query.id].push_back(docs[d].id);
    if (q < p.target_queries) {
      target.push_back(std::move(query));
    } else if (q < p.target_queries + p.collection_queries) {
      collection.push_back(std::move(query));
    } else {
      eval.push_back(std::move(query));
    }
  }

  data.corpus = Corpus(std::move(docs));
  data.target_queries = QuerySet(std::move(target));
  data.collection_queries = QuerySet(std::move(collection));
  data.eval_queries = QuerySet(std::move(eval));
  return data;
}

namespace {

void write_store(const EmbeddingStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  std::string line;
  char buf[32];
  for (std::size_t i = 0; i < store.size(); ++i) {
    line = store.words()[i];
    for (double x : store.row(i)) {
      std::snprintf(buf, sizeof buf, " %.6f", x);
      line += buf;
    }
    line += '\n';
    out << line;
  }
}

}  // namespace

void write_synthetic(const SyntheticData& data, const DataFiles& files) {
  save_corpus(data.corpus, files.corpus);
  save_corpus(data.target_queries, files.target_queries);
  save_corpus(data.collection_queries, files.collection_queries);
  save_corpus(data.eval_queries, files.eval_queries);
  std::ofstream qrels(files.qrels, std::ios::binary);
  if (!qrels) throw Error("cannot write " + files.qrels.string());
  for (const auto& [qid, docs] : data.qrels) {
    for (const auto& d : docs) qrels << qid << '\t' << d << "\t1\n";
  }
  write_store(data.model, files.model_embeddings);
  write_store(data.counter_fitted, files.cf_embeddings);
  write_store(data.general, files.general_embeddings);
}

}  // namespace prada
