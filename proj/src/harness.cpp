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

#include "prada/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "prada/baselines.hpp"
#include "prada/common.hpp"

namespace prada {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || p != value.data() + value.size()) {
    throw Error("config: '" + key + "' expects a number, got '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error("config: '" + key + "' expects true/false, got '" + value + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

template <typename T>
Setter number(T ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
    c.*field = parse_number<T>(k, v);
  };
}

template <typename S, typename T>
Setter nested(S ExperimentConfig::*outer, T S::*field) {
  return [outer, field](ExperimentConfig& c, const std::string& k, const std::string& v) {
    if constexpr (std::is_same_v<T, bool>) {
      (c.*outer).*field = parse_bool(k, v);
    } else {
      (c.*outer).*field = parse_number<T>(k, v);
    }
  };
}

Setter path(std::filesystem::path DataFiles::*field) {
  return [field](ExperimentConfig& c, const std::string&, const std::string& v) {
    c.data.*field = v;
    c.synthetic = false;
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.seed = parse_number<std::uint64_t>(k, v);
       }},
      {"out", [](ExperimentConfig& c, const std::string&, const std::string& v) {
         c.out = v;
       }},
      {"threads", number(&ExperimentConfig::threads)},
      {"data.corpus", path(&DataFiles::corpus)},
      {"data.target_queries", path(&DataFiles::target_queries)},
      {"data.collection_queries", path(&DataFiles::collection_queries)},
      {"data.eval_queries", path(&DataFiles::eval_queries)},
      {"data.qrels", path(&DataFiles::qrels)},
      {"data.model_embeddings", path(&DataFiles::model_embeddings)},
      {"data.cf_embeddings", path(&DataFiles::cf_embeddings)},
      {"data.general_embeddings", path(&DataFiles::general_embeddings)},
      {"synth.docs", nested(&ExperimentConfig::synth, &SyntheticParams::num_docs)},
      {"synth.vocab", nested(&ExperimentConfig::synth, &SyntheticParams::vocab_size)},
      {"synth.topics", nested(&ExperimentConfig::synth, &SyntheticParams::num_topics)},
      {"synth.doc_length", nested(&ExperimentConfig::synth, &SyntheticParams::doc_length_mean)},
      {"synth.target_queries",
       nested(&ExperimentConfig::synth, &SyntheticParams::target_queries)},
      {"synth.collection_queries",
       nested(&ExperimentConfig::synth, &SyntheticParams::collection_queries)},
      {"synth.eval_queries", nested(&ExperimentConfig::synth, &SyntheticParams::eval_queries)},
      {"synth.dim", nested(&ExperimentConfig::synth, &SyntheticParams::dim)},
      {"synth.cf_dim", nested(&ExperimentConfig::synth, &SyntheticParams::cf_dim)},
      {"synth.topical_vocab_fraction",
       nested(&ExperimentConfig::synth, &SyntheticParams::topical_vocab_fraction)},
      {"synth.topical_token_rate",
       nested(&ExperimentConfig::synth, &SyntheticParams::topical_token_rate)},
      {"synth.synonym_frequency_decay",
       nested(&ExperimentConfig::synth, &SyntheticParams::synonym_frequency_decay)},
      {"synth.background_scale",
       nested(&ExperimentConfig::synth, &SyntheticParams::background_scale)},
      {"model.saturation", number(&ExperimentConfig::saturation)},
      {"oracle.N", nested(&ExperimentConfig::target, &TargetConfig::list_length)},
      {"oracle.epochs", nested(&ExperimentConfig::target, &TargetConfig::epochs)},
      {"oracle.lr", nested(&ExperimentConfig::target, &TargetConfig::learning_rate)},
      {"oracle.negatives", nested(&ExperimentConfig::target, &TargetConfig::negatives)},
      {"oracle.init_noise", nested(&ExperimentConfig::target, &TargetConfig::init_noise)},
      {"oracle.embedding_lr",
       nested(&ExperimentConfig::target, &TargetConfig::embedding_learning_rate)},
      {"oracle.plateau_tolerance",
       nested(&ExperimentConfig::target, &TargetConfig::plateau_tolerance)},
      {"oracle.margin", nested(&ExperimentConfig::target, &TargetConfig::margin)},
      {"surrogate.margin", nested(&ExperimentConfig::surrogate, &SurrogateConfig::margin)},
      {"surrogate.k", nested(&ExperimentConfig::prf, &PrfOptions::k)},
      {"surrogate.negatives",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v == "all") {
           c.prf.negatives.reset();
         } else {
           c.prf.negatives = parse_number<std::size_t>(k, v);
         }
       }},
      {"surrogate.epochs", nested(&ExperimentConfig::surrogate, &SurrogateConfig::epochs)},
      {"surrogate.lr", nested(&ExperimentConfig::surrogate, &SurrogateConfig::learning_rate)},
      {"surrogate.embedding_lr",
       nested(&ExperimentConfig::surrogate, &SurrogateConfig::embedding_learning_rate)},
      {"surrogate.init_noise", number(&ExperimentConfig::surrogate_init_noise)},
      {"surrogate.fidelity_queries", number(&ExperimentConfig::fidelity_queries)},
      {"attack.m", nested(&ExperimentConfig::attack, &AttackConfig::max_tokens)},
      {"attack.S", nested(&ExperimentConfig::attack, &AttackConfig::max_synonyms)},
      {"attack.lambda", nested(&ExperimentConfig::attack, &AttackConfig::min_synonym_cosine)},
      {"attack.epsilon", nested(&ExperimentConfig::attack, &AttackConfig::min_doc_similarity)},
      {"attack.alpha", nested(&ExperimentConfig::attack, &AttackConfig::step_size)},
      {"attack.eta", nested(&ExperimentConfig::attack, &AttackConfig::iterations)},
      {"attack.beta", nested(&ExperimentConfig::attack, &AttackConfig::margin)},
      {"attack.normalization",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v == "squared") {
           c.attack.normalization = StepNormalization::kSquaredNorm;
         } else if (v == "plain") {
           c.attack.normalization = StepNormalization::kNorm;
         } else {
           throw Error("config: '" + k + "' expects squared|plain, got '" + v + "'");
         }
       }},
      {"attack.docs_per_query", number(&ExperimentConfig::docs_per_query)},
      {"baseline.n", number(&ExperimentConfig::baseline_n)},
      {"methods", [](ExperimentConfig& c, const std::string&, const std::string& v) {
         c.methods = split_list(v);
       }},
      {"spam.taus", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.taus.clear();
         for (const auto& t : split_list(v)) c.taus.push_back(parse_number<double>(k, t));
       }},
  };
  return table;
}

bool is_prada_variant(const std::string& method, AttackVariant& variant) {
  for (auto v : {AttackVariant::kFull, AttackVariant::kNoTir, AttackVariant::kNoEsp,
                 AttackVariant::kNoIwr, AttackVariant::kNoEspIwr}) {
    if (method == variant_name(v)) {
      variant = v;
      return true;
    }
  }
  return false;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
}

std::map<std::string, TokenSeq> tokenized(const TextCollection& texts) {
  std::map<std::string, TokenSeq> out;
  for (const auto& t : texts.items()) out.emplace(t.id, tokenize(t.text, t.id));
  return out;
}

}  // namespace

Settings Settings::parse(std::istream& in, const std::string& origin) {
  Settings s;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw Error("config " + origin + ":" + std::to_string(line_no) +
                  ": expected key = value");
    }
    s.set(trim(std::string_view(text).substr(0, eq)),
          trim(std::string_view(text).substr(eq + 1)));
  }
  return s;
}

Settings Settings::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  return parse(in, path.string());
}

std::vector<std::string> registered_methods() {
  std::vector<std::string> out;
  for (auto v : {AttackVariant::kFull, AttackVariant::kNoTir, AttackVariant::kNoEsp,
                 AttackVariant::kNoIwr, AttackVariant::kNoEspIwr}) {
    out.emplace_back(variant_name(v));
  }
  for (auto& b : baseline_names()) out.push_back(std::move(b));
  return out;
}

ExperimentConfig ExperimentConfig::from_settings(const Settings& settings) {
  ExperimentConfig c;
  c.methods = registered_methods();
  c.taus = default_tau_grid();
  bool n_given = false;
  for (const auto& [key, value] : settings.values()) {
    auto it = setters().find(key);
    if (it == setters().end()) throw Error("config: unknown key '" + key + "'");
    it->second(c, key, value);
    n_given |= key == "baseline.n";
  }
  if (!n_given) c.baseline_n = c.attack.max_tokens;
  if (!c.synthetic) {
    const auto& d = c.data;
    for (const auto* p : {&d.corpus, &d.target_queries, &d.collection_queries,
                          &d.eval_queries, &d.qrels, &d.model_embeddings,
                          &d.cf_embeddings, &d.general_embeddings}) {
      if (p->empty()) {
        throw Error("config: when any data.* path is given, all eight are required");
      }
    }
  } else {
    c.data = DataFiles::in(c.data_dir());
  }
  const auto seed = c.seed.value_or(0);
  c.target.saturation = c.saturation;
  c.target.seed = derive_seed(seed, "target");
  c.prf.seed = derive_seed(seed, "prf");
  c.prf.list_length = c.target.list_length;
  c.surrogate.seed = derive_seed(seed, "surrogate");
  if (!settings.has("surrogate.margin")) c.surrogate.margin = c.attack.margin;
  if (!settings.has("oracle.margin")) c.target.margin = c.attack.margin;
  c.attack.seed = seed;
  return c;
}

void ExperimentConfig::validate() const {
  if (!seed) throw Error("config: seed is required");
  const auto known = registered_methods();
  if (methods.empty()) throw Error("config: no methods selected");
  for (const auto& m : methods) {
    if (std::find(known.begin(), known.end(), m) == known.end()) {
      throw Error("config: unknown method '" + m + "'");
    }
  }
  if (threads < 1) throw Error("config: threads must be at least 1");
  if (docs_per_query < 1) throw Error("config: docs_per_query must be at least 1");
  if (baseline_n < 1) throw Error("config: baseline.n must be at least 1");
  for (double t : taus) {
    if (t < 0.0 || t > 1.0) throw Error("config: spam taus must lie in [0, 1]");
  }
  attack.validate();
  if (synthetic) {
    synth.validate();
  } else {
    for (const auto* p : {&data.corpus, &data.target_queries, &data.collection_queries,
                          &data.eval_queries, &data.qrels, &data.model_embeddings,
                          &data.cf_embeddings, &data.general_embeddings}) {
      if (!std::filesystem::exists(*p)) throw Error("config: missing file " + p->string());
    }
  }
}

std::uint64_t ExperimentConfig::seed_value() const {
  if (!seed) throw Error("config: seed is required");
  return *seed;
}

std::vector<std::string> pick_target_documents(const RankedList& list,
                                               std::size_t per_query, Rng& rng) {
  const std::size_t ranges = std::min(per_query, list.size() / 10 - (list.size() >= 10));
  if (list.size() < 20 || ranges == 0) {
    throw Error("ranked list for '" + list.query_id + "' too short (" +
                std::to_string(list.size()) + ") to pick targets below rank 10");
  }
  std::vector<std::string> picks;
  std::uniform_int_distribution<std::size_t> offset(0, 9);
  for (std::size_t r = 1; r <= ranges; ++r) {
    picks.push_back(list.doc_ids[10 * r + offset(rng)]);
  }
  return picks;
}

void stage_generate(const ExperimentConfig& config) {
  if (!config.synthetic) throw Error("gen-corpus: config names external data files");
  ensure_dir(config.data_dir());
  write_synthetic(generate_synthetic_corpus(config.synth, config.seed_value()), config.data);
}

LoadedData stage_load_data(const ExperimentConfig& config) {
  const auto& f = config.data;
  LoadedData d;
  d.corpus = load_corpus(f.corpus);
  d.target_queries = load_corpus(f.target_queries);
  d.collection_queries = load_corpus(f.collection_queries);
  d.eval_queries = load_corpus(f.eval_queries);
  std::vector<Query> all;
  for (const auto* set : {&d.target_queries, &d.collection_queries, &d.eval_queries}) {
    all.insert(all.end(), set->items().begin(), set->items().end());
  }
  d.all_queries = QuerySet(std::move(all));
  d.qrels = load_qrels(f.qrels);
  d.model = load_embeddings(f.model_embeddings, "model");
  d.counter_fitted = load_embeddings(f.cf_embeddings, "counter-fitted");
  d.general = load_embeddings(f.general_embeddings, "general");
  return d;
}

TargetStage stage_build_target(const ExperimentConfig& config, const LoadedData& data) {
  std::vector<Query> served = data.collection_queries.items();
  served.insert(served.end(), data.eval_queries.items().begin(),
                data.eval_queries.items().end());
  auto training = build_target(data.corpus, data.target_queries, data.qrels,
                               QuerySet(std::move(served)), data.model, config.target);
  ensure_dir(config.checkpoint_dir());
  save_oracle(*training.oracle, config.checkpoint_dir() / "target.ckpt",
              config.checkpoint_dir() / "pools.json");
  return {std::move(training.oracle), std::move(training.epoch_losses)};
}

std::unique_ptr<TargetOracle> stage_load_target(const ExperimentConfig& config,
                                                const LoadedData& data) {
  return load_oracle(config.checkpoint_dir() / "target.ckpt",
                     config.checkpoint_dir() / "pools.json", data.corpus,
                     data.all_queries);
}

namespace {

double mean_fidelity(const ExperimentConfig& config, const LoadedData& data,
                     const TargetOracle& oracle, const BilinearRanker& ranker) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& q : data.eval_queries.items()) {
    if (n == config.fidelity_queries) break;
    if (!oracle.has_query(q.id)) continue;
    const auto list = oracle.ranked_list(q.id);
    const auto mine =
        rank_candidates(tokenize(q.text, q.id), list.doc_ids, data.corpus, ranker);
    sum += kendall_tau(list.doc_ids, mine);
    ++n;
  }
  if (n == 0) throw Error("no held-out queries for surrogate fidelity");
  return sum / static_cast<double>(n);
}

}  // namespace

SurrogateStage stage_train_surrogate(const ExperimentConfig& config,
                                     const LoadedData& data, const TargetOracle& oracle) {
  auto init = BilinearRanker::near_identity(
      data.model, derive_seed(config.seed_value(), "surrogate-init"),
      config.surrogate_init_noise, config.saturation);
  const double tau_before = mean_fidelity(config, data, oracle, init);

  std::vector<std::string> ids;
  for (const auto& q : data.collection_queries.items()) ids.push_back(q.id);
  const auto before = oracle.query_count();
  auto dataset = collect_prf_labels(oracle, ids, config.prf);
  const auto spent = oracle.query_count() - before;
  auto trained = train_surrogate(dataset.triples, data.corpus, data.collection_queries,
                                 std::move(init), config.surrogate);
  const double tau_after = mean_fidelity(config, data, oracle, trained.ranker);

  ensure_dir(config.checkpoint_dir());
  save_ranker(trained.ranker, config.checkpoint_dir() / "surrogate.ckpt");
  save_prf(dataset, config.checkpoint_dir() / "prf.tsv");
  return {std::move(trained.ranker), std::move(dataset), std::move(trained.epoch_losses),
          tau_before, tau_after, spent};
}

BilinearRanker stage_load_surrogate(const ExperimentConfig& config) {
  return load_ranker(config.checkpoint_dir() / "surrogate.ckpt");
}

TargetPicks stage_pick_targets(const ExperimentConfig& config, const LoadedData& data,
                               const TargetOracle& oracle) {
  TargetPicks picks;
  for (const auto& q : data.eval_queries.items()) {
    if (!oracle.has_query(q.id)) continue;
    Rng rng(derive_seed(config.seed_value(), "picks", q.id));
    picks.emplace_back(q.id,
                       pick_target_documents(oracle.ranked_list(q.id),
                                             config.docs_per_query, rng));
  }
  if (picks.empty()) throw Error("no evaluation query is served by the target");
  return picks;
}

std::vector<AttackResult> stage_attack(const ExperimentConfig& config,
                                       const LoadedData& data, const TargetOracle& oracle,
                                       const BilinearRanker& surrogate,
                                       const TargetPicks& picks,
                                       const std::string& method) {
  AttackVariant variant{};
  const bool prada = is_prada_variant(method, variant);
  if (!prada && !parse_baseline(method)) throw Error("unknown method '" + method + "'");

  std::vector<std::pair<std::string, std::string>> jobs;
  for (const auto& [qid, docs] : picks) {
    for (const auto& d : docs) jobs.emplace_back(qid, d);
  }
  const AttackEnvironment env{oracle, surrogate, data.counter_fitted,
                              data.general, data.corpus, data.all_queries};
  const auto stats = CorpusStats::from(data.corpus);
  std::vector<AttackResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::string> failures(jobs.size());
  auto worker = [&] {
    for (auto i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
      const auto& [qid, did] = jobs[i];
      try {
        results[i] = prada ? prada_attack(env, qid, did, config.attack, variant)
                           : run_baseline(env, method, qid, did, config.baseline_n, stats,
                                          config.seed_value());
      } catch (const Error& e) {
        failures[i] = e.what();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < config.threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!failures[i].empty()) {
      throw Error("attack stage (" + method + ", " + jobs[i].first + ", " +
                  jobs[i].second + "): " + failures[i]);
    }
  }
  return results;
}

Evaluation stage_evaluate(const ExperimentConfig& config, const LoadedData& data,
                          const std::map<std::string, std::vector<AttackResult>>& results) {
  const auto originals = tokenized(data.corpus);
  const auto queries = tokenized(data.all_queries);
  Evaluation ev;
  for (const auto& m : config.methods) {
    auto it = results.find(m);
    if (it == results.end() || it->second.empty()) continue;
    ev.reports.push_back(evaluate(m, it->second, originals, data.general));
  }
  for (double tau : config.taus) {
    for (const auto& m : config.methods) {
      auto it = results.find(m);
      if (it == results.end() || it->second.empty()) continue;
      ev.spam_sweep.push_back({tau, m, detection_rate(it->second, queries, tau)});
    }
  }
  return ev;
}

void write_evaluation(const ExperimentConfig& config, const Evaluation& evaluation) {
  ensure_dir(config.out);
  {
    std::ofstream out(config.out / "report.csv", std::ios::binary);
    if (!out) throw Error("cannot write report.csv");
    write_report_csv(evaluation.reports, out);
  }
  std::ofstream out(config.out / "spam_sweep.csv", std::ios::binary);
  if (!out) throw Error("cannot write spam_sweep.csv");
  write_spam_sweep_csv(evaluation.spam_sweep, out);
}

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
  config.validate();
  auto stage = [](const char* name, auto&& fn) -> decltype(fn()) {
    try {
      return fn();
    } catch (const Error& e) {
      throw Error(std::string("[") + name + "] " + e.what());
    }
  };

  if (config.synthetic) stage("gen-corpus", [&] { stage_generate(config); return 0; });
  const auto data = stage("load", [&] { return stage_load_data(config); });
  auto target = stage("build-target", [&] { return stage_build_target(config, data); });
  const auto& oracle = *target.oracle;
  auto surrogate =
      stage("train-surrogate", [&] { return stage_train_surrogate(config, data, oracle); });

  ExperimentOutcome outcome;
  outcome.tau_before = surrogate.tau_before;
  outcome.tau_after = surrogate.tau_after;
  outcome.picks = stage("attack", [&] { return stage_pick_targets(config, data, oracle); });

  ensure_dir(config.attack_dir());
  const auto start = oracle.query_count();
  for (const auto& m : config.methods) {
    auto results = stage("attack", [&] {
      return stage_attack(config, data, oracle, surrogate.ranker, outcome.picks, m);
    });
    write_attack_log(results, config.attack_dir() / (m + ".jsonl"));
    outcome.results.emplace(m, std::move(results));
  }
  outcome.attack_phase_queries = oracle.query_count() - start;

  outcome.evaluation =
      stage("evaluate", [&] { return stage_evaluate(config, data, outcome.results); });
  write_evaluation(config, outcome.evaluation);
  return outcome;
}

}  // namespace prada
