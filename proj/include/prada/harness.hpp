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

// Experiment orchestration: configuration, target-document sampling, and the
// staged pipeline behind the command-line tool.

#ifndef PRADA_HARNESS_HPP_
#define PRADA_HARNESS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "prada/attack.hpp"
#include "prada/common.hpp"
#include "prada/metrics.hpp"
#include "prada/oracle.hpp"
#include "prada/surrogate.hpp"
#include "prada/synthetic.hpp"

namespace prada {

// Flat "key = value" settings; '#' starts a comment.
class Settings {
 public:
  static Settings parse(std::istream& in, const std::string& origin = "<config>");
  static Settings load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::vector<std::string> registered_methods();

struct ExperimentConfig {
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "out";
  std::size_t threads = 1;

  // Empty data paths select synthetic generation under <out>/data.
  DataFiles data;
  bool synthetic = true;
  SyntheticParams synth;

  double saturation = 4.0;
  TargetConfig target;
  PrfOptions prf;
  SurrogateConfig surrogate;
  double surrogate_init_noise = 0.01;
  std::size_t fidelity_queries = 5;

  AttackConfig attack;
  std::size_t docs_per_query = 9;
  std::size_t baseline_n = 20;
  std::vector<std::string> methods;
  std::vector<double> taus;

  // Unknown keys and malformed values throw.
  static ExperimentConfig from_settings(const Settings& settings);
  void validate() const;
  std::uint64_t seed_value() const;

  std::filesystem::path data_dir() const { return out / "data"; }
  std::filesystem::path checkpoint_dir() const { return out / "checkpoints"; }
  std::filesystem::path attack_dir() const { return out / "attacks"; }
};

// One seeded pick from each of the rank ranges [11,20], [21,30], ...; as many
// ranges as both `per_query` and the list length allow.
std::vector<std::string> pick_target_documents(const RankedList& list,
                                               std::size_t per_query, Rng& rng);

struct LoadedData {
  Corpus corpus;
  QuerySet target_queries;
  QuerySet collection_queries;
  QuerySet eval_queries;
  QuerySet all_queries;
  std::map<std::string, std::vector<std::string>> qrels;
  EmbeddingStore model{"model", 1};
  EmbeddingStore counter_fitted{"counter-fitted", 1};
  EmbeddingStore general{"general", 1};
};

// Stage functions; each reads what earlier stages wrote under config.out.
void stage_generate(const ExperimentConfig& config);
LoadedData stage_load_data(const ExperimentConfig& config);

struct TargetStage {
  std::unique_ptr<TargetOracle> oracle;
  std::vector<double> epoch_losses;
};
TargetStage stage_build_target(const ExperimentConfig& config, const LoadedData& data);
std::unique_ptr<TargetOracle> stage_load_target(const ExperimentConfig& config,
                                                const LoadedData& data);

struct SurrogateStage {
  BilinearRanker ranker;
  PrfDataset dataset;
  std::vector<double> epoch_losses;
  double tau_before = 0.0;  // mean Kendall tau on held-out queries
  double tau_after = 0.0;
  std::uint64_t collection_queries = 0;  // oracle calls spent on PRF
};
SurrogateStage stage_train_surrogate(const ExperimentConfig& config,
                                     const LoadedData& data, const TargetOracle& oracle);
BilinearRanker stage_load_surrogate(const ExperimentConfig& config);

using TargetPicks = std::vector<std::pair<std::string, std::vector<std::string>>>;
TargetPicks stage_pick_targets(const ExperimentConfig& config, const LoadedData& data,
                               const TargetOracle& oracle);

std::vector<AttackResult> stage_attack(const ExperimentConfig& config,
                                       const LoadedData& data, const TargetOracle& oracle,
                                       const BilinearRanker& surrogate,
                                       const TargetPicks& picks,
                                       const std::string& method);

struct Evaluation {
  std::vector<EvalReport> reports;
  std::vector<SpamSweepRow> spam_sweep;
};
Evaluation stage_evaluate(const ExperimentConfig& config, const LoadedData& data,
                          const std::map<std::string, std::vector<AttackResult>>& results);

struct ExperimentOutcome {
  Evaluation evaluation;
  std::map<std::string, std::vector<AttackResult>> results;
  TargetPicks picks;
  double tau_before = 0.0;
  double tau_after = 0.0;
  std::uint64_t attack_phase_queries = 0;  // oracle calls during attacks
};

// Full pipeline; writes report.csv, spam_sweep.csv, attacks/<method>.jsonl
// and checkpoints/ under config.out.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

void write_evaluation(const ExperimentConfig& config, const Evaluation& evaluation);

}  // namespace prada

#endif  // PRADA_HARNESS_HPP_
