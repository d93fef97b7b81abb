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

// Command-line front end for the attack pipeline. Every subcommand reads and
// writes under --out so the stages can be run one at a time.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "prada/harness.hpp"

namespace {

using namespace prada;

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> threads;
  std::vector<std::string> overrides;
};

ExperimentConfig resolve(const GlobalFlags& flags) {
  Settings settings;
  if (!flags.config.empty()) settings = Settings::load(flags.config);
  for (const auto& kv : flags.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error("--set expects key=value, got '" + kv + "'");
    settings.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (flags.seed) settings.set("seed", std::to_string(*flags.seed));
  if (!flags.out.empty()) settings.set("out", flags.out);
  if (flags.threads) settings.set("threads", std::to_string(*flags.threads));
  auto config = ExperimentConfig::from_settings(settings);
  return config;
}

void print_losses(const char* what, const std::vector<double>& losses) {
  for (std::size_t e = 0; e < losses.size(); ++e) {
    std::printf("%s epoch %zu loss %.6f\n", what, e + 1, losses[e]);
  }
}

void print_reports(const Evaluation& ev) {
  std::printf("%-16s %8s %8s %8s %8s\n", "method", "SR", "PP", "SS_doc", "SS_sen");
  for (const auto& r : ev.reports) {
    std::printf("%-16s %8.2f %8.2f %8.2f %8.2f\n", r.method.c_str(), r.sr, r.pp, r.ss_doc,
                r.ss_sen);
  }
}

std::map<std::string, std::vector<AttackResult>> read_logs(const ExperimentConfig& config,
                                                           const LoadedData& data) {
  std::map<std::string, std::vector<AttackResult>> results;
  for (const auto& m : config.methods) {
    const auto path = config.attack_dir() / (m + ".jsonl");
    if (!std::filesystem::exists(path)) continue;
    results.emplace(m, read_attack_log(path, data.corpus, m));
  }
  if (results.empty()) {
    throw Error("no attack logs under " + config.attack_dir().string());
  }
  return results;
}

// Wraps a stage so failures carry its name and map to exit status 1.
template <typename F>
int run_stage(const char* name, const GlobalFlags& flags, F&& body) {
  try {
    auto config = resolve(flags);
    config.validate();
    body(config);
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "prada %s: %s\n", name, e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision-based word substitution attacks on a toy ranking model"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags flags;
  app.add_option("--config", flags.config, "Key-value configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "Random seed (required, here or in the config)");
  app.add_option("--out", flags.out, "Output directory");
  app.add_option("--threads", flags.threads, "Attack worker threads");
  app.add_option("--set", flags.overrides, "Override a config key (key=value)");
  app.add_flag_callback("--quiet", [] { set_warnings_enabled(false); },
                        "Suppress warnings");

  auto* gen = app.add_subcommand("gen-corpus", "Write the synthetic dataset");
  auto* target = app.add_subcommand("build-target", "Train the hidden target ranker");
  auto* surrogate =
      app.add_subcommand("train-surrogate", "Collect PRF labels and fit the surrogate");
  auto* attack = app.add_subcommand("attack", "Attack the picked target documents");
  std::string method = "all";
  attack->add_option("--method", method, "Method name or 'all'");
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score the attack logs");
  auto* spam = app.add_subcommand("detect-spam", "Spam-detection sweep over the logs");
  std::vector<double> taus;
  spam->add_option("--tau", taus, "Thresholds (default: config grid)");
  auto* report = app.add_subcommand("report", "Run every stage end to end");

  CLI11_PARSE(app, argc, argv);

  if (*gen) {
    return run_stage("gen-corpus", flags, [](const ExperimentConfig& c) {
      stage_generate(c);
      std::printf("wrote %s\n", c.data_dir().string().c_str());
    });
  }
  if (*target) {
    return run_stage("build-target", flags, [](const ExperimentConfig& c) {
      const auto data = stage_load_data(c);
      const auto t = stage_build_target(c, data);
      print_losses("target", t.epoch_losses);
      std::printf("wrote %s\n", (c.checkpoint_dir() / "target.ckpt").string().c_str());
    });
  }
  if (*surrogate) {
    return run_stage("train-surrogate", flags, [](const ExperimentConfig& c) {
      const auto data = stage_load_data(c);
      const auto oracle = stage_load_target(c, data);
      const auto s = stage_train_surrogate(c, data, *oracle);
      print_losses("surrogate", s.epoch_losses);
      std::printf("prf triples %zu, oracle calls %llu\n", s.dataset.triples.size(),
                  static_cast<unsigned long long>(s.collection_queries));
      std::printf("kendall tau before %.4f after %.4f\n", s.tau_before, s.tau_after);
    });
  }
  if (*attack) {
    return run_stage("attack", flags, [&method](ExperimentConfig c) {
      if (method != "all") c.methods = {method};
      c.validate();
      const auto data = stage_load_data(c);
      const auto oracle = stage_load_target(c, data);
      const auto ranker = stage_load_surrogate(c);
      const auto picks = stage_pick_targets(c, data, *oracle);
      std::filesystem::create_directories(c.attack_dir());
      for (const auto& m : c.methods) {
        const auto before = oracle->query_count();
        const auto results = stage_attack(c, data, *oracle, ranker, picks, m);
        write_attack_log(results, c.attack_dir() / (m + ".jsonl"));
        std::printf("%-16s %zu attacks, SR %.2f, oracle calls %llu\n", m.c_str(),
                    results.size(), success_rate(results),
                    static_cast<unsigned long long>(oracle->query_count() - before));
      }
    });
  }
  if (*evaluate_cmd) {
    return run_stage("evaluate", flags, [](const ExperimentConfig& c) {
      const auto data = stage_load_data(c);
      const auto ev = stage_evaluate(c, data, read_logs(c, data));
      write_evaluation(c, ev);
      print_reports(ev);
    });
  }
  if (*spam) {
    return run_stage("detect-spam", flags, [&taus](ExperimentConfig c) {
      if (!taus.empty()) c.taus = taus;
      c.validate();
      const auto data = stage_load_data(c);
      const auto ev = stage_evaluate(c, data, read_logs(c, data));
      std::ofstream out(c.out / "spam_sweep.csv", std::ios::binary);
      write_spam_sweep_csv(ev.spam_sweep, out);
      for (const auto& row : ev.spam_sweep) {
        std::printf("tau %.3f %-16s %6.2f\n", row.tau, row.method.c_str(),
                    row.detection_rate);
      }
    });
  }
  if (*report) {
    return run_stage("report", flags, [](const ExperimentConfig& c) {
      const auto outcome = run_experiment(c);
      print_reports(outcome.evaluation);
      std::printf("kendall tau before %.4f after %.4f\n", outcome.tau_before,
                  outcome.tau_after);
    });
  }
  return 0;
}
