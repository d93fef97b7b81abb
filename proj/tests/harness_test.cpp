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


#include <gtest/gtest.h>

#include <sstream>

#include "prada/harness.hpp"
#include "test_support.hpp"

namespace prada {
namespace {

Settings parse(const std::string& text) {
  std::istringstream in(text);
  return Settings::parse(in);
}

TEST(Settings, ParsesKeyValueLines) {
  auto s = parse("# comment\nseed = 7\n\n  attack.m=5   # trailing\nmethods = prada, ts_rep\n");
  EXPECT_EQ(s.values().size(), 3u);
  EXPECT_EQ(s.values().at("seed"), "7");
  EXPECT_EQ(s.values().at("attack.m"), "5");
  EXPECT_EQ(s.values().at("methods"), "prada, ts_rep");
}

TEST(Settings, MissingEqualsNamesTheLine) {
  try {
    parse("seed = 1\nbroken line\n");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
  }
}

TEST(Settings, LoadFromFile) {
  testing::TempDir dir("settings");
  testing::write_file(dir / "c.cfg", "seed = 3\n");
  EXPECT_EQ(Settings::load(dir / "c.cfg").values().at("seed"), "3");
  EXPECT_THROW(Settings::load(dir / "missing.cfg"), Error);
}

TEST(ExperimentConfig, DefaultsAndOverrides) {
  auto c = ExperimentConfig::from_settings(parse("seed = 4\nattack.m = 7\nattack.beta = 2\n"));
  EXPECT_EQ(*c.seed, 4u);
  EXPECT_TRUE(c.synthetic);
  EXPECT_EQ(c.methods, registered_methods());
  EXPECT_EQ(c.taus, default_tau_grid());
  EXPECT_EQ(c.attack.max_tokens, 7u);
  EXPECT_EQ(c.baseline_n, 7u);
  EXPECT_EQ(c.surrogate.margin, 2.0);
  EXPECT_EQ(c.target.margin, 2.0);
  EXPECT_EQ(c.data.corpus, c.out / "data" / "corpus.jsonl");
  EXPECT_NO_THROW(c.validate());

  auto d = ExperimentConfig::from_settings(
      parse("seed = 4\nbaseline.n = 3\nsurrogate.negatives = all\nattack.normalization = plain\n"
            "oracle.embedding_lr = 0.05\n"));
  EXPECT_EQ(d.baseline_n, 3u);
  EXPECT_FALSE(d.prf.negatives.has_value());
  EXPECT_EQ(d.attack.normalization, StepNormalization::kNorm);
  EXPECT_EQ(d.target.embedding_learning_rate, 0.05);
}

TEST(ExperimentConfig, RejectsBadInput) {
  EXPECT_THROW(ExperimentConfig::from_settings(parse("seed = 1\nattack.mm = 3\n")), Error);
  EXPECT_THROW(ExperimentConfig::from_settings(parse("seed = x\n")), Error);
  EXPECT_THROW(ExperimentConfig::from_settings(parse("attack.normalization = l1\n")), Error);
  EXPECT_THROW(ExperimentConfig::from_settings(parse("data.corpus = c.jsonl\n")), Error);

  auto no_seed = ExperimentConfig::from_settings(parse("attack.m = 3\n"));
  EXPECT_THROW(no_seed.validate(), Error);
  EXPECT_THROW(no_seed.seed_value(), Error);

  auto unknown = ExperimentConfig::from_settings(parse("seed = 1\nmethods = prada, magic\n"));
  try {
    unknown.validate();
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos);
  }
  auto zero_m = ExperimentConfig::from_settings(parse("seed = 1\nattack.m = 0\n"));
  EXPECT_THROW(zero_m.validate(), Error);
  auto bad_tau = ExperimentConfig::from_settings(parse("seed = 1\nspam.taus = 0.1, 2\n"));
  EXPECT_THROW(bad_tau.validate(), Error);
}

TEST(ExperimentConfig, ExternalDataNeedsAllEightExistingFiles) {
  testing::TempDir dir("external");
  const auto files = DataFiles::in(dir.path());
  std::string text = "seed = 1\n";
  const std::vector<std::pair<std::string, std::filesystem::path>> keys = {
      {"data.corpus", files.corpus},
      {"data.target_queries", files.target_queries},
      {"data.collection_queries", files.collection_queries},
      {"data.eval_queries", files.eval_queries},
      {"data.qrels", files.qrels},
      {"data.model_embeddings", files.model_embeddings},
      {"data.cf_embeddings", files.cf_embeddings},
      {"data.general_embeddings", files.general_embeddings}};
  for (std::size_t i = 0; i < keys.size(); ++i) {
    text += keys[i].first + " = " + keys[i].second.string() + "\n";
    if (i + 1 < keys.size()) {
      EXPECT_THROW(ExperimentConfig::from_settings(parse(text)), Error);
    }
  }
  auto c = ExperimentConfig::from_settings(parse(text));
  EXPECT_FALSE(c.synthetic);
  EXPECT_THROW(c.validate(), Error);
  SyntheticParams p;
  p.num_docs = 20;
  p.vocab_size = 80;
  p.num_topics = 2;
  write_synthetic(generate_synthetic_corpus(p, 1), files);
  EXPECT_NO_THROW(c.validate());
}

RankedList numbered_list(std::size_t n) {
  RankedList list;
  list.query_id = "q";
  for (std::size_t i = 1; i <= n; ++i) list.doc_ids.push_back("d" + std::to_string(i));
  return list;
}

std::size_t rank_in(const RankedList& list, const std::string& id) {
  return std::find(list.doc_ids.begin(), list.doc_ids.end(), id) - list.doc_ids.begin() + 1;
}

TEST(PickTargets, OnePickPerDecileBelowTheTopTen) {
  const auto list = numbered_list(100);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    auto picks = pick_target_documents(list, 9, rng);
    ASSERT_EQ(picks.size(), 9u);
    for (std::size_t i = 0; i < picks.size(); ++i) {
      const auto r = rank_in(list, picks[i]);
      EXPECT_GE(r, 10 * (i + 1) + 1);
      EXPECT_LE(r, 10 * (i + 2));
    }
  }
}

TEST(PickTargets, ScaledDownList) {
  const auto list = numbered_list(30);
  Rng rng(3);
  auto picks = pick_target_documents(list, 9, rng);
  ASSERT_EQ(picks.size(), 2u);
  EXPECT_GE(rank_in(list, picks[0]), 11u);
  EXPECT_LE(rank_in(list, picks[0]), 20u);
  EXPECT_GE(rank_in(list, picks[1]), 21u);
  EXPECT_LE(rank_in(list, picks[1]), 30u);
}

TEST(PickTargets, FewerPicksThanDeciles) {
  const auto list = numbered_list(100);
  Rng rng(3);
  auto picks = pick_target_documents(list, 3, rng);
  ASSERT_EQ(picks.size(), 3u);
  EXPECT_LE(rank_in(list, picks[2]), 40u);
}

TEST(PickTargets, SeededAndShortListsRejected) {
  const auto list = numbered_list(60);
  Rng a(8), b(8);
  EXPECT_EQ(pick_target_documents(list, 5, a), pick_target_documents(list, 5, b));
  Rng rng(1);
  EXPECT_THROW(pick_target_documents(numbered_list(15), 9, rng), Error);
}

ExperimentConfig toy_config(const std::filesystem::path& out, const std::string& extra = "") {
  auto c = ExperimentConfig::from_settings(
      parse("seed = 2\nmethods = prada, ts_rep\nattack.docs_per_query = 3\n" + extra));
  c.out = out;
  c.data = DataFiles::in(c.data_dir());
  return c;
}

TEST(RunExperiment, TwoMethodsAreDeterministic) {
  testing::TempDir dir("run");
  auto first = run_experiment(toy_config(dir / "a"));
  ASSERT_EQ(first.evaluation.reports.size(), 2u);
  EXPECT_EQ(first.evaluation.reports[0].method, "prada");
  EXPECT_EQ(first.evaluation.reports[1].method, "ts_rep");
  for (const auto& r : first.evaluation.reports) {
    EXPECT_GT(r.sr, 0.0) << r.method;
    EXPECT_EQ(r.docs_per_query, 3u);
  }
  EXPECT_EQ(first.evaluation.spam_sweep.size(), 2 * default_tau_grid().size());

  // Every logged pair comes from the picks, and no pick sits in the top ten.
  std::set<std::pair<std::string, std::string>> picked;
  for (const auto& [qid, docs] : first.picks) {
    for (const auto& d : docs) picked.emplace(qid, d);
  }
  for (const auto& [method, results] : first.results) {
    for (const auto& r : results) {
      EXPECT_TRUE(picked.count({r.query_id, r.doc_id}));
      EXPECT_GT(r.rank_before, 10);
    }
  }

  for (const auto* name : {"report.csv", "spam_sweep.csv", "attacks/prada.jsonl",
                           "attacks/ts_rep.jsonl"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "a" / name)) << name;
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "a" / "checkpoints"));

  run_experiment(toy_config(dir / "b"));
  for (const auto* name : {"report.csv", "spam_sweep.csv", "attacks/prada.jsonl",
                           "attacks/ts_rep.jsonl"}) {
    EXPECT_EQ(testing::read_file(dir / "a" / name), testing::read_file(dir / "b" / name))
        << name;
  }
}

TEST(RunExperiment, StageFailuresAreTagged) {
  testing::TempDir dir("tagged");
  auto c = toy_config(dir / "x", "oracle.N = 15\n");
  try {
    run_experiment(c);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("[", 0), 0u) << e.what();
  }
}

}  // namespace
}  // namespace prada
