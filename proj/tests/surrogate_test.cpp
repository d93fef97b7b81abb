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

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>

#include "prada/harness.hpp"
#include "prada/surrogate.hpp"
#include "prada/training.hpp"
#include "test_support.hpp"

namespace prada {
namespace {

using testing::TempDir;

// Documents "a".."z" scored by their position in `order` under query "q".
struct ListedOracle {
  Corpus corpus;
  QuerySet queries;
  std::unique_ptr<TargetOracle> oracle;
};

ListedOracle listed_oracle(const std::vector<std::string>& order) {
  EmbeddingStore s("model", 2);
  s.insert("q", Eigen::Vector2d(1, 0));
  std::vector<Document> docs;
  for (std::size_t i = 0; i < order.size(); ++i) {
    s.insert("t" + order[i], Eigen::Vector2d(static_cast<double>(order.size() - i), 0));
    docs.push_back({order[i], "t" + order[i]});
  }
  ListedOracle l;
  l.corpus = Corpus(docs);
  l.queries = QuerySet(std::vector<Document>{{"q1", "q"}});
  l.oracle = std::make_unique<TargetOracle>(
      BilinearRanker(std::move(s), Eigen::Matrix2d::Identity()), l.corpus, l.queries,
      CandidatePools{{"q1", order}});
  return l;
}

TEST(CollectPrf, TopOneAgainstTheRest) {
  auto l = listed_oracle({"a", "b", "c"});
  std::vector<std::string> ids = {"q1"};
  PrfOptions opt;
  opt.k = 1;
  opt.list_length = 3;
  opt.negatives = std::nullopt;
  PrfDataset ds = collect_prf_labels(*l.oracle, ids, opt);
  EXPECT_EQ(ds.triples, (std::vector<PrfTriple>{{"q1", "a", "b"}, {"q1", "a", "c"}}));
  EXPECT_EQ(l.oracle->query_count(), 1u);
}

TEST(CollectPrf, CrossProductOfTopTwo) {
  auto l = listed_oracle({"a", "b", "c", "d"});
  std::vector<std::string> ids = {"q1"};
  PrfOptions opt;
  opt.k = 2;
  opt.list_length = 4;
  opt.negatives = std::nullopt;
  PrfDataset ds = collect_prf_labels(*l.oracle, ids, opt);
  EXPECT_EQ(ds.triples.size(), 4u);
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& t : ds.triples) pairs.emplace(t.positive, t.negative);
  EXPECT_EQ(pairs, (std::set<std::pair<std::string, std::string>>{
                       {"a", "c"}, {"a", "d"}, {"b", "c"}, {"b", "d"}}));
}

TEST(CollectPrf, CutoffMustLieBelowListLength) {
  auto l = listed_oracle({"a", "b"});
  std::vector<std::string> ids = {"q1"};
  PrfOptions opt;
  opt.list_length = 2;
  opt.k = 2;
  EXPECT_THROW(collect_prf_labels(*l.oracle, ids, opt), Error);
  opt.k = 0;
  EXPECT_THROW(collect_prf_labels(*l.oracle, ids, opt), Error);
}

TEST(CollectPrf, UnservedQueryIsSkipped) {
  set_warnings_enabled(false);
  auto l = listed_oracle({"a", "b", "c"});
  std::vector<std::string> ids = {"nope", "q1"};
  PrfOptions opt;
  opt.list_length = 3;
  PrfDataset ds = collect_prf_labels(*l.oracle, ids, opt);
  EXPECT_EQ(ds.lists.size(), 1u);
  EXPECT_EQ(l.oracle->query_count(), 1u);
}

TEST(PrfFile, RoundTrips) {
  TempDir dir("prf");
  PrfDataset ds;
  ds.triples = {{"q1", "a", "b"}, {"q2", "c", "d"}};
  save_prf(ds, dir / "prf.tsv");
  EXPECT_EQ(load_prf(dir / "prf.tsv"), ds.triples);
}

TEST(TrainSurrogate, SatisfiedMarginsLeaveParametersUnchanged) {
  auto l = listed_oracle({"a", "b", "c"});
  std::vector<PrfTriple> triples = {{"q1", "a", "c"}};  // scores 3 vs 1, margin 1
  EmbeddingStore s("model", 2);
  s.insert("q", Eigen::Vector2d(1, 0));
  s.insert("ta", Eigen::Vector2d(3, 0));
  s.insert("tb", Eigen::Vector2d(2, 0));
  s.insert("tc", Eigen::Vector2d(1, 0));
  BilinearRanker ranker(s, Eigen::Matrix2d::Identity());
  SurrogateConfig cfg;
  cfg.epochs = 5;
  cfg.embedding_learning_rate = 0.05;
  auto trained = train_surrogate(triples, l.corpus, l.queries, ranker, cfg);
  EXPECT_EQ(trained.ranker.interaction(), ranker.interaction());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(trained.ranker.embeddings().row(i), ranker.embeddings().row(i));
  }
  EXPECT_EQ(trained.final_loss, 0.0);
}

TEST(TrainSurrogate, OneStepMovesByLearningRateTimesGradient) {
  EmbeddingStore s("model", 2);
  s.insert("q", Eigen::Vector2d(0.6, 0.2));
  s.insert("ta", Eigen::Vector2d(0.1, 0.3));
  s.insert("tb", Eigen::Vector2d(0.4, -0.2));
  Corpus corpus(std::vector<Document>{{"a", "ta"}, {"b", "tb"}});
  QuerySet queries(std::vector<Document>{{"q1", "q"}});
  BilinearRanker ranker(s, Eigen::Matrix2d::Identity());
  std::vector<PrfTriple> triples = {{"q1", "a", "b"}};
  SurrogateConfig cfg;
  cfg.epochs = 1;
  cfg.learning_rate = 0.05;
  auto trained = train_surrogate(triples, corpus, queries, ranker, cfg);
  const Eigen::Vector2d pq(0.6, 0.2), pp(0.1, 0.3), pn(0.4, -0.2);
  const Eigen::Matrix2d grad = pq * (pn - pp).transpose();
  EXPECT_TRUE((trained.ranker.interaction() - ranker.interaction())
                  .isApprox(-cfg.learning_rate * grad, 1e-12));
}

TEST(TrainSurrogate, RejectsBadSchedule) {
  auto l = listed_oracle({"a", "b"});
  BilinearRanker r(testing::random_store(1, 2, 1), Eigen::Matrix2d::Identity());
  SurrogateConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(train_surrogate({}, l.corpus, l.queries, r, cfg), Error);
  cfg.epochs = 1;
  cfg.learning_rate = 0.0;
  EXPECT_THROW(train_surrogate({}, l.corpus, l.queries, r, cfg), Error);
}

// Brute-force tau-a from the definition over item pairs.
double brute_tau(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  auto pos = [](const std::vector<std::string>& v, const std::string& x) {
    return std::find(v.begin(), v.end(), x) - v.begin();
  };
  double sum = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (i == j) continue;
      const auto& x = a[i];
      const auto& y = a[j];
      const double da = static_cast<double>(pos(a, x) - pos(a, y));
      const double db = static_cast<double>(pos(b, x) - pos(b, y));
      sum += (da * db > 0) ? 1.0 : -1.0;
      ++pairs;
    }
  }
  return sum / pairs;
}

TEST(KendallTau, Extremes) {
  std::vector<std::string> a = {"a", "b", "c", "d"};
  std::vector<std::string> r(a.rbegin(), a.rend());
  EXPECT_EQ(kendall_tau(a, a), 1.0);
  EXPECT_EQ(kendall_tau(a, r), -1.0);
}

TEST(KendallTau, MatchesPairwiseDefinition) {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::string> a;
    for (int i = 0; i < 12; ++i) a.push_back("d" + std::to_string(i));
    std::vector<std::string> b = a;
    std::shuffle(b.begin(), b.end(), rng);
    EXPECT_NEAR(kendall_tau(a, b), brute_tau(a, b), 1e-12);
  }
}

TEST(KendallTau, MismatchedItemsAreAnError) {
  std::vector<std::string> a = {"a", "b"}, b = {"a", "c"}, c = {"a"};
  EXPECT_THROW(kendall_tau(a, b), Error);
  EXPECT_THROW(kendall_tau(a, c), Error);
}

// The default toy configuration up to a trained surrogate.
class ToySurrogate : public ::testing::Test {
 protected:
  struct State {
    TempDir dir{"toy_surrogate"};
    ExperimentConfig config;
    LoadedData data;
    TargetStage target;
    std::optional<SurrogateStage> surrogate;
  };

  static State* make(std::uint64_t seed) {
    set_warnings_enabled(false);
    auto* state = new State;
    State& s = *state;
    Settings settings;
    settings.set("seed", std::to_string(seed));
    settings.set("out", s.dir.path().string());
    settings.set("methods", "prada");
    s.config = ExperimentConfig::from_settings(settings);
    stage_generate(s.config);
    s.data = stage_load_data(s.config);
    s.target = stage_build_target(s.config, s.data);
    s.surrogate.emplace(stage_train_surrogate(s.config, s.data, *s.target.oracle));
    return state;
  }

  static void SetUpTestSuite() { state_ = make(1); }
  static void TearDownTestSuite() {
    delete state_;
    state_ = nullptr;
  }
  static State* state_;
};
ToySurrogate::State* ToySurrogate::state_ = nullptr;

TEST_F(ToySurrogate, SampledNegativesGiveTenTriplesPerQueryAndOneCallEach) {
  const auto& oracle = *state_->target.oracle;
  std::vector<std::string> ids;
  for (const auto& q : state_->data.collection_queries.items()) {
    if (ids.size() == 20) break;
    ids.push_back(q.id);
  }
  PrfOptions opt = state_->config.prf;
  const auto before = oracle.query_count();
  PrfDataset ds = collect_prf_labels(oracle, ids, opt);
  EXPECT_EQ(opt.k, 1u);
  EXPECT_EQ(opt.list_length, 100u);
  EXPECT_EQ(ds.triples.size(), 200u);
  EXPECT_EQ(oracle.query_count() - before, 20u);
}

TEST_F(ToySurrogate, EveryTripleIsPositionallyConsistent) {
  const auto& ds = state_->surrogate->dataset;
  EXPECT_EQ(state_->surrogate->collection_queries, state_->data.collection_queries.size());
  ASSERT_FALSE(ds.triples.empty());
  for (const auto& t : ds.triples) {
    const RankedList& list = ds.lists.at(t.query_id);
    EXPECT_NE(t.positive, t.negative);
    EXPECT_LE(static_cast<std::size_t>(list.position(t.positive)), ds.k);
    EXPECT_GT(static_cast<std::size_t>(list.position(t.negative)), ds.k);
    EXPECT_LE(static_cast<std::size_t>(list.position(t.negative)), ds.list_length);
  }
}

TEST_F(ToySurrogate, TrainingImprovesFidelity) {
  EXPECT_GT(state_->surrogate->tau_after, state_->surrogate->tau_before);
}

TEST_F(ToySurrogate, CheckpointIsDeterministic) {
  TempDir again("toy_again");
  const auto first = testing::read_file(state_->config.checkpoint_dir() / "surrogate.ckpt");
  auto config = state_->config;
  config.out = again.path();
  stage_generate(config);
  auto data = stage_load_data(config);
  auto target = stage_build_target(config, data);
  stage_train_surrogate(config, data, *target.oracle);
  EXPECT_EQ(testing::read_file(config.checkpoint_dir() / "surrogate.ckpt"), first);
}

TEST(SurrogateTraining, EpochLossMostlyNonIncreasing) {
  // Over several seeds of the toy configuration, count epoch-to-epoch steps
  // where the mean hinge did not rise.
  int runs = 0, monotone_runs = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TempDir dir("toy_loss");
    set_warnings_enabled(false);
    Settings settings;
    settings.set("seed", std::to_string(seed));
    settings.set("out", dir.path().string());
    settings.set("methods", "prada");
    auto config = ExperimentConfig::from_settings(settings);
    stage_generate(config);
    auto data = stage_load_data(config);
    auto target = stage_build_target(config, data);
    auto surrogate = stage_train_surrogate(config, data, *target.oracle);
    const auto& l = surrogate.epoch_losses;
    ASSERT_GE(l.size(), 2u);
    ++runs;
    bool monotone = true;
    for (std::size_t e = 1; e < l.size(); ++e) monotone &= l[e] <= l[e - 1];
    if (monotone) ++monotone_runs;
  }
  EXPECT_GE(static_cast<double>(monotone_runs) / runs, 0.9)
      << monotone_runs << " of " << runs;
}

}  // namespace
}  // namespace prada
