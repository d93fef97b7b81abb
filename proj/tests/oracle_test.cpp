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

#include <set>
#include <thread>

#include "prada/oracle.hpp"
#include "prada/synthetic.hpp"
#include "test_support.hpp"

namespace prada {
namespace {

// Query "q" = (1, 0) under W = I, so a document made of word w scores w's
// first coordinate.
struct HandOracle {
  Corpus corpus;
  QuerySet queries;
  std::unique_ptr<TargetOracle> oracle;
};

HandOracle hand_oracle(const std::vector<std::pair<std::string, double>>& docs) {
  EmbeddingStore s("model", 2);
  s.insert("q", Eigen::Vector2d(1, 0));
  std::vector<Document> items;
  std::vector<std::string> ids;
  for (const auto& [id, value] : docs) {
    s.insert("t" + id, Eigen::Vector2d(value, 0));
    items.push_back({id, "t" + id});
    ids.push_back(id);
  }
  HandOracle h;
  h.corpus = Corpus(items);
  h.queries = QuerySet(std::vector<Document>{{"q1", "q"}});
  h.oracle = std::make_unique<TargetOracle>(
      BilinearRanker(std::move(s), Eigen::Matrix2d::Identity()), h.corpus, h.queries,
      CandidatePools{{"q1", ids}});
  return h;
}

TEST(RankedList, OrdersByHiddenScore) {
  auto h = hand_oracle({{"a", 0.1}, {"b", 0.9}});
  RankedList list = h.oracle->ranked_list("q1");
  EXPECT_EQ(list.doc_ids, (std::vector<std::string>{"b", "a"}));
  EXPECT_EQ(list.position("b"), 1);
  EXPECT_EQ(list.position("a"), 2);
  EXPECT_THROW(list.position("zz"), Error);
}

TEST(RankedList, EqualScoresOrderByDocId) {
  auto h = hand_oracle({{"c", 0.5}, {"a", 0.5}, {"b", 0.5}});
  EXPECT_EQ(h.oracle->ranked_list("q1").doc_ids, (std::vector<std::string>{"a", "b", "c"}));
}

TEST(RankedList, EachCallCountsOnce) {
  auto h = hand_oracle({{"a", 0.1}, {"b", 0.9}});
  EXPECT_EQ(h.oracle->query_count(), 0u);
  h.oracle->ranked_list("q1");
  EXPECT_EQ(h.oracle->query_count(), 1u);
  h.oracle->rank_of("q1", "ta", "a");
  EXPECT_EQ(h.oracle->query_count(), 2u);
}

TEST(RankedList, UnknownQueryIsAnError) {
  auto h = hand_oracle({{"a", 0.1}});
  EXPECT_THROW(h.oracle->ranked_list("nope"), Error);
}

TEST(RankOf, UnchangedTextKeepsPosition) {
  auto h = hand_oracle({{"a", 0.1}, {"b", 0.9}, {"c", 0.5}});
  RankedList list = h.oracle->ranked_list("q1");
  for (const auto& id : list.doc_ids) {
    EXPECT_EQ(h.oracle->rank_of("q1", h.corpus.at(id).text, id).position, list.position(id));
  }
}

TEST(RankOf, ReplacementMovesOnlyTheTarget) {
  auto h = hand_oracle({{"a", 0.1}, {"b", 0.9}, {"c", 0.5}});
  EXPECT_EQ(h.oracle->rank_of("q1", "tb", "a").position, 1);  // ties "b" and wins on doc id
  EXPECT_EQ(h.oracle->rank_of("q1", "tb", "c").position, 2);
  EXPECT_EQ(h.oracle->rank_of("q1", "tb tb q", "a").position, 1);
  EXPECT_EQ(h.oracle->ranked_list("q1").doc_ids, (std::vector<std::string>{"b", "c", "a"}));
}

TEST(RankOf, UnrepresentableTextIsRankedLastAndFlagged) {
  auto h = hand_oracle({{"a", 0.1}, {"b", 0.9}, {"c", 0.5}});
  RankProbe p = h.oracle->rank_of("q1", "unknown words", "b");
  EXPECT_TRUE(p.unrepresentable);
  EXPECT_EQ(p.position, 3);
}

TEST(RankOf, EmptyTextIsAnError) {
  auto h = hand_oracle({{"a", 0.1}});
  EXPECT_THROW(h.oracle->rank_of("q1", std::string_view(""), "a"), Error);
  EXPECT_THROW(h.oracle->rank_of("q1", "ta", "not-a-candidate"), Error);
}

TEST(CandidatePools, RankByQueryTermFrequency) {
  set_warnings_enabled(false);
  Corpus c(std::vector<Document>{{"d1", "apple pie"}, {"d2", "apple apple tart"}, {"d3", "pear"},
            {"d4", "plum"}});
  QuerySet q(std::vector<Document>{{"q1", "apple"}, {"q2", "banana"}});
  CandidatePools pools = build_candidate_pools(c, q, 3);
  EXPECT_EQ(pools.count("q2"), 0u);
  EXPECT_EQ(pools["q1"], (std::vector<std::string>{"d2", "d1", "d3"}));
  EXPECT_THROW(build_candidate_pools(c, q, 5), Error);
}

TEST(CandidatePools, SaveLoadRoundTrips) {
  testing::TempDir dir("pools");
  CandidatePools pools{{"q1", {"d2", "d1"}}, {"q0", {"d3"}}};
  save_pools(pools, dir / "pools.json");
  EXPECT_EQ(load_pools(dir / "pools.json"), pools);
}

class TrainedOracle : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { world_ = testing::make_small_world(17).release(); }
  static void TearDownTestSuite() {
    delete world_;
    world_ = nullptr;
  }
  static testing::SmallWorld* world_;
};
testing::SmallWorld* TrainedOracle::world_ = nullptr;

TEST_F(TrainedOracle, RankOfUnchangedTextMatchesFullSweep) {
  const auto& oracle = *world_->oracle;
  for (const auto& qid : oracle.query_ids()) {
    RankedList list = oracle.ranked_list(qid);
    ASSERT_EQ(list.size(), oracle.list_length(qid));
    std::set<std::string> unique(list.doc_ids.begin(), list.doc_ids.end());
    EXPECT_EQ(unique.size(), list.size());
    for (const auto& id : list.doc_ids) {
      EXPECT_EQ(oracle.rank_of(qid, world_->data.corpus.at(id).text, id).position,
                list.position(id))
          << qid << " " << id;
    }
  }
}

TEST_F(TrainedOracle, CopyingTheTopDocumentReachesTheTop) {
  const auto& oracle = *world_->oracle;
  for (const auto& qid : oracle.query_ids()) {
    RankedList list = oracle.ranked_list(qid);
    const std::string& top = list.doc_ids.front();
    for (std::size_t p = 1; p < list.size(); p += 7) {
      EXPECT_LE(oracle.rank_of(qid, world_->data.corpus.at(top).text, list.doc_ids[p]).position,
                2);
    }
  }
}

TEST_F(TrainedOracle, ConcurrentCallsAreAllCounted) {
  const auto& oracle = *world_->oracle;
  const auto qid = oracle.query_ids().front();
  const auto before = oracle.query_count();
  {
    std::vector<std::jthread> workers;
    for (int t = 0; t < 4; ++t) {
      workers.emplace_back([&] {
        for (int i = 0; i < 250; ++i) oracle.ranked_list(qid);
      });
    }
  }
  EXPECT_EQ(oracle.query_count() - before, 1000u);
}

TEST_F(TrainedOracle, SaveLoadReproducesRankings) {
  testing::TempDir dir("oracle");
  save_oracle(*world_->oracle, dir / "target.ckpt", dir / "pools.json");
  auto loaded = load_oracle(dir / "target.ckpt", dir / "pools.json", world_->data.corpus,
                            world_->all_queries);
  for (const auto& qid : world_->oracle->query_ids()) {
    EXPECT_EQ(loaded->ranked_list(qid).doc_ids, world_->oracle->ranked_list(qid).doc_ids);
  }
}

TEST(BuildTarget, RelevantDocumentReachesTopTenForMostQueries) {
  set_warnings_enabled(false);
  SyntheticData data = generate_synthetic_corpus(SyntheticParams{}, 5);
  TargetConfig config;
  config.saturation = 4.0;
  // Trained embeddings let the target separate exact query terms from the
  // rest of their topic.
  config.embedding_learning_rate = 0.05;
  config.seed = 5;
  auto trained = build_target(data.corpus, data.target_queries, data.qrels, QuerySet{},
                              data.model, config);
  int top10 = 0, total = 0;
  for (const auto& q : data.target_queries.items()) {
    if (!trained.oracle->has_query(q.id)) continue;
    ++total;
    RankedList list = trained.oracle->ranked_list(q.id);
    const auto& rel = data.qrels.at(q.id).front();
    for (std::size_t i = 0; i < std::min<std::size_t>(10, list.size()); ++i) {
      if (list.doc_ids[i] == rel) ++top10;
    }
  }
  ASSERT_GT(total, 0);
  EXPECT_GE(static_cast<double>(top10) / total, 0.8) << top10 << "/" << total;
}

TEST(BuildTarget, ListLongerThanCorpusIsAnError) {
  SyntheticParams p = testing::small_params();
  SyntheticData data = generate_synthetic_corpus(p, 1);
  TargetConfig config;
  config.list_length = p.num_docs + 1;
  EXPECT_THROW(build_target(data.corpus, data.target_queries, data.qrels, QuerySet{},
                            data.model, config),
               Error);
}

TEST(BuildTarget, ZeroEpochsStillGivesATotalOrder) {
  set_warnings_enabled(false);
  SyntheticData data = generate_synthetic_corpus(testing::small_params(), 2);
  TargetConfig config;
  config.list_length = 20;
  config.epochs = 0;
  auto trained = build_target(data.corpus, data.target_queries, data.qrels, QuerySet{},
                              data.model, config);
  EXPECT_TRUE(trained.epoch_losses.empty());
  for (const auto& qid : trained.oracle->query_ids()) {
    RankedList list = trained.oracle->ranked_list(qid);
    std::set<std::string> unique(list.doc_ids.begin(), list.doc_ids.end());
    EXPECT_EQ(unique.size(), 20u);
  }
}

TEST(BuildTarget, SameSeedSameRankings) {
  set_warnings_enabled(false);
  SyntheticData data = generate_synthetic_corpus(testing::small_params(), 3);
  TargetConfig config;
  config.list_length = 20;
  config.epochs = 5;
  config.seed = 9;
  auto a = build_target(data.corpus, data.target_queries, data.qrels, QuerySet{}, data.model,
                        config);
  auto b = build_target(data.corpus, data.target_queries, data.qrels, QuerySet{}, data.model,
                        config);
  EXPECT_EQ(a.epoch_losses, b.epoch_losses);
  for (const auto& qid : a.oracle->query_ids()) {
    EXPECT_EQ(a.oracle->ranked_list(qid).doc_ids, b.oracle->ranked_list(qid).doc_ids);
  }
}

}  // namespace
}  // namespace prada
