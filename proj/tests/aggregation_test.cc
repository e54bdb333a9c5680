// Copyright 2026 The proptk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "proptk/aggregation.h"

#include <random>
#include <set>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "proptk/diagnostics.h"
#include "proptk/error.h"
#include "support/oracles.h"
#include "support/synthetic.h"

namespace proptk {
namespace {

using testing::RandomTable;
using testing::ToRatingTable;

bool AllLabelsUsed(const oracle::Table& t, int k) {
  std::set<int> seen;
  for (const auto& row : t) {
    for (int v : row) {
      if (v >= 0) seen.insert(v);
    }
  }
  return static_cast<int>(seen.size()) == k;
}

void ExpectStochastic(const DSModel& m) {
  EXPECT_NEAR(m.class_priors.sum(), 1.0, 1e-9);
  for (const auto& c : m.annotator_confusions) {
    for (Eigen::Index r = 0; r < c.rows(); ++r) {
      EXPECT_NEAR(c.row(r).sum(), 1.0, 1e-9);
    }
  }
  for (Eigen::Index i = 0; i < m.item_posteriors.rows(); ++i) {
    EXPECT_NEAR(m.item_posteriors.row(i).sum(), 1.0, 1e-9);
  }
}

TEST(DawidSkeneTest, ObjectiveMonotoneOnRandomInstances) {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    oracle::Table t = RandomTable(rng, 5 + trial % 20, 2 + trial % 4,
                                  2 + trial % 3, 0.2);
    if (!AllLabelsUsed(t, 2 + trial % 3)) continue;
    for (double s : {0.0, 0.01}) {
      DSConfig config;
      config.pseudo_count = s;
      DSModel m = RunDawidSkene(DSDataFromTable(ToRatingTable(t)), config);
      for (std::size_t i = 1; i < m.objective_trace.size(); ++i) {
        EXPECT_GE(m.objective_trace[i], m.objective_trace[i - 1] - 1e-9)
            << "trial " << trial << " iteration " << i;
      }
      ExpectStochastic(m);
    }
  }
}

TEST(DawidSkeneTest, MatchesOracleIterateForIterate) {
  std::mt19937 rng(22);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int k = 2 + trial % 3;
    oracle::Table t = RandomTable(rng, 12, 3, k, 0.15);
    if (!AllLabelsUsed(t, k)) continue;
    DSConfig config;
    config.max_iterations = 1 + trial % 15;
    config.pseudo_count = trial % 2 ? 0.01 : 0.5;
    DSModel m = RunDawidSkene(DSDataFromTable(ToRatingTable(t)), config);
    oracle::DSResult o =
        oracle::DawidSkene(t, k, config.pseudo_count, m.iterations);
    for (std::size_t i = 0; i < t.size(); ++i) {
      for (int c = 0; c < k; ++c) {
        EXPECT_NEAR(m.item_posteriors(static_cast<Eigen::Index>(i), c),
                    o.posteriors[i][c], 1e-9);
      }
    }
    for (int c = 0; c < k; ++c) EXPECT_NEAR(m.class_priors(c), o.priors[c], 1e-9);
    for (std::size_t a = 0; a < 3; ++a) {
      for (int c = 0; c < k; ++c) {
        for (int l = 0; l < k; ++l) {
          EXPECT_NEAR(m.annotator_confusions[a](c, l), o.confusions[a][c][l],
                      1e-9);
        }
      }
    }
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(DawidSkeneTest, UnanimousInput) {
  oracle::Table t = {{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {1, 1, 1}, {0, 0, 0}};
  DSModel m = RunDawidSkene(DSDataFromTable(ToRatingTable(t)));
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(m.MapLabel(i), t[i][0]);
    EXPECT_GE(m.item_posteriors(static_cast<Eigen::Index>(i), t[i][0]),
              1 - 1e-3);
  }
  for (const auto& c : m.annotator_confusions) {
    EXPECT_LT((c - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(),
              0.02);
  }
}

TEST(DawidSkeneTest, AdversarialAnnotatorOutvoted) {
  // ann2 reports the opposite label on every item.
  oracle::Table t = {{0, 0, 1}, {1, 1, 0}, {0, 0, 1}, {1, 1, 0}, {0, 0, 1}};
  DSConfig config;
  config.max_iterations = 500;
  config.tolerance = 1e-12;
  DSModel m = RunDawidSkene(DSDataFromTable(ToRatingTable(t)), config);
  oracle::DSResult o = oracle::DawidSkene(t, 2, config.pseudo_count, 500);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(m.MapLabel(i), t[i][0]);
    const int oracle_map = o.posteriors[i][1] > o.posteriors[i][0] ? 1 : 0;
    EXPECT_EQ(oracle_map, t[i][0]);
  }
  const Eigen::MatrixXd& adv = m.annotator_confusions[2];
  EXPECT_GT(adv(0, 1), adv(0, 0));
  EXPECT_GT(adv(1, 0), adv(1, 1));
}

TEST(DawidSkeneTest, SingleAnnotatorMapEqualsLabels) {
  oracle::Table t = {{0}, {1}, {2}, {1}, {1}, {0}};
  ScopedWarningCapture capture;
  DSModel m = RunDawidSkene(DSDataFromTable(ToRatingTable(t)));
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(m.MapLabel(i), t[i][0]);
  EXPECT_EQ(capture.warnings().size(), 1u);
  EXPECT_TRUE(m.converged);
}

TEST(DawidSkeneTest, LabelPermutationEquivariance) {
  std::mt19937 rng(23);
  oracle::Table t = RandomTable(rng, 15, 3, 3, 0.1);
  ASSERT_TRUE(AllLabelsUsed(t, 3));
  // 0 -> 30, 1 -> 10, 2 -> 20 keeps the sorted order a permutation.
  const int map[3] = {30, 10, 20};
  DSModel base = RunDawidSkene(DSDataFromTable(ToRatingTable(t)));
  DSModel moved = RunDawidSkene(DSDataFromTable(
      ToRatingTable(t).Relabel([&](int x) { return map[x]; })));
  ASSERT_EQ(moved.labels, (std::vector<int>{10, 20, 30}));
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      EXPECT_NEAR(base.item_posteriors(static_cast<Eigen::Index>(i), c),
                  moved.item_posteriors(static_cast<Eigen::Index>(i),
                                        static_cast<Eigen::Index>(
                                            moved.LabelIndex(map[c]))),
                  1e-9);
    }
    EXPECT_EQ(map[base.MapLabel(i)], moved.MapLabel(i));
  }
}

TEST(DawidSkeneTest, Preconditions) {
  EXPECT_THROW(RunDawidSkene(DSData{}), PreconditionError);
  EXPECT_THROW(RunDawidSkene(DSDataFromTable(ToRatingTable({{1, 1}, {1, 1}}))),
               PreconditionError);
  DSConfig bad;
  bad.tolerance = 0;
  EXPECT_THROW(bad.Validate(), PreconditionError);
  bad = DSConfig{};
  bad.pseudo_count = -1;
  EXPECT_THROW(bad.Validate(), PreconditionError);
}

TEST(DawidSkeneTest, NonConvergenceFlagged) {
  std::mt19937 rng(24);
  oracle::Table t = RandomTable(rng, 30, 4, 3, 0.0);
  DSConfig config;
  config.max_iterations = 1;
  DSModel m = RunDawidSkene(DSDataFromTable(ToRatingTable(t)), config);
  EXPECT_FALSE(m.converged);
  EXPECT_EQ(m.iterations, 1);
}

TEST(PosteriorProfileTest, SingleItemAndMean) {
  oracle::Table t = {{0, 0, 1}, {1, 1, -1}, {2, 2, 2}, {0, 2, 0}};
  DSModel m = RunDawidSkene(DSDataFromTable(ToRatingTable(t)));
  // Label 1 is reported on items 0 and 1; label 2 on items 2 and 3.
  Eigen::VectorXd expected =
      (m.item_posteriors.row(0) + m.item_posteriors.row(1)).transpose() / 2.0;
  EXPECT_LT((PosteriorProfile(m, 1) - expected).cwiseAbs().maxCoeff(), 1e-12);

  oracle::Table single = {{0, 0}, {1, 1}, {0, 1}, {2, 0}};
  DSModel s = RunDawidSkene(DSDataFromTable(ToRatingTable(single)));
  Eigen::VectorXd p = s.item_posteriors.row(3).transpose();
  EXPECT_LT((PosteriorProfile(s, 2) - p).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(PosteriorProfile(s, 7), PreconditionError);
}

TEST(DSModelJsonTest, RoundTrip) {
  Schema schema = testing::IntentSchema();
  auto corpus = testing::MakeSyntheticCorpus(schema, 40, 9);
  DSModel m = RunDawidSkene(BuildDSData(corpus.set, LabelLevel::kMain));
  auto json = DSModelToJson(m);
  DSModel back = DSModelFromJson(nlohmann::json::parse(json.dump()));
  EXPECT_EQ(back.labels, m.labels);
  EXPECT_EQ(back.items, m.items);
  EXPECT_EQ(back.iterations, m.iterations);
  EXPECT_LT((back.item_posteriors - m.item_posteriors).cwiseAbs().maxCoeff(),
            1e-15);
  EXPECT_EQ(DSModelToJson(back).dump(), json.dump());
}

TEST(DSDataTest, TechniqueLevelUsesEveryPresentTechnique) {
  Schema schema = testing::IntentSchema();
  auto corpus = testing::MakeSyntheticCorpus(schema, 40, 9);
  DSData main = BuildDSData(corpus.set, LabelLevel::kMain);
  DSData all = BuildDSData(corpus.set, LabelLevel::kTechniques);
  std::size_t n_main = 0, n_all = 0;
  for (const auto& o : main.observations) n_main += o.size();
  for (const auto& o : all.observations) n_all += o.size();
  EXPECT_EQ(n_main, corpus.set.record_count());
  EXPECT_GE(n_all, n_main);
}

}  // namespace
}  // namespace proptk
