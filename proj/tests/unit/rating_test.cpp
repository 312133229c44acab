// Copyright 2026 The pereval Authors.
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

#include <gtest/gtest.h>

#include <cmath>

#include "pereval/error.hpp"
#include "pereval/random.hpp"
#include "pereval/rating.hpp"

namespace pereval {
namespace {

TEST(ExpectedScore, HandValues) {
  EXPECT_EQ(expected_score(1000, 1000), 0.5);
  EXPECT_NEAR(expected_score(1000, 1400), 1.0 / 11.0, 1e-12);
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double a = 2000 * rng.uniform(), b = 2000 * rng.uniform();
    EXPECT_NEAR(expected_score(a, b) + expected_score(b, a), 1.0, 1e-12);
  }
}

TEST(PlayGame, HandArithmetic) {
  EloConfig config;
  Ratings r;
  play_game(r, {"a", "b", 1.0, ""}, config);
  EXPECT_EQ(r["a"], 1002.0);
  EXPECT_EQ(r["b"], 998.0);

  Ratings draw;
  play_game(draw, {"a", "b", 0.5, ""}, config);
  EXPECT_EQ(draw["a"], 1000.0);
  EXPECT_EQ(draw["b"], 1000.0);

  Ratings strong{{"a", 1400.0}, {"b", 1000.0}};
  play_game(strong, {"a", "b", 1.0, ""}, config);
  EXPECT_NEAR(strong["a"] - 1400.0, 4.0 * (1.0 - 10.0 / 11.0), 1e-12);
  EXPECT_NEAR(strong["b"] - 1000.0, -4.0 * (1.0 - 10.0 / 11.0), 1e-12);
}

TEST(PlayGame, Errors) {
  EloConfig config;
  Ratings r;
  try {
    play_game(r, {"a", "a", 1.0, ""}, config);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSamePlayer);
  }
  EXPECT_THROW(play_game(r, {"a", "b", 0.7, ""}, config), Error);
}

TEST(RateSequence, ThreeGameFixture) {
  EloConfig config;
  const std::vector<Game> games = {{"a", "b", 1.0, ""}, {"b", "c", 0.5, ""}, {"c", "a", 1.0, ""}};
  // Game 1: a 1002, b 998.
  // Game 2: E_b = 1/(1+10^(2/400)); b += 4(0.5 - E_b), c -= same.
  const double e_b = 1.0 / (1.0 + std::pow(10.0, (1000.0 - 998.0) / 400.0));
  const double b2 = 998.0 + 4.0 * (0.5 - e_b);
  const double c2 = 1000.0 - 4.0 * (0.5 - e_b);
  // Game 3: c beats a.
  const double e_c = 1.0 / (1.0 + std::pow(10.0, (1002.0 - c2) / 400.0));
  const double c3 = c2 + 4.0 * (1.0 - e_c);
  const double a3 = 1002.0 - 4.0 * (1.0 - e_c);
  const Ratings r = rate_sequence(games, config);
  EXPECT_NEAR(r.at("a"), a3, 1e-9);
  EXPECT_NEAR(r.at("b"), b2, 1e-9);
  EXPECT_NEAR(r.at("c"), c3, 1e-9);
  EXPECT_TRUE(rate_sequence({}, config).empty());
}

TEST(BootstrapElo, AllDrawsStayAtInitial) {
  std::vector<Game> games;
  for (int i = 0; i < 30; ++i) games.push_back({"a", i % 2 ? "b" : "c", 0.5, ""});
  EloConfig config;
  config.bootstrap_rounds = 50;
  const EloTable t = bootstrap_elo(games, config);
  for (const EloRow& row : t.rows) {
    EXPECT_EQ(row.median, 1000.0);
    EXPECT_EQ(row.ci_low, row.ci_high);
  }
}

TEST(BootstrapElo, DominanceGivesDisjointIntervals) {
  std::vector<Game> games(100, Game{"a", "b", 1.0, ""});
  for (std::size_t i = 0; i < games.size(); i += 3) games[i] = {"b", "a", 0.0, ""};
  EloConfig config;
  config.bootstrap_rounds = 200;
  const EloTable t = bootstrap_elo(games, config);
  ASSERT_EQ(t.order(), (std::vector<std::string>{"a", "b"}));
  EXPECT_GT(t.find("a")->ci_low, t.find("b")->ci_high);
}

TEST(BootstrapElo, DeterministicAcrossThreadCounts) {
  Rng rng(4);
  std::vector<Game> games;
  for (int i = 0; i < 500; ++i) {
    games.push_back({"p" + std::to_string(rng.below(3)), "q" + std::to_string(rng.below(3)),
                     static_cast<double>(rng.below(3)) / 2, "case" + std::to_string(i / 3)});
  }
  EloConfig config;
  config.bootstrap_rounds = 100;
  config.seed = 8;
  config.max_threads = 1;
  const EloTable one = bootstrap_elo(games, config);
  config.max_threads = 4;
  const EloTable four = bootstrap_elo(games, config);
  ASSERT_EQ(one.rows.size(), four.rows.size());
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    EXPECT_EQ(one.rows[i].player, four.rows[i].player);
    EXPECT_EQ(one.rows[i].median, four.rows[i].median);
    EXPECT_EQ(one.rows[i].ci_low, four.rows[i].ci_low);
  }
  config.block_by_case = true;
  EXPECT_EQ(bootstrap_elo(games, config).rows.size(), one.rows.size());
}

TEST(Percentile, Type7) {
  const std::vector<double> v = {1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(percentile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(percentile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(percentile(v, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(percentile(v, 0.25), 1.75);
}

CaseOutcome outcome(const std::string& id, Dimension d, Verdict v) {
  CaseOutcome o;
  o.case_id = id;
  o.generator_a = "A";
  o.generator_b = "B";
  o.dimension = d;
  o.verdict = v;
  o.replicas = 2;
  return o;
}

TEST(OutcomesToGames, OneGamePerCaseAndDimension) {
  std::vector<CaseOutcome> outcomes;
  for (Dimension d : kAllDimensions) outcomes.push_back(outcome("c1", d, Verdict::kWin));
  outcomes.push_back(outcome("c2", Dimension::kQuality, Verdict::kTie));
  const auto all = outcomes_to_games(outcomes, kAllDimensions);
  ASSERT_EQ(all.size(), 4u);
  EXPECT_EQ(all[0].score_a, 1.0);
  EXPECT_EQ(all[3].score_a, 0.5);
  const Dimension quality[] = {Dimension::kQuality};
  EXPECT_EQ(outcomes_to_games(outcomes, quality).size(), 2u);
}

TEST(EloTables, LabelsSelectGames) {
  std::vector<CaseOutcome> outcomes;
  for (int i = 0; i < 10; ++i) {
    for (Dimension d : kAllDimensions) {
      outcomes.push_back(outcome("c" + std::to_string(i), d,
                                 d == Dimension::kRelevance ? Verdict::kLoss : Verdict::kWin));
    }
  }
  EloConfig config;
  config.bootstrap_rounds = 20;
  const std::vector<std::string> labels = {"relevance", "overall"};
  const auto tables = elo_tables(outcomes, labels, config);
  ASSERT_EQ(tables.size(), 2u);
  EXPECT_EQ(tables[0].games, 10u);
  EXPECT_EQ(tables[0].order().front(), "B");
  EXPECT_EQ(tables[1].games, 30u);
  EXPECT_EQ(tables[1].order().front(), "A");
}

}  // namespace
}  // namespace pereval
