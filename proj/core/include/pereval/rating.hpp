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

// Elo ratings over pairwise case outcomes, with bootstrap over game order.

#ifndef PEREVAL_RATING_HPP_
#define PEREVAL_RATING_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pereval/model.hpp"

namespace pereval {

struct EloConfig {
  double k_weight = 4.0;
  double initial_rating = 1000.0;
  double scale = 400.0;
  int bootstrap_rounds = 1000;
  double ci_level = 0.95;
  std::uint64_t seed = 0;
  /// Permute whole cases (all games sharing a group) instead of single games.
  bool block_by_case = false;
  std::size_t max_threads = 0;  // 0: hardware concurrency

  void validate() const;
};

struct Game {
  std::string player_a;
  std::string player_b;
  double score_a = 0.5;  // 1 win, 0.5 tie, 0 loss
  std::string group;     // case id; used by block_by_case
};

using Ratings = std::map<std::string, double>;

/// 1 / (1 + 10^((r_opponent - r_self) / scale)).
double expected_score(double r_self, double r_opponent, double scale = 400.0);

/// New (r_a, r_b) after one game. Player B moves by exactly the negation of
/// player A's change.
std::pair<double, double> elo_update(double r_a, double r_b, double score_a, double k_weight,
                                     double scale);

/// Applies one game in place; absent players start at the initial rating.
/// Throws Error(kSamePlayer) or Error(kInvalidArgument) for a bad score.
void play_game(Ratings& ratings, const Game& game, const EloConfig& config);

Ratings rate_sequence(std::span<const Game> games, const EloConfig& config);

struct EloRow {
  std::string player;
  double median = 0;
  double ci_low = 0;
  double ci_high = 0;
};

struct EloTable {
  std::string label;          // dimension name or "overall"
  std::vector<EloRow> rows;   // best median first, ties by player id
  std::size_t games = 0;
  int rounds = 0;

  const EloRow* find(std::string_view player) const;
  std::vector<std::string> order() const;
};

/// Runs `bootstrap_rounds` independent permutations of the game order and
/// reports, per player, the median final rating and the percentile interval
/// at `ci_level`. Round r uses a seed derived from (seed, r), so the table
/// does not depend on thread scheduling.
EloTable bootstrap_elo(std::span<const Game> games, const EloConfig& config,
                       std::string label = "overall");

/// Percentile with linear interpolation between order statistics (the
/// common "type 7" definition). `sorted` must be ascending and non-empty.
double percentile(std::span<const double> sorted, double q);

/// One game per outcome whose dimension is in `dimensions`.
std::vector<Game> outcomes_to_games(std::span<const CaseOutcome> outcomes,
                                    std::span<const Dimension> dimensions);

/// Tables for the requested labels: dimension names and/or "overall" (all
/// three dimensions' games).
std::vector<EloTable> elo_tables(std::span<const CaseOutcome> outcomes,
                                 std::span<const std::string> labels, const EloConfig& config);

}  // namespace pereval

#endif  // PEREVAL_RATING_HPP_
