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

#include "pereval/rating.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pereval/error.hpp"
#include "pereval/parallel.hpp"
#include "pereval/random.hpp"

namespace pereval {

void EloConfig::validate() const {
  if (!(k_weight > 0)) throw Error(ErrorCode::kInvalidArgument, "Elo K weight must be positive");
  if (!(scale > 0)) throw Error(ErrorCode::kInvalidArgument, "Elo scale must be positive");
  if (bootstrap_rounds < 1) {
    throw Error(ErrorCode::kInvalidArgument, "bootstrap rounds must be at least 1");
  }
  if (!(ci_level > 0 && ci_level < 1)) {
    throw Error(ErrorCode::kInvalidArgument, "confidence level must lie in (0, 1)");
  }
}

double expected_score(double r_self, double r_opponent, double scale) {
  return 1.0 / (1.0 + std::pow(10.0, (r_opponent - r_self) / scale));
}

std::pair<double, double> elo_update(double r_a, double r_b, double score_a, double k_weight,
                                     double scale) {
  const double delta = k_weight * (score_a - expected_score(r_a, r_b, scale));
  return {r_a + delta, r_b - delta};
}

void play_game(Ratings& ratings, const Game& game, const EloConfig& config) {
  if (game.player_a == game.player_b) {
    throw Error(ErrorCode::kSamePlayer, "player " + game.player_a + " cannot play itself");
  }
  if (game.score_a != 0.0 && game.score_a != 0.5 && game.score_a != 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "game score must be 0, 0.5 or 1");
  }
  double& a = ratings.try_emplace(game.player_a, config.initial_rating).first->second;
  double& b = ratings.try_emplace(game.player_b, config.initial_rating).first->second;
  std::tie(a, b) = elo_update(a, b, game.score_a, config.k_weight, config.scale);
}

Ratings rate_sequence(std::span<const Game> games, const EloConfig& config) {
  Ratings ratings;
  for (const Game& g : games) play_game(ratings, g, config);
  return ratings;
}

const EloRow* EloTable::find(std::string_view player) const {
  for (const EloRow& r : rows) {
    if (r.player == player) return &r;
  }
  return nullptr;
}

std::vector<std::string> EloTable::order() const {
  std::vector<std::string> out;
  for (const EloRow& r : rows) out.push_back(r.player);
  return out;
}

double percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::kInvalidArgument, "percentile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

EloTable bootstrap_elo(std::span<const Game> games, const EloConfig& config, std::string label) {
  config.validate();
  EloTable table;
  table.label = std::move(label);
  table.games = games.size();
  table.rounds = config.bootstrap_rounds;
  if (games.empty()) return table;

  std::vector<std::string> players;
  for (const Game& g : games) {
    if (g.player_a == g.player_b) {
      throw Error(ErrorCode::kSamePlayer, "player " + g.player_a + " cannot play itself");
    }
    players.push_back(g.player_a);
    players.push_back(g.player_b);
  }
  std::sort(players.begin(), players.end());
  players.erase(std::unique(players.begin(), players.end()), players.end());
  const auto player_index = [&](const std::string& p) {
    return static_cast<std::uint32_t>(
        std::lower_bound(players.begin(), players.end(), p) - players.begin());
  };

  struct Compact {
    std::uint32_t a;
    std::uint32_t b;
    double score;
  };
  std::vector<Compact> compact;
  compact.reserve(games.size());
  for (const Game& g : games) {
    if (g.score_a != 0.0 && g.score_a != 0.5 && g.score_a != 1.0) {
      throw Error(ErrorCode::kInvalidArgument, "game score must be 0, 0.5 or 1");
    }
    compact.push_back({player_index(g.player_a), player_index(g.player_b), g.score_a});
  }

  // Units of permutation: single games, or all games of one case in their
  // original relative order.
  std::vector<std::vector<std::uint32_t>> blocks;
  if (config.block_by_case) {
    std::map<std::string_view, std::size_t> by_group;
    for (std::size_t i = 0; i < games.size(); ++i) {
      auto [it, fresh] = by_group.try_emplace(games[i].group, blocks.size());
      if (fresh) blocks.emplace_back();
      blocks[it->second].push_back(static_cast<std::uint32_t>(i));
    }
  }

  const std::size_t n_players = players.size();
  const auto rounds = static_cast<std::size_t>(config.bootstrap_rounds);
  std::vector<double> finals(rounds * n_players);
  parallel_for(rounds, config.max_threads, [&](std::size_t round) {
    Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(round)));
    std::vector<std::uint32_t> order;
    if (config.block_by_case) {
      std::vector<std::uint32_t> block_order(blocks.size());
      std::iota(block_order.begin(), block_order.end(), 0u);
      rng.shuffle(std::span<std::uint32_t>(block_order));
      order.reserve(compact.size());
      for (std::uint32_t b : block_order) {
        order.insert(order.end(), blocks[b].begin(), blocks[b].end());
      }
    } else {
      order.resize(compact.size());
      std::iota(order.begin(), order.end(), 0u);
      rng.shuffle(std::span<std::uint32_t>(order));
    }
    double* ratings = &finals[round * n_players];
    std::fill(ratings, ratings + n_players, config.initial_rating);
    for (std::uint32_t i : order) {
      const Compact& g = compact[i];
      std::tie(ratings[g.a], ratings[g.b]) =
          elo_update(ratings[g.a], ratings[g.b], g.score, config.k_weight, config.scale);
    }
  });

  const double tail = (1.0 - config.ci_level) / 2.0;
  std::vector<double> column(rounds);
  for (std::size_t p = 0; p < n_players; ++p) {
    for (std::size_t r = 0; r < rounds; ++r) column[r] = finals[r * n_players + p];
    std::sort(column.begin(), column.end());
    table.rows.push_back({players[p], percentile(column, 0.5), percentile(column, tail),
                          percentile(column, 1.0 - tail)});
  }
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const EloRow& x, const EloRow& y) { return x.median > y.median; });
  return table;
}

std::vector<Game> outcomes_to_games(std::span<const CaseOutcome> outcomes,
                                    std::span<const Dimension> dimensions) {
  std::vector<Game> games;
  for (const CaseOutcome& o : outcomes) {
    if (std::find(dimensions.begin(), dimensions.end(), o.dimension) == dimensions.end()) {
      continue;
    }
    games.push_back({o.generator_a, o.generator_b, verdict_score(o.verdict), o.case_id});
  }
  return games;
}

std::vector<EloTable> elo_tables(std::span<const CaseOutcome> outcomes,
                                 std::span<const std::string> labels, const EloConfig& config) {
  std::vector<EloTable> tables;
  for (const std::string& label : labels) {
    std::vector<Dimension> dims;
    if (label == "overall") {
      dims.assign(kAllDimensions.begin(), kAllDimensions.end());
    } else if (auto d = parse_dimension(label)) {
      dims.push_back(*d);
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown Elo table '" + label + "'");
    }
    const auto games = outcomes_to_games(outcomes, dims);
    tables.push_back(bootstrap_elo(
        games, config, label == "overall" ? "overall" : std::string(dimension_name(dims[0]))));
  }
  return tables;
}

}  // namespace pereval
