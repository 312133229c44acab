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

#include "pereval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "pereval/error.hpp"
#include "pereval/parallel.hpp"
#include "pereval/random.hpp"

namespace pereval {
namespace {

// P(X <= m) for X ~ Binomial(n, 1/2), m < n / 2. Terms are scaled by the
// largest one, summed smallest first and rescaled once.
double lower_tail(int n, int m) {
  double term = 1.0;
  std::vector<double> terms{1.0};
  for (int k = m; k > 0; --k) {
    term *= static_cast<double>(k) / static_cast<double>(n - k + 1);
    if (term < 1e-300) break;
    terms.push_back(term);
  }
  double sum = 0.0;
  for (auto it = terms.rbegin(); it != terms.rend(); ++it) sum += *it;
  const double log_top = std::lgamma(n + 1.0) - std::lgamma(m + 1.0) - std::lgamma(n - m + 1.0) -
                         n * std::log(2.0);
  return sum * std::exp(log_top);
}

// Largest minority count that is still significant, per number of trials
// (-1 when none is).
std::vector<int> critical_counts(int max_trials, double alpha) {
  std::vector<int> critical(static_cast<std::size_t>(max_trials) + 1, -1);
  for (int n = 1; n <= max_trials; ++n) {
    int c = -1;
    while (c + 1 < n - (c + 1) && binomial_test(c + 1, n - c - 1, alpha).significant) ++c;
    critical[n] = c;
  }
  return critical;
}

struct Tally {
  int wins = 0;
  int losses = 0;
  int ties = 0;
};

Conclusion conclude_with(const Tally& t, const std::vector<int>& critical) {
  const int n = t.wins + t.losses;
  if (n == 0 || std::min(t.wins, t.losses) > critical[n]) return Conclusion::kInconclusive;
  return t.wins > t.losses ? Conclusion::kABetter : Conclusion::kBBetter;
}

Tally tally(std::span<const Verdict> pool, std::span<const std::uint32_t> picks) {
  Tally t;
  for (std::uint32_t i : picks) {
    switch (pool[i]) {
      case Verdict::kWin: ++t.wins; break;
      case Verdict::kLoss: ++t.losses; break;
      case Verdict::kTie: ++t.ties; break;
    }
  }
  return t;
}

template <typename Body>
std::vector<CurvePoint> resample(std::span<const Verdict> pool, const ResampleConfig& config,
                                 int draws_per_size, Body body) {
  config.validate();
  for (int size : config.sizes) {
    if (static_cast<std::size_t>(size) * draws_per_size > pool.size()) {
      throw Error(ErrorCode::kPoolTooSmall,
                  "pool of " + std::to_string(pool.size()) + " outcomes cannot supply " +
                      std::to_string(draws_per_size) + " sample(s) of " + std::to_string(size));
    }
  }
  const int max_size = config.sizes.empty()
                           ? 0
                           : *std::max_element(config.sizes.begin(), config.sizes.end());
  const auto critical = critical_counts(max_size, config.alpha);

  std::vector<CurvePoint> curve;
  const auto reps = static_cast<std::size_t>(config.repetitions);
  for (int size : config.sizes) {
    std::vector<char> hit(reps);
    std::vector<int> ties(reps);
    const std::uint64_t size_seed = mix_seed(config.seed, static_cast<std::uint64_t>(size));
    parallel_for(reps, config.max_threads, [&](std::size_t rep) {
      Rng rng(mix_seed(size_seed, static_cast<std::uint64_t>(rep)));
      std::vector<std::uint32_t> idx(pool.size());
      std::iota(idx.begin(), idx.end(), 0u);
      rng.partial_shuffle(std::span<std::uint32_t>(idx),
                          static_cast<std::size_t>(size) * draws_per_size);
      std::tie(hit[rep], ties[rep]) = body(std::span<const std::uint32_t>(idx), size, critical);
    });
    CurvePoint p;
    p.size = size;
    p.repetitions = config.repetitions;
    p.estimate = static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / reps;
    p.mean_ties = std::accumulate(ties.begin(), ties.end(), 0.0) / (reps * draws_per_size);
    curve.push_back(p);
  }
  return curve;
}

double mean_ci_half_width(const std::vector<double>& credits, double mean) {
  if (credits.size() < 2) return 0.0;
  double ss = 0.0;
  for (double c : credits) ss += (c - mean) * (c - mean);
  const double sd = std::sqrt(ss / static_cast<double>(credits.size() - 1));
  return 1.959963984540054 * sd / std::sqrt(static_cast<double>(credits.size()));
}

}  // namespace

BinomialTestResult binomial_test(int wins, int losses, double alpha) {
  if (wins < 0 || losses < 0) {
    throw Error(ErrorCode::kInvalidArgument, "win and loss counts must be non-negative");
  }
  const int n = wins + losses;
  if (n == 0) throw Error(ErrorCode::kNoDecisiveOutcomes, "no decisive outcomes to test");
  BinomialTestResult r;
  r.wins = wins;
  r.losses = losses;
  const int m = std::min(wins, losses);
  // Under p = 1/2 the pmf is symmetric and unimodal, so the outcomes no more
  // likely than m are exactly the two tails beyond m.
  r.p_value = 2 * m == n ? 1.0 : std::min(1.0, 2.0 * lower_tail(n, m));
  r.significant = r.p_value < alpha;
  return r;
}

std::string_view conclusion_name(Conclusion c) {
  switch (c) {
    case Conclusion::kABetter: return "a_better";
    case Conclusion::kBBetter: return "b_better";
    case Conclusion::kInconclusive: return "inconclusive";
  }
  return "unknown";
}

Conclusion conclude(int wins, int losses, double alpha) {
  if (wins + losses == 0 || !binomial_test(wins, losses, alpha).significant) {
    return Conclusion::kInconclusive;
  }
  return wins > losses ? Conclusion::kABetter : Conclusion::kBBetter;
}

void ResampleConfig::validate() const {
  if (repetitions < 1) throw Error(ErrorCode::kInvalidArgument, "repetitions must be >= 1");
  if (!(alpha > 0 && alpha < 1)) throw Error(ErrorCode::kInvalidArgument, "alpha must be in (0,1)");
  for (int s : sizes) {
    if (s < 2) throw Error(ErrorCode::kInvalidArgument, "sample sizes must be >= 2");
  }
}

std::vector<CurvePoint> consistency(std::span<const Verdict> pool, const ResampleConfig& config) {
  return resample(pool, config, 2,
                  [&](std::span<const std::uint32_t> idx, int size,
                      const std::vector<int>& critical) {
                    const Tally t1 = tally(pool, idx.subspan(0, size));
                    const Tally t2 = tally(pool, idx.subspan(size, size));
                    const Conclusion c1 = conclude_with(t1, critical);
                    const Conclusion c2 = conclude_with(t2, critical);
                    bool same = c1 == c2;
                    if (config.strict_conclusive) same = same && c1 != Conclusion::kInconclusive;
                    return std::pair<char, int>(same ? 1 : 0, t1.ties + t2.ties);
                  });
}

std::vector<CurvePoint> sensitivity(std::span<const Verdict> pool, const ResampleConfig& config) {
  return resample(pool, config, 1,
                  [&](std::span<const std::uint32_t> idx, int size,
                      const std::vector<int>& critical) {
                    const Tally t = tally(pool, idx.subspan(0, size));
                    const bool significant = conclude_with(t, critical) != Conclusion::kInconclusive;
                    return std::pair<char, int>(significant ? 1 : 0, t.ties);
                  });
}

std::vector<Verdict> verdict_pool(std::span<const CaseOutcome> outcomes,
                                  std::string_view generator_a, std::string_view generator_b,
                                  Dimension dimension) {
  std::vector<Verdict> pool;
  for (const CaseOutcome& o : outcomes) {
    if (o.dimension != dimension) continue;
    if (o.generator_a == generator_a && o.generator_b == generator_b) {
      pool.push_back(o.verdict);
    } else if (o.generator_a == generator_b && o.generator_b == generator_a) {
      pool.push_back(mirror(o.verdict));
    }
  }
  return pool;
}

std::vector<AgreementRow> agreement_with_truth(std::span<const CaseOutcome> outcomes,
                                               std::span<const std::string> truth,
                                               double tie_credit) {
  std::map<std::string_view, std::size_t> rank;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!rank.emplace(truth[i], i).second) {
      throw Error(ErrorCode::kInvalidArgument, "assumed truth lists " + truth[i] + " twice");
    }
  }
  using Key = std::tuple<std::string, std::string, Dimension, std::string>;
  std::map<Key, std::vector<double>> credits;
  for (const CaseOutcome& o : outcomes) {
    auto ra = rank.find(o.generator_a);
    auto rb = rank.find(o.generator_b);
    if (ra == rank.end() || rb == rank.end() || o.generator_a == o.generator_b) {
      throw Error(ErrorCode::kPairNotInTruth,
                  "pair " + o.generator_a + " vs " + o.generator_b + " is not ranked by the truth");
    }
    const bool a_stronger = ra->second < rb->second;
    double credit = tie_credit;
    if (o.verdict == Verdict::kWin) credit = a_stronger ? 1.0 : 0.0;
    if (o.verdict == Verdict::kLoss) credit = a_stronger ? 0.0 : 1.0;
    const std::string& stronger = a_stronger ? o.generator_a : o.generator_b;
    const std::string& weaker = a_stronger ? o.generator_b : o.generator_a;
    credits[{stronger, weaker, o.dimension, o.source}].push_back(credit);
  }
  std::vector<AgreementRow> rows;
  for (const auto& [key, values] : credits) {
    AgreementRow row;
    std::tie(row.stronger, row.weaker, row.dimension, row.source) = key;
    row.cases = static_cast<int>(values.size());
    row.agreement = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    const double half = mean_ci_half_width(values, row.agreement);
    row.ci_low = std::max(0.0, row.agreement - half);
    row.ci_high = std::min(1.0, row.agreement + half);
    rows.push_back(std::move(row));
  }
  // Truth order, then dimension, then source.
  std::sort(rows.begin(), rows.end(), [&](const AgreementRow& x, const AgreementRow& y) {
    return std::tuple(rank[x.stronger], rank[x.weaker], x.dimension, x.source) <
           std::tuple(rank[y.stronger], rank[y.weaker], y.dimension, y.source);
  });
  return rows;
}

std::vector<RaterAgreement> inter_rater_agreement(std::span<const HumanJudgment> judgments) {
  std::map<std::string_view, std::vector<const HumanJudgment*>> by_task;
  for (const HumanJudgment& j : judgments) by_task[j.task_id].push_back(&j);
  std::string unpaired;
  for (const auto& [task, js] : by_task) {
    if (js.size() != 2) unpaired += (unpaired.empty() ? "" : ", ") + std::string(task);
  }
  if (!unpaired.empty()) {
    throw Error(ErrorCode::kUnpairedCase, "tasks without exactly two judgments: " + unpaired);
  }
  std::vector<RaterAgreement> out;
  for (Dimension d : kAllDimensions) {
    RaterAgreement r;
    r.dimension = d;
    int same = 0;
    int first_votes = 0;
    for (const auto& [task, js] : by_task) {
      const auto c1 = js[0]->choice(d);
      const auto c2 = js[1]->choice(d);
      if (!c1 || !c2) {
        throw Error(ErrorCode::kIncompleteAnswers,
                    "task " + std::string(task) + " has an unanswered " +
                        std::string(dimension_name(d)) + " question");
      }
      ++r.cases;
      same += *c1 == *c2;
      first_votes += (*c1 == Choice::kFirst) + (*c2 == Choice::kFirst);
    }
    if (r.cases > 0) {
      r.raw = static_cast<double>(same) / r.cases;
      const double p_first = static_cast<double>(first_votes) / (2.0 * r.cases);
      const double chance = p_first * p_first + (1 - p_first) * (1 - p_first);
      r.kappa = chance >= 1.0 ? 1.0 : (r.raw - chance) / (1.0 - chance);
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace pereval
