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

// Significance testing and evaluator reliability estimates.

#ifndef PEREVAL_STATS_HPP_
#define PEREVAL_STATS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pereval/model.hpp"

namespace pereval {

struct BinomialTestResult {
  int wins = 0;
  int losses = 0;
  double p_value = 1.0;
  bool significant = false;
};

/// Exact two-sided binomial test of `wins` successes in wins + losses trials
/// at p = 1/2: the total probability of outcomes no more likely than the one
/// observed. Throws Error(kNoDecisiveOutcomes) when there are no trials.
BinomialTestResult binomial_test(int wins, int losses, double alpha = 0.05);

enum class Conclusion { kABetter, kBBetter, kInconclusive };

std::string_view conclusion_name(Conclusion c);

/// Ties are not trials; a sample with no decisive outcome is inconclusive.
Conclusion conclude(int wins, int losses, double alpha = 0.05);

struct ResampleConfig {
  std::vector<int> sizes;
  int repetitions = 5000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  /// Consistency counts only repetitions where both samples are conclusive
  /// and name the same winner.
  bool strict_conclusive = false;
  std::size_t max_threads = 0;

  void validate() const;
};

struct CurvePoint {
  int size = 0;
  double estimate = 0;
  int repetitions = 0;
  double mean_ties = 0;  // average ties per sample
};

/// Probability that two disjoint random samples of each size reach the same
/// conclusion. `pool` holds the verdicts of one pair on one dimension.
/// Throws Error(kPoolTooSmall) when 2 x size exceeds the pool.
std::vector<CurvePoint> consistency(std::span<const Verdict> pool, const ResampleConfig& config);

/// Probability that one random sample of each size yields a significant
/// binomial test. Throws Error(kPoolTooSmall) when a size exceeds the pool.
std::vector<CurvePoint> sensitivity(std::span<const Verdict> pool, const ResampleConfig& config);

/// Verdicts of `generator_a` vs `generator_b` on `dimension`, mirrored when
/// the outcome lists the pair the other way round.
std::vector<Verdict> verdict_pool(std::span<const CaseOutcome> outcomes,
                                  std::string_view generator_a, std::string_view generator_b,
                                  Dimension dimension);

struct AgreementRow {
  std::string stronger;
  std::string weaker;
  Dimension dimension = Dimension::kQuality;
  std::string source;
  int cases = 0;
  double agreement = 0;
  double ci_low = 0;   // 95% normal approximation, clamped to [0, 1]
  double ci_high = 0;
};

/// Mean per-case credit for favouring the generator ranked higher in `truth`
/// (strongest first): 1 when the verdict favours it, 0 when it favours the
/// other, `tie_credit` for a tie. Rows are grouped by (pair, dimension,
/// source). Throws Error(kPairNotInTruth).
std::vector<AgreementRow> agreement_with_truth(std::span<const CaseOutcome> outcomes,
                                               std::span<const std::string> truth,
                                               double tie_credit = 0.5);

struct RaterAgreement {
  Dimension dimension = Dimension::kQuality;
  int cases = 0;
  double raw = 0;
  double kappa = 0;
};

/// Raw agreement and chance-corrected kappa per dimension over tasks judged
/// by exactly two raters. Chance agreement uses the pooled choice frequencies
/// of both raters. Throws Error(kUnpairedCase) listing tasks with any other
/// number of judgments.
std::vector<RaterAgreement> inter_rater_agreement(std::span<const HumanJudgment> judgments);

}  // namespace pereval

#endif  // PEREVAL_STATS_HPP_
