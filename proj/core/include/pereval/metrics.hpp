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

// Reference-based text overlap metrics on a 0-100 scale, and their use as
// pairwise evaluators.

#ifndef PEREVAL_METRICS_HPP_
#define PEREVAL_METRICS_HPP_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pereval/model.hpp"

namespace pereval {

/// Lowercases ASCII letters, splits on Unicode whitespace and strips leading
/// and trailing punctuation from each token. Empty tokens are dropped.
std::vector<std::string> tokenize(std::string_view text);

struct BleuOptions {
  int max_n = 4;
  bool brevity_penalty = true;
  double epsilon = 1e-9;  // added to both sides of an order with no matches
};

double bleu(std::span<const std::string> candidate, std::span<const std::string> reference,
            const BleuOptions& options = {});
double bleu(std::string_view candidate, std::string_view reference,
            const BleuOptions& options = {});

/// F1 of clipped n-gram overlap; 0 when either side has no n-grams.
double rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference,
               int n);
double rouge_n(std::string_view candidate, std::string_view reference, int n);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// F1 of longest-common-subsequence length.
double rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference);
double rouge_l(std::string_view candidate, std::string_view reference);

enum class MetricKind { kBleu, kRouge1, kRouge2, kRougeL };

std::string_view metric_name(MetricKind kind);  // bleu, rouge1, rouge2, rougeL
std::optional<MetricKind> parse_metric(std::string_view s);

double metric_score(MetricKind kind, std::string_view candidate, std::string_view reference);

/// Win when A scores more than `epsilon` above B against the case reference.
/// Throws Error(kMissingReference) when the case has none.
Verdict metric_preference(const TestCase& test_case, const CandidateOutput& output_a,
                          const CandidateOutput& output_b, MetricKind kind,
                          double epsilon = 1e-9);

/// One outcome per (case, dimension) with source set to the metric name. The
/// decision is recorded as two replicas (2/0, 1/1 or 0/2). The metric ignores the
/// dimension; it is stamped on so metric outcomes slot in wherever judge
/// outcomes do. Throws Error(kMissingOutput) or Error(kMissingReference).
std::vector<CaseOutcome> metric_outcomes(std::span<const TestCase> cases,
                                         std::span<const CandidateOutput> outputs,
                                         const std::pair<std::string, std::string>& pair,
                                         MetricKind kind,
                                         std::span<const Dimension> dimensions,
                                         double epsilon = 1e-9);

}  // namespace pereval

#endif  // PEREVAL_METRICS_HPP_
