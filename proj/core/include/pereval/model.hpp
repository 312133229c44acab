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

// Shared domain vocabulary: test cases, generator outputs, verdicts and the
// per-case outcomes every evaluator (LLM judge, metric, human) produces.

#ifndef PEREVAL_MODEL_HPP_
#define PEREVAL_MODEL_HPP_

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pereval {

enum class Dimension { kPersonalization, kQuality, kRelevance };

inline constexpr std::array<Dimension, 3> kAllDimensions = {
    Dimension::kPersonalization, Dimension::kQuality, Dimension::kRelevance};

/// Lower-case name used in records ("personalization", ...).
std::string_view dimension_name(Dimension d);
/// Title-case label used in rendered tables ("Personalization", ...).
std::string_view dimension_label(Dimension d);
/// Accepts full names or the one-letter forms p/q/r, case-insensitive.
std::optional<Dimension> parse_dimension(std::string_view s);

/// Outcome from the perspective of generator A of an (A, B) pair.
enum class Verdict { kWin, kLoss, kTie };

std::string_view verdict_name(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view s);

/// Relabeling (A, B) -> (B, A) swaps Win and Loss.
constexpr Verdict mirror(Verdict v) noexcept {
  switch (v) {
    case Verdict::kWin:
      return Verdict::kLoss;
    case Verdict::kLoss:
      return Verdict::kWin;
    case Verdict::kTie:
      return Verdict::kTie;
  }
  return v;
}

/// Game score of generator A: 1 for a win, 0.5 for a tie, 0 for a loss.
constexpr double verdict_score(Verdict v) noexcept {
  return v == Verdict::kWin ? 1.0 : v == Verdict::kTie ? 0.5 : 0.0;
}

struct TestCase {
  std::string case_id;
  std::string user_id;
  std::string immediate_context;
  std::vector<std::string> personal_context;
  std::optional<std::string> reference;

  friend bool operator==(const TestCase&, const TestCase&) = default;
};

struct CandidateOutput {
  std::string case_id;
  std::string generator_id;
  std::string text;

  friend bool operator==(const CandidateOutput&, const CandidateOutput&) = default;
};

/// Aggregated verdict for one (case, generator pair, dimension).
///
/// `replicas` counts the individual decisions behind the verdict: judge
/// replicas for LLM outcomes, raters for human outcomes, 1 for metric
/// outcomes. prefers_a + prefers_b + unparseable == replicas.
struct CaseOutcome {
  std::string case_id;
  std::string generator_a;
  std::string generator_b;
  Dimension dimension = Dimension::kQuality;
  Verdict verdict = Verdict::kTie;
  int prefers_a = 0;
  int prefers_b = 0;
  int unparseable = 0;
  int replicas = 0;
  std::string source = "judge";

  friend bool operator==(const CaseOutcome&, const CaseOutcome&) = default;
};

/// Same outcome seen from generator B's side.
CaseOutcome mirrored(const CaseOutcome& outcome);

/// Lookup of outputs by (case_id, generator_id). Borrows the output storage.
class OutputIndex {
 public:
  explicit OutputIndex(std::span<const CandidateOutput> outputs);

  const CandidateOutput* find(std::string_view case_id, std::string_view generator_id) const;
  /// Throws Error(kMissingOutput) naming the case and generator.
  const CandidateOutput& require(std::string_view case_id, std::string_view generator_id) const;

 private:
  std::map<std::pair<std::string_view, std::string_view>, const CandidateOutput*> index_;
};

/// Win/Loss/Tie percentages of generator A over a set of cases.
struct MatchSummary {
  std::string generator_a;
  std::string generator_b;
  Dimension dimension = Dimension::kQuality;
  double win_rate = 0;
  double loss_rate = 0;
  double tie_rate = 0;
  int cases = 0;
};

/// Rates are 100 * count / total. Returns all-zero rates for an empty span.
MatchSummary summarize(std::span<const CaseOutcome> outcomes,
                       std::string_view generator_a,
                       std::string_view generator_b, Dimension dimension);

/// Rater choice in presentation terms: the response shown as "A" or "B".
enum class Choice { kFirst, kSecond };

struct HumanJudgment {
  std::string judgment_id;
  std::string task_id;
  std::string rater_id;
  std::array<std::optional<Choice>, 3> choices;  // indexed by Dimension
  double elapsed_seconds = 0;
  std::string submitted_at;

  std::optional<Choice> choice(Dimension d) const {
    return choices[static_cast<std::size_t>(d)];
  }
  bool complete() const {
    return choices[0].has_value() && choices[1].has_value() && choices[2].has_value();
  }

  friend bool operator==(const HumanJudgment&, const HumanJudgment&) = default;
};

enum class ViolationKind {
  kDuplicateCase,
  kEmptyCaseId,
  kEmptyPersonalContext,
  kEmptyProfileExample,
  kEmptyReference,
  kDuplicateOutput,
  kEmptyOutputText,
  kDanglingCaseReference,
};

std::string_view violation_name(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string detail;
};

/// Checks every dataset invariant. Violations are data, never thrown.
std::vector<Violation> validate_dataset(std::span<const TestCase> cases,
                                        std::span<const CandidateOutput> outputs);

}  // namespace pereval

#endif  // PEREVAL_MODEL_HPP_
