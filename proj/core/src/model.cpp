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

#include "pereval/model.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>
#include <utility>

#include "pereval/error.hpp"

namespace pereval {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kUnwritablePath: return "UnwritablePath";
    case ErrorCode::kEmptyAfterFiltering: return "EmptyAfterFiltering";
    case ErrorCode::kNotEnoughCases: return "NotEnoughCases";
    case ErrorCode::kCannotDerange: return "CannotDerange";
    case ErrorCode::kInvalidTemplate: return "InvalidTemplate";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kBackendRejected: return "BackendRejected";
    case ErrorCode::kReplayMiss: return "ReplayMiss";
    case ErrorCode::kUnknownPair: return "UnknownPair";
    case ErrorCode::kMissingOutput: return "MissingOutput";
    case ErrorCode::kMissingReference: return "MissingReference";
    case ErrorCode::kSamePlayer: return "SamePlayer";
    case ErrorCode::kNoDecisiveOutcomes: return "NoDecisiveOutcomes";
    case ErrorCode::kPoolTooSmall: return "PoolTooSmall";
    case ErrorCode::kPairNotInTruth: return "PairNotInTruth";
    case ErrorCode::kUnpairedCase: return "UnpairedCase";
    case ErrorCode::kUnknownRater: return "UnknownRater";
    case ErrorCode::kUnknownTask: return "UnknownTask";
    case ErrorCode::kLeaseExpired: return "LeaseExpired";
    case ErrorCode::kDuplicateSubmission: return "DuplicateSubmission";
    case ErrorCode::kIncompleteAnswers: return "IncompleteAnswers";
    case ErrorCode::kUnauthorized: return "Unauthorized";
  }
  return "Unknown";
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

std::string_view dimension_name(Dimension d) {
  switch (d) {
    case Dimension::kPersonalization: return "personalization";
    case Dimension::kQuality: return "quality";
    case Dimension::kRelevance: return "relevance";
  }
  return "";
}

std::string_view dimension_label(Dimension d) {
  switch (d) {
    case Dimension::kPersonalization: return "Personalization";
    case Dimension::kQuality: return "Quality";
    case Dimension::kRelevance: return "Relevance";
  }
  return "";
}

std::optional<Dimension> parse_dimension(std::string_view s) {
  const std::string v = lower(s);
  if (v == "p" || v == "personalization") return Dimension::kPersonalization;
  if (v == "q" || v == "quality") return Dimension::kQuality;
  if (v == "r" || v == "relevance") return Dimension::kRelevance;
  return std::nullopt;
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kWin: return "win";
    case Verdict::kLoss: return "loss";
    case Verdict::kTie: return "tie";
  }
  return "";
}

std::optional<Verdict> parse_verdict(std::string_view s) {
  const std::string v = lower(s);
  if (v == "win") return Verdict::kWin;
  if (v == "loss") return Verdict::kLoss;
  if (v == "tie") return Verdict::kTie;
  return std::nullopt;
}

CaseOutcome mirrored(const CaseOutcome& outcome) {
  CaseOutcome m = outcome;
  std::swap(m.generator_a, m.generator_b);
  std::swap(m.prefers_a, m.prefers_b);
  m.verdict = mirror(outcome.verdict);
  return m;
}

MatchSummary summarize(std::span<const CaseOutcome> outcomes,
                       std::string_view generator_a,
                       std::string_view generator_b, Dimension dimension) {
  MatchSummary summary{std::string(generator_a), std::string(generator_b),
                       dimension};
  int wins = 0, losses = 0, ties = 0;
  for (const CaseOutcome& o : outcomes) {
    if (o.dimension != dimension) continue;
    Verdict v;
    if (o.generator_a == generator_a && o.generator_b == generator_b) {
      v = o.verdict;
    } else if (o.generator_a == generator_b && o.generator_b == generator_a) {
      v = mirror(o.verdict);
    } else {
      continue;
    }
    (v == Verdict::kWin ? wins : v == Verdict::kLoss ? losses : ties)++;
  }
  summary.cases = wins + losses + ties;
  if (summary.cases > 0) {
    const double total = summary.cases;
    summary.win_rate = 100.0 * wins / total;
    summary.loss_rate = 100.0 * losses / total;
    summary.tie_rate = 100.0 * ties / total;
  }
  return summary;
}

std::string_view violation_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kDuplicateCase: return "duplicate case";
    case ViolationKind::kEmptyCaseId: return "empty case id";
    case ViolationKind::kEmptyPersonalContext: return "empty personal context";
    case ViolationKind::kEmptyProfileExample: return "empty profile example";
    case ViolationKind::kEmptyReference: return "empty reference";
    case ViolationKind::kDuplicateOutput: return "duplicate output";
    case ViolationKind::kEmptyOutputText: return "empty output text";
    case ViolationKind::kDanglingCaseReference: return "dangling case reference";
  }
  return "";
}

std::vector<Violation> validate_dataset(std::span<const TestCase> cases,
                                        std::span<const CandidateOutput> outputs) {
  std::vector<Violation> report;
  std::unordered_set<std::string> case_ids;
  for (const TestCase& c : cases) {
    if (c.case_id.empty()) {
      report.push_back({ViolationKind::kEmptyCaseId, "case with user " + c.user_id});
    }
    if (!case_ids.insert(c.case_id).second) {
      report.push_back({ViolationKind::kDuplicateCase, c.case_id});
    }
    if (c.personal_context.empty()) {
      report.push_back({ViolationKind::kEmptyPersonalContext, c.case_id});
    }
    for (std::size_t i = 0; i < c.personal_context.size(); ++i) {
      if (blank(c.personal_context[i])) {
        report.push_back({ViolationKind::kEmptyProfileExample,
                          c.case_id + " example " + std::to_string(i)});
      }
    }
    if (c.reference && blank(*c.reference)) {
      report.push_back({ViolationKind::kEmptyReference, c.case_id});
    }
  }

  std::set<std::pair<std::string, std::string>> seen;
  for (const CandidateOutput& o : outputs) {
    const std::string where = o.case_id + "/" + o.generator_id;
    if (!case_ids.contains(o.case_id)) {
      report.push_back({ViolationKind::kDanglingCaseReference, where});
    }
    if (!seen.emplace(o.case_id, o.generator_id).second) {
      report.push_back({ViolationKind::kDuplicateOutput, where});
    }
    if (blank(o.text)) {
      report.push_back({ViolationKind::kEmptyOutputText, where});
    }
  }
  return report;
}

OutputIndex::OutputIndex(std::span<const CandidateOutput> outputs) {
  for (const CandidateOutput& o : outputs) index_[{o.case_id, o.generator_id}] = &o;
}

const CandidateOutput* OutputIndex::find(std::string_view case_id,
                                         std::string_view generator_id) const {
  auto it = index_.find({case_id, generator_id});
  return it == index_.end() ? nullptr : it->second;
}

const CandidateOutput& OutputIndex::require(std::string_view case_id,
                                            std::string_view generator_id) const {
  if (const CandidateOutput* o = find(case_id, generator_id)) return *o;
  throw Error(ErrorCode::kMissingOutput, "no output from generator " + std::string(generator_id) +
                                             " for case " + std::string(case_id));
}

}  // namespace pereval
