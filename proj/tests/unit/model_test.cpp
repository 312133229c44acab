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

#include <filesystem>
#include <fstream>

#include "pereval/error.hpp"
#include "pereval/model.hpp"
#include "pereval/records.hpp"
#include "pereval/text.hpp"

namespace pereval {
namespace {

TestCase make_case(std::string id) {
  return {id, "u1", "Title", {"an earlier review"}, "the reference"};
}

std::vector<CandidateOutput> outputs_for(const std::vector<TestCase>& cases) {
  std::vector<CandidateOutput> out;
  for (const TestCase& c : cases) {
    out.push_back({c.case_id, "g1", "text one"});
    out.push_back({c.case_id, "g2", "text two"});
  }
  return out;
}

TEST(ValidateDataset, WellFormedFixtureIsClean) {
  const std::vector<TestCase> cases = {make_case("c1"), make_case("c2"), make_case("c3")};
  EXPECT_TRUE(validate_dataset(cases, outputs_for(cases)).empty());
}

TEST(ValidateDataset, DanglingOutput) {
  const std::vector<TestCase> cases = {make_case("c1")};
  auto outputs = outputs_for(cases);
  outputs.push_back({"nope", "g1", "x"});
  const auto report = validate_dataset(cases, outputs);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].kind, ViolationKind::kDanglingCaseReference);
}

TEST(ValidateDataset, DuplicateOutput) {
  const std::vector<TestCase> cases = {make_case("c1")};
  auto outputs = outputs_for(cases);
  outputs.push_back({"c1", "g1", "again"});
  const auto report = validate_dataset(cases, outputs);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].kind, ViolationKind::kDuplicateOutput);
}

TEST(ValidateDataset, CaseLevelViolations) {
  std::vector<TestCase> cases = {make_case("c1"), make_case("c1"), make_case("c2")};
  cases[2].personal_context.clear();
  cases[2].reference = "";
  const auto report = validate_dataset(cases, {});
  std::vector<ViolationKind> kinds;
  for (const Violation& v : report) kinds.push_back(v.kind);
  EXPECT_NE(std::find(kinds.begin(), kinds.end(), ViolationKind::kDuplicateCase), kinds.end());
  EXPECT_NE(std::find(kinds.begin(), kinds.end(), ViolationKind::kEmptyPersonalContext),
            kinds.end());
  EXPECT_NE(std::find(kinds.begin(), kinds.end(), ViolationKind::kEmptyReference), kinds.end());
}

TEST(Dimension, ParsesNamesAndLetters) {
  for (Dimension d : kAllDimensions) {
    EXPECT_EQ(parse_dimension(dimension_name(d)), d);
  }
  EXPECT_EQ(parse_dimension("Q"), Dimension::kQuality);
  EXPECT_EQ(parse_dimension("p"), Dimension::kPersonalization);
  EXPECT_FALSE(parse_dimension("style").has_value());
}

TEST(Verdict, MirrorIsAnInvolution) {
  for (Verdict v : {Verdict::kWin, Verdict::kLoss, Verdict::kTie}) {
    EXPECT_EQ(mirror(mirror(v)), v);
    EXPECT_DOUBLE_EQ(verdict_score(v) + verdict_score(mirror(v)), 1.0);
  }
}

CaseOutcome outcome(std::string id, Verdict v) {
  CaseOutcome o;
  o.case_id = std::move(id);
  o.generator_a = "A";
  o.generator_b = "B";
  o.verdict = v;
  o.replicas = 2;
  return o;
}

TEST(Summarize, SingleTieCase) {
  const std::vector<CaseOutcome> outcomes = {outcome("c1", Verdict::kTie)};
  const MatchSummary s = summarize(outcomes, "A", "B", Dimension::kQuality);
  EXPECT_EQ(s.cases, 1);
  EXPECT_DOUBLE_EQ(s.win_rate, 0);
  EXPECT_DOUBLE_EQ(s.loss_rate, 0);
  EXPECT_DOUBLE_EQ(s.tie_rate, 100);
}

TEST(Summarize, MirroredPairExchangesRates) {
  std::vector<CaseOutcome> outcomes;
  for (int i = 0; i < 7; ++i) outcomes.push_back(outcome("w" + std::to_string(i), Verdict::kWin));
  for (int i = 0; i < 2; ++i) outcomes.push_back(outcome("l" + std::to_string(i), Verdict::kLoss));
  outcomes.push_back(outcome("t", Verdict::kTie));
  const MatchSummary ab = summarize(outcomes, "A", "B", Dimension::kQuality);
  const MatchSummary ba = summarize(outcomes, "B", "A", Dimension::kQuality);
  EXPECT_DOUBLE_EQ(ab.win_rate, 70);
  EXPECT_DOUBLE_EQ(ab.win_rate, ba.loss_rate);
  EXPECT_DOUBLE_EQ(ab.loss_rate, ba.win_rate);
  EXPECT_DOUBLE_EQ(ab.tie_rate, ba.tie_rate);
  EXPECT_EQ(summarize(outcomes, "A", "B", Dimension::kRelevance).cases, 0);
}

TEST(Mirrored, SwapsSidesAndCounts) {
  CaseOutcome o = outcome("c", Verdict::kWin);
  o.prefers_a = 30;
  o.prefers_b = 10;
  const CaseOutcome m = mirrored(o);
  EXPECT_EQ(m.generator_a, "B");
  EXPECT_EQ(m.verdict, Verdict::kLoss);
  EXPECT_EQ(m.prefers_a, 10);
  EXPECT_EQ(m.prefers_b, 30);
  EXPECT_EQ(mirrored(m), o);
}

TEST(OutputIndex, FindsAndRequires) {
  const std::vector<CandidateOutput> outputs = {{"c1", "g1", "x"}, {"c1", "g2", "y"}};
  const OutputIndex index(outputs);
  EXPECT_EQ(index.require("c1", "g2").text, "y");
  EXPECT_EQ(index.find("c2", "g1"), nullptr);
  try {
    index.require("c2", "g1");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingOutput);
  }
}

TEST(Records, RoundTrip) {
  const TestCase c = make_case("c1");
  EXPECT_EQ(parse_test_case(to_json(c)), c);
  TestCase no_ref = c;
  no_ref.reference.reset();
  EXPECT_EQ(parse_test_case(to_json(no_ref)), no_ref);
  const CandidateOutput o{"c1", "g", "t"};
  EXPECT_EQ(parse_candidate_output(to_json(o)), o);
  CaseOutcome out = outcome("c1", Verdict::kLoss);
  out.dimension = Dimension::kRelevance;
  out.prefers_b = 2;
  out.source = "rouge1";
  EXPECT_EQ(parse_case_outcome(to_json(out)), out);
  HumanJudgment h{"j1", "t1", "r1", {Choice::kFirst, Choice::kSecond, std::nullopt}, 3.5, "now"};
  EXPECT_EQ(parse_human_judgment(to_json(h)), h);
}

TEST(Records, MalformedLineNamesTheLine) {
  const auto path = std::filesystem::temp_directory_path() / "pereval-model-bad.jsonl";
  {
    std::ofstream out(path);
    out << to_json(make_case("c1")).dump() << "\n{not json\n";
  }
  try {
    read_cases(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedRecord);
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
}

TEST(Text, Utf8Helpers) {
  EXPECT_EQ(utf8_length("caf\xC3\xA9"), 4u);
  EXPECT_EQ(utf8_truncate("caf\xC3\xA9s", 4), "caf\xC3\xA9");
  EXPECT_EQ(normalize_whitespace("  a \t\n b  "), "a b");
}

}  // namespace
}  // namespace pereval
