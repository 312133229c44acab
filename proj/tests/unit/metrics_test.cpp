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
#include "pereval/metrics.hpp"
#include "pereval/random.hpp"

namespace pereval {
namespace {

using Tokens = std::vector<std::string>;

TEST(Tokenize, Rules) {
  EXPECT_EQ(tokenize("The cat sat."), (Tokens{"the", "cat", "sat"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(tokenize("don't stop"), (Tokens{"don't", "stop"}));
  EXPECT_EQ(tokenize("  \"Hello,\"\t(world)!  "), (Tokens{"hello", "world"}));
  EXPECT_EQ(tokenize("a\xC2\xA0" "b"), (Tokens{"a", "b"}));  // no-break space
  EXPECT_TRUE(tokenize("... !!").empty());
}

TEST(Bleu, IdentityAndDisjoint) {
  EXPECT_NEAR(bleu("one two three four five", "one two three four five"), 100.0, 1e-9);
  EXPECT_LT(bleu("alpha beta gamma delta", "one two three four"), 1e-3);
  EXPECT_EQ(bleu("", "the cat"), 0.0);
}

TEST(Bleu, ClippedUnigrams) {
  // p1 = 1/3, p2 = e/(2+e), p3 = e/(1+e), p4 = e/e, BP = 1.
  const double e = 1e-9;
  const double want = 100 * std::pow((1.0 / 3) * (e / (2 + e)) * (e / (1 + e)), 0.25);
  EXPECT_NEAR(bleu("the the the", "the cat"), want, want * 1e-9);
  BleuOptions o;
  o.max_n = 1;
  EXPECT_NEAR(bleu("the the the", "the cat", o), 100.0 / 3, 1e-9);
}

TEST(Bleu, BrevityPenalty) {
  BleuOptions o;
  o.max_n = 1;
  // c = 2, r = 4: BP = exp(1 - 2).
  EXPECT_NEAR(bleu("a b", "a b c d", o), 100 * std::exp(-1.0), 1e-9);
  o.brevity_penalty = false;
  EXPECT_NEAR(bleu("a b", "a b c d", o), 100.0, 1e-9);
}

TEST(Rouge, Fixtures) {
  EXPECT_NEAR(rouge_n("the cat sat", "the cat sat on the mat", 1), 66.67, 0.01);
  EXPECT_NEAR(rouge_n("same words here", "same words here", 2), 100.0, 1e-9);
  EXPECT_EQ(rouge_n("cat", "the cat", 2), 0.0);
  EXPECT_NEAR(rouge_l("a b c", "a c b"), 66.67, 0.01);
  EXPECT_NEAR(rouge_l("x y z", "x y z"), 100.0, 1e-9);
  EXPECT_EQ(rouge_l("x y", "p q"), 0.0);
  EXPECT_EQ(rouge_l("", "p q"), 0.0);
}

TEST(Rouge, LcsSmallCases) {
  const Tokens a = {"a", "b", "c", "b", "d", "a", "b"};
  const Tokens b = {"b", "d", "c", "a", "b", "a"};
  EXPECT_EQ(lcs_length(a, b), 4u);
  EXPECT_EQ(lcs_length(a, Tokens{}), 0u);
}

TEST(Metrics, RangeProperty) {
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    Tokens c(rng.below(12)), r(rng.below(12));
    for (auto& t : c) t = std::to_string(rng.below(5));
    for (auto& t : r) t = std::to_string(rng.below(5));
    for (double v : {bleu(c, r), rouge_n(c, r, 1), rouge_n(c, r, 2), rouge_l(c, r)}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 100.0 + 1e-9);
    }
  }
}

TEST(MetricPreference, Verdicts) {
  TestCase c{"c", "u", "q", {"x"}, "the quick brown fox jumps"};
  const CandidateOutput same{"c", "a", "the quick brown fox jumps"};
  const CandidateOutput other{"c", "b", "nothing alike here"};
  for (MetricKind k : {MetricKind::kBleu, MetricKind::kRouge1, MetricKind::kRouge2,
                       MetricKind::kRougeL}) {
    EXPECT_EQ(metric_preference(c, same, other, k), Verdict::kWin);
    EXPECT_EQ(metric_preference(c, other, same, k), Verdict::kLoss);
    EXPECT_EQ(metric_preference(c, same, same, k), Verdict::kTie);
  }
  c.reference.reset();
  try {
    metric_preference(c, same, other, MetricKind::kBleu);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingReference);
  }
}

TEST(MetricOutcomes, EncodingAndSource) {
  const std::vector<TestCase> cases = {{"c1", "u", "q", {"x"}, "a b c d"},
                                       {"c2", "u", "q", {"x"}, "a b c d"}};
  const std::vector<CandidateOutput> outputs = {
      {"c1", "g1", "a b c d"}, {"c1", "g2", "a b"}, {"c2", "g1", "a b"}, {"c2", "g2", "a b"}};
  const Dimension dims[] = {Dimension::kQuality, Dimension::kRelevance};
  const auto out = metric_outcomes(cases, outputs, {"g1", "g2"}, MetricKind::kRouge1, dims);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(out[0].verdict, Verdict::kWin);
  EXPECT_EQ(out[0].source, "rouge1");
  EXPECT_EQ(out[0].replicas, 2);
  EXPECT_EQ(out[0].prefers_a, 2);
  EXPECT_EQ(out[2].verdict, Verdict::kTie);
  EXPECT_EQ(out[2].prefers_a, 1);
  EXPECT_EQ(out[2].prefers_b, 1);
}

TEST(MetricNames, RoundTrip) {
  for (MetricKind k : {MetricKind::kBleu, MetricKind::kRouge1, MetricKind::kRouge2,
                       MetricKind::kRougeL}) {
    EXPECT_EQ(parse_metric(metric_name(k)), k);
  }
  EXPECT_FALSE(parse_metric("meteor").has_value());
}

}  // namespace
}  // namespace pereval
