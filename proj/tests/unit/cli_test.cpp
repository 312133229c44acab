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

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "pereval/records.hpp"

namespace pereval::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pereval-cli-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  void simulate(int cases = 60) {
    const Result r = run({"simulate", "--out-dir", dir_.string(), "--cases", std::to_string(cases),
                       "--generators", "XXL,XL,Base", "--seed", "4"});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  fs::path dir_;
};

TEST_F(CliTest, HelpAndUsageErrors) {
  const Result help = run({"elo", "--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("--bootstrap"), std::string::npos);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"elo"}).code, 2);  // --outcomes is required
}

TEST_F(CliTest, JudgeWithoutBackend) {
  simulate(5);
  ::unsetenv("AUPEL_JUDGE_URL");
  const Result r = run({"judge", "--cases", p("cases.jsonl"), "--outputs", p("outputs.jsonl"),
                     "--pair", "XXL,XL", "--outcomes", p("o.jsonl")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("missing backend"), std::string::npos);
}

TEST_F(CliTest, DomainErrorsAreJsonOnStderr) {
  const Result r = run({"elo", "--outcomes", p("absent.jsonl")});
  EXPECT_EQ(r.code, 1);
  const Json j = Json::parse(r.err);
  EXPECT_TRUE(j.contains("error"));
  EXPECT_TRUE(j.contains("message"));
}

TEST_F(CliTest, SimulateJudgeEloReport) {
  simulate();
  Result r = run({"judge", "--cases", p("cases.jsonl"), "--outputs", p("outputs.jsonl"),
               "--all-pairs", "--simulated", p("judge.json"), "--replicas", "4", "--outcomes",
               p("outcomes.jsonl"), "--tables", p("tables"), "--judgments-log", p("log.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_outcomes(p("outcomes.jsonl")).size(), 60u * 3u * 3u);
  EXPECT_NE(r.out.find("XXL vs XL"), std::string::npos);

  // Replaying the log gives the same outcomes.
  r = run({"judge", "--cases", p("cases.jsonl"), "--outputs", p("outputs.jsonl"), "--all-pairs",
           "--replay", p("log.jsonl"), "--replicas", "4", "--outcomes", p("replayed.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_outcomes(p("replayed.jsonl")), read_outcomes(p("outcomes.jsonl")));

  r = run({"elo", "--outcomes", p("outcomes.jsonl"), "--bootstrap", "50", "--tables",
           p("tables"), "--csv", p("elo.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(p("elo.csv")));

  r = run({"consistency", "--outcomes", p("outcomes.jsonl"), "--pair", "XXL,Base", "--sizes",
           "5,10", "--repetitions", "50", "--tables", p("tables")});
  ASSERT_EQ(r.code, 0) << r.err;

  r = run({"--deterministic", "report", "--in", p("tables"), "--format", "md", "--out",
           p("report.md")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(p("report.md"));
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_NE(ss.str().find("1970-01-01T00:00:00Z"), std::string::npos);
  EXPECT_NE(ss.str().find("Elo"), std::string::npos);
}

TEST_F(CliTest, BaselineAndAgreement) {
  simulate(30);
  Result r = run({"baseline", "--cases", p("cases.jsonl"), "--outputs", p("outputs.jsonl"),
               "--metric", "rouge1", "--all-pairs", "--outcomes", p("metric.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto outcomes = read_outcomes(p("metric.jsonl"));
  ASSERT_FALSE(outcomes.empty());
  EXPECT_EQ(outcomes.front().source, "rouge1");
  r = run({"agreement", "--outcomes", p("metric.jsonl"), "--truth", "XXL,XL,Base"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(run({"agreement"}).code, 2);
}

TEST_F(CliTest, PrepareSampleAblate) {
  {
    std::ofstream raw(p("raw.jsonl"));
    for (int u = 0; u < 10; ++u) {
      for (int i = 0; i < 14; ++i) {
        raw << Json{{"user_id", "u" + std::to_string(u)},
                    {"timestamp", i},
                    {"immediate_context", "title " + std::to_string(u * 100 + i)},
                    {"text", "doc " + std::to_string(u * 100 + i) + std::string(310, 'z')}}
                   .dump()
            << "\n";
      }
    }
  }
  Result r = run({"prepare", "--in", p("raw.jsonl"), "--out-dir", p("prep"), "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto test = read_cases(p("prep/test.jsonl"));
  EXPECT_EQ(test.size(), 11u);  // one user, docs 3..13
  r = run({"sample", "--in", p("prep/train.jsonl"), "-n", "20", "--out", p("s.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_cases(p("s.jsonl")).size(), 20u);
  r = run({"ablate", "--in", p("s.jsonl"), "--mode", "immediate", "--out", p("a.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(run({"ablate", "--in", p("s.jsonl"), "--mode", "both", "--out", p("b.jsonl")}).code,
            2);
}

TEST_F(CliTest, ConfigFileSuppliesDefaults) {
  simulate(10);
  {
    std::ofstream cfg(p("run.ini"));
    cfg << "[judge]\nreplicas=6\nsimulated=" << p("judge.json") << "\n";
  }
  const Result r = run({"--config", p("run.ini"), "judge", "--cases", p("cases.jsonl"), "--outputs",
                     p("outputs.jsonl"), "--pair", "XXL,XL", "--outcomes", p("o.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_outcomes(p("o.jsonl")).front().replicas, 6);
}

}  // namespace
}  // namespace pereval::cli
