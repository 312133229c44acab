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

#include <httplib.h>

#include <thread>

#include "pereval/backends.hpp"
#include "pereval/error.hpp"

namespace pereval {
namespace {

class FakeJudgeServer {
 public:
  FakeJudgeServer() {
    server_.Post("/v1/judge", [this](const httplib::Request& req, httplib::Response& res) {
      last_body = Json::parse(req.body);
      last_auth = req.get_header_value("Authorization");
      res.status = status;
      res.set_content(reply, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeJudgeServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/judge"; }

  int status = 200;
  std::string reply = R"({"text": "(A) first"})";
  Json last_body;
  std::string last_auth;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

JudgeRequest request() {
  JudgeRequest r;
  r.prompt = "compare";
  r.temperature = 0.5;
  r.max_tokens = 16;
  return r;
}

TEST(RemoteEndpoint, MapsFieldsAndReadsPointer) {
  FakeJudgeServer server;
  server.reply = R"({"choices": [{"message": {"content": "(B) second"}}]})";
  RemoteConfig config;
  config.url = server.url();
  config.bearer_token = "secret";
  config.fields.prompt = "input";
  config.fields.response_pointer = "/choices/0/message/content";
  config.extra_body = Json{{"model", "judge-large"}};
  RemoteEndpoint endpoint(config);
  EXPECT_EQ(endpoint.complete(request()), "(B) second");
  EXPECT_EQ(server.last_body.at("input"), "compare");
  EXPECT_EQ(server.last_body.at("temperature"), 0.5);
  EXPECT_EQ(server.last_body.at("max_tokens"), 16);
  EXPECT_EQ(server.last_body.at("model"), "judge-large");
  EXPECT_EQ(server.last_auth, "Bearer secret");
}

ErrorCode code_of(RemoteEndpoint& e) {
  try {
    e.complete(request());
  } catch (const Error& err) {
    return err.code();
  }
  return ErrorCode::kInvalidArgument;
}

TEST(RemoteEndpoint, StatusClassification) {
  FakeJudgeServer server;
  RemoteConfig config;
  config.url = server.url();
  RemoteEndpoint endpoint(config);
  server.status = 429;
  EXPECT_EQ(code_of(endpoint), ErrorCode::kBackendUnavailable);
  server.status = 503;
  EXPECT_EQ(code_of(endpoint), ErrorCode::kBackendUnavailable);
  server.status = 400;
  EXPECT_EQ(code_of(endpoint), ErrorCode::kBackendRejected);
  server.status = 200;
  server.reply = R"({"other": 1})";
  EXPECT_EQ(code_of(endpoint), ErrorCode::kBackendRejected);
}

TEST(RemoteEndpoint, UnreachableIsUnavailable) {
  RemoteConfig config;
  config.url = "http://127.0.0.1:1/judge";
  RemoteEndpoint endpoint(config);
  EXPECT_EQ(code_of(endpoint), ErrorCode::kBackendUnavailable);
}

TEST(RemoteEndpoint, RejectsNonHttpUrl) {
  RemoteConfig config;
  config.url = "ftp://example.org";
  EXPECT_THROW(RemoteEndpoint{config}, Error);
}

TEST(ReplayCache, MissIsAnError) {
  const std::vector<JudgmentReplica> recorded = {
      {"c1", "A", "B", Dimension::kQuality, 0, "A", "(A)", ParsedChoice::kPrefersFirst}};
  ReplayCache cache(recorded);
  JudgeRequest r = request();
  r.key = {"c1", "A", "B", Dimension::kQuality, 0, "A"};
  EXPECT_EQ(cache.complete(r), "(A)");
  r.key.replica = 1;
  try {
    cache.complete(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kReplayMiss);
  }
}

TEST(SimulatedJudgeConfig, FindMirrorsAndJsonRoundTrips) {
  SimulatedJudgeConfig c;
  c.position_bias = 0.1;
  c.seed = 3;
  c.set("A", "B", Dimension::kQuality, PreferenceSpec{0.7, 0.1, 0.9, 0.0});
  const auto direct = c.find("A", "B", Dimension::kQuality);
  const auto reverse = c.find("B", "A", Dimension::kQuality);
  ASSERT_TRUE(direct && reverse);
  EXPECT_NEAR(reverse->prefer_a, 0.2, 1e-12);
  EXPECT_NEAR(reverse->tie_band, 0.1, 1e-12);
  EXPECT_FALSE(c.find("A", "B", Dimension::kRelevance).has_value());

  const SimulatedJudgeConfig back = parse_simulated_judge_config(to_json(c));
  EXPECT_EQ(back.seed, 3u);
  EXPECT_DOUBLE_EQ(back.position_bias, 0.1);
  EXPECT_DOUBLE_EQ(back.find("A", "B", Dimension::kQuality)->prefer_a, 0.7);
}

TEST(SimulatedJudgeConfig, FromHeadToHeadNormalizes) {
  const std::vector<HeadToHeadRow> rows = {{"X", "Y", Dimension::kQuality, 62.6, 32.4, 5.1}};
  const auto c = config_from_head_to_head(rows, 0, 0.8, 1);
  const auto spec = c.find("X", "Y", Dimension::kQuality);
  ASSERT_TRUE(spec);
  EXPECT_NEAR(spec->prefer_a + spec->tie_band, (62.6 + 5.1) / 100.1, 1e-12);
  EXPECT_DOUBLE_EQ(spec->strength, 0.8);
}

TEST(HeadToHeadCsv, ParsesWithHeaderAndComments) {
  const auto rows = parse_head_to_head_csv(
      "generator_a,generator_b,dimension,win,loss,tie\n"
      "# book reviews\n"
      "XXL,XL,personalization,62.6,32.4,5.0\n"
      "\n"
      "XXL,XL,q,66.5,31.4,2.1\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].dimension, Dimension::kQuality);
  EXPECT_DOUBLE_EQ(rows[0].tie, 5.0);
  EXPECT_THROW(parse_head_to_head_csv("A,B,quality,1,2\n"), Error);
  EXPECT_THROW(parse_head_to_head_csv("A,B,style,1,2,3\n"), Error);
}

TEST(HeadToHeadCsv, BuiltInRowsAreComplete) {
  const auto rows = book_review_head_to_head();
  EXPECT_EQ(rows.size(), 21u);
  for (const HeadToHeadRow& r : rows) EXPECT_NEAR(r.win + r.loss + r.tie, 100.0, 0.15);
}

TEST(SimulatedJudge, UnknownPair) {
  SimulatedJudge judge(SimulatedJudgeConfig{});
  JudgeRequest r = request();
  r.key = {"c", "A", "B", Dimension::kQuality, 0, "A"};
  try {
    judge.complete(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownPair);
  }
}

TEST(SimulatedJudge, TieBandPicksFirstShown) {
  SimulatedJudgeConfig c;
  c.set("A", "B", Dimension::kQuality, PreferenceSpec{0.0, 1.0, 1.0, 0.0});
  SimulatedJudge judge(c);
  JudgeRequest r = request();
  r.key = {"c", "A", "B", Dimension::kQuality, 0, "A"};
  EXPECT_EQ(parse_choice(judge.complete(r)), ParsedChoice::kPrefersFirst);
  r.key = {"c", "A", "B", Dimension::kQuality, 1, "B"};
  EXPECT_EQ(parse_choice(judge.complete(r)), ParsedChoice::kPrefersFirst);
}

}  // namespace
}  // namespace pereval
