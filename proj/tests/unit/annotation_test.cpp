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

#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "pereval/annotation.hpp"
#include "pereval/error.hpp"
#include "pereval/simulate.hpp"

namespace pereval {
namespace {

namespace fs = std::filesystem;

class AnnotationTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pereval-annotation-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path store() const { return dir_ / "store.jsonl"; }

  static SyntheticCorpus corpus(std::size_t n) {
    SyntheticCorpusOptions o;
    o.cases = n;
    const std::vector<std::string> gens = {"GOLD", "XXL"};
    return synthetic_corpus(gens, o);
  }

  static std::vector<AnnotationTask> tasks(std::size_t n, int raters = 2) {
    const auto c = corpus(n);
    BatchOptions o;
    o.raters_per_case = raters;
    return create_batch(c.cases, c.outputs, {"GOLD", "XXL"}, o);
  }

  static SubmitRequest answer(const AnnotationTask& t, const std::string& rater, Choice c) {
    return {t.task_id, rater, {c, c, c}, 30.0};
  }

  fs::path dir_;
};

TEST_F(AnnotationTest, BatchShape) {
  const auto batch = tasks(250);
  EXPECT_EQ(batch.size(), 250u);
  int slots = 0;
  std::set<std::string> ids;
  int a_first = 0;
  for (const AnnotationTask& t : batch) {
    slots += t.raters_per_case;
    ids.insert(t.task_id);
    a_first += t.a_first;
  }
  EXPECT_EQ(slots, 500);
  EXPECT_EQ(ids.size(), 250u);
  EXPECT_GT(a_first, 90);
  EXPECT_LT(a_first, 160);
  EXPECT_EQ(tasks(250), batch);
  EXPECT_EQ(tasks(3, 1).front().raters_per_case, 1);
}

TEST_F(AnnotationTest, PayloadHidesGenerators) {
  const auto t = tasks(1).front();
  const std::string payload = rater_payload(t).dump();
  EXPECT_EQ(payload.find("GOLD"), std::string::npos);
  EXPECT_EQ(payload.find("XXL"), std::string::npos);
  EXPECT_EQ(payload.find("a_first"), std::string::npos);
  const Json j = rater_payload(t);
  EXPECT_EQ(j.at("response_a"), t.a_first ? t.text_a : t.text_b);
}

TEST_F(AnnotationTest, QueueAndLeases) {
  AnnotationService s(store());
  EXPECT_EQ(s.add_tasks(tasks(3, 1)), 3u);
  EXPECT_EQ(s.add_tasks(tasks(3, 1)), 0u);
  const std::string r1 = s.register_rater("one");
  const std::string r2 = s.register_rater("two");
  const auto t1 = s.next_task(r1);
  const auto t2 = s.next_task(r2);
  ASSERT_TRUE(t1 && t2);
  EXPECT_NE(t1->task_id, t2->task_id);
  EXPECT_EQ(s.next_task(r1)->task_id, t1->task_id);  // lease is sticky
  s.submit(answer(*t1, r1, Choice::kFirst));
  s.submit(answer(*t2, r2, Choice::kFirst));
  const auto t3 = s.next_task(r1);
  ASSERT_TRUE(t3);
  s.submit(answer(*t3, r1, Choice::kFirst));
  EXPECT_FALSE(s.next_task(r1).has_value());
  EXPECT_FALSE(s.next_task(r2).has_value());
  EXPECT_THROW(s.next_task("r-nobody"), Error);
}

TEST_F(AnnotationTest, SubmitRules) {
  AnnotationService s(store());
  s.add_tasks(tasks(2));
  const std::string r = s.register_rater("one");
  const auto t = s.next_task(r);
  ASSERT_TRUE(t);
  SubmitRequest partial = answer(*t, r, Choice::kFirst);
  partial.choices[2].reset();
  try {
    s.submit(partial);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIncompleteAnswers);
  }
  const SubmitAck first = s.submit(answer(*t, r, Choice::kFirst));
  EXPECT_FALSE(first.duplicate);
  const auto size = fs::file_size(store());
  const SubmitAck again = s.submit(answer(*t, r, Choice::kSecond));
  EXPECT_TRUE(again.duplicate);
  EXPECT_EQ(again.judgment_id, first.judgment_id);
  EXPECT_EQ(fs::file_size(store()), size);
  EXPECT_EQ(s.judgments().size(), 1u);

  SubmitRequest unknown = answer(*t, r, Choice::kFirst);
  unknown.task_id = "t-missing";
  EXPECT_THROW(s.submit(unknown), Error);
}

TEST_F(AnnotationTest, ExpiredLeaseIsRejected) {
  auto now = std::chrono::system_clock::time_point{} + std::chrono::hours(1000);
  ServiceOptions o;
  o.lease = std::chrono::minutes(30);
  o.clock = [&] { return now; };
  AnnotationService s(store(), o);
  s.add_tasks(tasks(1));
  const std::string r = s.register_rater("slow");
  const auto t = s.next_task(r);
  now += std::chrono::minutes(31);
  try {
    s.submit(answer(*t, r, Choice::kFirst));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLeaseExpired);
  }
  // A fresh lease allows the submission.
  ASSERT_TRUE(s.next_task(r));
  EXPECT_NO_THROW(s.submit(answer(*t, r, Choice::kFirst)));
}

TEST_F(AnnotationTest, ExportRules) {
  AnnotationService s(store());
  const auto batch = tasks(3);
  s.add_tasks(batch);
  const std::string r1 = s.register_rater("one");
  const std::string r2 = s.register_rater("two");
  // Task 0: both pick GOLD. Task 1: disagree. Task 2: one judgment only.
  for (const std::string& r : {r1, r2}) {
    while (auto t = s.next_task(r)) {
      const int idx = static_cast<int>(
          std::find_if(batch.begin(), batch.end(),
                       [&](const AnnotationTask& b) { return b.task_id == t->task_id; }) -
          batch.begin());
      if (idx == 2 && r == r2) break;
      const Choice gold = t->a_first ? Choice::kFirst : Choice::kSecond;
      const Choice other = gold == Choice::kFirst ? Choice::kSecond : Choice::kFirst;
      s.submit(answer(*t, r, idx == 1 && r == r2 ? other : gold));
    }
  }
  const ExportResult e = s.export_outcomes();
  EXPECT_EQ(e.partial_cases, std::vector<std::string>{batch[2].case_id});
  ASSERT_EQ(e.outcomes.size(), 6u);
  for (const CaseOutcome& o : e.outcomes) {
    EXPECT_EQ(o.source, "human");
    EXPECT_EQ(o.generator_a, "GOLD");
    EXPECT_EQ(o.verdict, o.case_id == batch[0].case_id ? Verdict::kWin : Verdict::kTie);
  }
}

TEST_F(AnnotationTest, RestartKeepsAcknowledgedWorkAndDropsTornTail) {
  std::vector<HumanJudgment> before;
  {
    AnnotationService s(store());
    s.add_tasks(tasks(4));
    const std::string r = s.register_rater("one");
    while (auto t = s.next_task(r)) s.submit(answer(*t, r, Choice::kSecond));
    before = s.judgments();
  }
  {
    std::ofstream out(store(), std::ios::app);
    out << R"({"type":"judgment","task_id":)";
  }
  AnnotationService again(store());
  EXPECT_EQ(again.judgments(), before);
  EXPECT_EQ(again.task_count(), 4u);
  // The torn bytes are gone, so later appends start on a clean line.
  const std::string r2 = again.register_rater("two");
  EXPECT_TRUE(again.next_task(r2).has_value());
  AnnotationService third(store());
  EXPECT_EQ(third.judgments(), before);
}

TEST_F(AnnotationTest, CorruptionBeforeTailIsFatal) {
  {
    AnnotationService s(store());
    s.add_tasks(tasks(2));
  }
  std::string text;
  {
    std::ifstream in(store());
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  text.insert(0, "garbage\n");
  {
    std::ofstream out(store(), std::ios::trunc);
    out << text;
  }
  try {
    AnnotationService s(store());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedRecord);
  }
}

class HttpTest : public AnnotationTest {
 protected:
  void start(std::optional<std::string> token) {
    service_ = std::make_unique<AnnotationService>(store());
    service_->add_tasks(tasks(2));
    ServerOptions o;
    o.admin_token = std::move(token);
    server_ = std::make_unique<AnnotationServer>(*service_, o);
    port_ = server_->bind("127.0.0.1", 0);
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_->serve(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_connection_timeout(std::chrono::seconds(5));
  }
  void TearDown() override {
    if (server_) {
      server_->stop();
      thread_.join();
    }
    AnnotationTest::TearDown();
  }
  std::string rater() {
    auto res = client_->Post("/api/raters", R"({"name":"r"})", "application/json");
    EXPECT_EQ(res->status, 201);
    return Json::parse(res->body).at("rater_id");
  }

  std::unique_ptr<AnnotationService> service_;
  std::unique_ptr<AnnotationServer> server_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(HttpTest, StatusCodes) {
  start("tok");
  const std::string r = rater();
  EXPECT_EQ(client_->Post("/api/raters", "{}", "application/json")->status, 400);
  EXPECT_EQ(client_->Get("/api/tasks/next?rater_id=nobody")->status, 404);

  auto next = client_->Get("/api/tasks/next?rater_id=" + r);
  ASSERT_EQ(next->status, 200);
  const std::string task = Json::parse(next->body).at("task_id");
  Json body{{"task_id", task}, {"rater_id", r}, {"personalization", "A"}, {"quality", "B"}};
  EXPECT_EQ(client_->Post("/api/judgments", body.dump(), "application/json")->status, 422);
  body["relevance"] = "C";
  EXPECT_EQ(client_->Post("/api/judgments", body.dump(), "application/json")->status, 400);
  body["relevance"] = "A";
  Json unknown = body;
  unknown["task_id"] = "t-0";
  EXPECT_EQ(client_->Post("/api/judgments", unknown.dump(), "application/json")->status, 404);
  auto ok = client_->Post("/api/judgments", body.dump(), "application/json");
  ASSERT_EQ(ok->status, 201);
  auto dup = client_->Post("/api/judgments", body.dump(), "application/json");
  EXPECT_EQ(dup->status, 409);
  EXPECT_EQ(Json::parse(dup->body).at("judgment_id"), Json::parse(ok->body).at("judgment_id"));
  EXPECT_EQ(client_->Post("/api/judgments", "{not json", "application/json")->status, 400);

  next = client_->Get("/api/tasks/next?rater_id=" + r);
  ASSERT_EQ(next->status, 200);
  body["task_id"] = Json::parse(next->body).at("task_id");
  ASSERT_EQ(client_->Post("/api/judgments", body.dump(), "application/json")->status, 201);
  EXPECT_EQ(client_->Get("/api/tasks/next?rater_id=" + r)->status, 204);

  EXPECT_EQ(client_->Get("/api/export/outcomes")->status, 401);
  auto bad = client_->Get("/api/export/outcomes", httplib::Headers{{"Authorization", "Bearer x"}});
  EXPECT_EQ(bad->status, 401);
  auto judgments =
      client_->Get("/api/export/judgments", httplib::Headers{{"Authorization", "Bearer tok"}});
  ASSERT_EQ(judgments->status, 200);
  EXPECT_EQ(Json::parse(judgments->body).at("judgments").size(), 2u);
  auto outcomes =
      client_->Get("/api/export/outcomes", httplib::Headers{{"Authorization", "Bearer tok"}});
  ASSERT_EQ(outcomes->status, 200);
  EXPECT_EQ(Json::parse(outcomes->body).at("partial_cases").size(), 2u);
}

TEST_F(HttpTest, ExportDisabledWithoutToken) {
  start(std::nullopt);
  EXPECT_EQ(client_->Get("/api/export/outcomes")->status, 403);
}

}  // namespace
}  // namespace pereval
