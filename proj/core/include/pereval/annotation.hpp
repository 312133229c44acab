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

// Blinded pairwise annotation by human raters.
//
// A batch holds one task per case; each task has `raters_per_case` slots. A
// rater leases a slot, answers the three questions and submits. Raters,
// tasks and judgments are kept in an append-only record log that is replayed
// on startup, so a restart loses at most unacknowledged work.

#ifndef PEREVAL_ANNOTATION_HPP_
#define PEREVAL_ANNOTATION_HPP_

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pereval/model.hpp"
#include "pereval/records.hpp"

namespace pereval {

struct AnnotationTask {
  std::string task_id;
  std::string case_id;
  std::string generator_a;
  std::string generator_b;
  bool a_first = true;  // whether generator A's text is shown as "Response A"
  std::string immediate_context;
  std::vector<std::string> personal_context;
  std::string text_a;
  std::string text_b;
  int raters_per_case = 2;

  friend bool operator==(const AnnotationTask&, const AnnotationTask&) = default;
};

Json to_json(const AnnotationTask& t);
AnnotationTask parse_annotation_task(const Json& j);

/// What a rater sees: task_id, immediate_context, personal_context,
/// response_a, response_b. Never the case id or generator ids.
Json rater_payload(const AnnotationTask& t);

struct BatchOptions {
  int raters_per_case = 2;
  std::uint64_t seed = 0;
  std::optional<std::size_t> profile_examples;  // nullopt: all
};

/// One task per case with a seeded presentation order. Task ids are derived
/// from (seed, case, pair), so recreating a batch yields identical tasks.
/// Throws Error(kMissingOutput).
std::vector<AnnotationTask> create_batch(std::span<const TestCase> cases,
                                         std::span<const CandidateOutput> outputs,
                                         const std::pair<std::string, std::string>& pair,
                                         const BatchOptions& options);

struct SubmitRequest {
  std::string task_id;
  std::string rater_id;
  std::array<std::optional<Choice>, 3> choices;  // indexed by Dimension
  double elapsed_seconds = 0;
};

struct SubmitAck {
  std::string judgment_id;
  bool duplicate = false;  // the pair (task, rater) was already acknowledged
};

struct ExportResult {
  std::vector<CaseOutcome> outcomes;
  std::vector<std::string> partial_cases;  // some but not all slots judged
  std::vector<std::string> unjudged_cases;
};

struct ServiceOptions {
  std::chrono::seconds lease{std::chrono::minutes(30)};
  std::function<std::chrono::system_clock::time_point()> clock;  // empty: system clock
};

class AnnotationService {
 public:
  /// Opens (creating if needed) the record log at `store` and replays it. A
  /// torn final line, as left by a crash mid-write, is discarded.
  explicit AnnotationService(std::filesystem::path store, ServiceOptions options = {});
  ~AnnotationService();

  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  /// Adds tasks not already in the log; returns how many were new.
  std::size_t add_tasks(std::span<const AnnotationTask> tasks);

  std::string register_rater(const std::string& name);

  /// Leases a slot of some task the rater has not judged. A rater holding an
  /// unexpired lease gets that task back. Throws Error(kUnknownRater).
  std::optional<AnnotationTask> next_task(const std::string& rater_id);

  /// Throws Error(kUnknownRater), Error(kUnknownTask),
  /// Error(kIncompleteAnswers) or Error(kLeaseExpired). A repeated
  /// submission returns the original acknowledgment with duplicate = true.
  SubmitAck submit(const SubmitRequest& request);

  /// Per (case, dimension), one vote per rater for the generator they chose.
  /// The verdict follows the vote counts, so two disagreeing raters tie.
  ExportResult export_outcomes() const;

  std::vector<HumanJudgment> judgments() const;
  std::size_t task_count() const;

 private:
  struct Lease {
    std::string task_id;
    std::chrono::system_clock::time_point expires;
  };

  std::chrono::system_clock::time_point now() const;
  void append(const Json& record);
  void apply(const Json& record);
  int active_leases(const std::string& task_id, const std::string& except_rater,
                    std::chrono::system_clock::time_point at) const;

  std::filesystem::path store_;
  ServiceOptions options_;
  int fd_ = -1;
  mutable std::mutex mu_;
  std::vector<AnnotationTask> tasks_;
  std::map<std::string, std::size_t> task_index_;
  std::map<std::string, std::string> raters_;  // id -> name
  std::vector<HumanJudgment> judgments_;
  std::map<std::pair<std::string, std::string>, std::size_t> by_task_rater_;
  std::map<std::string, Lease> leases_;  // rater id -> lease
};

struct ServerOptions {
  /// Required as a bearer token by the export routes; when unset those
  /// routes answer 403.
  std::optional<std::string> admin_token;
  std::optional<std::filesystem::path> ui_dir;  // served at "/"
};

/// HTTP front end:
///   POST /api/raters            {name} -> 201 {rater_id}
///   GET  /api/tasks/next        ?rater_id= -> 200 payload | 204
///   POST /api/judgments         -> 201 {judgment_id} | 409 on duplicate
///   GET  /api/export/outcomes   (admin) -> {outcomes, partial_cases, unjudged_cases}
///   GET  /api/export/judgments  (admin) -> {judgments}
class AnnotationServer {
 public:
  AnnotationServer(AnnotationService& service, ServerOptions options);
  ~AnnotationServer();

  /// Binds; port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  bool serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pereval

#endif  // PEREVAL_ANNOTATION_HPP_
