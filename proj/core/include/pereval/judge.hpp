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

// Pairwise LLM judging.
//
// For every (case, pair, dimension) the judge is asked `replicas` times; half
// of the replicas show generator A's text first and half show B's first, so a
// judge that merely prefers a position contributes equally to both sides.
// Replica preferences are mapped back to generator identity and reduced to a
// Win/Tie/Loss verdict for A.

#ifndef PEREVAL_JUDGE_HPP_
#define PEREVAL_JUDGE_HPP_

#include <array>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pereval/model.hpp"
#include "pereval/records.hpp"

namespace pereval {

/// Instruction template for one dimension. Placeholders: {context} (the
/// immediate context), {profile} (personal-context examples), {first} and
/// {second} (candidate texts in presentation order).
struct JudgePromptSpec {
  Dimension dimension = Dimension::kQuality;
  std::string instruction;
  std::optional<std::size_t> profile_example_budget;  // nullopt: all examples
  std::size_t char_budget = 4000;                     // per inserted block

  static JudgePromptSpec defaults(Dimension dimension);

  /// Quality may use neither {context} nor {profile}; Relevance uses only
  /// {context}; Personalization only {profile}. {first} and {second} are
  /// mandatory. Throws Error(kInvalidTemplate).
  void validate() const;
};

using PromptSet = std::array<JudgePromptSpec, 3>;  // indexed by Dimension
PromptSet default_prompts();

/// Instruction with contexts and candidates substituted, followed by a line
/// asking for an answer that starts with "(A)" or "(B)". Every inserted block
/// is cut to `char_budget` code points.
std::string build_prompt(const JudgePromptSpec& spec, const TestCase& test_case,
                         std::string_view first_text, std::string_view second_text);

enum class ParsedChoice { kPrefersFirst, kPrefersSecond, kUnparseable };

std::string_view parsed_choice_name(ParsedChoice c);

/// A bare "A"/"B" first token wins (case-insensitive, trailing punctuation
/// ignored); otherwise the earliest "(A)"/"(B)" marker decides.
ParsedChoice parse_choice(std::string_view raw_response);

enum class PresentationOrder {
  kBalanced,      // even replicas show A first, odd replicas show B first
  kAlwaysAFirst,  // diagnostic only: exposes position bias
};

struct ReplicationPlan {
  int replicas = 40;
  double temperature = 0.0;
  int max_tokens = 64;
  int tie_margin = 0;  // Tie when |prefers_a - prefers_b| <= tie_margin
  PresentationOrder order = PresentationOrder::kBalanced;

  void validate() const;
  bool a_first(int replica) const {
    return order == PresentationOrder::kAlwaysAFirst || replica % 2 == 0;
  }
};

struct JudgmentReplica {
  std::string case_id;
  std::string generator_a;
  std::string generator_b;
  Dimension dimension = Dimension::kQuality;
  int replica = 0;
  std::string presented_first;
  std::string raw_response;
  ParsedChoice parsed = ParsedChoice::kUnparseable;

  friend bool operator==(const JudgmentReplica&, const JudgmentReplica&) = default;
};

Json to_json(const JudgmentReplica& r);
JudgmentReplica parse_judgment_replica(const Json& j);
std::vector<JudgmentReplica> read_judgments(const std::filesystem::path& path);

/// Reduces replicas of one (case, pair, dimension) to an outcome. A replica
/// preferring the first-presented text counts for whichever generator was
/// shown first.
CaseOutcome aggregate_replicas(std::span<const JudgmentReplica> replicas, int tie_margin = 0);

/// Identity of one backend call, for backends that key on more than the
/// prompt (replay cache, simulation).
struct ReplicaKey {
  std::string case_id;
  std::string generator_a;
  std::string generator_b;
  Dimension dimension = Dimension::kQuality;
  int replica = 0;
  std::string presented_first;
};

struct JudgeRequest {
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 64;
  ReplicaKey key;
};

/// A judge LLM. complete() may be called concurrently. Implementations throw
/// Error(kBackendUnavailable) for transient failures, which the caller
/// retries, and any other Error for permanent ones.
class JudgeBackend {
 public:
  virtual ~JudgeBackend() = default;
  virtual std::string complete(const JudgeRequest& request) = 0;
  virtual std::string backend_id() const = 0;
};

struct RetryPolicy {
  std::vector<std::chrono::milliseconds> backoff = {std::chrono::milliseconds(500),
                                                    std::chrono::milliseconds(2000),
                                                    std::chrono::milliseconds(8000)};
  std::function<void(std::chrono::milliseconds)> sleep;  // empty: this_thread::sleep_for
};

/// Destination for raw replicas. append() is called once per completed case.
class JudgmentSink {
 public:
  virtual ~JudgmentSink() = default;
  virtual void append(std::span<const JudgmentReplica> replicas) = 0;
};

/// Append-only judgments.jsonl; writes are serialized.
class JsonlJudgmentLog : public JudgmentSink {
 public:
  explicit JsonlJudgmentLog(const std::filesystem::path& path);
  void append(std::span<const JudgmentReplica> replicas) override;

 private:
  std::mutex mu_;
  std::ofstream out_;
};

class MemoryJudgmentSink : public JudgmentSink {
 public:
  void append(std::span<const JudgmentReplica> replicas) override;
  std::vector<JudgmentReplica> take();

 private:
  std::mutex mu_;
  std::vector<JudgmentReplica> replicas_;
};

struct JudgeOptions {
  ReplicationPlan plan;
  PromptSet prompts = default_prompts();
  RetryPolicy retry;
  std::size_t max_in_flight = 8;
  JudgmentSink* sink = nullptr;
  double unparseable_warning_rate = 0.2;
};

struct CaseFailure {
  std::string case_id;
  Dimension dimension = Dimension::kQuality;
  std::string message;
};

struct PairJudgment {
  std::vector<CaseOutcome> outcomes;  // case-major, dimensions in request order
  std::vector<MatchSummary> summaries;
  std::vector<CaseFailure> failures;
  std::vector<std::string> warnings;
};

class PairwiseJudge {
 public:
  PairwiseJudge(JudgeBackend& backend, JudgeOptions options);

  /// Runs the full replica plan for one case. Throws the backend's error,
  /// annotated with the failing replica, once retries are exhausted.
  CaseOutcome judge_case(const TestCase& test_case, const CandidateOutput& output_a,
                         const CandidateOutput& output_b, Dimension dimension) const;

  /// Judges every case on every dimension with bounded parallelism. A case
  /// whose replicas cannot all be obtained is reported in `failures` and left
  /// out of the outcomes and summaries. Throws Error(kMissingOutput) before
  /// any backend call when a generator has no output for some case.
  PairJudgment judge_pair(std::span<const TestCase> cases,
                          std::span<const CandidateOutput> outputs,
                          const std::pair<std::string, std::string>& pair,
                          std::span<const Dimension> dimensions) const;

  const JudgeOptions& options() const { return options_; }

 private:
  std::string call_with_retry(const JudgeRequest& request) const;

  JudgeBackend& backend_;
  JudgeOptions options_;
};

}  // namespace pereval

#endif  // PEREVAL_JUDGE_HPP_
