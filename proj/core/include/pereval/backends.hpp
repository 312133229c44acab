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

#ifndef PEREVAL_BACKENDS_HPP_
#define PEREVAL_BACKENDS_HPP_

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "pereval/judge.hpp"
#include "pereval/records.hpp"

namespace pereval {

/// Where the request/response fields live for a given remote API. The default
/// matches {"prompt", "temperature", "max_tokens"} -> {"text"}.
struct RemoteFieldMap {
  std::string prompt = "prompt";
  std::string temperature = "temperature";
  std::string max_tokens = "max_tokens";
  std::string response_pointer = "/text";  // JSON pointer into the response
};

struct RemoteConfig {
  std::string url;
  std::string bearer_token;
  RemoteFieldMap fields;
  Json extra_body = Json::object();  // merged into every request body
  std::chrono::seconds timeout{120};
};

/// POSTs each prompt to an HTTP endpoint. Connection failures, 429 and 5xx
/// are transient (kBackendUnavailable); other statuses and unreadable bodies
/// are permanent (kBackendRejected).
class RemoteEndpoint : public JudgeBackend {
 public:
  explicit RemoteEndpoint(RemoteConfig config);

  std::string complete(const JudgeRequest& request) override;
  std::string backend_id() const override { return "remote:" + config_.url; }

 private:
  RemoteConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;
};

/// Serves responses recorded in a judgments log; a request that was never
/// recorded is an error (kReplayMiss), never a network call.
class ReplayCache : public JudgeBackend {
 public:
  explicit ReplayCache(std::span<const JudgmentReplica> recorded, std::string id = "replay");
  static ReplayCache from_file(const std::filesystem::path& path);

  std::string complete(const JudgeRequest& request) override;
  std::string backend_id() const override { return id_; }
  std::size_t size() const { return responses_.size(); }

 private:
  using Key = std::tuple<std::string, std::string, std::string, Dimension, int, std::string>;
  std::map<Key, std::string> responses_;
  std::string id_;
};

/// Case-level preference of generator A over B on one dimension.
///
/// Each case draws a latent state: A is better with probability `prefer_a`,
/// the two are indistinguishable with probability `tie_band`, otherwise B is
/// better. In a decided case every replica prefers the better text with
/// probability `strength`. In an indistinguishable case the judge picks
/// whichever text it saw first, which a balanced plan turns into an exact tie.
struct PreferenceSpec {
  double prefer_a = 0.5;
  double tie_band = 0.0;
  double strength = 1.0;
  double unparseable_rate = 0.0;

  /// Same preferences expressed for the pair (B, A).
  PreferenceSpec mirrored() const;
  void validate() const;
};

struct SimulatedJudgeConfig {
  std::map<std::tuple<std::string, std::string, Dimension>, PreferenceSpec> preferences;
  /// Added to the probability of preferring whichever text is shown first
  /// (result clamped to [0, 1]).
  double position_bias = 0.0;
  std::uint64_t seed = 0;

  void set(const std::string& a, const std::string& b, Dimension d, PreferenceSpec spec);
  /// Looks up (a, b) or, failing that, mirrors (b, a).
  std::optional<PreferenceSpec> find(const std::string& a, const std::string& b,
                                     Dimension d) const;
  /// Ordered pairs in first-declared orientation, sorted.
  std::vector<std::pair<std::string, std::string>> pairs() const;
};

Json to_json(const SimulatedJudgeConfig& config);
SimulatedJudgeConfig parse_simulated_judge_config(const Json& j);

/// Builds a config from head-to-head percentages (win, loss, tie per pair and
/// dimension). Rows whose percentages do not sum to 100 are renormalized.
struct HeadToHeadRow {
  std::string generator_a;
  std::string generator_b;
  Dimension dimension = Dimension::kQuality;
  double win = 0;
  double loss = 0;
  double tie = 0;
};

SimulatedJudgeConfig config_from_head_to_head(std::span<const HeadToHeadRow> rows,
                                              double position_bias, double strength,
                                              std::uint64_t seed);

/// Parses "generator_a,generator_b,dimension,win,loss,tie" CSV (header line
/// optional, '#' comments allowed).
std::vector<HeadToHeadRow> parse_head_to_head_csv(std::string_view text);

/// Head-to-head records of four fine-tuned generators of increasing size
/// (Base < Large < XL < XXL) plus human-written text (GOLD) on a book-review
/// corpus. Used as the default simulation table.
std::vector<HeadToHeadRow> book_review_head_to_head();

/// Deterministic stand-in for an LLM judge, driven by per-pair preference
/// specs. All randomness derives from (seed, case, pair, dimension, replica),
/// so concurrent and repeated calls agree, and judging (B, A) yields exactly
/// the mirror of judging (A, B).
class SimulatedJudge : public JudgeBackend {
 public:
  explicit SimulatedJudge(SimulatedJudgeConfig config);

  std::string complete(const JudgeRequest& request) override;
  std::string backend_id() const override;

  const SimulatedJudgeConfig& config() const { return config_; }

 private:
  SimulatedJudgeConfig config_;
};

}  // namespace pereval

#endif  // PEREVAL_BACKENDS_HPP_
