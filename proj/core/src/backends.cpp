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

#include "pereval/backends.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

#include "pereval/error.hpp"
#include "pereval/random.hpp"

namespace pereval {
namespace {

double unit_interval(std::uint64_t bits) {
  return static_cast<double>(splitmix64(bits) >> 11) * 0x1.0p-53;
}

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

// ---------------------------------------------------------------------------
// RemoteEndpoint

RemoteEndpoint::RemoteEndpoint(RemoteConfig config) : config_(std::move(config)) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.url, m, kUrl)) {
    throw Error(ErrorCode::kInvalidArgument, "judge endpoint is not an http(s) URL: " + config_.url);
  }
#ifndef PEREVAL_WITH_OPENSSL
  if (config_.url.rfind("https://", 0) == 0) {
    throw Error(ErrorCode::kInvalidArgument, "built without TLS support; use an http:// endpoint");
  }
#endif
  origin_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/";
}

std::string RemoteEndpoint::complete(const JudgeRequest& request) {
  Json body = config_.extra_body.is_object() ? config_.extra_body : Json::object();
  body[config_.fields.prompt] = request.prompt;
  body[config_.fields.temperature] = request.temperature;
  body[config_.fields.max_tokens] = request.max_tokens;

  httplib::Client client(origin_);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.bearer_token.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.bearer_token);
  }
  const auto result = client.Post(path_, headers, body.dump(), "application/json");
  if (!result) {
    throw Error(ErrorCode::kBackendUnavailable,
                "request to " + config_.url + " failed: " + httplib::to_string(result.error()));
  }
  const int status = result->status;
  if (status == 429 || status >= 500) {
    throw Error(ErrorCode::kBackendUnavailable,
                "judge endpoint returned HTTP " + std::to_string(status));
  }
  if (status < 200 || status >= 300) {
    throw Error(ErrorCode::kBackendRejected,
                "judge endpoint returned HTTP " + std::to_string(status) + ": " +
                    result->body.substr(0, 200));
  }
  try {
    const Json reply = Json::parse(result->body);
    const Json& text = reply.at(Json::json_pointer(config_.fields.response_pointer));
    if (!text.is_string()) throw Error(ErrorCode::kBackendRejected, "response text is not a string");
    return text.get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kBackendRejected, std::string("unreadable judge response: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// ReplayCache

ReplayCache::ReplayCache(std::span<const JudgmentReplica> recorded, std::string id)
    : id_(std::move(id)) {
  for (const JudgmentReplica& r : recorded) {
    responses_[{r.case_id, r.generator_a, r.generator_b, r.dimension, r.replica,
                r.presented_first}] = r.raw_response;
  }
}

ReplayCache ReplayCache::from_file(const std::filesystem::path& path) {
  const auto recorded = read_judgments(path);
  return ReplayCache(recorded, "replay:" + path.filename().string());
}

std::string ReplayCache::complete(const JudgeRequest& request) {
  const ReplicaKey& k = request.key;
  auto it = responses_.find(
      {k.case_id, k.generator_a, k.generator_b, k.dimension, k.replica, k.presented_first});
  if (it == responses_.end()) {
    throw Error(ErrorCode::kReplayMiss, "no recorded response for case " + k.case_id + " " +
                                            k.generator_a + " vs " + k.generator_b + " (" +
                                            std::string(dimension_name(k.dimension)) +
                                            ") replica " + std::to_string(k.replica));
  }
  return it->second;
}

// ---------------------------------------------------------------------------
// Simulation

PreferenceSpec PreferenceSpec::mirrored() const {
  PreferenceSpec m = *this;
  m.prefer_a = std::max(0.0, 1.0 - prefer_a - tie_band);
  return m;
}

void PreferenceSpec::validate() const {
  const auto in01 = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in01(prefer_a) || !in01(tie_band) || !in01(strength) || !in01(unparseable_rate) ||
      prefer_a + tie_band > 1.0 + 1e-9) {
    throw Error(ErrorCode::kInvalidArgument,
                "preference probabilities must lie in [0,1] with prefer_a + tie_band <= 1");
  }
}

void SimulatedJudgeConfig::set(const std::string& a, const std::string& b, Dimension d,
                               PreferenceSpec spec) {
  if (a == b) throw Error(ErrorCode::kInvalidArgument, "a generator cannot face itself");
  spec.validate();
  preferences.erase({b, a, d});
  preferences[{a, b, d}] = spec;
}

std::optional<PreferenceSpec> SimulatedJudgeConfig::find(const std::string& a,
                                                         const std::string& b,
                                                         Dimension d) const {
  if (auto it = preferences.find({a, b, d}); it != preferences.end()) return it->second;
  if (auto it = preferences.find({b, a, d}); it != preferences.end()) {
    return it->second.mirrored();
  }
  return std::nullopt;
}

std::vector<std::pair<std::string, std::string>> SimulatedJudgeConfig::pairs() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, spec] : preferences) {
    std::pair<std::string, std::string> p{std::get<0>(key), std::get<1>(key)};
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
  }
  return out;
}

Json to_json(const SimulatedJudgeConfig& config) {
  Json prefs = Json::array();
  for (const auto& [key, spec] : config.preferences) {
    prefs.push_back(Json{{"generator_a", std::get<0>(key)},
                         {"generator_b", std::get<1>(key)},
                         {"dimension", dimension_name(std::get<2>(key))},
                         {"prefer_a", spec.prefer_a},
                         {"tie_band", spec.tie_band},
                         {"strength", spec.strength},
                         {"unparseable_rate", spec.unparseable_rate}});
  }
  return Json{{"seed", config.seed},
              {"position_bias", config.position_bias},
              {"preferences", prefs}};
}

SimulatedJudgeConfig parse_simulated_judge_config(const Json& j) {
  SimulatedJudgeConfig config;
  try {
    config.seed = j.value("seed", std::uint64_t{0});
    config.position_bias = j.value("position_bias", 0.0);
    for (const Json& p : j.at("preferences")) {
      const auto dim = parse_dimension(p.at("dimension").get<std::string>());
      if (!dim) throw Error(ErrorCode::kMalformedRecord, "unknown dimension in preferences");
      PreferenceSpec spec;
      spec.prefer_a = p.at("prefer_a").get<double>();
      spec.tie_band = p.value("tie_band", 0.0);
      spec.strength = p.value("strength", 1.0);
      spec.unparseable_rate = p.value("unparseable_rate", 0.0);
      config.set(p.at("generator_a").get<std::string>(), p.at("generator_b").get<std::string>(),
                 *dim, spec);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("simulated judge config: ") + e.what());
  }
  return config;
}

SimulatedJudgeConfig config_from_head_to_head(std::span<const HeadToHeadRow> rows,
                                              double position_bias, double strength,
                                              std::uint64_t seed) {
  SimulatedJudgeConfig config;
  config.position_bias = position_bias;
  config.seed = seed;
  for (const HeadToHeadRow& row : rows) {
    const double total = row.win + row.loss + row.tie;
    if (total <= 0 || row.win < 0 || row.loss < 0 || row.tie < 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "bad head-to-head row for " + row.generator_a + " vs " + row.generator_b);
    }
    PreferenceSpec spec;
    spec.prefer_a = row.win / total;
    spec.tie_band = row.tie / total;
    spec.strength = strength;
    config.set(row.generator_a, row.generator_b, row.dimension, spec);
  }
  return config;
}

std::vector<HeadToHeadRow> parse_head_to_head_csv(std::string_view text) {
  std::vector<HeadToHeadRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(t);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(trim(cell));
    if (cells.size() != 6) {
      throw Error(ErrorCode::kMalformedRecord,
                  "head-to-head line " + std::to_string(line_no) + ": expected 6 columns");
    }
    const auto dim = parse_dimension(cells[2]);
    if (!dim) {
      if (rows.empty() && cells[2] == "dimension") continue;  // header
      throw Error(ErrorCode::kMalformedRecord,
                  "head-to-head line " + std::to_string(line_no) + ": unknown dimension");
    }
    try {
      rows.push_back({cells[0], cells[1], *dim, std::stod(cells[3]), std::stod(cells[4]),
                      std::stod(cells[5])});
    } catch (const std::exception&) {
      throw Error(ErrorCode::kMalformedRecord,
                  "head-to-head line " + std::to_string(line_no) + ": bad number");
    }
  }
  return rows;
}

std::vector<HeadToHeadRow> book_review_head_to_head() {
  using D = Dimension;
  return {
      {"GOLD", "XXL", D::kPersonalization, 86.9, 10.4, 2.7},
      {"GOLD", "XXL", D::kQuality, 73.0, 25.7, 1.3},
      {"GOLD", "XXL", D::kRelevance, 85.8, 11.8, 2.4},
      {"XXL", "XL", D::kPersonalization, 62.6, 32.4, 5.0},
      {"XXL", "XL", D::kQuality, 66.5, 31.4, 2.1},
      {"XXL", "XL", D::kRelevance, 61.8, 32.2, 6.0},
      {"XXL", "Large", D::kPersonalization, 74.9, 21.8, 3.3},
      {"XXL", "Large", D::kQuality, 80.4, 19.2, 0.4},
      {"XXL", "Large", D::kRelevance, 70.4, 24.5, 5.1},
      {"XXL", "Base", D::kPersonalization, 77.8, 19.4, 2.8},
      {"XXL", "Base", D::kQuality, 83.7, 15.7, 0.6},
      {"XXL", "Base", D::kRelevance, 75.3, 20.6, 4.1},
      {"XL", "Large", D::kPersonalization, 62.6, 32.6, 4.8},
      {"XL", "Large", D::kQuality, 68.2, 29.7, 2.1},
      {"XL", "Large", D::kRelevance, 59.5, 34.1, 6.4},
      {"XL", "Base", D::kPersonalization, 68.3, 27.5, 4.2},
      {"XL", "Base", D::kQuality, 73.4, 25.6, 1.0},
      {"XL", "Base", D::kRelevance, 63.5, 31.7, 4.8},
      {"Large", "Base", D::kPersonalization, 55.7, 38.3, 6.0},
      {"Large", "Base", D::kQuality, 56.8, 40.9, 2.3},
      {"Large", "Base", D::kRelevance, 52.9, 41.0, 6.1},
  };
}

SimulatedJudge::SimulatedJudge(SimulatedJudgeConfig config) : config_(std::move(config)) {
  for (const auto& [key, spec] : config_.preferences) spec.validate();
}

std::string SimulatedJudge::backend_id() const {
  return "simulated:seed=" + std::to_string(config_.seed);
}

std::string SimulatedJudge::complete(const JudgeRequest& request) {
  const ReplicaKey& k = request.key;
  // Draws are keyed on the pair in sorted order so (A, B) and (B, A) see the
  // same latent state and the same replica noise.
  const bool a_is_low = k.generator_a < k.generator_b;
  const std::string& low = a_is_low ? k.generator_a : k.generator_b;
  const std::string& high = a_is_low ? k.generator_b : k.generator_a;
  const auto spec = config_.find(low, high, k.dimension);
  if (!spec) {
    throw Error(ErrorCode::kUnknownPair, "simulated judge has no preferences for " + low +
                                             " vs " + high + " (" +
                                             std::string(dimension_name(k.dimension)) + ")");
  }

  std::uint64_t base = mix_seed(config_.seed, k.case_id);
  base = mix_seed(base, low);
  base = mix_seed(base, high);
  base = mix_seed(base, static_cast<std::uint64_t>(k.dimension));
  // Replicas 2j and 2j + 1 of a balanced plan show the pair in both orders;
  // keying the noise on (j, order) makes the (B, A) run replay the (A, B) run.
  // `off_plan` is zero under that plan and separates replicas of any other.
  const bool low_first = k.presented_first == low;
  const bool shows_a = k.presented_first == k.generator_a;
  const auto off_plan = static_cast<std::uint64_t>((k.replica % 2 == 0) != shows_a);
  const auto slot =
      (static_cast<std::uint64_t>(k.replica / 2) * 2 + (low_first ? 0 : 1)) * 2 + off_plan;
  const std::uint64_t replica_base = mix_seed(base, slot + 1);

  if (unit_interval(mix_seed(replica_base, 0x6e6f697365ULL)) < spec->unparseable_rate) {
    return "Both responses have merit; I cannot decide.";
  }

  const double latent = unit_interval(mix_seed(base, 0x6c6174656e74ULL));
  bool choose_low;
  if (latent >= spec->prefer_a && latent < spec->prefer_a + spec->tie_band) {
    choose_low = low_first;
  } else {
    const bool low_better = latent < spec->prefer_a;
    double p_low = low_better ? spec->strength : 1.0 - spec->strength;
    p_low = clamp01(p_low + (low_first ? config_.position_bias : -config_.position_bias));
    choose_low = unit_interval(mix_seed(replica_base, 0x63686f696365ULL)) < p_low;
  }
  const bool choose_first = choose_low == low_first;
  return choose_first ? "(A) Response A is the better fit for this criterion."
                      : "(B) Response B is the better fit for this criterion.";
}

}  // namespace pereval
