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

#include "pereval/judge.hpp"

#include <cctype>
#include <cstdio>
#include <map>
#include <thread>

#include "pereval/error.hpp"
#include "pereval/parallel.hpp"
#include "pereval/text.hpp"

namespace pereval {
namespace {

constexpr std::string_view kCandidates =
    "\n\nResponse (A):\n{first}\n\nResponse (B):\n{second}";

constexpr std::string_view kAnswerLine =
    "\n\nStart your answer with exactly \"(A)\" or \"(B)\".";

bool has_placeholder(std::string_view tmpl, std::string_view name) {
  return tmpl.find("{" + std::string(name) + "}") != std::string_view::npos;
}

std::string profile_block(const JudgePromptSpec& spec, const TestCase& test_case) {
  const std::size_t budget =
      spec.profile_example_budget.value_or(test_case.personal_context.size());
  const std::size_t count = std::min(budget, test_case.personal_context.size());
  std::string block;
  for (std::size_t i = 0; i < count; ++i) {
    if (i > 0) block += "\n\n";
    block += "Example " + std::to_string(i + 1) + ":\n";
    block += utf8_truncate(test_case.personal_context[i], spec.char_budget);
  }
  return block;
}

// Single left-to-right pass so inserted text is never re-expanded.
std::string substitute(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    if (tmpl[pos] == '{') {
      const std::size_t close = tmpl.find('}', pos);
      if (close != std::string_view::npos) {
        auto it = values.find(std::string(tmpl.substr(pos + 1, close - pos - 1)));
        if (it != values.end()) {
          out += it->second;
          pos = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[pos++]);
  }
  return out;
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string describe(const TestCase& c, Dimension d) {
  return "case " + c.case_id + " (" + std::string(dimension_name(d)) + ")";
}

}  // namespace

JudgePromptSpec JudgePromptSpec::defaults(Dimension dimension) {
  JudgePromptSpec spec;
  spec.dimension = dimension;
  switch (dimension) {
    case Dimension::kQuality:
      spec.instruction =
          "Compare the provided responses and select which one is more fluent and "
          "cohesive.";
      break;
    case Dimension::kRelevance:
      spec.instruction =
          "Compare the provided responses and select which one is more relevant to the "
          "given context:\n{context}";
      break;
    case Dimension::kPersonalization:
      spec.instruction =
          "Compare the provided responses to select which is more likely to be written by "
          "the same author who wrote the following examples:\n{profile}";
      break;
  }
  spec.instruction += kCandidates;
  return spec;
}

void JudgePromptSpec::validate() const {
  const bool context = has_placeholder(instruction, "context");
  const bool profile = has_placeholder(instruction, "profile");
  const auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kInvalidTemplate,
                std::string(dimension_name(dimension)) + " template " + why);
  };
  if (!has_placeholder(instruction, "first") || !has_placeholder(instruction, "second")) {
    fail("must contain {first} and {second}");
  }
  switch (dimension) {
    case Dimension::kQuality:
      if (context || profile) fail("may not reference {context} or {profile}");
      break;
    case Dimension::kRelevance:
      if (!context || profile) fail("must reference {context} and not {profile}");
      break;
    case Dimension::kPersonalization:
      if (context || !profile) fail("must reference {profile} and not {context}");
      break;
  }
  if (char_budget == 0) fail("needs a positive char budget");
}

PromptSet default_prompts() {
  return {JudgePromptSpec::defaults(Dimension::kPersonalization),
          JudgePromptSpec::defaults(Dimension::kQuality),
          JudgePromptSpec::defaults(Dimension::kRelevance)};
}

std::string build_prompt(const JudgePromptSpec& spec, const TestCase& test_case,
                         std::string_view first_text, std::string_view second_text) {
  std::map<std::string, std::string> values{
      {"first", utf8_truncate(first_text, spec.char_budget)},
      {"second", utf8_truncate(second_text, spec.char_budget)},
  };
  if (spec.dimension == Dimension::kRelevance) {
    values["context"] = utf8_truncate(test_case.immediate_context, spec.char_budget);
  }
  if (spec.dimension == Dimension::kPersonalization) {
    values["profile"] = profile_block(spec, test_case);
  }
  return substitute(spec.instruction, values) + std::string(kAnswerLine);
}

std::string_view parsed_choice_name(ParsedChoice c) {
  switch (c) {
    case ParsedChoice::kPrefersFirst: return "first";
    case ParsedChoice::kPrefersSecond: return "second";
    case ParsedChoice::kUnparseable: return "unparseable";
  }
  return "";
}

ParsedChoice parse_choice(std::string_view raw) {
  const std::size_t start = raw.find_first_not_of(" \t\r\n\"'*");
  if (start == std::string_view::npos) return ParsedChoice::kUnparseable;
  std::size_t end = start;
  while (end < raw.size() && !std::isspace(static_cast<unsigned char>(raw[end]))) ++end;
  std::string token = lower_ascii(raw.substr(start, end - start));
  while (!token.empty() && std::string_view(".,:;!)\"'*").find(token.back()) !=
                               std::string_view::npos) {
    token.pop_back();
  }
  if (token == "a") return ParsedChoice::kPrefersFirst;
  if (token == "b") return ParsedChoice::kPrefersSecond;

  const std::string text = lower_ascii(raw);
  const std::size_t a = text.find("(a)");
  const std::size_t b = text.find("(b)");
  if (a == std::string::npos && b == std::string::npos) return ParsedChoice::kUnparseable;
  return a < b ? ParsedChoice::kPrefersFirst : ParsedChoice::kPrefersSecond;
}

void ReplicationPlan::validate() const {
  if (replicas < 2 || replicas % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "replica count must be even and at least 2");
  }
  if (temperature < 0) throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
  if (tie_margin < 0) throw Error(ErrorCode::kInvalidArgument, "tie margin must be >= 0");
  if (max_tokens <= 0) throw Error(ErrorCode::kInvalidArgument, "max_tokens must be positive");
}

Json to_json(const JudgmentReplica& r) {
  return Json{{"case_id", r.case_id},
              {"generator_a", r.generator_a},
              {"generator_b", r.generator_b},
              {"dimension", dimension_name(r.dimension)},
              {"replica", r.replica},
              {"presented_first", r.presented_first},
              {"raw_response", r.raw_response},
              {"parsed", parsed_choice_name(r.parsed)}};
}

JudgmentReplica parse_judgment_replica(const Json& j) {
  JudgmentReplica r;
  try {
    r.case_id = j.at("case_id").get<std::string>();
    r.generator_a = j.at("generator_a").get<std::string>();
    r.generator_b = j.at("generator_b").get<std::string>();
    const auto dim = parse_dimension(j.at("dimension").get<std::string>());
    if (!dim) throw Error(ErrorCode::kMalformedRecord, "unknown dimension");
    r.dimension = *dim;
    r.replica = j.at("replica").get<int>();
    r.presented_first = j.at("presented_first").get<std::string>();
    r.raw_response = j.at("raw_response").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, e.what());
  }
  if (r.presented_first != r.generator_a && r.presented_first != r.generator_b) {
    throw Error(ErrorCode::kMalformedRecord, "presented_first is not one of the pair");
  }
  // The stored label is informational; the raw response is authoritative.
  r.parsed = parse_choice(r.raw_response);
  return r;
}

std::vector<JudgmentReplica> read_judgments(const std::filesystem::path& path) {
  return read_records(path, &parse_judgment_replica);
}

CaseOutcome aggregate_replicas(std::span<const JudgmentReplica> replicas, int tie_margin) {
  if (replicas.empty()) throw Error(ErrorCode::kInvalidArgument, "no replicas to aggregate");
  const JudgmentReplica& head = replicas.front();
  CaseOutcome o;
  o.case_id = head.case_id;
  o.generator_a = head.generator_a;
  o.generator_b = head.generator_b;
  o.dimension = head.dimension;
  o.source = "judge";
  for (const JudgmentReplica& r : replicas) {
    if (r.case_id != head.case_id || r.generator_a != head.generator_a ||
        r.generator_b != head.generator_b || r.dimension != head.dimension) {
      throw Error(ErrorCode::kInvalidArgument, "replicas from different comparisons");
    }
    ++o.replicas;
    if (r.parsed == ParsedChoice::kUnparseable) {
      ++o.unparseable;
      continue;
    }
    const bool chose_first = r.parsed == ParsedChoice::kPrefersFirst;
    const bool a_first = r.presented_first == r.generator_a;
    (chose_first == a_first ? o.prefers_a : o.prefers_b)++;
  }
  const int diff = o.prefers_a - o.prefers_b;
  o.verdict = std::abs(diff) <= tie_margin ? Verdict::kTie
              : diff > 0                   ? Verdict::kWin
                                           : Verdict::kLoss;
  return o;
}

JsonlJudgmentLog::JsonlJudgmentLog(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  out_.open(path, std::ios::binary | std::ios::app);
  if (!out_) throw Error(ErrorCode::kUnwritablePath, "cannot open " + path.string());
}

void JsonlJudgmentLog::append(std::span<const JudgmentReplica> replicas) {
  std::string chunk;
  for (const JudgmentReplica& r : replicas) chunk += dump_line(to_json(r));
  std::lock_guard<std::mutex> lock(mu_);
  out_ << chunk;
  out_.flush();
}

void MemoryJudgmentSink::append(std::span<const JudgmentReplica> replicas) {
  std::lock_guard<std::mutex> lock(mu_);
  replicas_.insert(replicas_.end(), replicas.begin(), replicas.end());
}

std::vector<JudgmentReplica> MemoryJudgmentSink::take() {
  std::lock_guard<std::mutex> lock(mu_);
  return std::exchange(replicas_, {});
}

PairwiseJudge::PairwiseJudge(JudgeBackend& backend, JudgeOptions options)
    : backend_(backend), options_(std::move(options)) {
  options_.plan.validate();
  for (std::size_t i = 0; i < options_.prompts.size(); ++i) {
    if (options_.prompts[i].dimension != kAllDimensions[i]) {
      throw Error(ErrorCode::kInvalidTemplate, "prompt set is not indexed by dimension");
    }
    options_.prompts[i].validate();
  }
}

std::string PairwiseJudge::call_with_retry(const JudgeRequest& request) const {
  const auto& backoff = options_.retry.backoff;
  const auto pause = [&](std::size_t attempt) {
    if (options_.retry.sleep) {
      options_.retry.sleep(backoff[attempt]);
    } else {
      std::this_thread::sleep_for(backoff[attempt]);
    }
  };
  for (std::size_t attempt = 0;; ++attempt) {
    try {
      return backend_.complete(request);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kBackendUnavailable || attempt >= backoff.size()) throw;
    } catch (const std::exception& e) {
      if (attempt >= backoff.size()) throw Error(ErrorCode::kBackendUnavailable, e.what());
    }
    pause(attempt);
  }
}

CaseOutcome PairwiseJudge::judge_case(const TestCase& test_case,
                                      const CandidateOutput& output_a,
                                      const CandidateOutput& output_b,
                                      Dimension dimension) const {
  if (output_a.case_id != test_case.case_id || output_b.case_id != test_case.case_id) {
    throw Error(ErrorCode::kInvalidArgument, "outputs do not belong to " + test_case.case_id);
  }
  if (output_a.generator_id == output_b.generator_id) {
    throw Error(ErrorCode::kInvalidArgument, "a generator cannot be compared with itself");
  }
  const ReplicationPlan& plan = options_.plan;
  const JudgePromptSpec& spec = options_.prompts[static_cast<std::size_t>(dimension)];
  const std::string prompt_a_first = build_prompt(spec, test_case, output_a.text, output_b.text);
  const std::string prompt_b_first = build_prompt(spec, test_case, output_b.text, output_a.text);

  std::vector<JudgmentReplica> replicas;
  replicas.reserve(static_cast<std::size_t>(plan.replicas));
  for (int r = 0; r < plan.replicas; ++r) {
    const bool a_first = plan.a_first(r);
    JudgeRequest request;
    request.prompt = a_first ? prompt_a_first : prompt_b_first;
    request.temperature = plan.temperature;
    request.max_tokens = plan.max_tokens;
    request.key = {test_case.case_id, output_a.generator_id, output_b.generator_id,
                   dimension,         r,
                   a_first ? output_a.generator_id : output_b.generator_id};
    std::string response;
    try {
      response = call_with_retry(request);
    } catch (const Error& e) {
      throw Error(e.code(), describe(test_case, dimension) + " replica " + std::to_string(r) +
                                ": " + e.what());
    }
    JudgmentReplica replica;
    replica.case_id = test_case.case_id;
    replica.generator_a = output_a.generator_id;
    replica.generator_b = output_b.generator_id;
    replica.dimension = dimension;
    replica.replica = r;
    replica.presented_first = request.key.presented_first;
    replica.parsed = parse_choice(response);
    replica.raw_response = std::move(response);
    replicas.push_back(std::move(replica));
  }
  if (options_.sink != nullptr) options_.sink->append(replicas);
  return aggregate_replicas(replicas, plan.tie_margin);
}

PairJudgment PairwiseJudge::judge_pair(std::span<const TestCase> cases,
                                       std::span<const CandidateOutput> outputs,
                                       const std::pair<std::string, std::string>& pair,
                                       std::span<const Dimension> dimensions) const {
  if (pair.first == pair.second) {
    throw Error(ErrorCode::kInvalidArgument, "pair must name two different generators");
  }
  const OutputIndex index(outputs);

  struct Task {
    const TestCase* test_case;
    const CandidateOutput* a;
    const CandidateOutput* b;
    Dimension dimension;
  };
  std::vector<Task> tasks;
  for (const TestCase& c : cases) {
    const CandidateOutput* found[2] = {&index.require(c.case_id, pair.first),
                                       &index.require(c.case_id, pair.second)};
    for (Dimension d : dimensions) tasks.push_back({&c, found[0], found[1], d});
  }

  std::vector<std::optional<CaseOutcome>> results(tasks.size());
  std::vector<std::optional<CaseFailure>> failures(tasks.size());
  parallel_for(tasks.size(), options_.max_in_flight, [&](std::size_t i) {
    const Task& t = tasks[i];
    try {
      results[i] = judge_case(*t.test_case, *t.a, *t.b, t.dimension);
    } catch (const Error& e) {
      failures[i] = CaseFailure{t.test_case->case_id, t.dimension, e.what()};
    }
  });

  PairJudgment out;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (failures[i]) {
      out.failures.push_back(std::move(*failures[i]));
      continue;
    }
    const CaseOutcome& o = *results[i];
    if (o.replicas > 0 &&
        static_cast<double>(o.unparseable) > options_.unparseable_warning_rate * o.replicas) {
      out.warnings.push_back(describe(*tasks[i].test_case, o.dimension) + ": " +
                             std::to_string(o.unparseable) + "/" +
                             std::to_string(o.replicas) + " replicas unparseable");
    }
    out.outcomes.push_back(std::move(*results[i]));
  }
  for (Dimension d : dimensions) {
    out.summaries.push_back(summarize(out.outcomes, pair.first, pair.second, d));
  }
  return out;
}

}  // namespace pereval
