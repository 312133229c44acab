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

// Line-delimited JSON records (one object per line, UTF-8).
//
//   cases.jsonl    {case_id, user_id, immediate_context, personal_context, reference?}
//   outputs.jsonl  {case_id, generator_id, text}
//   outcomes.jsonl {case_id, generator_a, generator_b, dimension, verdict,
//                   prefers_a, prefers_b, unparseable, replicas, source}

#ifndef PEREVAL_RECORDS_HPP_
#define PEREVAL_RECORDS_HPP_

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pereval/model.hpp"

namespace pereval {

using Json = nlohmann::json;

Json to_json(const TestCase& c);
Json to_json(const CandidateOutput& o);
Json to_json(const CaseOutcome& o);
Json to_json(const HumanJudgment& j);

// Each parser throws Error(kMalformedRecord) naming the offending field.
TestCase parse_test_case(const Json& j);
CandidateOutput parse_candidate_output(const Json& j);
CaseOutcome parse_case_outcome(const Json& j);
HumanJudgment parse_human_judgment(const Json& j);

/// Calls `on_record` for every non-blank line. Parse failures are reported as
/// MalformedRecord with "path:line" context.
void for_each_record(const std::filesystem::path& path,
                     const std::function<void(const Json&)>& on_record);

template <typename T>
std::vector<T> read_records(const std::filesystem::path& path,
                            T (*parse)(const Json&)) {
  std::vector<T> out;
  for_each_record(path, [&](const Json& j) { out.push_back(parse(j)); });
  return out;
}

std::vector<TestCase> read_cases(const std::filesystem::path& path);
std::vector<CandidateOutput> read_outputs(const std::filesystem::path& path);
std::vector<CaseOutcome> read_outcomes(const std::filesystem::path& path);

/// Serializes one record per line, keys in stable order.
std::string dump_line(const Json& j);

/// Writes the file atomically enough for our purposes: truncate then write.
/// Throws Error(kUnwritablePath) on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

template <typename T>
void write_records(const std::filesystem::path& path, const std::vector<T>& records) {
  std::string text;
  for (const T& r : records) text += dump_line(to_json(r));
  write_text(path, text);
}

}  // namespace pereval

#endif  // PEREVAL_RECORDS_HPP_
