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

#include "pereval/records.hpp"

#include <fstream>
#include <sstream>

#include "pereval/error.hpp"

namespace pereval {
namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedRecord, what);
}

const Json& field(const Json& j, const char* name) {
  if (!j.is_object()) malformed("record is not an object");
  auto it = j.find(name);
  if (it == j.end()) malformed(std::string("missing field '") + name + "'");
  return *it;
}

std::string string_field(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_string()) malformed(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

int int_field(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_number_integer()) {
    malformed(std::string("field '") + name + "' must be an integer");
  }
  return v.get<int>();
}

std::optional<Choice> parse_choice_letter(const Json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) malformed(std::string("field '") + name + "' must be \"A\" or \"B\"");
  const std::string v = it->get<std::string>();
  if (v == "A") return Choice::kFirst;
  if (v == "B") return Choice::kSecond;
  malformed(std::string("field '") + name + "' must be \"A\" or \"B\"");
}

}  // namespace

Json to_json(const TestCase& c) {
  Json j = Json::object();
  j["case_id"] = c.case_id;
  j["user_id"] = c.user_id;
  j["immediate_context"] = c.immediate_context;
  j["personal_context"] = c.personal_context;
  if (c.reference) j["reference"] = *c.reference;
  return j;
}

Json to_json(const CandidateOutput& o) {
  return Json{{"case_id", o.case_id}, {"generator_id", o.generator_id}, {"text", o.text}};
}

Json to_json(const CaseOutcome& o) {
  return Json{{"case_id", o.case_id},
              {"generator_a", o.generator_a},
              {"generator_b", o.generator_b},
              {"dimension", dimension_name(o.dimension)},
              {"verdict", verdict_name(o.verdict)},
              {"prefers_a", o.prefers_a},
              {"prefers_b", o.prefers_b},
              {"unparseable", o.unparseable},
              {"replicas", o.replicas},
              {"source", o.source}};
}

Json to_json(const HumanJudgment& h) {
  Json j{{"judgment_id", h.judgment_id},
         {"task_id", h.task_id},
         {"rater_id", h.rater_id},
         {"elapsed_seconds", h.elapsed_seconds},
         {"submitted_at", h.submitted_at}};
  for (Dimension d : kAllDimensions) {
    const auto c = h.choice(d);
    j[std::string(dimension_name(d))] =
        c ? Json(*c == Choice::kFirst ? "A" : "B") : Json(nullptr);
  }
  return j;
}

TestCase parse_test_case(const Json& j) {
  TestCase c;
  c.case_id = string_field(j, "case_id");
  c.user_id = string_field(j, "user_id");
  c.immediate_context = string_field(j, "immediate_context");
  const Json& ctx = field(j, "personal_context");
  if (!ctx.is_array()) malformed("field 'personal_context' must be an array");
  for (const Json& e : ctx) {
    if (!e.is_string()) malformed("personal_context entries must be strings");
    c.personal_context.push_back(e.get<std::string>());
  }
  if (auto it = j.find("reference"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) malformed("field 'reference' must be a string");
    c.reference = it->get<std::string>();
  }
  return c;
}

CandidateOutput parse_candidate_output(const Json& j) {
  return {string_field(j, "case_id"), string_field(j, "generator_id"),
          string_field(j, "text")};
}

CaseOutcome parse_case_outcome(const Json& j) {
  CaseOutcome o;
  o.case_id = string_field(j, "case_id");
  o.generator_a = string_field(j, "generator_a");
  o.generator_b = string_field(j, "generator_b");
  const auto dim = parse_dimension(string_field(j, "dimension"));
  if (!dim) malformed("unknown dimension");
  o.dimension = *dim;
  const auto verdict = parse_verdict(string_field(j, "verdict"));
  if (!verdict) malformed("unknown verdict");
  o.verdict = *verdict;
  o.prefers_a = int_field(j, "prefers_a");
  o.prefers_b = int_field(j, "prefers_b");
  o.unparseable = int_field(j, "unparseable");
  o.replicas = int_field(j, "replicas");
  if (auto it = j.find("source"); it != j.end() && it->is_string()) {
    o.source = it->get<std::string>();
  }
  if (o.prefers_a < 0 || o.prefers_b < 0 || o.unparseable < 0 ||
      o.prefers_a + o.prefers_b + o.unparseable != o.replicas) {
    malformed("replica counts do not add up for case " + o.case_id);
  }
  return o;
}

HumanJudgment parse_human_judgment(const Json& j) {
  HumanJudgment h;
  h.judgment_id = string_field(j, "judgment_id");
  h.task_id = string_field(j, "task_id");
  h.rater_id = string_field(j, "rater_id");
  for (Dimension d : kAllDimensions) {
    const std::string name(dimension_name(d));
    h.choices[static_cast<std::size_t>(d)] = parse_choice_letter(j, name.c_str());
  }
  if (auto it = j.find("elapsed_seconds"); it != j.end() && it->is_number()) {
    h.elapsed_seconds = it->get<double>();
  }
  if (auto it = j.find("submitted_at"); it != j.end() && it->is_string()) {
    h.submitted_at = it->get<std::string>();
  }
  return h;
}

void for_each_record(const std::filesystem::path& path,
                     const std::function<void(const Json&)>& on_record) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      malformed(where + ": " + e.what());
    }
    try {
      on_record(j);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMalformedRecord) throw;
      malformed(where + ": " + e.what());
    }
  }
}

std::vector<TestCase> read_cases(const std::filesystem::path& path) {
  return read_records(path, &parse_test_case);
}

std::vector<CandidateOutput> read_outputs(const std::filesystem::path& path) {
  return read_records(path, &parse_candidate_output);
}

std::vector<CaseOutcome> read_outcomes(const std::filesystem::path& path) {
  return read_records(path, &parse_case_outcome);
}

std::string dump_line(const Json& j) {
  return j.dump(-1, ' ', false, Json::error_handler_t::replace) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kUnwritablePath, "cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::kUnwritablePath, "write failed for " + path.string());
}

}  // namespace pereval
