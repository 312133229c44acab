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

#include "pereval/annotation.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include "pereval/error.hpp"
#include "pereval/random.hpp"

namespace pereval {
namespace {

std::string hex_id(std::string_view prefix, std::uint64_t bits) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(bits));
  return std::string(prefix) + buf;
}

std::string iso8601(std::chrono::system_clock::time_point t) {
  const std::time_t secs = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

Json to_json(const AnnotationTask& t) {
  return Json{{"task_id", t.task_id},
              {"case_id", t.case_id},
              {"generator_a", t.generator_a},
              {"generator_b", t.generator_b},
              {"a_first", t.a_first},
              {"immediate_context", t.immediate_context},
              {"personal_context", t.personal_context},
              {"text_a", t.text_a},
              {"text_b", t.text_b},
              {"raters_per_case", t.raters_per_case}};
}

AnnotationTask parse_annotation_task(const Json& j) {
  try {
    AnnotationTask t;
    t.task_id = j.at("task_id").get<std::string>();
    t.case_id = j.at("case_id").get<std::string>();
    t.generator_a = j.at("generator_a").get<std::string>();
    t.generator_b = j.at("generator_b").get<std::string>();
    t.a_first = j.at("a_first").get<bool>();
    t.immediate_context = j.at("immediate_context").get<std::string>();
    t.personal_context = j.at("personal_context").get<std::vector<std::string>>();
    t.text_a = j.at("text_a").get<std::string>();
    t.text_b = j.at("text_b").get<std::string>();
    t.raters_per_case = j.at("raters_per_case").get<int>();
    return t;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("annotation task: ") + e.what());
  }
}

Json rater_payload(const AnnotationTask& t) {
  return Json{{"task_id", t.task_id},
              {"immediate_context", t.immediate_context},
              {"personal_context", t.personal_context},
              {"response_a", t.a_first ? t.text_a : t.text_b},
              {"response_b", t.a_first ? t.text_b : t.text_a}};
}

std::vector<AnnotationTask> create_batch(std::span<const TestCase> cases,
                                         std::span<const CandidateOutput> outputs,
                                         const std::pair<std::string, std::string>& pair,
                                         const BatchOptions& options) {
  if (options.raters_per_case < 1) {
    throw Error(ErrorCode::kInvalidArgument, "raters_per_case must be at least 1");
  }
  if (pair.first == pair.second) {
    throw Error(ErrorCode::kInvalidArgument, "pair must name two different generators");
  }
  const OutputIndex index(outputs);
  std::vector<AnnotationTask> tasks;
  tasks.reserve(cases.size());
  for (const TestCase& c : cases) {
    const CandidateOutput& a = index.require(c.case_id, pair.first);
    const CandidateOutput& b = index.require(c.case_id, pair.second);
    std::uint64_t key = mix_seed(options.seed, c.case_id);
    key = mix_seed(key, pair.first);
    key = mix_seed(key, pair.second);
    AnnotationTask t;
    t.task_id = hex_id("t-", key);
    t.case_id = c.case_id;
    t.generator_a = pair.first;
    t.generator_b = pair.second;
    t.a_first = (splitmix64(key ^ 0x6f72646572ULL) & 1) == 0;
    t.immediate_context = c.immediate_context;
    const std::size_t k = std::min(c.personal_context.size(),
                                   options.profile_examples.value_or(c.personal_context.size()));
    t.personal_context.assign(c.personal_context.begin(), c.personal_context.begin() + k);
    t.text_a = a.text;
    t.text_b = b.text;
    t.raters_per_case = options.raters_per_case;
    tasks.push_back(std::move(t));
  }
  return tasks;
}

AnnotationService::AnnotationService(std::filesystem::path store, ServiceOptions options)
    : store_(std::move(store)), options_(std::move(options)) {
  std::error_code ec;
  if (store_.has_parent_path()) std::filesystem::create_directories(store_.parent_path(), ec);

  std::string content;
  if (std::ifstream in{store_, std::ios::binary}) {
    std::ostringstream ss;
    ss << in.rdbuf();
    content = ss.str();
  }
  std::size_t good_bytes = 0;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < content.size()) {
    const std::size_t nl = content.find('\n', pos);
    const bool terminated = nl != std::string::npos;
    const std::string line = content.substr(pos, terminated ? nl - pos : std::string::npos);
    ++line_no;
    Json record;
    bool parsed = true;
    try {
      record = Json::parse(line);
    } catch (const Json::exception&) {
      parsed = false;
    }
    if (!parsed || !terminated) {
      // Only the final record can be torn; anything earlier is corruption.
      if (terminated && content.find_first_not_of(" \t\r\n", nl) != std::string::npos) {
        throw Error(ErrorCode::kMalformedRecord,
                    store_.string() + ":" + std::to_string(line_no) + ": unreadable record");
      }
      break;
    }
    apply(record);
    pos = nl + 1;
    good_bytes = pos;
  }

  fd_ = ::open(store_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw Error(ErrorCode::kUnwritablePath,
                "cannot open annotation store " + store_.string() + ": " + std::strerror(errno));
  }
  if (good_bytes < content.size() && ::ftruncate(fd_, static_cast<off_t>(good_bytes)) != 0) {
    throw Error(ErrorCode::kIo, "cannot drop torn record from " + store_.string());
  }
}

AnnotationService::~AnnotationService() {
  if (fd_ >= 0) ::close(fd_);
}

std::chrono::system_clock::time_point AnnotationService::now() const {
  return options_.clock ? options_.clock() : std::chrono::system_clock::now();
}

void AnnotationService::append(const Json& record) {
  const std::string line = dump_line(record);
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kIo, "append to " + store_.string() + " failed: " +
                                      std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) {
    throw Error(ErrorCode::kIo, "fsync of " + store_.string() + " failed");
  }
}

void AnnotationService::apply(const Json& record) {
  const std::string type = record.value("type", "");
  if (type == "task") {
    AnnotationTask t = parse_annotation_task(record);
    if (task_index_.count(t.task_id) == 0) {
      task_index_[t.task_id] = tasks_.size();
      tasks_.push_back(std::move(t));
    }
  } else if (type == "rater") {
    raters_[record.at("rater_id").get<std::string>()] = record.value("name", "");
  } else if (type == "judgment") {
    HumanJudgment h = parse_human_judgment(record);
    by_task_rater_[{h.task_id, h.rater_id}] = judgments_.size();
    judgments_.push_back(std::move(h));
  } else {
    throw Error(ErrorCode::kMalformedRecord, "unknown annotation record type '" + type + "'");
  }
}

std::size_t AnnotationService::add_tasks(std::span<const AnnotationTask> tasks) {
  std::lock_guard<std::mutex> lock(mu_);
  std::size_t added = 0;
  for (const AnnotationTask& t : tasks) {
    if (task_index_.count(t.task_id) != 0) continue;
    Json record = to_json(t);
    record["type"] = "task";
    append(record);
    apply(record);
    ++added;
  }
  return added;
}

std::string AnnotationService::register_rater(const std::string& name) {
  std::lock_guard<std::mutex> lock(mu_);
  const std::string id = hex_id("r-", mix_seed(raters_.size() + 1, name));
  const Json record{{"type", "rater"}, {"rater_id", id}, {"name", name}};
  append(record);
  apply(record);
  return id;
}

int AnnotationService::active_leases(const std::string& task_id, const std::string& except_rater,
                                     std::chrono::system_clock::time_point at) const {
  int n = 0;
  for (const auto& [rater, lease] : leases_) {
    if (rater != except_rater && lease.task_id == task_id && lease.expires > at) ++n;
  }
  return n;
}

std::optional<AnnotationTask> AnnotationService::next_task(const std::string& rater_id) {
  std::lock_guard<std::mutex> lock(mu_);
  if (raters_.count(rater_id) == 0) {
    throw Error(ErrorCode::kUnknownRater, "unknown rater " + rater_id);
  }
  const auto t = now();
  const auto judged = [&](const std::string& task_id) {
    return by_task_rater_.count({task_id, rater_id}) != 0;
  };
  if (auto it = leases_.find(rater_id); it != leases_.end()) {
    if (it->second.expires > t && !judged(it->second.task_id)) {
      it->second.expires = t + options_.lease;
      return tasks_[task_index_.at(it->second.task_id)];
    }
    leases_.erase(it);
  }
  std::map<std::string_view, int> done;
  for (const HumanJudgment& h : judgments_) ++done[h.task_id];
  for (const AnnotationTask& task : tasks_) {
    if (judged(task.task_id)) continue;
    const int taken = done[task.task_id] + active_leases(task.task_id, rater_id, t);
    if (taken >= task.raters_per_case) continue;
    leases_[rater_id] = Lease{task.task_id, t + options_.lease};
    return task;
  }
  return std::nullopt;
}

SubmitAck AnnotationService::submit(const SubmitRequest& request) {
  std::lock_guard<std::mutex> lock(mu_);
  if (raters_.count(request.rater_id) == 0) {
    throw Error(ErrorCode::kUnknownRater, "unknown rater " + request.rater_id);
  }
  if (task_index_.count(request.task_id) == 0) {
    throw Error(ErrorCode::kUnknownTask, "unknown task " + request.task_id);
  }
  if (auto it = by_task_rater_.find({request.task_id, request.rater_id});
      it != by_task_rater_.end()) {
    return SubmitAck{judgments_[it->second].judgment_id, true};
  }
  for (Dimension d : kAllDimensions) {
    if (!request.choices[static_cast<std::size_t>(d)]) {
      throw Error(ErrorCode::kIncompleteAnswers,
                  "missing answer for " + std::string(dimension_name(d)));
    }
  }
  const auto t = now();
  auto lease = leases_.find(request.rater_id);
  if (lease == leases_.end() || lease->second.task_id != request.task_id ||
      lease->second.expires <= t) {
    throw Error(ErrorCode::kLeaseExpired,
                "rater " + request.rater_id + " holds no live lease on " + request.task_id);
  }
  HumanJudgment h;
  h.judgment_id = hex_id("j-", mix_seed(hash_string(request.task_id), request.rater_id));
  h.task_id = request.task_id;
  h.rater_id = request.rater_id;
  h.choices = request.choices;
  h.elapsed_seconds = request.elapsed_seconds;
  h.submitted_at = iso8601(t);
  Json record = to_json(h);
  record["type"] = "judgment";
  append(record);
  apply(record);
  leases_.erase(lease);
  return SubmitAck{h.judgment_id, false};
}

ExportResult AnnotationService::export_outcomes() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::map<std::string_view, std::vector<const HumanJudgment*>> by_task;
  for (const HumanJudgment& h : judgments_) by_task[h.task_id].push_back(&h);
  ExportResult out;
  for (const AnnotationTask& task : tasks_) {
    auto it = by_task.find(task.task_id);
    const std::size_t n = it == by_task.end() ? 0 : it->second.size();
    if (n == 0) {
      out.unjudged_cases.push_back(task.case_id);
      continue;
    }
    if (n < static_cast<std::size_t>(task.raters_per_case)) {
      out.partial_cases.push_back(task.case_id);
      continue;
    }
    for (Dimension d : kAllDimensions) {
      CaseOutcome o;
      o.case_id = task.case_id;
      o.generator_a = task.generator_a;
      o.generator_b = task.generator_b;
      o.dimension = d;
      o.source = "human";
      for (const HumanJudgment* h : it->second) {
        const bool chose_first = h->choice(d) == Choice::kFirst;
        if (chose_first == task.a_first) {
          ++o.prefers_a;
        } else {
          ++o.prefers_b;
        }
      }
      o.replicas = o.prefers_a + o.prefers_b;
      o.verdict = o.prefers_a > o.prefers_b   ? Verdict::kWin
                  : o.prefers_a < o.prefers_b ? Verdict::kLoss
                                              : Verdict::kTie;
      out.outcomes.push_back(std::move(o));
    }
  }
  return out;
}

std::vector<HumanJudgment> AnnotationService::judgments() const {
  std::lock_guard<std::mutex> lock(mu_);
  return judgments_;
}

std::size_t AnnotationService::task_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return tasks_.size();
}

}  // namespace pereval
