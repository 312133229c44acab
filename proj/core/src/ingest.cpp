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

#include "pereval/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "pereval/error.hpp"
#include "pereval/random.hpp"
#include "pereval/text.hpp"

namespace pereval {
namespace {

constexpr int kMaxDerangementAttempts = 10000;

struct UserStream {
  std::vector<const RawDocument*> docs;  // sorted by (order_key, input position)
};

std::vector<TestCase>& split_for(DatasetSplits& s, int index) {
  return index == 0 ? s.train : index == 1 ? s.validation : s.test;
}

// Case ids are "<user>/<position in the user's document stream>".
std::size_t position_from_case_id(const std::string& case_id) {
  const auto slash = case_id.rfind('/');
  return static_cast<std::size_t>(std::stoull(case_id.substr(slash + 1)));
}

}  // namespace

Json to_json(const RawDocument& d) {
  return Json{{"user_id", d.user_id},
              {"timestamp", d.order_key},
              {"immediate_context", d.immediate_context},
              {"text", d.text}};
}

RawDocument parse_raw_document(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kMalformedRecord, "record is not an object");
  RawDocument d;
  try {
    d.user_id = j.at("user_id").get<std::string>();
    d.order_key = j.at("timestamp").get<std::int64_t>();
    d.text = j.at("text").get<std::string>();
    if (auto it = j.find("immediate_context"); it != j.end()) {
      d.immediate_context = it->get<std::string>();
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, e.what());
  }
  return d;
}

void PrepareConfig::validate() const {
  const auto bad = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, what);
  };
  if (min_chars <= 0 || min_prior_docs <= 0 || min_user_examples <= 0 ||
      max_user_examples <= 0) {
    bad("prepare thresholds must be positive");
  }
  if (min_user_examples > max_user_examples) {
    bad("min_user_examples exceeds max_user_examples");
  }
  if (std::any_of(split_percent.begin(), split_percent.end(), [](int p) { return p < 0; }) ||
      split_percent[0] + split_percent[1] + split_percent[2] != 100) {
    bad("split percentages must be non-negative and sum to 100");
  }
}

DatasetSplits prepare(std::span<const RawDocument> documents, const PrepareConfig& config) {
  config.validate();

  std::map<std::string, UserStream> users;
  for (const RawDocument& d : documents) users[d.user_id].docs.push_back(&d);
  for (auto& [id, stream] : users) {
    // stable_sort keeps input position as the tie breaker.
    std::stable_sort(stream.docs.begin(), stream.docs.end(),
                     [](const RawDocument* a, const RawDocument* b) {
                       return a->order_key < b->order_key;
                     });
  }

  std::map<std::string, std::vector<TestCase>> cases_by_user;
  for (const auto& [user_id, stream] : users) {
    std::vector<TestCase> user_cases;
    std::vector<std::string> history;
    std::unordered_set<std::string> history_keys;
    for (std::size_t pos = 0; pos < stream.docs.size(); ++pos) {
      const RawDocument& doc = *stream.docs[pos];
      const bool eligible =
          utf8_length(doc.text) > static_cast<std::size_t>(config.min_chars) &&
          pos >= static_cast<std::size_t>(config.min_prior_docs) && !history.empty();
      if (eligible &&
          user_cases.size() < static_cast<std::size_t>(config.max_user_examples)) {
        TestCase c;
        c.case_id = user_id + "/" + std::to_string(pos);
        c.user_id = user_id;
        c.immediate_context = doc.immediate_context;
        c.personal_context = history;
        c.reference = doc.text;
        user_cases.push_back(std::move(c));
      }
      const std::string key = normalize_whitespace(doc.text);
      if (!key.empty() && history_keys.insert(key).second) history.push_back(doc.text);
    }
    if (user_cases.size() >= static_cast<std::size_t>(config.min_user_examples)) {
      cases_by_user.emplace(user_id, std::move(user_cases));
    }
  }
  if (cases_by_user.empty()) {
    throw Error(ErrorCode::kEmptyAfterFiltering, "no user survives the preparation filters");
  }

  std::vector<std::string> order;
  for (const auto& [id, _] : cases_by_user) order.push_back(id);
  Rng rng(config.seed);
  rng.shuffle(std::span<std::string>(order));

  const std::size_t n = order.size();
  std::array<std::size_t, 3> counts{};
  std::size_t assigned = 0;
  for (int s = 0; s < 3; ++s) {
    counts[s] = n * static_cast<std::size_t>(config.split_percent[s]) / 100;
    assigned += counts[s];
  }
  for (int s = 0; assigned < n; s = (s + 1) % 3, ++assigned) ++counts[s];

  // Users inside a split are listed in id order so output is independent of
  // the shuffle beyond membership.
  DatasetSplits splits;
  std::size_t next = 0;
  for (int s = 0; s < 3; ++s) {
    std::vector<std::string> members(order.begin() + next, order.begin() + next + counts[s]);
    next += counts[s];
    std::sort(members.begin(), members.end());
    for (const std::string& id : members) {
      auto& dest = split_for(splits, s);
      auto& src = cases_by_user.at(id);
      dest.insert(dest.end(), src.begin(), src.end());
    }
  }
  return splits;
}

std::vector<RawDocument> flatten(const DatasetSplits& splits) {
  std::map<std::string, std::vector<const TestCase*>> by_user;
  for (const auto* part : {&splits.train, &splits.validation, &splits.test}) {
    for (const TestCase& c : *part) by_user[c.user_id].push_back(&c);
  }
  std::vector<RawDocument> docs;
  for (const auto& [user_id, cases] : by_user) {
    std::unordered_map<std::size_t, const TestCase*> at;
    const TestCase* latest = nullptr;
    std::size_t latest_pos = 0;
    for (const TestCase* c : cases) {
      const std::size_t pos = position_from_case_id(c->case_id);
      at[pos] = c;
      if (latest == nullptr || pos > latest_pos) {
        latest = c;
        latest_pos = pos;
      }
    }
    std::vector<std::string> stream = latest->personal_context;
    stream.push_back(latest->reference.value_or(""));
    for (std::size_t pos = 0; pos < stream.size(); ++pos) {
      RawDocument d;
      d.user_id = user_id;
      d.order_key = static_cast<std::int64_t>(pos);
      d.text = stream[pos];
      if (auto it = at.find(pos); it != at.end()) {
        d.immediate_context = it->second->immediate_context;
      }
      docs.push_back(std::move(d));
    }
  }
  return docs;
}

std::vector<TestCase> sample_cases(std::span<const TestCase> dataset, std::size_t n,
                                   std::uint64_t seed) {
  if (n > dataset.size()) {
    throw Error(ErrorCode::kNotEnoughCases,
                "requested " + std::to_string(n) + " cases from a dataset of " +
                    std::to_string(dataset.size()));
  }
  std::vector<std::size_t> index(dataset.size());
  std::iota(index.begin(), index.end(), std::size_t{0});
  Rng rng(seed);
  rng.partial_shuffle(std::span<std::size_t>(index), n);
  std::vector<TestCase> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(dataset[index[i]]);
  return out;
}

std::vector<TestCase> ablate(std::span<const TestCase> cases, AblationMode mode,
                             std::uint64_t seed) {
  const std::size_t n = cases.size();
  if (n < 2) throw Error(ErrorCode::kCannotDerange, "need at least two cases to swap contexts");
  const bool personal = mode == AblationMode::kSwapPersonalContext;

  // Case i may take the value of case j when the value differs from its own
  // and, for personal contexts, j was written by another user.
  const auto compatible = [&](std::size_t i, std::size_t j) {
    const TestCase& a = cases[i];
    const TestCase& b = cases[j];
    if (personal) return a.user_id != b.user_id && a.personal_context != b.personal_context;
    return a.immediate_context != b.immediate_context;
  };

  // A group of mutually incompatible cases larger than n/2 leaves no valid
  // assignment for some member.
  std::unordered_map<std::string, std::size_t> group_sizes;
  for (const TestCase& c : cases) {
    ++group_sizes[personal ? c.user_id : c.immediate_context];
  }
  for (const auto& [key, size] : group_sizes) {
    if (2 * size > n) {
      throw Error(ErrorCode::kCannotDerange,
                  personal ? "too many cases share user " + key
                           : std::string("too many cases share one immediate context"));
    }
  }

  Rng rng(seed);
  std::vector<std::size_t> source(n);
  for (int attempt = 0; attempt < kMaxDerangementAttempts; ++attempt) {
    std::iota(source.begin(), source.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(source));
    bool repaired = true;
    for (std::size_t i = 0; i < n && repaired; ++i) {
      if (compatible(i, source[i])) continue;
      repaired = false;
      const std::size_t start = static_cast<std::size_t>(rng.below(n));
      for (std::size_t step = 0; step < n; ++step) {
        const std::size_t j = (start + step) % n;
        if (j != i && compatible(i, source[j]) && compatible(j, source[i])) {
          std::swap(source[i], source[j]);
          repaired = true;
          break;
        }
      }
    }
    if (!repaired) continue;

    std::vector<TestCase> out(cases.begin(), cases.end());
    for (std::size_t i = 0; i < n; ++i) {
      if (personal) {
        out[i].personal_context = cases[source[i]].personal_context;
      } else {
        out[i].immediate_context = cases[source[i]].immediate_context;
      }
    }
    return out;
  }
  throw Error(ErrorCode::kCannotDerange, "no valid context swap found within the attempt budget");
}

}  // namespace pereval
