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

// Dataset preparation, deterministic case sampling and the two context-swap
// ablations.

#ifndef PEREVAL_INGEST_HPP_
#define PEREVAL_INGEST_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pereval/model.hpp"
#include "pereval/records.hpp"

namespace pereval {

/// One raw user document. `text` becomes the reference of the test case it
/// produces and a profile example for the user's later cases.
struct RawDocument {
  std::string user_id;
  std::int64_t order_key = 0;  // timestamp or any sortable key
  std::string immediate_context;
  std::string text;
};

Json to_json(const RawDocument& d);
/// Expects {user_id, timestamp, immediate_context, text}.
RawDocument parse_raw_document(const Json& j);

struct PrepareConfig {
  int min_chars = 300;  // strict: length must exceed this
  int min_prior_docs = 3;
  int min_user_examples = 10;
  int max_user_examples = 100;
  std::array<int, 3> split_percent = {85, 5, 10};  // train / validation / test
  std::uint64_t seed = 0;

  /// Throws Error(kInvalidArgument) when an invariant is broken.
  void validate() const;
};

struct DatasetSplits {
  std::vector<TestCase> train;
  std::vector<TestCase> validation;
  std::vector<TestCase> test;
};

/// Filters documents, builds one test case per retained document and
/// partitions users disjointly into train/validation/test.
///
/// A document is retained when its text exceeds `min_chars` characters and
/// the user wrote at least `min_prior_docs` documents before it (counted on
/// the unfiltered stream). Users with fewer than `min_user_examples` retained
/// documents are dropped; the rest keep their earliest `max_user_examples`.
/// The personal context of a case is every earlier document of the same user
/// (unfiltered stream), deduplicated after whitespace normalization.
///
/// Throws Error(kEmptyAfterFiltering) when no user survives.
DatasetSplits prepare(std::span<const RawDocument> documents, const PrepareConfig& config);

/// Inverse view of prepare(): rebuilds, per user, the ordered document stream
/// that the latest case's personal context records. prepare(flatten(s)) == s
/// for inputs whose users never repeat a document.
std::vector<RawDocument> flatten(const DatasetSplits& splits);

/// Uniform sample of `n` distinct cases, deterministic for (order, seed).
/// Throws Error(kNotEnoughCases) when n exceeds the dataset size.
std::vector<TestCase> sample_cases(std::span<const TestCase> dataset, std::size_t n,
                                   std::uint64_t seed);

enum class AblationMode { kSwapPersonalContext, kSwapImmediateContext };

/// Permutes one context field across cases so that no case keeps its own
/// value and, for personal contexts, no case receives a context written by
/// its own user. Everything else is untouched.
///
/// Throws Error(kCannotDerange) when no such assignment exists or none was
/// found within the attempt budget.
std::vector<TestCase> ablate(std::span<const TestCase> cases, AblationMode mode,
                             std::uint64_t seed);

}  // namespace pereval

#endif  // PEREVAL_INGEST_HPP_
