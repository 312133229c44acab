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

#ifndef PEREVAL_SIMULATE_HPP_
#define PEREVAL_SIMULATE_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pereval/model.hpp"

namespace pereval {

struct SyntheticCorpusOptions {
  std::size_t cases = 1000;
  std::size_t users = 50;
  std::size_t profile_examples = 3;
  std::size_t words_per_text = 12;
  std::uint64_t seed = 0;
};

struct SyntheticCorpus {
  std::vector<TestCase> cases;
  std::vector<CandidateOutput> outputs;  // case-major, generators in given order
};

/// Placeholder cases and outputs of pseudo-random words, one output per
/// (case, generator). Content carries no signal; it only has to be valid
/// input for the judging pipeline.
SyntheticCorpus synthetic_corpus(std::span<const std::string> generators,
                                 const SyntheticCorpusOptions& options);

}  // namespace pereval

#endif  // PEREVAL_SIMULATE_HPP_
