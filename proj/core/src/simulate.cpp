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

#include "pereval/simulate.hpp"

#include <array>
#include <cstdio>

#include "pereval/error.hpp"
#include "pereval/random.hpp"

namespace pereval {
namespace {

constexpr std::array<std::string_view, 32> kWords = {
    "story", "pages", "author", "plot",   "slow",  "great", "ending", "read",
    "book",  "loved", "dull",   "vivid",  "tone",  "world", "series", "voice",
    "short", "long",  "clever", "simple", "dark",  "light", "hero",   "quiet",
    "fast",  "rich",  "flat",   "warm",   "sharp", "odd",   "fresh",  "worth"};

std::string sentence(Rng& rng, std::size_t words) {
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    if (i > 0) out += ' ';
    out += kWords[rng.below(kWords.size())];
  }
  out += '.';
  return out;
}

std::string numbered(std::string_view prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, i);
  return std::string(prefix) + buf;
}

}  // namespace

SyntheticCorpus synthetic_corpus(std::span<const std::string> generators,
                                 const SyntheticCorpusOptions& options) {
  if (options.users == 0 || options.profile_examples == 0 || options.words_per_text == 0) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic corpus needs users, examples and words");
  }
  SyntheticCorpus corpus;
  corpus.cases.reserve(options.cases);
  corpus.outputs.reserve(options.cases * generators.size());
  for (std::size_t i = 0; i < options.cases; ++i) {
    Rng rng(mix_seed(options.seed, static_cast<std::uint64_t>(i)));
    TestCase c;
    c.case_id = numbered("case-", i, 5);
    c.user_id = numbered("user-", i % options.users, 4);
    c.immediate_context = "Review of " + sentence(rng, 3);
    for (std::size_t k = 0; k < options.profile_examples; ++k) {
      c.personal_context.push_back(sentence(rng, options.words_per_text));
    }
    c.reference = sentence(rng, options.words_per_text);
    for (const std::string& g : generators) {
      corpus.outputs.push_back({c.case_id, g, sentence(rng, options.words_per_text)});
    }
    corpus.cases.push_back(std::move(c));
  }
  return corpus;
}

}  // namespace pereval
