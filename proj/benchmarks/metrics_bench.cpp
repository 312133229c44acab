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

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "pereval/metrics.hpp"

namespace {

std::vector<std::string> words(std::size_t n, unsigned seed) {
  static const char* const kVocab[] = {"the", "plot", "was", "slow", "but", "characters",
                                       "felt", "real", "and", "ending", "surprised", "me"};
  std::mt19937 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, std::size(kVocab) - 1);
  std::vector<std::string> out(n);
  for (auto& w : out) w = kVocab[pick(rng)];
  return out;
}

std::string join(const std::vector<std::string>& w) {
  std::string s;
  for (const auto& x : w) s += x + ' ';
  return s;
}

void BM_Tokenize(benchmark::State& state) {
  const std::string text = join(words(state.range(0), 1));
  for (auto _ : state) benchmark::DoNotOptimize(pereval::tokenize(text));
  state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(text.size()));
}
BENCHMARK(BM_Tokenize)->Arg(64)->Arg(512);

void BM_Bleu(benchmark::State& state) {
  const auto a = words(state.range(0), 1);
  const auto b = words(state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(pereval::bleu(a, b));
}
BENCHMARK(BM_Bleu)->Arg(64)->Arg(512);

void BM_RougeL(benchmark::State& state) {
  const auto a = words(state.range(0), 1);
  const auto b = words(state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(pereval::rouge_l(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RougeL)->RangeMultiplier(4)->Range(16, 1024)->Complexity(benchmark::oNSquared);

}  // namespace

BENCHMARK_MAIN();
