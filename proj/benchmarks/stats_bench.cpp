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
#include <vector>

#include "pereval/stats.hpp"

namespace {

void BM_BinomialTest(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    for (int w = 0; w <= n; w += 7) benchmark::DoNotOptimize(pereval::binomial_test(w, n - w));
  }
}
BENCHMARK(BM_BinomialTest)->Arg(100)->Arg(1000)->Arg(10000);

std::vector<pereval::Verdict> pool(std::size_t n) {
  std::mt19937_64 rng(3);
  std::discrete_distribution<int> pick({0.6, 0.35, 0.05});
  std::vector<pereval::Verdict> out(n);
  for (auto& v : out) v = static_cast<pereval::Verdict>(pick(rng));
  return out;
}

void BM_Consistency(benchmark::State& state) {
  const auto p = pool(1000);
  pereval::ResampleConfig config;
  config.sizes = {25, 100, 400};
  config.repetitions = 1000;
  config.max_threads = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(pereval::consistency(p, config));
}
BENCHMARK(BM_Consistency)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_Sensitivity(benchmark::State& state) {
  const auto p = pool(1000);
  pereval::ResampleConfig config;
  config.sizes = {25, 100, 400};
  config.repetitions = 1000;
  config.max_threads = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(pereval::sensitivity(p, config));
}
BENCHMARK(BM_Sensitivity)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
