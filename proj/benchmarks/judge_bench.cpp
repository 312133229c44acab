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

#include <string>
#include <vector>

#include "pereval/backends.hpp"
#include "pereval/judge.hpp"
#include "pereval/simulate.hpp"

namespace {

pereval::SimulatedJudgeConfig table_config() {
  const auto rows = pereval::book_review_head_to_head();
  return pereval::config_from_head_to_head(rows, 0.0, 1.0, 11);
}

void BM_SimulatedCall(benchmark::State& state) {
  pereval::SimulatedJudge judge(table_config());
  pereval::JudgeRequest request;
  request.prompt = "compare";
  request.key = {"c1", "XXL", "XL", pereval::Dimension::kQuality, 0, "XXL"};
  int replica = 0;
  for (auto _ : state) {
    request.key.replica = replica++ % 40;
    request.key.presented_first = request.key.replica % 2 == 0 ? "XXL" : "XL";
    benchmark::DoNotOptimize(judge.complete(request));
  }
}
BENCHMARK(BM_SimulatedCall);

void BM_JudgePair(benchmark::State& state) {
  const std::vector<std::string> gens = {"XXL", "XL"};
  pereval::SyntheticCorpusOptions corpus_options;
  corpus_options.cases = state.range(0);
  const auto corpus = pereval::synthetic_corpus(gens, corpus_options);
  pereval::SimulatedJudge backend(table_config());
  pereval::JudgeOptions options;
  options.plan.replicas = 40;
  const pereval::PairwiseJudge judge(backend, options);
  const std::vector<pereval::Dimension> dims(pereval::kAllDimensions.begin(),
                                             pereval::kAllDimensions.end());
  for (auto _ : state) {
    benchmark::DoNotOptimize(judge.judge_pair(corpus.cases, corpus.outputs, {"XXL", "XL"}, dims));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 40 * dims.size());
}
BENCHMARK(BM_JudgePair)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
