// Copyright 2026 The Meshfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Sequential vs pipelined campaigns on the shop fixture, with and without
// injected stage latency, plus the raw interpreter/replay cost.

#include <benchmark/benchmark.h>

#include "meshfuzz/fuzz_engine.h"
#include "meshfuzz/mocking.h"
#include "meshfuzz/scenario_file.h"

namespace meshfuzz {
namespace {

std::filesystem::path Fixture(const char *rel) {
  return std::filesystem::path(MESHFUZZ_FIXTURE_DIR) / rel;
}

void BM_Campaign(benchmark::State &state) {
  const Scenario sc = LoadScenarioFile(Fixture("shop.json"));
  const auto mode = state.range(0) ? CampaignMode::kPipeline : CampaignMode::kSequential;
  const double latency = static_cast<double>(state.range(1));
  const uint64_t budget = 128;
  for (auto _ : state) {
    auto cluster = BuildCluster(sc);
    SeedStore store;
    Monitor monitor("gateway", cluster->Active("gateway")->BlockCount());
    AdmitCorpus(*cluster, store, sc.corpus, &monitor);
    CampaignConfig cc;
    cc.target_app = "gateway";
    cc.rng_seed = sc.seed;
    cc.budget = budget;
    cc.mode = mode;
    cc.switch_enabled = false;
    cc.triggers = false;
    cc.latency.ms[kExecute] = latency;
    cc.latency.ms[kCollect] = 2 * latency;
    benchmark::DoNotOptimize(RunCampaign(*cluster, store, monitor, cc));
  }
  state.SetItemsProcessed(state.iterations() * budget);
}
BENCHMARK(BM_Campaign)
    ->ArgNames({"pipelined", "exec_ms"})
    ->Args({0, 0})
    ->Args({1, 0})
    ->Args({0, 2})
    ->Args({1, 2})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

void BM_RecordReplay(benchmark::State &state) {
  const Scenario sc = LoadScenarioFile(Fixture("shop.json"));
  auto cluster = BuildCluster(sc);
  const Seed &seed = sc.corpus.front();
  const SeedRun rec = RecordRun(*cluster, seed);
  for (auto _ : state) {
    if (state.range(0)) {
      benchmark::DoNotOptimize(ReplayRun(*cluster, seed, rec.mocks));
    } else {
      benchmark::DoNotOptimize(RecordRun(*cluster, seed));
    }
  }
}
BENCHMARK(BM_RecordReplay)->ArgName("replay")->Arg(0)->Arg(1);

}  // namespace
}  // namespace meshfuzz

BENCHMARK_MAIN();
