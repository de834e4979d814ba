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

// The campaign loop: Select -> Mutate -> Execute -> Collect -> Analyze.
//
// Work is issued in epochs. At an epoch boundary the engine is quiescent: it
// advances virtual time, fires refresh/cleanup timers, applies scripted
// redeployments, reads the control file, and freezes the seed pool and digest
// frequencies that every Select of the epoch draws from. Each item's
// randomness derives from (rng_seed, item id) alone and Analyze consumes
// items in id order, so sequential and pipelined runs admit the same seeds.

#ifndef MESHFUZZ_FUZZ_ENGINE_H_
#define MESHFUZZ_FUZZ_ENGINE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "meshfuzz/cluster.h"
#include "meshfuzz/mocking.h"
#include "meshfuzz/monitor.h"
#include "meshfuzz/rng.h"
#include "meshfuzz/seed_store.h"

namespace meshfuzz {

enum class CampaignMode { kSequential, kPipeline };
enum class SelectStrategy { kWeighted, kRoundRobin, kRanked };

std::string_view CampaignModeName(CampaignMode mode);
std::string_view SelectStrategyName(SelectStrategy strategy);

// kWeighted: weight 1 / frequency(digest), newest seeds first on the wheel.
// kRoundRobin: seeds[counter % size], oldest first.
// kRanked: `seeds` are best-first; weight 1 / (rank + 1).
// Throws EmptyStore.
const Seed &SelectSeed(const std::vector<Seed> &seeds,
                       const std::map<uint64_t, uint64_t> &frequencies,
                       SelectStrategy strategy, Rng &rng, uint64_t counter);

enum Stage { kSelect, kMutate, kExecute, kCollect, kAnalyze, kStageCount };
std::string_view StageName(Stage stage);

struct StageLatencies {
  // Injected wall-clock delay per item, milliseconds.
  std::array<double, kStageCount> ms{};
};

struct ScriptedEvent {
  uint64_t time_ms = 0;
  AppSpec spec;
};

struct AnalyzedItem {
  uint64_t item_id = 0;
  const Seed *parent = nullptr;
  const Seed *child = nullptr;  // cover_digest filled in
  const SeedRun *run = nullptr;
  AdmitDecision decision;
};

struct CampaignConfig {
  std::string target_app;
  uint64_t rng_seed = 0;
  uint64_t budget = 1000;  // items
  std::optional<double> wall_budget_s;
  CampaignMode mode = CampaignMode::kSequential;
  size_t epoch_size = 64;
  size_t queue_depth = 8;
  size_t collect_workers = 2;
  StageLatencies latency;
  // Adds wall-clock timings and stage histograms to the report.
  bool measure = false;
  SelectStrategy strategy = SelectStrategy::kWeighted;
  bool switch_enabled = true;
  uint64_t stats_every = 0;
  std::vector<ScriptedEvent> events;
  // Polled at epoch boundaries; a file containing "on" or "off".
  std::filesystem::path control_file;
  bool triggers = true;
  TriggerConfig trigger_config;
  // kRanked: receives the epoch's seeds oldest first, returns them best first.
  std::function<std::vector<Seed>(std::vector<Seed>)> ranker;
  std::function<void(const AnalyzedItem &)> on_analyzed;
  // Polled at epoch boundaries; true acts like a user "off".
  std::function<bool()> stop_requested;
};

struct CrashFinding {
  CrashKind kind;
  std::string location;
  std::string message;
  std::string seed_id;  // stored seed, if admitted
  uint64_t item_id = 0;
};

struct CampaignResult {
  nlohmann::json report;
  uint64_t iterations = 0;
  std::vector<std::pair<std::string, uint64_t>> admissions;  // (seed_id, digest)
  std::vector<CrashFinding> crashes;
  // Per item, how many times each stage processed it.
  std::vector<std::array<uint8_t, kStageCount>> ledger;
  std::string stopped_by;
  uint64_t failures = 0;
  double wall_seconds = 0;
  bool has_sys_vul() const;
};

// Records each seed with real calls from the current cluster state (restored
// between seeds) and admits it. Seeds get origin traffic; ids are assigned.
std::vector<AdmitDecision> AdmitCorpus(Cluster &cluster, SeedStore &store,
                                       const std::vector<Seed> &corpus,
                                       Monitor *monitor = nullptr);

CampaignResult RunCampaign(Cluster &cluster, SeedStore &store, Monitor &monitor,
                           const CampaignConfig &config);

}  // namespace meshfuzz

#endif  // MESHFUZZ_FUZZ_ENGINE_H_
