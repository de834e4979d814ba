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

// Iteration testing (regression selection plus fuzzing directed at changed
// blocks) and taint verification by source-only mutation.

#ifndef MESHFUZZ_SCENARIOS_H_
#define MESHFUZZ_SCENARIOS_H_

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "meshfuzz/call_graph.h"
#include "meshfuzz/cluster.h"
#include "meshfuzz/fuzz_engine.h"
#include "meshfuzz/seed_store.h"

namespace meshfuzz {

// (app_id, version_id)
using Branch = std::pair<std::string, std::string>;

struct TraceRecord {
  std::string trace_id;
  uint64_t cover_digest = 0;
  ProbeSet probes;
  std::string seed_id;
};

class TraceIndex {
 public:
  void Add(const Branch &branch, TraceRecord record);
  // Empty if the branch is unknown.
  const std::vector<TraceRecord> &Records(const Branch &branch) const;
  std::vector<Branch> Branches() const;
  size_t size() const;

 private:
  std::map<Branch, std::vector<TraceRecord>> records_;
};

// Replays every stored seed of `app` (with its mocks, from the current state,
// which is restored afterwards) and indexes the traces under the app's active
// version. Returns the runs keyed by seed id.
std::map<std::string, SeedRun> IndexStoredSeeds(Cluster &cluster, const SeedStore &store,
                                                const std::string &app, TraceIndex &index);

struct RegressionSuite {
  std::vector<TraceRecord> traces_a, traces_b;
  std::vector<std::string> seeds_a, seeds_b;  // sorted, unique per branch
};

RegressionSuite SelectRegressionSuite(const TraceIndex &index, const ProbeSet &diff,
                                      const Branch &branch_a, const Branch &branch_b);

inline constexpr uint64_t kUnreachable = std::numeric_limits<uint64_t>::max();

// Distance from every node to its nearest target along graph edges, i.e. a
// multi-source search over the reversed graph. `edge_weights`, if given, is
// indexed like graph.edges(); otherwise every edge weighs 1.
std::vector<uint64_t> ShortestDistances(const CallGraph &graph,
                                        const std::set<size_t> &targets,
                                        const std::vector<uint64_t> *edge_weights = nullptr);

// Node ids of the blocks in `blocks` that the graph knows about.
std::set<size_t> NodesOf(const CallGraph &graph, const ProbeSet &blocks);

// Lower sorts first: covers a target, then nearest covered node, then larger
// coverage, then seed id.
struct PriorityKey {
  bool covers_target = false;
  uint64_t distance = kUnreachable;
  size_t coverage = 0;
  std::string seed_id;

  friend bool operator<(const PriorityKey &a, const PriorityKey &b);
  friend bool operator==(const PriorityKey &, const PriorityKey &) = default;
};

PriorityKey DirectedPriority(const std::string &seed_id, const ProbeSet &probes,
                             const CallGraph &graph, const std::vector<uint64_t> &distances);

struct IterationConfig {
  std::string target_app;
  uint64_t budget = 1000;
  uint64_t rng_seed = 0;
  CampaignMode mode = CampaignMode::kSequential;
  size_t epoch_size = 64;
};

struct BehaviorDelta {
  std::string seed_id;
  uint64_t old_digest = 0, new_digest = 0;
  std::string old_outcome, new_outcome;
  std::optional<CrashKind> crash;  // set when the new run crashes
};

struct IterationReport {
  BlockDiff diff;
  Branch branch_a, branch_b;
  RegressionSuite suite;
  std::vector<BehaviorDelta> deltas;
  uint64_t ri = 0;  // distinct digests of the initial seeds on the new version
  uint64_t rt = 0;  // distinct digests at the end of the directed campaign
  std::optional<double> effectiveness;
  ProbeSet reached;  // Diff blocks covered by any execution
  std::optional<uint64_t> first_reach_iteration;
  CampaignResult campaign;

  nlohmann::json ToJson() const;
};

// `cluster` must run the old versions and `store` hold seeds recorded
// against them. Deploys every app of `new_apps` whose version differs, then
// replays the stored target seeds, and fuzzes the target ranked by
// DirectedPriority toward Diff.
IterationReport RunIterationTest(Cluster &cluster, SeedStore &store,
                                 std::span<const AppSpec> old_apps,
                                 std::span<const AppSpec> new_apps, const IterationConfig &config);

struct TaintCandidate {
  std::string app;
  std::string handler;
  size_t param_index = 0;
  std::string sink_id;  // EmitSink name, or "db:<table>" for a DbWrite
  std::string note;
};

std::vector<TaintCandidate> TaintCandidatesFromJson(const nlohmann::json &j);

struct TaintMutant {
  size_t index = 0;
  std::vector<Bytes> args;
  std::vector<Value> sink_values;  // in emission order
};

struct TaintVerdict {
  enum class Kind { kConfirmed, kUncertain };
  Kind kind = Kind::kUncertain;
  std::string seed_id;  // s_o
  size_t mutants = 0;
  size_t observed = 0;  // mutants whose run reached the sink
  std::optional<std::pair<TaintMutant, TaintMutant>> witness;
  std::optional<std::string> annotation;  // "SinkNeverObserved"

  bool confirmed() const { return kind == Kind::kConfirmed; }
  nlohmann::json ToJson() const;
};

std::string_view TaintVerdictName(TaintVerdict::Kind kind);

// Values emitted at `sink_id` during `run`.
std::vector<Value> SinkValues(const SeedRun &run, const std::string &sink_id);

// Mutates only args[param_index] of the lowest-id stored seed of the source
// handler, replaying each mutant with that seed's mocks from the current
// state (restored afterwards). Throws NoReachingSeed, ValidationError.
TaintVerdict VerifyTaint(Cluster &cluster, const SeedStore &store,
                         const TaintCandidate &candidate, size_t k, uint64_t rng_seed = 0);

}  // namespace meshfuzz

#endif  // MESHFUZZ_SCENARIOS_H_
