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

// Record/replay of a seed's dependencies. Recording runs every mock point for
// real and keeps an (input, output) queue per point; replay answers a firing
// from the next queued record when the inputs agree and runs it for real
// otherwise.

#ifndef MESHFUZZ_MOCKING_H_
#define MESHFUZZ_MOCKING_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "meshfuzz/app_spec.h"
#include "meshfuzz/cluster.h"
#include "meshfuzz/coverage.h"
#include "meshfuzz/interpreter.h"
#include "meshfuzz/seed.h"
#include "meshfuzz/tracing.h"

namespace meshfuzz {

struct MockPoint {
  PointId id;
  PointKind kind = PointKind::kSystem;
  friend bool operator==(const MockPoint &, const MockPoint &) = default;
};

// Interception-eligible statements of every handler reachable from the
// target App's handlers through RpcCall, in (app, handler, block, index)
// order.
std::vector<MockPoint> EnumerateMockPoints(std::span<const AppSpec> apps,
                                           const std::string &target_app);

struct MockRecord {
  // Both absent for the NULL record of a point the run never reached.
  std::optional<ValueTuple> input;
  std::optional<EffectOutput> output;

  bool is_null() const { return !input; }
  static MockRecord Null() { return {}; }
  friend bool operator==(const MockRecord &, const MockRecord &) = default;
};

struct MockSet {
  std::string seed_id;
  std::map<PointId, std::vector<MockRecord>> records;

  size_t fired_records() const;
  friend bool operator==(const MockSet &, const MockSet &) = default;
};

// {"seed_id": .., "points": {"A:h:b0#1": [null | {"input": [..], "output": {..}}]}}
nlohmann::json MockSetToJson(const MockSet &mocks);
MockSet MockSetFromJson(const nlohmann::json &j);

// Equality after masking the volatile positions.
bool InputsEqual(const ValueTuple &a, const ValueTuple &b,
                 std::span<const size_t> volatile_fields = {});

class RecordingInterceptor : public Interceptor {
 public:
  EffectOutput Intercept(const EffectRequest &request,
                         const std::function<EffectOutput()> &real) override;
  // Adds NULL records for the points that never fired.
  MockSet Finish(std::string seed_id, std::span<const MockPoint> points) &&;

 private:
  std::map<PointId, std::vector<MockRecord>> records_;
};

struct Divergence {
  enum class Reason { kInputMismatch, kNullRecord, kExhausted };
  PointId point;
  size_t occurrence = 0;  // 0-based firing count at the point
  Reason reason = Reason::kInputMismatch;
  ValueTuple input;
};

std::string_view DivergenceReasonName(Divergence::Reason reason);

struct ConsistencyReport {
  std::vector<Divergence> divergences;
  size_t substituted = 0;
  size_t executed = 0;
  bool consistent() const { return divergences.empty(); }
};

nlohmann::json ConsistencyToJson(const ConsistencyReport &report);

class ReplayInterceptor : public Interceptor {
 public:
  explicit ReplayInterceptor(const MockSet &recorded) : recorded_(recorded) {}

  EffectOutput Intercept(const EffectRequest &request,
                         const std::function<EffectOutput()> &real) override;

  const ConsistencyReport &report() const { return report_; }
  // What this run observed, substituted or real, as a fresh mock set.
  MockSet Observed(std::string seed_id, std::span<const MockPoint> points) const;

 private:
  const MockSet &recorded_;
  std::map<PointId, size_t> cursor_;
  std::map<PointId, std::vector<MockRecord>> observed_;
  ConsistencyReport report_;
};

// A finished invocation whose trace still sits in the agents.
struct ExecutedRun {
  InvokeResult invoke;
  MockSet mocks;  // recorded (record) or observed (replay)
  ConsistencyReport consistency;
};

struct SeedRun {
  Outcome outcome;
  Trace trace;
  MockSet mocks;
  ConsistencyReport consistency;
  std::vector<SinkEvent> sinks;
};

// `points` defaults to EnumerateMockPoints over the active deployments;
// callers running many seeds against one deployment pass it precomputed.
ExecutedRun ExecuteRecord(Cluster &cluster, const Seed &seed,
                          const std::vector<MockPoint> *points = nullptr);
ExecutedRun ExecuteReplay(Cluster &cluster, const Seed &seed, const MockSet &mocks,
                          const std::vector<MockPoint> *points = nullptr);
// Collects and splices the run's trace, then drops it from the collector.
SeedRun Finish(Cluster &cluster, ExecutedRun run);

SeedRun RecordRun(Cluster &cluster, const Seed &seed);
SeedRun ReplayRun(Cluster &cluster, const Seed &seed, const MockSet &mocks);

}  // namespace meshfuzz

#endif  // MESHFUZZ_MOCKING_H_
