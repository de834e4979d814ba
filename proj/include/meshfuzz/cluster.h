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

// In-process simulated cluster: one active version per App, App-global
// stores, a shared database, seeded randomness, a virtual clock, RPC routing
// with injectable faults, and virtual-time timers.

#ifndef MESHFUZZ_CLUSTER_H_
#define MESHFUZZ_CLUSTER_H_

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "meshfuzz/app_spec.h"
#include "meshfuzz/interpreter.h"
#include "meshfuzz/rng.h"
#include "meshfuzz/tracing.h"

namespace meshfuzz {

inline constexpr uint32_t kDefaultMaxHops = 32;

struct FaultPolicy {
  // rpc_failure_probability = numerator / denominator.
  uint64_t numerator = 0;
  uint64_t denominator = 1;
  uint64_t latency_ms = 0;
  // Callee apps subject to failures; nullopt means every app.
  std::optional<std::set<std::string>> affected_apps;

  bool Affects(const std::string &app) const {
    return !affected_apps || affected_apps->contains(app);
  }
};

struct VersionEvent {
  std::string app_id;
  std::string old_version;  // empty on first deployment
  std::shared_ptr<const AppSpec> spec;
  uint64_t time_ms = 0;
};

struct Request {
  std::string app;
  std::string handler;
  std::vector<Bytes> args;
};

struct SinkEvent {
  std::string sink;
  Value value;
  friend bool operator==(const SinkEvent &, const SinkEvent &) = default;
};

struct InvokeResult {
  Outcome outcome;
  TraceId trace_id;
  SpanSketch sketch;  // the whole request, as executed or spliced
  std::vector<SinkEvent> sinks;
};

// Sits in front of every interception-eligible statement of a request.
// `real` performs the statement against the cluster; an interceptor may call
// it, or answer without it to suppress the effect.
class Interceptor {
 public:
  virtual ~Interceptor() = default;
  virtual EffectOutput Intercept(const EffectRequest &request,
                                 const std::function<EffectOutput()> &real) = 0;
};

struct ClusterSnapshot {
  std::map<std::string, std::string> versions;
  std::map<std::string, std::map<Bytes, Value>> states;
  std::map<std::pair<std::string, Bytes>, Value> database;
  Rng rng;
  uint64_t clock_ms = 0;
  uint64_t step_carry = 0;
};

class Cluster {
 public:
  using Listener = std::function<void(const VersionEvent &)>;
  using TimerCallback = std::function<void(uint64_t fire_time_ms)>;

  explicit Cluster(uint64_t rng_seed = 0, FaultPolicy policy = {});
  Cluster(const Cluster &) = delete;
  Cluster &operator=(const Cluster &) = delete;

  // Activates `app`, resets its store from initial_state and publishes a
  // VersionEvent. Throws DuplicateVersion if that version is already active.
  void Deploy(AppSpec app);
  std::shared_ptr<const AppSpec> Active(const std::string &app_id) const;
  // Active specs sorted by app id.
  std::vector<AppSpec> ActiveApps() const;
  bool IsDeployed(const std::string &app_id) const;

  // Runs one request under a fresh trace id. Throws UnknownApp,
  // UnknownHandler, or ValidationError for an arity mismatch.
  InvokeResult Invoke(const Request &request, Interceptor *interceptor = nullptr);

  ClusterSnapshot Snapshot() const;
  // Throws VersionMismatch if the deployments differ from the snapshot's.
  void Restore(const ClusterSnapshot &snapshot);

  int Subscribe(Listener listener);
  void Unsubscribe(int id);

  int AddTimer(uint64_t interval_ms, TimerCallback callback);
  void RemoveTimer(int id);
  // Re-arms a timer to fire one interval from now.
  void ResetTimer(int id);
  // Moves the clock forward, firing due timers in time order.
  void Advance(uint64_t ms);
  // Fires timers that are due at the current time.
  void PollTimers();

  uint64_t now_ms() const;
  TraceCollector &collector() { return collector_; }

  const FaultPolicy &fault_policy() const { return policy_; }
  void set_fault_policy(FaultPolicy policy) { policy_ = std::move(policy); }
  uint64_t step_budget() const { return step_budget_; }
  void set_step_budget(uint64_t budget) { step_budget_ = budget; }
  uint32_t max_hops() const { return max_hops_; }
  void set_max_hops(uint32_t hops) { max_hops_ = hops; }

  // Direct state inspection for tests and tools.
  std::optional<Value> StateValue(const std::string &app_id, const Bytes &key) const;
  std::optional<Value> DbValue(const std::string &table, const Bytes &key) const;
  void SetDbValue(const std::string &table, const Bytes &key, Value value);

  uint64_t rpc_hops() const { return rpc_hops_; }
  uint64_t rpc_faults() const { return rpc_faults_; }

 private:
  friend class HopEnv;

  struct Timer {
    uint64_t interval_ms;
    uint64_t next_ms;
    TimerCallback callback;
  };

  struct HopResult {
    Outcome outcome;
    SpanSketch sketch;
  };

  HopResult RunHop(std::shared_ptr<const AppSpec> app, const Handler &handler,
                   std::span<const Bytes> args, const TraceContext &ctx,
                   Interceptor *interceptor, std::vector<SinkEvent> &sinks);
  void InjectSketch(const SpanSketch &sketch, const TraceContext &parent,
                    const std::string &parent_app);
  EffectOutput PerformReal(const EffectRequest &request, const TraceContext &ctx,
                           Interceptor *interceptor, std::vector<SinkEvent> &sinks,
                           std::optional<SpanSketch> &callee);
  void Tick();
  TraceId NextTraceId();
  uint64_t NextSpanId();
  void FireDue(uint64_t up_to_ms);

  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const AppSpec>> deployments_;
  std::map<std::string, std::map<Bytes, Value>> states_;
  std::map<std::pair<std::string, Bytes>, Value> database_;
  Rng rng_;
  uint64_t clock_ms_ = 0;
  uint64_t step_carry_ = 0;

  FaultPolicy policy_;
  uint64_t step_budget_ = kDefaultStepBudget;
  uint32_t max_hops_ = kDefaultMaxHops;

  std::atomic<uint64_t> id_counter_{0};
  std::atomic<uint64_t> rpc_hops_{0};
  std::atomic<uint64_t> rpc_faults_{0};

  std::mutex listeners_mu_;
  std::vector<std::pair<int, Listener>> listeners_;
  std::map<int, Timer> timers_;
  int next_handle_ = 1;

  TraceCollector collector_;
};

}  // namespace meshfuzz

#endif  // MESHFUZZ_CLUSTER_H_
