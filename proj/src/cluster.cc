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

#include "meshfuzz/cluster.h"

#include <algorithm>

#include "meshfuzz/errors.h"

namespace meshfuzz {

namespace {

constexpr uint64_t kStepsPerMs = 1000;

bool IsBadSqlKey(const Value &key) {
  const Bytes &k = key.as_bytes();
  return k.empty() || k.find('\'') != Bytes::npos;
}

}  // namespace

// Wires one handler invocation to the cluster: probes go to the App's agent,
// effects go through the interceptor (if any) to the cluster services.
class HopEnv : public ExecutionEnv {
 public:
  HopEnv(Cluster &cluster, const TraceContext &ctx, Interceptor *interceptor,
         std::vector<SinkEvent> &sinks, SpanSketch &sketch, TraceAgent &agent)
      : cluster_(cluster),
        ctx_(ctx),
        interceptor_(interceptor),
        sinks_(sinks),
        sketch_(sketch),
        agent_(agent) {}

  void OnProbe(const ProbeId &probe) override {
    agent_.Record(ctx_, probe);
    sketch_.probes.push_back(probe);
  }

  void OnSink(std::string_view sink_id, const Value &value) override {
    sinks_.push_back({std::string(sink_id), value});
  }

  void OnStep() override { cluster_.Tick(); }

  uint64_t step_budget() const override { return cluster_.step_budget_; }

  EffectOutput Perform(const EffectRequest &request) override {
    bool executed = false;
    std::optional<SpanSketch> callee;
    auto real = [&]() {
      executed = true;
      EffectOutput out = cluster_.PerformReal(request, ctx_, interceptor_, sinks_, callee);
      out.callee = callee;
      return out;
    };
    EffectOutput out = interceptor_ ? interceptor_->Intercept(request, real) : real();
    if (std::holds_alternative<RpcCallStmt>(*request.statement)) {
      // A substituted call still contributes the callee's recorded coverage
      // so the request's digest matches the recording.
      if (!executed && out.callee) cluster_.InjectSketch(*out.callee, ctx_, request.point.app);
      if (out.callee) sketch_.children.push_back(*out.callee);
    }
    return out;
  }

 private:
  Cluster &cluster_;
  const TraceContext &ctx_;
  Interceptor *interceptor_;
  std::vector<SinkEvent> &sinks_;
  SpanSketch &sketch_;
  TraceAgent &agent_;
};

Cluster::Cluster(uint64_t rng_seed, FaultPolicy policy)
    : rng_(rng_seed), policy_(std::move(policy)) {}

void Cluster::Deploy(AppSpec app) {
  ValidateAppSpec(app);
  VersionEvent event;
  {
    std::lock_guard lock(mu_);
    auto it = deployments_.find(app.app_id);
    if (it != deployments_.end()) {
      if (it->second->version_id == app.version_id) {
        throw DuplicateVersion(app.app_id + "@" + app.version_id + " is already active");
      }
      event.old_version = it->second->version_id;
    }
    auto spec = std::make_shared<const AppSpec>(std::move(app));
    states_[spec->app_id] = spec->initial_state;
    deployments_[spec->app_id] = spec;
    event.app_id = spec->app_id;
    event.spec = spec;
    event.time_ms = clock_ms_;
  }
  std::vector<Listener> listeners;
  {
    std::lock_guard lock(listeners_mu_);
    for (const auto &[id, l] : listeners_) listeners.push_back(l);
  }
  for (const auto &l : listeners) l(event);
}

std::shared_ptr<const AppSpec> Cluster::Active(const std::string &app_id) const {
  std::lock_guard lock(mu_);
  auto it = deployments_.find(app_id);
  return it == deployments_.end() ? nullptr : it->second;
}

std::vector<AppSpec> Cluster::ActiveApps() const {
  std::lock_guard lock(mu_);
  std::vector<AppSpec> out;
  for (const auto &[id, spec] : deployments_) out.push_back(*spec);
  return out;
}

bool Cluster::IsDeployed(const std::string &app_id) const {
  std::lock_guard lock(mu_);
  return deployments_.contains(app_id);
}

InvokeResult Cluster::Invoke(const Request &request, Interceptor *interceptor) {
  auto app = Active(request.app);
  if (!app) throw UnknownApp("\"" + request.app + "\" is not deployed");
  const Handler *handler = app->FindHandler(request.handler);
  if (!handler) {
    throw UnknownHandler("\"" + request.handler + "\" in app \"" + request.app + "\"");
  }
  if (handler->params.size() != request.args.size()) {
    throw ValidationError(request.app + ":" + request.handler + " takes " +
                          std::to_string(handler->params.size()) + " arguments, got " +
                          std::to_string(request.args.size()));
  }
  InvokeResult result;
  TraceContext ctx;
  ctx.trace_id = NextTraceId();
  ctx.span_id = NextSpanId();
  HopResult hop = RunHop(app, *handler, request.args, ctx, interceptor, result.sinks);
  result.outcome = std::move(hop.outcome);
  result.sketch = std::move(hop.sketch);
  result.trace_id = ctx.trace_id;
  return result;
}

Cluster::HopResult Cluster::RunHop(std::shared_ptr<const AppSpec> app,
                                   const Handler &handler, std::span<const Bytes> args,
                                   const TraceContext &ctx, Interceptor *interceptor,
                                   std::vector<SinkEvent> &sinks) {
  TraceAgent &agent = collector_.Agent(app->app_id);
  agent.OpenSpan(ctx, handler.name, now_ms());
  HopResult hop;
  hop.sketch.app = app->app_id;
  hop.sketch.handler = handler.name;
  HopEnv env(*this, ctx, interceptor, sinks, hop.sketch, agent);
  hop.outcome = ExecuteHandler(env, *app, handler.name, args);
  agent.CloseSpan(ctx, now_ms(), hop.outcome.Summary());
  return hop;
}

void Cluster::InjectSketch(const SpanSketch &sketch, const TraceContext &parent,
                           const std::string &parent_app) {
  TraceContext ctx{parent.trace_id, NextSpanId(), parent.span_id, parent.depth + 1};
  collector_.Agent(parent_app).AddChild(parent, ctx.span_id);
  TraceAgent &agent = collector_.Agent(sketch.app);
  const uint64_t t = now_ms();
  agent.OpenSpan(ctx, sketch.handler, t, /*synthetic=*/true);
  for (const auto &p : sketch.probes) agent.Record(ctx, p);
  for (const auto &child : sketch.children) InjectSketch(child, ctx, sketch.app);
  agent.CloseSpan(ctx, t, "replayed");
}

EffectOutput Cluster::PerformReal(const EffectRequest &request, const TraceContext &ctx,
                                  Interceptor *interceptor, std::vector<SinkEvent> &sinks,
                                  std::optional<SpanSketch> &callee) {
  const ProbeId here = request.point.block_probe();
  const Statement &stmt = *request.statement;

  if (const auto *s = std::get_if<SysCallStmt>(&stmt)) {
    std::lock_guard lock(mu_);
    if (s->primitive == SysPrimitive::kRandom) {
      return EffectOutput::Of(Value::FromInt(static_cast<int64_t>(rng_())));
    }
    return EffectOutput::Of(Value::FromInt(static_cast<int64_t>(clock_ms_)));
  }
  if (std::holds_alternative<StateReadStmt>(stmt)) {
    std::lock_guard lock(mu_);
    const auto &store = states_[request.point.app];
    auto it = store.find(request.input[0].as_bytes());
    return it == store.end() ? EffectOutput::Miss() : EffectOutput::Of(it->second);
  }
  if (std::holds_alternative<StateWriteStmt>(stmt)) {
    std::lock_guard lock(mu_);
    states_[request.point.app][request.input[0].as_bytes()] = request.input[1];
    return EffectOutput::Of(Value::FromBool(true));
  }
  if (const auto *s = std::get_if<DbReadStmt>(&stmt)) {
    if (IsBadSqlKey(request.input[0])) {
      return EffectOutput::Crash({CrashKind::kSysSql, "malformed key in " + s->table, here});
    }
    std::lock_guard lock(mu_);
    auto it = database_.find({s->table, request.input[0].as_bytes()});
    return it == database_.end() ? EffectOutput::Miss() : EffectOutput::Of(it->second);
  }
  if (const auto *s = std::get_if<DbWriteStmt>(&stmt)) {
    if (IsBadSqlKey(request.input[0])) {
      return EffectOutput::Crash({CrashKind::kSysSql, "malformed key in " + s->table, here});
    }
    std::lock_guard lock(mu_);
    database_[{s->table, request.input[0].as_bytes()}] = request.input[1];
    return EffectOutput::Of(Value::FromBool(true));
  }

  const auto &rpc = std::get<RpcCallStmt>(stmt);
  if (ctx.depth + 1 > max_hops_) {
    return EffectOutput::Crash({CrashKind::kSysUnclearedThrowable,
                                "call depth exceeds " + std::to_string(max_hops_), here});
  }
  ++rpc_hops_;
  bool failed = false;
  {
    std::lock_guard lock(mu_);
    clock_ms_ += policy_.latency_ms;
    const uint64_t num = policy_.numerator;
    const uint64_t den = policy_.denominator;
    if (num > 0 && policy_.Affects(rpc.app)) {
      failed = num >= den || UniformBelow(rng_, den) < num;
    }
  }
  if (failed) {
    ++rpc_faults_;
    return EffectOutput::Crash(
        {CrashKind::kSysIo, "rpc to " + rpc.app + ":" + rpc.handler + " failed", here});
  }
  auto app = Active(rpc.app);
  const Handler *handler = app ? app->FindHandler(rpc.handler) : nullptr;
  if (!handler) {
    return EffectOutput::Crash(
        {CrashKind::kSysIo, "no route to " + rpc.app + ":" + rpc.handler, here});
  }
  std::vector<Bytes> args;
  for (const auto &v : request.input) args.push_back(v.as_bytes());
  if (args.size() != handler->params.size()) {
    return EffectOutput::Crash({CrashKind::kSysUnclearedThrowable,
                                "arity mismatch calling " + rpc.app + ":" + rpc.handler,
                                here});
  }
  TraceContext child{ctx.trace_id, NextSpanId(), ctx.span_id, ctx.depth + 1};
  collector_.Agent(request.point.app).AddChild(ctx, child.span_id);
  HopResult hop = RunHop(app, *handler, args, child, interceptor, sinks);
  callee = std::move(hop.sketch);
  switch (hop.outcome.status) {
    case Outcome::Status::kReturned:
      return EffectOutput::Of(std::move(hop.outcome.value));
    case Outcome::Status::kCrashed:
      return EffectOutput::Crash(std::move(hop.outcome.crash));
    case Outcome::Status::kBudgetExhausted:
      return EffectOutput::Exhausted();
  }
  return EffectOutput::Exhausted();
}

void Cluster::Tick() {
  std::lock_guard lock(mu_);
  if (++step_carry_ == kStepsPerMs) {
    step_carry_ = 0;
    ++clock_ms_;
  }
}

TraceId Cluster::NextTraceId() {
  uint64_t c = id_counter_.fetch_add(2) + 1;
  return {SplitMix64(c), SplitMix64(c + 1)};
}

uint64_t Cluster::NextSpanId() {
  uint64_t id = SplitMix64(~id_counter_.fetch_add(1));
  return id == 0 ? 1 : id;
}

ClusterSnapshot Cluster::Snapshot() const {
  std::lock_guard lock(mu_);
  ClusterSnapshot snap;
  for (const auto &[id, spec] : deployments_) snap.versions[id] = spec->version_id;
  snap.states = states_;
  snap.database = database_;
  snap.rng = rng_;
  snap.clock_ms = clock_ms_;
  snap.step_carry = step_carry_;
  return snap;
}

void Cluster::Restore(const ClusterSnapshot &snapshot) {
  std::lock_guard lock(mu_);
  std::map<std::string, std::string> versions;
  for (const auto &[id, spec] : deployments_) versions[id] = spec->version_id;
  if (versions != snapshot.versions) {
    throw VersionMismatch("snapshot deployments differ from the cluster's");
  }
  states_ = snapshot.states;
  database_ = snapshot.database;
  rng_ = snapshot.rng;
  clock_ms_ = snapshot.clock_ms;
  step_carry_ = snapshot.step_carry;
}

int Cluster::Subscribe(Listener listener) {
  std::lock_guard lock(listeners_mu_);
  int id = next_handle_++;
  listeners_.emplace_back(id, std::move(listener));
  return id;
}

void Cluster::Unsubscribe(int id) {
  std::lock_guard lock(listeners_mu_);
  std::erase_if(listeners_, [id](const auto &l) { return l.first == id; });
}

int Cluster::AddTimer(uint64_t interval_ms, TimerCallback callback) {
  if (interval_ms == 0) throw ValidationError("timer interval must be positive");
  uint64_t now = now_ms();
  std::lock_guard lock(listeners_mu_);
  int id = next_handle_++;
  timers_[id] = {interval_ms, now + interval_ms, std::move(callback)};
  return id;
}

void Cluster::RemoveTimer(int id) {
  std::lock_guard lock(listeners_mu_);
  timers_.erase(id);
}

void Cluster::ResetTimer(int id) {
  uint64_t now = now_ms();
  std::lock_guard lock(listeners_mu_);
  auto it = timers_.find(id);
  if (it != timers_.end()) it->second.next_ms = now + it->second.interval_ms;
}

void Cluster::FireDue(uint64_t up_to_ms) {
  while (true) {
    int due = 0;
    uint64_t when = 0;
    TimerCallback cb;
    {
      std::lock_guard lock(listeners_mu_);
      for (const auto &[id, t] : timers_) {
        if (t.next_ms <= up_to_ms && (due == 0 || t.next_ms < when)) {
          due = id;
          when = t.next_ms;
        }
      }
      if (due == 0) return;
      auto &t = timers_[due];
      t.next_ms += t.interval_ms;
      cb = t.callback;
    }
    {
      std::lock_guard lock(mu_);
      clock_ms_ = std::max(clock_ms_, when);
    }
    cb(when);
  }
}

void Cluster::Advance(uint64_t ms) {
  const uint64_t target = now_ms() + ms;
  FireDue(target);
  std::lock_guard lock(mu_);
  clock_ms_ = std::max(clock_ms_, target);
}

void Cluster::PollTimers() { FireDue(now_ms()); }

uint64_t Cluster::now_ms() const {
  std::lock_guard lock(mu_);
  return clock_ms_;
}

std::optional<Value> Cluster::StateValue(const std::string &app_id, const Bytes &key) const {
  std::lock_guard lock(mu_);
  auto it = states_.find(app_id);
  if (it == states_.end()) return std::nullopt;
  auto kt = it->second.find(key);
  if (kt == it->second.end()) return std::nullopt;
  return kt->second;
}

std::optional<Value> Cluster::DbValue(const std::string &table, const Bytes &key) const {
  std::lock_guard lock(mu_);
  auto it = database_.find({table, key});
  if (it == database_.end()) return std::nullopt;
  return it->second;
}

void Cluster::SetDbValue(const std::string &table, const Bytes &key, Value value) {
  std::lock_guard lock(mu_);
  database_[{table, key}] = std::move(value);
}

}  // namespace meshfuzz
