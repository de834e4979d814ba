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

#include <gtest/gtest.h>

#include <cmath>

#include "meshfuzz/cluster.h"
#include "meshfuzz/errors.h"
#include "test_util.h"

namespace meshfuzz {
namespace {

using namespace testutil;

json Rpc(const std::string &var, const std::string &app, const std::string &handler,
         std::vector<json> args = {}) {
  return {{"kind", "rpc"}, {"var", var}, {"app", app}, {"handler", handler}, {"args", args}};
}
json Sys(const std::string &var, const std::string &prim) {
  return {{"kind", "syscall"}, {"var", var}, {"primitive", prim}};
}
json StateRead(const std::string &var, const std::string &key, json fallback = 0) {
  return {{"kind", "state_read"}, {"var", var}, {"key", Str(key)}, {"default", fallback}};
}
json StateWrite(const std::string &key, json value) {
  return {{"kind", "state_write"}, {"key", Str(key)}, {"value", value}};
}

AppSpec Caller(const std::string &version = "1") {
  return MakeApp(AppDoc("A", version,
                        {HandlerDoc("h", {"x"}, {{"b0", Blk({Rpc("r", "B", "echo", {Var("x")})}, Ret(Var("r")))}})}));
}
AppSpec Echo(const std::string &version = "1") {
  return MakeApp(AppDoc("B", version, {HandlerDoc("echo", {"x"}, {{"b0", Blk({}, Ret(Var("x")))}})}));
}
AppSpec Counter() {
  return MakeApp(AppDoc(
      "K", "1",
      {HandlerDoc("inc", {}, {{"b0", Blk({StateRead("c", "n"), StateWrite("n", Op("add", {Var("c"), 1}))},
                                         Ret(Var("c")))}})},
      {{"n", 0}}));
}

TEST(Cluster, TwoAppChainEchoes) {
  Cluster c;
  c.Deploy(Caller());
  c.Deploy(Echo());
  InvokeResult r = c.Invoke({"A", "h", {"hi"}});
  ASSERT_TRUE(r.outcome.returned());
  EXPECT_EQ(r.outcome.value, Value::FromBytes("hi"));
  Trace t = c.collector().CollectAndSplice(r.trace_id);
  ASSERT_EQ(t.spans.size(), 2u);
  EXPECT_EQ(t.spans[0].app, "A");
  EXPECT_EQ(t.spans[1].app, "B");
  EXPECT_EQ(t.spans[1].parent_span_id, t.spans[0].span_id);
}

TEST(Cluster, CertainFaultCrashesCallerWithIo) {
  Cluster c(0, FaultPolicy{1, 1, 0, std::nullopt});
  c.Deploy(Caller());
  c.Deploy(Echo());
  InvokeResult r = c.Invoke({"A", "h", {"hi"}});
  ASSERT_TRUE(r.outcome.crashed());
  EXPECT_EQ(r.outcome.crash.kind, CrashKind::kSysIo);
  EXPECT_EQ(r.outcome.crash.location, (ProbeId{"A", "h", "b0"}));
}

TEST(Cluster, NowIsNonDecreasing) {
  Cluster c;
  c.Deploy(MakeApp(AppDoc("T", "1", {HandlerDoc("h", {}, {{"b0", Blk({Sys("a", "now"), Sys("b", "now")},
                                                                   Ret(Op("ge", {Var("b"), Var("a")})))}})})));
  for (int i = 0; i < 50; ++i) {
    InvokeResult r = c.Invoke({"T", "h", {}});
    EXPECT_EQ(r.outcome.value, Value::FromBool(true));
  }
}

TEST(Cluster, ClockAdvancesPerThousandStepsAndPerHop) {
  Cluster c(0, FaultPolicy{0, 1, 5, std::nullopt});
  c.Deploy(Caller());
  c.Deploy(Echo());
  const uint64_t before = c.now_ms();
  c.Invoke({"A", "h", {"x"}});
  EXPECT_EQ(c.now_ms() - before, 5u);  // one hop, a handful of steps
}

TEST(Cluster, SnapshotRestoresCounter) {
  Cluster c;
  c.Deploy(Counter());
  auto snap = c.Snapshot();
  c.Invoke({"K", "inc", {}});
  c.Invoke({"K", "inc", {}});
  EXPECT_EQ(c.StateValue("K", "n"), Value::FromInt(2));
  c.Restore(snap);
  EXPECT_EQ(c.StateValue("K", "n"), Value::FromInt(0));
}

TEST(Cluster, RestoreThenReplayGivesIdenticalProbes) {
  Cluster c(9);
  c.Deploy(LoadAppSpecFile(Fixture("apps/gateway_v1.json")));
  c.Deploy(LoadAppSpecFile(Fixture("apps/inventory_v1.json")));
  auto snap = c.Snapshot();
  auto run = [&] {
    InvokeResult r = c.Invoke({"gateway", "order", {"alice", "apple"}});
    return std::make_pair(r.outcome, c.collector().CollectAndSplice(r.trace_id).probes);
  };
  auto first = run();
  c.Restore(snap);
  auto second = run();
  EXPECT_EQ(first, second);
}

TEST(Cluster, RestoreOntoOtherDeploymentsFails) {
  Cluster c;
  c.Deploy(Echo("1"));
  auto snap = c.Snapshot();
  c.Deploy(Echo("2"));
  EXPECT_THROW(c.Restore(snap), VersionMismatch);
}

TEST(Cluster, DeployPublishesAndRejectsDuplicates) {
  Cluster c;
  std::vector<VersionEvent> events;
  c.Subscribe([&](const VersionEvent &e) { events.push_back(e); });
  c.Deploy(Echo("1"));
  EXPECT_EQ(c.ActiveApps().size(), 1u);
  c.Deploy(Echo("2"));
  EXPECT_EQ(c.Active("B")->version_id, "2");
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[1].old_version, "1");
  EXPECT_THROW(c.Deploy(Echo("2")), DuplicateVersion);
  EXPECT_EQ(events.size(), 2u);
}

TEST(Cluster, UnknownTargets) {
  Cluster c;
  c.Deploy(Echo());
  EXPECT_THROW(c.Invoke({"nope", "echo", {}}), UnknownApp);
  EXPECT_THROW(c.Invoke({"B", "nope", {}}), UnknownHandler);
  EXPECT_THROW(c.Invoke({"B", "echo", {}}), ValidationError);
}

TEST(Cluster, UnroutableRpcIsCallerIo) {
  Cluster c;
  c.Deploy(Caller());
  InvokeResult r = c.Invoke({"A", "h", {"x"}});
  ASSERT_TRUE(r.outcome.crashed());
  EXPECT_EQ(r.outcome.crash.kind, CrashKind::kSysIo);
}

TEST(Cluster, MaxHopsBoundsRecursion) {
  Cluster c;
  c.Deploy(MakeApp(AppDoc("R", "1", {HandlerDoc("loop", {}, {{"b0", Blk({Rpc("r", "R", "loop")}, Ret(0))}})})));
  InvokeResult r = c.Invoke({"R", "loop", {}});
  ASSERT_TRUE(r.outcome.crashed());
  EXPECT_EQ(r.outcome.crash.kind, CrashKind::kSysUnclearedThrowable);
  EXPECT_LE(c.rpc_hops(), kDefaultMaxHops + 1);
}

TEST(Cluster, FaultRateWithinThreeSigma) {
  const uint64_t num = 3, den = 10;
  Cluster c(1234, FaultPolicy{num, den, 0, std::nullopt});
  c.Deploy(Caller());
  c.Deploy(Echo());
  const int n = 10000;
  for (int i = 0; i < n; ++i) c.Invoke({"A", "h", {"x"}});
  ASSERT_EQ(c.rpc_hops(), static_cast<uint64_t>(n));
  const double p = static_cast<double>(num) / den;
  const double sigma = std::sqrt(n * p * (1 - p));
  EXPECT_NEAR(static_cast<double>(c.rpc_faults()), n * p, 3 * sigma);
}

TEST(Cluster, FaultsRespectAffectedApps) {
  Cluster c(0, FaultPolicy{1, 1, 0, std::set<std::string>{"Z"}});
  c.Deploy(Caller());
  c.Deploy(Echo());
  EXPECT_TRUE(c.Invoke({"A", "h", {"x"}}).outcome.returned());
}

TEST(Cluster, SameSeedSameRun) {
  auto run = [] {
    Cluster c(77, FaultPolicy{1, 2, 1, std::nullopt});
    c.Deploy(LoadAppSpecFile(Fixture("apps/gateway_v1.json")));
    c.Deploy(LoadAppSpecFile(Fixture("apps/inventory_v1.json")));
    std::vector<std::string> out;
    for (int i = 0; i < 20; ++i) {
      out.push_back(c.Invoke({"gateway", "order", {"u" + std::to_string(i % 3), "pear"}}).outcome.Summary());
    }
    out.push_back(std::to_string(c.now_ms()));
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(Cluster, TimersFireInTimeOrder) {
  Cluster c;
  std::vector<std::pair<char, uint64_t>> log;
  c.AddTimer(10, [&](uint64_t t) { log.push_back({'a', t}); });
  int b = c.AddTimer(15, [&](uint64_t t) { log.push_back({'b', t}); });
  c.Advance(30);
  EXPECT_EQ(log, (std::vector<std::pair<char, uint64_t>>{{'a', 10}, {'b', 15}, {'a', 20}, {'a', 30}, {'b', 30}}));
  log.clear();
  c.ResetTimer(b);  // next b at 45
  c.Advance(14);
  EXPECT_EQ(log, (std::vector<std::pair<char, uint64_t>>{{'a', 40}}));
  c.RemoveTimer(b);
  c.Advance(20);
  EXPECT_EQ(log.back().first, 'a');
}

}  // namespace
}  // namespace meshfuzz
