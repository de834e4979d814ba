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

#include "meshfuzz/scenarios.h"

#include <algorithm>
#include <functional>
#include <queue>

#include "meshfuzz/errors.h"
#include "meshfuzz/mocking.h"
#include "meshfuzz/monitor.h"
#include "meshfuzz/mutation.h"
#include "meshfuzz/rng.h"

namespace meshfuzz {

using nlohmann::json;

void TraceIndex::Add(const Branch &branch, TraceRecord record) {
  records_[branch].push_back(std::move(record));
}

const std::vector<TraceRecord> &TraceIndex::Records(const Branch &branch) const {
  static const std::vector<TraceRecord> kEmpty;
  auto it = records_.find(branch);
  return it == records_.end() ? kEmpty : it->second;
}

std::vector<Branch> TraceIndex::Branches() const {
  std::vector<Branch> out;
  for (const auto &[b, _] : records_) out.push_back(b);
  return out;
}

size_t TraceIndex::size() const {
  size_t n = 0;
  for (const auto &[_, r] : records_) n += r.size();
  return n;
}

namespace {

std::map<std::string, SeedRun> ReplayAll(Cluster &cluster, const SeedStore &store,
                                         const std::string &app) {
  std::map<std::string, SeedRun> runs;
  const auto snapshot = cluster.Snapshot();
  for (const Seed &seed : store.Seeds(app)) {
    cluster.Restore(snapshot);
    const MockSet mocks = store.Mocks(seed.seed_id).value_or(MockSet{});
    runs.emplace(seed.seed_id, ReplayRun(cluster, seed, mocks));
  }
  cluster.Restore(snapshot);
  return runs;
}

void AddRuns(const std::map<std::string, SeedRun> &runs, const Branch &branch,
             TraceIndex &index) {
  for (const auto &[id, run] : runs) {
    index.Add(branch, {run.trace.trace_id.ToHex(), run.trace.cover_digest, run.trace.probes, id});
  }
}

std::vector<std::string> SortedUnique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

bool Intersects(const ProbeSet &a, const ProbeSet &b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) ++i;
    else if (*j < *i) ++j;
    else return true;
  }
  return false;
}

json ProbesToJson(const ProbeSet &set) {
  json out = json::array();
  for (const auto &p : set) out.push_back(p.ToString());
  return out;
}

}  // namespace

std::map<std::string, SeedRun> IndexStoredSeeds(Cluster &cluster, const SeedStore &store,
                                                const std::string &app, TraceIndex &index) {
  auto active = cluster.Active(app);
  if (!active) throw UnknownApp("\"" + app + "\" is not deployed");
  auto runs = ReplayAll(cluster, store, app);
  AddRuns(runs, {app, active->version_id}, index);
  return runs;
}

RegressionSuite SelectRegressionSuite(const TraceIndex &index, const ProbeSet &diff,
                                      const Branch &branch_a, const Branch &branch_b) {
  RegressionSuite suite;
  auto select = [&](const Branch &b, std::vector<TraceRecord> &traces,
                    std::vector<std::string> &seeds) {
    for (const auto &r : index.Records(b)) {
      if (!Intersects(r.probes, diff)) continue;
      traces.push_back(r);
      seeds.push_back(r.seed_id);
    }
    seeds = SortedUnique(std::move(seeds));
  };
  if (diff.empty()) return suite;
  select(branch_a, suite.traces_a, suite.seeds_a);
  select(branch_b, suite.traces_b, suite.seeds_b);
  return suite;
}

std::vector<uint64_t> ShortestDistances(const CallGraph &graph, const std::set<size_t> &targets,
                                        const std::vector<uint64_t> *edge_weights) {
  const size_t n = graph.nodes().size();
  const auto &edges = graph.edges();
  if (edge_weights && edge_weights->size() != edges.size()) {
    throw ValidationError("edge weight count does not match the graph");
  }
  // Incoming edges of v, as (u, weight).
  std::vector<std::vector<std::pair<size_t, uint64_t>>> in(n);
  for (size_t e = 0; e < edges.size(); ++e) {
    in[edges[e].second].emplace_back(edges[e].first, edge_weights ? (*edge_weights)[e] : 1);
  }
  std::vector<uint64_t> dist(n, kUnreachable);
  using Entry = std::pair<uint64_t, size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (size_t t : targets) {
    if (t >= n) throw ValidationError("target node out of range");
    dist[t] = 0;
    queue.push({0, t});
  }
  while (!queue.empty()) {
    auto [d, v] = queue.top();
    queue.pop();
    if (d != dist[v]) continue;
    for (auto [u, w] : in[v]) {
      const uint64_t nd = w > kUnreachable - d ? kUnreachable : d + w;
      if (nd < dist[u]) {
        dist[u] = nd;
        queue.push({nd, u});
      }
    }
  }
  return dist;
}

std::set<size_t> NodesOf(const CallGraph &graph, const ProbeSet &blocks) {
  std::set<size_t> out;
  for (const auto &b : blocks) {
    if (auto id = graph.Find(b)) out.insert(*id);
  }
  return out;
}

bool operator<(const PriorityKey &a, const PriorityKey &b) {
  if (a.covers_target != b.covers_target) return a.covers_target;
  if (a.distance != b.distance) return a.distance < b.distance;
  if (a.coverage != b.coverage) return a.coverage > b.coverage;
  return a.seed_id < b.seed_id;
}

PriorityKey DirectedPriority(const std::string &seed_id, const ProbeSet &probes,
                             const CallGraph &graph, const std::vector<uint64_t> &distances) {
  PriorityKey key;
  key.seed_id = seed_id;
  key.coverage = probes.size();
  for (size_t node : NodesOf(graph, probes)) key.distance = std::min(key.distance, distances[node]);
  key.covers_target = key.distance == 0;
  return key;
}

json IterationReport::ToJson() const {
  json deltas_json = json::array();
  for (const auto &d : deltas) {
    json j = {{"seed_id", d.seed_id},
              {"old_digest", DigestHex(d.old_digest)},
              {"new_digest", DigestHex(d.new_digest)},
              {"old_outcome", d.old_outcome},
              {"new_outcome", d.new_outcome}};
    if (d.crash) j["crash"] = CrashKindName(*d.crash);
    deltas_json.push_back(std::move(j));
  }
  auto suite_json = [](const Branch &b, const std::vector<TraceRecord> &traces,
                       const std::vector<std::string> &seeds) {
    json t = json::array();
    for (const auto &r : traces) t.push_back(r.trace_id);
    return json{{"app", b.first}, {"version", b.second}, {"traces", t}, {"seeds", seeds}};
  };
  return {{"diff", {{"changed", ProbesToJson(diff.changed)}, {"deleted", ProbesToJson(diff.deleted)}}},
          {"suites",
           {{"A", suite_json(branch_a, suite.traces_a, suite.seeds_a)},
            {"B", suite_json(branch_b, suite.traces_b, suite.seeds_b)}}},
          {"deltas", std::move(deltas_json)},
          {"RI", ri},
          {"RT", rt},
          {"effectiveness", effectiveness ? json(*effectiveness) : json(nullptr)},
          {"reached", ProbesToJson(reached)},
          {"first_reach_iteration",
           first_reach_iteration ? json(*first_reach_iteration) : json(nullptr)},
          {"campaign", campaign.report}};
}

IterationReport RunIterationTest(Cluster &cluster, SeedStore &store,
                                 std::span<const AppSpec> old_apps,
                                 std::span<const AppSpec> new_apps,
                                 const IterationConfig &config) {
  const std::string &target = config.target_app;
  IterationReport report;
  report.diff = DiffBlocks(old_apps, new_apps);
  const ProbeSet &changed = report.diff.changed;

  auto old_active = cluster.Active(target);
  if (!old_active) throw UnknownApp("\"" + target + "\" is not deployed");
  report.branch_a = {target, old_active->version_id};
  const auto old_runs = ReplayAll(cluster, store, target);

  for (const AppSpec &app : new_apps) {
    auto active = cluster.Active(app.app_id);
    if (!active || active->version_id != app.version_id) cluster.Deploy(app);
  }
  auto new_active = cluster.Active(target);
  if (!new_active) throw UnknownApp("\"" + target + "\" is not deployed after the update");
  report.branch_b = {target, new_active->version_id};
  // Only a dependency changed: keep the two branches apart in the index.
  if (report.branch_b == report.branch_a) report.branch_b.second += "+deps";
  const auto new_runs = ReplayAll(cluster, store, target);

  TraceIndex index;
  AddRuns(old_runs, report.branch_a, index);
  AddRuns(new_runs, report.branch_b, index);
  report.suite = SelectRegressionSuite(index, changed, report.branch_a, report.branch_b);

  std::vector<std::string> suite_seeds = report.suite.seeds_a;
  suite_seeds.insert(suite_seeds.end(), report.suite.seeds_b.begin(), report.suite.seeds_b.end());
  for (const auto &id : SortedUnique(std::move(suite_seeds))) {
    auto o = old_runs.find(id);
    auto n = new_runs.find(id);
    if (o == old_runs.end() || n == new_runs.end()) continue;
    const std::string os = o->second.outcome.Summary();
    const std::string ns = n->second.outcome.Summary();
    if (o->second.trace.cover_digest == n->second.trace.cover_digest && os == ns) continue;
    BehaviorDelta d{id, o->second.trace.cover_digest, n->second.trace.cover_digest, os, ns, {}};
    if (n->second.outcome.crashed()) d.crash = n->second.outcome.crash.kind;
    report.deltas.push_back(std::move(d));
  }

  std::set<uint64_t> initial;
  std::map<std::string, ProbeSet> probes;
  for (const auto &[id, run] : new_runs) {
    initial.insert(run.trace.cover_digest);
    probes[id] = run.trace.probes;
    for (const auto &p : run.trace.probes) {
      if (changed.count(p)) report.reached.insert(p);
    }
  }
  report.ri = initial.size();

  const auto apps = cluster.ActiveApps();
  const CallGraph graph = BuildCallGraph(apps);
  const auto distances = ShortestDistances(graph, NodesOf(graph, changed));

  Monitor monitor(target, new_active->BlockCount());
  CampaignConfig cc;
  cc.target_app = target;
  cc.rng_seed = config.rng_seed;
  cc.budget = config.budget;
  cc.mode = config.mode;
  cc.epoch_size = config.epoch_size;
  cc.strategy = SelectStrategy::kRanked;
  cc.switch_enabled = false;
  cc.triggers = false;
  cc.ranker = [&](std::vector<Seed> seeds) {
    std::vector<std::pair<PriorityKey, size_t>> keyed;
    for (size_t i = 0; i < seeds.size(); ++i) {
      auto it = probes.find(seeds[i].seed_id);
      keyed.emplace_back(DirectedPriority(seeds[i].seed_id,
                                          it == probes.end() ? ProbeSet{} : it->second, graph,
                                          distances),
                         i);
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<Seed> out;
    for (const auto &[_, i] : keyed) out.push_back(std::move(seeds[i]));
    return out;
  };
  cc.on_analyzed = [&](const AnalyzedItem &item) {
    if (item.decision.stored) probes[item.decision.seed_id] = item.run->trace.probes;
    for (const auto &p : item.run->trace.probes) {
      if (changed.count(p) && report.reached.insert(p).second && !report.first_reach_iteration) {
        report.first_reach_iteration = item.item_id + 1;
      }
    }
  };
  report.campaign = RunCampaign(cluster, store, monitor, cc);

  std::set<uint64_t> all = initial;
  for (const auto &[d, _] : monitor.coverage.frequencies()) all.insert(d);
  report.rt = all.size();
  if (report.ri > 0) {
    report.effectiveness =
        (static_cast<double>(report.rt) - static_cast<double>(report.ri)) / report.ri;
  }
  return report;
}

std::vector<TaintCandidate> TaintCandidatesFromJson(const json &j) {
  if (!j.is_array()) throw ParseError("taint candidates must be a JSON list");
  std::vector<TaintCandidate> out;
  for (const auto &c : j) {
    try {
      out.push_back({c.at("app").get<std::string>(), c.at("handler").get<std::string>(),
                     c.at("param_index").get<size_t>(), c.at("sink_id").get<std::string>(),
                     c.value("note", std::string())});
    } catch (const json::exception &e) {
      throw ParseError(std::string("taint candidate: ") + e.what());
    }
  }
  return out;
}

std::string_view TaintVerdictName(TaintVerdict::Kind kind) {
  return kind == TaintVerdict::Kind::kConfirmed ? "confirmed" : "uncertain";
}

json TaintVerdict::ToJson() const {
  auto mutant = [](const TaintMutant &m) {
    json args = json::array();
    for (const auto &a : m.args) args.push_back(HexEncode(a));
    json values = json::array();
    for (const auto &v : m.sink_values) values.push_back(ValueToJson(v));
    return json{{"mutant", m.index}, {"args", args}, {"sink_values", values}};
  };
  json out = {{"verdict", TaintVerdictName(kind)},
              {"seed_id", seed_id},
              {"mutants", mutants},
              {"observed", observed}};
  out["witness"] = witness ? json::array({mutant(witness->first), mutant(witness->second)})
                           : json(nullptr);
  if (annotation) out["annotation"] = *annotation;
  return out;
}

std::vector<Value> SinkValues(const SeedRun &run, const std::string &sink_id) {
  std::vector<Value> out;
  for (const auto &s : run.sinks) {
    if (s.sink == sink_id) out.push_back(s.value);
  }
  return out;
}

TaintVerdict VerifyTaint(Cluster &cluster, const SeedStore &store,
                         const TaintCandidate &candidate, size_t k, uint64_t rng_seed) {
  auto spec = cluster.Active(candidate.app);
  if (!spec) throw UnknownApp("\"" + candidate.app + "\" is not deployed");
  const Handler *handler = spec->FindHandler(candidate.handler);
  if (!handler) throw UnknownHandler(candidate.app + ":" + candidate.handler);
  if (candidate.param_index >= handler->params.size()) {
    throw ValidationError("param_index " + std::to_string(candidate.param_index) +
                          " out of range for " + candidate.app + ":" + candidate.handler);
  }
  const ProbeId entry{candidate.app, candidate.handler, handler->entry};

  // Seeds() is ordered by id, so the first match is the lowest.
  std::optional<Seed> origin;
  for (const Seed &s : store.Seeds(candidate.app)) {
    if (s.handler == candidate.handler && s.args.size() == handler->params.size()) {
      origin = s;
      break;
    }
  }
  if (!origin) {
    throw NoReachingSeed("no stored seed reaches " + entry.ToString());
  }
  const MockSet mocks = store.Mocks(origin->seed_id).value_or(MockSet{});

  TaintVerdict verdict;
  verdict.seed_id = origin->seed_id;
  std::optional<TaintMutant> first;
  const auto snapshot = cluster.Snapshot();
  for (size_t i = 0; i < k; ++i) {
    Rng rng = DeriveRng(rng_seed, i);
    Seed mutant = *origin;
    mutant.args[candidate.param_index] = MutateRandom(origin->args[candidate.param_index], rng);
    cluster.Restore(snapshot);
    const SeedRun run = ReplayRun(cluster, mutant, mocks);
    ++verdict.mutants;
    TaintMutant m{i, mutant.args, SinkValues(run, candidate.sink_id)};
    if (m.sink_values.empty()) continue;
    ++verdict.observed;
    if (!first) {
      first = std::move(m);
    } else if (m.sink_values != first->sink_values) {
      verdict.kind = TaintVerdict::Kind::kConfirmed;
      verdict.witness.emplace(*first, std::move(m));
      break;
    }
  }
  cluster.Restore(snapshot);
  if (verdict.observed == 0) verdict.annotation = "SinkNeverObserved";
  return verdict;
}

}  // namespace meshfuzz
