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

#include "meshfuzz/mocking.h"

#include <algorithm>
#include <set>
#include <utility>

#include "meshfuzz/errors.h"

namespace meshfuzz {

using nlohmann::json;

std::vector<MockPoint> EnumerateMockPoints(std::span<const AppSpec> apps,
                                           const std::string &target_app) {
  auto find_app = [&](const std::string &id) -> const AppSpec * {
    for (const auto &a : apps) {
      if (a.app_id == id) return &a;
    }
    return nullptr;
  };
  // Handler-level closure through RpcCall.
  std::set<std::pair<std::string, std::string>> reached;
  std::vector<std::pair<std::string, std::string>> work;
  if (const AppSpec *target = find_app(target_app)) {
    for (const auto &h : target->handlers) work.emplace_back(target_app, h.name);
  }
  while (!work.empty()) {
    auto key = std::move(work.back());
    work.pop_back();
    if (!reached.insert(key).second) continue;
    const AppSpec *app = find_app(key.first);
    const Handler *h = app ? app->FindHandler(key.second) : nullptr;
    if (!h) continue;
    for (const auto &[id, block] : h->blocks) {
      for (const auto &stmt : block.stmts) {
        if (const auto *rpc = std::get_if<RpcCallStmt>(&stmt)) {
          work.emplace_back(rpc->app, rpc->handler);
        }
      }
    }
  }

  std::vector<MockPoint> out;
  for (const auto &[app_id, handler] : reached) {
    const AppSpec *app = find_app(app_id);
    const Handler *h = app ? app->FindHandler(handler) : nullptr;
    if (!h) continue;
    for (const auto &[id, block] : h->blocks) {
      for (size_t i = 0; i < block.stmts.size(); ++i) {
        if (auto kind = MockPointKind(block.stmts[i])) {
          out.push_back({{app_id, handler, id, i}, *kind});
        }
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const MockPoint &a, const MockPoint &b) { return a.id < b.id; });
  return out;
}

size_t MockSet::fired_records() const {
  size_t n = 0;
  for (const auto &[point, recs] : records) {
    for (const auto &r : recs) n += !r.is_null();
  }
  return n;
}

json MockSetToJson(const MockSet &mocks) {
  json points = json::object();
  for (const auto &[point, recs] : mocks.records) {
    json list = json::array();
    for (const auto &r : recs) {
      if (r.is_null()) {
        list.push_back(nullptr);
      } else {
        list.push_back({{"input", TupleToJson(*r.input)},
                        {"output", EffectOutputToJson(*r.output)}});
      }
    }
    points[point.ToString()] = std::move(list);
  }
  return {{"seed_id", mocks.seed_id}, {"points", std::move(points)}};
}

MockSet MockSetFromJson(const json &j) {
  try {
    MockSet mocks;
    mocks.seed_id = j.at("seed_id").get<std::string>();
    for (const auto &[key, list] : j.at("points").items()) {
      auto point = PointId::Parse(key);
      if (!point) throw ParseError("bad mock point id \"" + key + "\"");
      auto &recs = mocks.records[*point];
      for (const auto &r : list) {
        if (r.is_null()) {
          recs.push_back(MockRecord::Null());
        } else {
          recs.push_back({TupleFromJson(r.at("input")),
                          EffectOutputFromJson(r.at("output"))});
        }
      }
    }
    return mocks;
  } catch (const json::exception &e) {
    throw ParseError(std::string("mock set: ") + e.what());
  }
}

bool InputsEqual(const ValueTuple &a, const ValueTuple &b,
                 std::span<const size_t> volatile_fields) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (std::find(volatile_fields.begin(), volatile_fields.end(), i) !=
        volatile_fields.end())
      continue;
    if (a[i] != b[i]) return false;
  }
  return true;
}

namespace {

MockSet WithNulls(std::string seed_id, std::map<PointId, std::vector<MockRecord>> records,
                  std::span<const MockPoint> points) {
  MockSet out{std::move(seed_id), std::move(records)};
  for (const auto &p : points) {
    auto &recs = out.records[p.id];
    if (recs.empty()) recs.push_back(MockRecord::Null());
  }
  return out;
}

}  // namespace

EffectOutput RecordingInterceptor::Intercept(const EffectRequest &request,
                                             const std::function<EffectOutput()> &real) {
  EffectOutput out = real();
  records_[request.point].push_back({request.input, out});
  return out;
}

MockSet RecordingInterceptor::Finish(std::string seed_id,
                                     std::span<const MockPoint> points) && {
  return WithNulls(std::move(seed_id), std::move(records_), points);
}

std::string_view DivergenceReasonName(Divergence::Reason reason) {
  switch (reason) {
    case Divergence::Reason::kInputMismatch:
      return "input_mismatch";
    case Divergence::Reason::kNullRecord:
      return "null_record";
    case Divergence::Reason::kExhausted:
      return "exhausted";
  }
  return "input_mismatch";
}

json ConsistencyToJson(const ConsistencyReport &report) {
  json divs = json::array();
  for (const auto &d : report.divergences) {
    divs.push_back({{"point", d.point.ToString()},
                    {"occurrence", d.occurrence},
                    {"reason", DivergenceReasonName(d.reason)},
                    {"input", TupleToJson(d.input)}});
  }
  return {{"substituted", report.substituted},
          {"executed", report.executed},
          {"divergences", std::move(divs)}};
}

EffectOutput ReplayInterceptor::Intercept(const EffectRequest &request,
                                          const std::function<EffectOutput()> &real) {
  size_t &cursor = cursor_[request.point];
  const size_t occurrence = cursor;
  std::optional<Divergence::Reason> miss;
  const MockRecord *rec = nullptr;
  auto it = recorded_.records.find(request.point);
  if (it == recorded_.records.end() || cursor >= it->second.size()) {
    miss = Divergence::Reason::kExhausted;
  } else {
    // Matched or not, the record is consumed so later firings stay aligned
    // with their own recordings.
    rec = &it->second[cursor++];
    if (rec->is_null()) {
      miss = Divergence::Reason::kNullRecord;
    } else if (!InputsEqual(request.input, *rec->input,
                            VolatileFields(*request.statement))) {
      miss = Divergence::Reason::kInputMismatch;
    }
  }
  EffectOutput out;
  if (miss) {
    report_.divergences.push_back({request.point, occurrence, *miss, request.input});
    ++report_.executed;
    out = real();
  } else {
    ++report_.substituted;
    out = *rec->output;
  }
  observed_[request.point].push_back({request.input, out});
  return out;
}

MockSet ReplayInterceptor::Observed(std::string seed_id,
                                    std::span<const MockPoint> points) const {
  return WithNulls(std::move(seed_id), observed_, points);
}

namespace {

Request ToRequest(const Seed &seed) { return {seed.app, seed.handler, seed.args}; }

std::vector<MockPoint> PointsFor(const Cluster &cluster, const Seed &seed) {
  auto apps = cluster.ActiveApps();
  return EnumerateMockPoints(apps, seed.app);
}

}  // namespace

ExecutedRun ExecuteRecord(Cluster &cluster, const Seed &seed,
                          const std::vector<MockPoint> *points) {
  std::vector<MockPoint> local;
  if (!points) {
    local = PointsFor(cluster, seed);
    points = &local;
  }
  RecordingInterceptor recorder;
  ExecutedRun run;
  run.invoke = cluster.Invoke(ToRequest(seed), &recorder);
  run.mocks = std::move(recorder).Finish(seed.seed_id, *points);
  return run;
}

ExecutedRun ExecuteReplay(Cluster &cluster, const Seed &seed, const MockSet &mocks,
                          const std::vector<MockPoint> *points) {
  std::vector<MockPoint> local;
  if (!points) {
    local = PointsFor(cluster, seed);
    points = &local;
  }
  ReplayInterceptor replayer(mocks);
  ExecutedRun run;
  run.invoke = cluster.Invoke(ToRequest(seed), &replayer);
  run.mocks = replayer.Observed(seed.seed_id, *points);
  run.consistency = replayer.report();
  return run;
}

SeedRun Finish(Cluster &cluster, ExecutedRun run) {
  SeedRun out;
  out.trace = cluster.collector().CollectAndSplice(run.invoke.trace_id);
  cluster.collector().Forget(run.invoke.trace_id);
  out.outcome = std::move(run.invoke.outcome);
  out.mocks = std::move(run.mocks);
  out.consistency = std::move(run.consistency);
  out.sinks = std::move(run.invoke.sinks);
  return out;
}

SeedRun RecordRun(Cluster &cluster, const Seed &seed) {
  return Finish(cluster, ExecuteRecord(cluster, seed));
}

SeedRun ReplayRun(Cluster &cluster, const Seed &seed, const MockSet &mocks) {
  return Finish(cluster, ExecuteReplay(cluster, seed, mocks));
}

}  // namespace meshfuzz
