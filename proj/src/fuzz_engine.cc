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

#include "meshfuzz/fuzz_engine.h"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include "meshfuzz/errors.h"
#include "meshfuzz/mutation.h"
#include "meshfuzz/pipeline.h"

namespace meshfuzz {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string_view CampaignModeName(CampaignMode mode) {
  return mode == CampaignMode::kPipeline ? "pipeline" : "sequential";
}

std::string_view SelectStrategyName(SelectStrategy strategy) {
  switch (strategy) {
    case SelectStrategy::kWeighted:
      return "weighted";
    case SelectStrategy::kRoundRobin:
      return "round_robin";
    case SelectStrategy::kRanked:
      return "ranked";
  }
  return "weighted";
}

std::string_view StageName(Stage stage) {
  static constexpr std::string_view kNames[] = {"select", "mutate", "execute", "collect",
                                                "analyze"};
  return kNames[stage];
}

const Seed &SelectSeed(const std::vector<Seed> &seeds,
                       const std::map<uint64_t, uint64_t> &frequencies,
                       SelectStrategy strategy, Rng &rng, uint64_t counter) {
  if (seeds.empty()) throw EmptyStore("no seeds to select from");
  if (strategy == SelectStrategy::kRoundRobin) return seeds[counter % seeds.size()];

  std::vector<double> weights(seeds.size());
  for (size_t i = 0; i < seeds.size(); ++i) {
    if (strategy == SelectStrategy::kRanked) {
      weights[i] = 1.0 / static_cast<double>(i + 1);
    } else {
      // Newest first, so ties on the wheel favour recent seeds.
      const Seed &s = seeds[seeds.size() - 1 - i];
      auto it = frequencies.find(s.cover_digest);
      const uint64_t f = it == frequencies.end() ? 1 : std::max<uint64_t>(1, it->second);
      weights[i] = 1.0 / static_cast<double>(f);
    }
  }
  double total = 0;
  for (double w : weights) total += w;
  const double u = UniformUnit(rng) * total;
  double acc = 0;
  size_t pick = weights.size() - 1;
  for (size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) {
      pick = i;
      break;
    }
  }
  return strategy == SelectStrategy::kRanked ? seeds[pick] : seeds[seeds.size() - 1 - pick];
}

bool CampaignResult::has_sys_vul() const {
  return std::any_of(crashes.begin(), crashes.end(),
                     [](const CrashFinding &c) { return IsSysVul(c.kind); });
}

std::vector<AdmitDecision> AdmitCorpus(Cluster &cluster, SeedStore &store,
                                       const std::vector<Seed> &corpus, Monitor *monitor) {
  std::vector<AdmitDecision> out;
  if (corpus.empty()) return out;
  const auto snapshot = cluster.Snapshot();
  const auto apps = cluster.ActiveApps();
  std::map<std::string, std::vector<MockPoint>> points;
  for (Seed seed : corpus) {
    auto active = cluster.Active(seed.app);
    if (!active) throw UnknownApp("\"" + seed.app + "\" is not deployed");
    auto [it, fresh] = points.try_emplace(seed.app);
    if (fresh) it->second = EnumerateMockPoints(apps, seed.app);
    cluster.Restore(snapshot);
    SeedRun run = Finish(cluster, ExecuteRecord(cluster, seed, &it->second));
    seed.origin = SeedOrigin::kTraffic;
    seed.created_at = cluster.now_ms();
    seed.app_version_id = active->version_id;
    seed.cover_digest = run.trace.cover_digest;
    seed.seed_id.clear();
    if (monitor && seed.app == monitor->coverage.target_app()) {
      monitor->coverage.Ingest(run.trace.cover_digest, run.trace.probes);
    }
    out.push_back(store.Admit(seed, std::move(run.mocks), run.outcome));
  }
  cluster.Restore(snapshot);
  if (monitor) {
    monitor->coverage.SetStoredDistinct(store.DistinctDigests(monitor->coverage.target_app()));
  }
  return out;
}

namespace {

struct WorkItem {
  uint64_t id = 0;
  Rng rng;
  const Seed *parent = nullptr;
  std::shared_ptr<const MockSet> parent_mocks;
  Seed child;
  std::optional<ExecutedRun> executed;
  std::optional<SeedRun> run;
  uint64_t virtual_ms = 0;
  std::string error;
  std::array<uint8_t, kStageCount> visits{};
  std::array<double, kStageCount> stage_ms{};
};

struct Epoch {
  std::vector<Seed> seeds;                   // selection order for the strategy
  std::vector<Seed> pool;                    // oldest first, splice partners
  std::map<uint64_t, uint64_t> frequencies;  // frozen at the boundary
  std::string version;
  ClusterSnapshot baseline;
  std::mutex cache_mu;
  std::map<std::string, std::shared_ptr<const MockSet>> mocks;
};

struct Histogram {
  static constexpr double kEdges[] = {0.5, 1, 2, 5, 10, 20, 50, 100, 200, 500, 1000};
  std::vector<double> samples;

  json ToJson() const {
    json out;
    std::vector<double> s = samples;
    std::sort(s.begin(), s.end());
    auto pct = [&](double p) {
      if (s.empty()) return 0.0;
      return s[std::min(s.size() - 1, static_cast<size_t>(p * (s.size() - 1) + 0.5))];
    };
    double sum = 0;
    for (double v : s) sum += v;
    std::vector<uint64_t> counts(std::size(kEdges) + 1, 0);
    for (double v : s) {
      size_t b = 0;
      while (b < std::size(kEdges) && v > kEdges[b]) ++b;
      ++counts[b];
    }
    out["count"] = s.size();
    out["mean_ms"] = s.empty() ? 0.0 : sum / s.size();
    out["p50_ms"] = pct(0.5);
    out["p90_ms"] = pct(0.9);
    out["max_ms"] = s.empty() ? 0.0 : s.back();
    out["bucket_upper_ms"] = std::vector<double>(std::begin(kEdges), std::end(kEdges));
    out["bucket_counts"] = counts;
    return out;
  }
};

std::optional<bool> ReadControlFile(const std::filesystem::path &path) {
  if (path.empty()) return std::nullopt;
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::string word;
  in >> word;
  if (word == "on") return true;
  if (word == "off") return false;
  return std::nullopt;
}

class Campaign {
 public:
  Campaign(Cluster &cluster, SeedStore &store, Monitor &monitor, const CampaignConfig &config)
      : cluster_(cluster), store_(store), monitor_(monitor), config_(config) {}

  CampaignResult Run();

 private:
  void Boundary();
  bool ApplyDueEvents();
  void StartEpoch();
  void RunEpoch(uint64_t count);
  void Staged(Stage stage, WorkItem &item, const std::function<void(WorkItem &)> &fn);
  void DoSelect(WorkItem &item);
  void DoMutate(WorkItem &item);
  void DoExecute(WorkItem &item);
  void DoCollect(WorkItem &item);
  void DoAnalyze(WorkItem &item);
  json BuildReport();
  uint64_t n() const { return monitor_.coverage.stats().n; }

  Cluster &cluster_;
  SeedStore &store_;
  Monitor &monitor_;
  const CampaignConfig &config_;

  std::unique_ptr<Epoch> epoch_;
  std::vector<MockPoint> points_;
  std::map<std::string, std::string> points_versions_;
  uint64_t issued_ = 0;
  uint64_t pending_virtual_ms_ = 0;
  size_t next_event_ = 0;
  std::vector<ScriptedEvent> events_;
  std::optional<bool> last_control_;

  CampaignResult result_;
  json admissions_ = json::array();
  json coverage_ = json::array();
  json refreshes_ = json::array();
  json applied_events_ = json::array();
  json stats_snapshots_ = json::array();
  std::set<std::pair<CrashKind, std::string>> crash_keys_;
  uint64_t divergences_ = 0;
  uint64_t substituted_ = 0;
  std::array<Histogram, kStageCount> histograms_;
  Clock::time_point started_;
};

void Campaign::Staged(Stage stage, WorkItem &item, const std::function<void(WorkItem &)> &fn) {
  ++item.visits[stage];
  if (!item.error.empty() && stage != kAnalyze) return;
  const auto t0 = Clock::now();
  const double delay = config_.latency.ms[stage];
  if (delay > 0) std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(delay));
  try {
    fn(item);
  } catch (const std::exception &e) {
    if (item.error.empty()) item.error = std::string(StageName(stage)) + ": " + e.what();
  }
  item.stage_ms[stage] = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void Campaign::DoSelect(WorkItem &item) {
  const Seed &parent =
      SelectSeed(epoch_->seeds, epoch_->frequencies, config_.strategy, item.rng, item.id);
  item.parent = &parent;
  std::lock_guard lock(epoch_->cache_mu);
  auto &slot = epoch_->mocks[parent.seed_id];
  if (!slot) {
    auto mocks = store_.Mocks(parent.seed_id);
    slot = std::make_shared<const MockSet>(mocks ? std::move(*mocks) : MockSet{});
  }
  item.parent_mocks = slot;
}

void Campaign::DoMutate(WorkItem &item) {
  Seed child;
  child.app = item.parent->app;
  child.handler = item.parent->handler;
  child.args = item.parent->args;
  child.origin = SeedOrigin::kMutation;
  child.parent_id = item.parent->seed_id;
  child.app_version_id = epoch_->version;
  if (!child.args.empty()) {
    const size_t arg = UniformBelow(item.rng, child.args.size());
    const Seed &partner = epoch_->pool[UniformBelow(item.rng, epoch_->pool.size())];
    const Bytes *other =
        arg < partner.args.size() && &partner != item.parent ? &partner.args[arg] : nullptr;
    child.args[arg] = MutateRandom(child.args[arg], item.rng, other);
  }
  item.child = std::move(child);
}

void Campaign::DoExecute(WorkItem &item) {
  cluster_.Restore(epoch_->baseline);
  item.executed = ExecuteReplay(cluster_, item.child, *item.parent_mocks, &points_);
  const uint64_t now = cluster_.now_ms();
  item.child.created_at = now;
  item.virtual_ms = now - epoch_->baseline.clock_ms;
}

void Campaign::DoCollect(WorkItem &item) {
  item.run = Finish(cluster_, std::move(*item.executed));
  item.executed.reset();
}

void Campaign::DoAnalyze(WorkItem &item) {
  ++result_.iterations;
  pending_virtual_ms_ += item.virtual_ms;
  if (!item.error.empty()) {
    ++result_.failures;
    return;
  }
  SeedRun &run = *item.run;
  monitor_.coverage.Ingest(run.trace.cover_digest, run.trace.probes);
  divergences_ += run.consistency.divergences.size();
  substituted_ += run.consistency.substituted;
  item.child.cover_digest = run.trace.cover_digest;

  AdmitDecision decision = store_.Admit(item.child, run.mocks, run.outcome);
  if (decision.stored) {
    item.child.seed_id = decision.seed_id;
    result_.admissions.emplace_back(decision.seed_id, run.trace.cover_digest);
    admissions_.push_back({{"item", item.id},
                           {"seed_id", decision.seed_id},
                           {"parent", item.parent->seed_id},
                           {"digest", DigestHex(run.trace.cover_digest)},
                           {"reason", AdmitReasonName(decision.reason)}});
    monitor_.coverage.SetStoredDistinct(store_.DistinctDigests(config_.target_app));
  }
  if (run.outcome.crashed() &&
      crash_keys_.insert({run.outcome.crash.kind, run.outcome.crash.location.ToString()})
          .second) {
    result_.crashes.push_back({run.outcome.crash.kind, run.outcome.crash.location.ToString(),
                               run.outcome.crash.message,
                               decision.stored ? decision.seed_id : "", item.id});
  }
  if (config_.switch_enabled) monitor_.power.Decide(monitor_.coverage.stats());
  if (config_.stats_every && n() % config_.stats_every == 0) {
    stats_snapshots_.push_back(StatsToJson(monitor_.coverage.stats()));
  }
  if (config_.on_analyzed) {
    config_.on_analyzed({item.id, item.parent, &item.child, &run, decision});
  }
}

bool Campaign::ApplyDueEvents() {
  bool applied = false;
  while (next_event_ < events_.size() && events_[next_event_].time_ms <= cluster_.now_ms()) {
    const ScriptedEvent &e = events_[next_event_++];
    cluster_.Deploy(e.spec);
    applied_events_.push_back({{"time_ms", cluster_.now_ms()},
                               {"app", e.spec.app_id},
                               {"version", e.spec.version_id},
                               {"at_iteration", issued_}});
    applied = true;
  }
  return applied;
}

void Campaign::Boundary() {
  if (pending_virtual_ms_ > 0) {
    cluster_.Restore(epoch_->baseline);
    cluster_.Advance(pending_virtual_ms_);
    pending_virtual_ms_ = 0;
  } else {
    cluster_.PollTimers();
  }
  ApplyDueEvents();
  if (auto ctl = ReadControlFile(config_.control_file); ctl && ctl != last_control_) {
    last_control_ = ctl;
    monitor_.power.User(*ctl, n());
  }
  if (config_.stop_requested && config_.stop_requested()) monitor_.power.User(false, n());
  // A stopped campaign sleeps until the next scripted redeployment, which
  // may switch it back on.
  auto saturated = [this] {
    auto h = monitor_.power.history();
    return !h.empty() && !h.back().on && h.back().reason == SwitchReason::kSaturation;
  };
  while (saturated() && next_event_ < events_.size()) {
    const uint64_t now = cluster_.now_ms();
    const uint64_t at = events_[next_event_].time_ms;
    cluster_.Advance(at > now ? at - now : 0);
    ApplyDueEvents();
  }
  monitor_.coverage.SetStoredDistinct(store_.DistinctDigests(config_.target_app));
}

void Campaign::StartEpoch() {
  auto epoch = std::make_unique<Epoch>();
  epoch->baseline = cluster_.Snapshot();
  if (epoch->baseline.versions != points_versions_) {
    const auto apps = cluster_.ActiveApps();
    points_ = EnumerateMockPoints(apps, config_.target_app);
    points_versions_ = epoch->baseline.versions;
  }
  epoch->version = cluster_.Active(config_.target_app)->version_id;
  epoch->pool = store_.Seeds(config_.target_app);
  if (epoch->pool.empty()) throw EmptyStore("no seeds for app \"" + config_.target_app + "\"");
  epoch->seeds = config_.strategy == SelectStrategy::kRanked && config_.ranker
                     ? config_.ranker(epoch->pool)
                     : epoch->pool;
  epoch->frequencies = monitor_.coverage.frequencies();
  epoch_ = std::move(epoch);
}

void Campaign::RunEpoch(uint64_t count) {
  std::vector<WorkItem> items(count);
  for (uint64_t i = 0; i < count; ++i) {
    items[i].id = issued_ + i;
    items[i].rng = DeriveRng(config_.rng_seed, issued_ + i);
  }
  auto stage = [this](Stage s, void (Campaign::*fn)(WorkItem &)) {
    return [this, s, fn](WorkItem &item) {
      Staged(s, item, [this, fn](WorkItem &it) { (this->*fn)(it); });
    };
  };
  std::vector<StageSpec<WorkItem>> stages = {
      {"select", stage(kSelect, &Campaign::DoSelect)},
      {"mutate", stage(kMutate, &Campaign::DoMutate)},
      {"execute", stage(kExecute, &Campaign::DoExecute)},
      {"collect", stage(kCollect, &Campaign::DoCollect), config_.collect_workers},
      {"analyze", stage(kAnalyze, &Campaign::DoAnalyze), 1, /*ordered=*/true},
  };
  if (config_.mode == CampaignMode::kPipeline) {
    RunPipelined(items, stages, config_.queue_depth);
  } else {
    RunSequential(items, stages);
  }
  issued_ += count;
  for (auto &item : items) {
    result_.ledger.push_back(item.visits);
    if (config_.measure) {
      for (size_t s = 0; s < kStageCount; ++s) histograms_[s].samples.push_back(item.stage_ms[s]);
    }
  }
  coverage_.push_back({{"iteration", issued_},
                       {"blocks", monitor_.coverage.stats().S_n},
                       {"digests", monitor_.coverage.distinct_digests()},
                       {"stored", monitor_.coverage.stats().C}});
}

CampaignResult Campaign::Run() {
  started_ = Clock::now();
  if (!cluster_.IsDeployed(config_.target_app)) {
    throw UnknownApp("\"" + config_.target_app + "\" is not deployed");
  }
  events_ = config_.events;
  std::stable_sort(events_.begin(), events_.end(),
                   [](const auto &a, const auto &b) { return a.time_ms < b.time_ms; });

  const int listener =
      cluster_.Subscribe([this](const VersionEvent &) { monitor_.power.OnVersionEvent(n()); });
  std::unique_ptr<TriggerSubscription> triggers;
  if (config_.triggers) {
    triggers = ScheduleTriggers(store_, cluster_, config_.trigger_config,
                                [this](const RefreshReport &r) {
                                  refreshes_.push_back(RefreshReportToJson(r));
                                  monitor_.power.OnRefresh(r, n());
                                });
  }
  struct Unsubscribe {
    Cluster &c;
    int id;
    ~Unsubscribe() { c.Unsubscribe(id); }
  } unsubscribe{cluster_, listener};

  const size_t epoch_size = std::max<size_t>(1, config_.epoch_size);
  while (true) {
    if (epoch_) Boundary();
    else {
      cluster_.PollTimers();
      ApplyDueEvents();
      if (auto ctl = ReadControlFile(config_.control_file)) {
        last_control_ = ctl;
        monitor_.power.User(*ctl, n());
      }
      if (config_.stop_requested && config_.stop_requested()) monitor_.power.User(false, n());
    }
    if (!monitor_.power.on()) {
      auto h = monitor_.power.history();
      result_.stopped_by = h.empty() ? "user" : std::string(SwitchReasonName(h.back().reason));
      break;
    }
    if (issued_ >= config_.budget) {
      monitor_.power.Budget(n());
      result_.stopped_by = "budget";
      break;
    }
    if (config_.wall_budget_s &&
        std::chrono::duration<double>(Clock::now() - started_).count() >= *config_.wall_budget_s) {
      result_.stopped_by = "duration";
      break;
    }
    StartEpoch();
    RunEpoch(std::min<uint64_t>(epoch_size, config_.budget - issued_));
  }
  if (epoch_) cluster_.Restore(epoch_->baseline);
  result_.wall_seconds = std::chrono::duration<double>(Clock::now() - started_).count();
  result_.report = BuildReport();
  return std::move(result_);
}

json Campaign::BuildReport() {
  json crashes = {{"Biz_Vul", json::array()}, {"Sys_Vul", json::array()}};
  for (const auto &c : result_.crashes) {
    crashes[std::string(CrashCategory(c.kind))].push_back({{"kind", CrashKindName(c.kind)},
                                                            {"at", c.location},
                                                            {"message", c.message},
                                                            {"seed_id", c.seed_id},
                                                            {"item", c.item_id}});
  }
  json sw = json::array();
  for (const auto &t : monitor_.power.history()) {
    sw.push_back({{"at_n", t.at_n},
                  {"state", t.on ? "on" : "off"},
                  {"reason", SwitchReasonName(t.reason)}});
  }
  const CampaignStats &stats = monitor_.coverage.stats();
  json estimates = json::object();
  if (stats.n > 0) {
    estimates["discovery_rate"] = DiscoveryRate(stats);
    estimates["extrapolated_blocks"] = ExtrapolateS(stats, stats.n);
    if (stats.C > 0) estimates["upper_bound_U"] = UpperBoundU(stats);
  }
  json report = {{"target", config_.target_app},
                 {"mode", CampaignModeName(config_.mode)},
                 {"strategy", SelectStrategyName(config_.strategy)},
                 {"rng_seed", config_.rng_seed},
                 {"budget", config_.budget},
                 {"epoch_size", config_.epoch_size},
                 {"iterations", result_.iterations},
                 {"stopped_by", result_.stopped_by},
                 {"stats", StatsToJson(stats)},
                 {"estimates", std::move(estimates)},
                 {"distinct_digests", monitor_.coverage.distinct_digests()},
                 {"stored_seeds", store_.size(config_.target_app)},
                 {"admissions", admissions_},
                 {"crashes", std::move(crashes)},
                 {"coverage", coverage_},
                 {"switch", std::move(sw)},
                 {"refreshes", refreshes_},
                 {"events", applied_events_},
                 {"divergences", divergences_},
                 {"substituted", substituted_},
                 {"failures", result_.failures}};
  if (config_.stats_every) report["stats_snapshots"] = stats_snapshots_;
  if (config_.measure) {
    json stages = json::object();
    for (size_t s = 0; s < kStageCount; ++s) {
      stages[std::string(StageName(static_cast<Stage>(s)))] = histograms_[s].ToJson();
    }
    const double wall_ms = result_.wall_seconds * 1000.0;
    report["measurement"] = {
        {config_.mode == CampaignMode::kPipeline ? "pipelined_wall_ms" : "sequential_wall_ms",
         wall_ms},
        {"throughput_per_s", result_.wall_seconds > 0 ? result_.iterations / result_.wall_seconds : 0},
        {"stages", std::move(stages)}};
  }
  return report;
}

}  // namespace

CampaignResult RunCampaign(Cluster &cluster, SeedStore &store, Monitor &monitor,
                           const CampaignConfig &config) {
  return Campaign(cluster, store, monitor, config).Run();
}

}  // namespace meshfuzz
