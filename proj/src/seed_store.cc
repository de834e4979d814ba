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

#include "meshfuzz/seed_store.h"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "meshfuzz/call_graph.h"
#include "meshfuzz/errors.h"

namespace meshfuzz {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view AdmitReasonName(AdmitDecision::Reason reason) {
  switch (reason) {
    case AdmitDecision::Reason::kNewDigest:
      return "new_digest";
    case AdmitDecision::Reason::kNewCrash:
      return "new_crash";
    case AdmitDecision::Reason::kDuplicate:
      return "duplicate";
  }
  return "duplicate";
}

json RefreshReportToJson(const RefreshReport &report) {
  json changes = json::array();
  for (const auto &c : report.inconsistent) {
    changes.push_back({{"seed_id", c.seed_id},
                       {"old_digest", DigestHex(c.old_digest)},
                       {"new_digest", DigestHex(c.new_digest)}});
  }
  json errors = json::array();
  for (const auto &[id, msg] : report.errors) {
    errors.push_back({{"seed_id", id}, {"error", msg}});
  }
  return {{"app", report.app},
          {"time_ms", report.time_ms},
          {"refreshed", report.refreshed},
          {"inconsistent", std::move(changes)},
          {"errors", std::move(errors)}};
}

std::string SeedStore::NextIdLocked() {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "s%06llu", static_cast<unsigned long long>(next_id_++));
  return buf;
}

void SeedStore::IndexLocked(const Seed &seed) {
  index_[seed.app].try_emplace(seed.cover_digest, seed.seed_id);
}

void SeedStore::UnindexLocked(const Seed &seed) {
  auto it = index_.find(seed.app);
  if (it == index_.end()) return;
  auto jt = it->second.find(seed.cover_digest);
  if (jt != it->second.end() && jt->second == seed.seed_id) it->second.erase(jt);
}

AdmitDecision SeedStore::Admit(Seed seed, MockSet mocks, const Outcome &outcome) {
  std::lock_guard lease(lease_);
  std::lock_guard lock(mu_);
  AdmitDecision d;
  const auto &digests = index_[seed.app];
  const bool new_digest = !digests.contains(seed.cover_digest);
  bool new_crash = false;
  if (outcome.crashed()) {
    new_crash = crashes_
                    .insert({seed.app, outcome.crash.kind, outcome.crash.location.ToString()})
                    .second;
  }
  if (!new_digest && !new_crash) return d;
  d.stored = true;
  d.reason = new_digest ? AdmitDecision::Reason::kNewDigest : AdmitDecision::Reason::kNewCrash;
  if (seed.seed_id.empty() || seeds_.contains(seed.seed_id)) seed.seed_id = NextIdLocked();
  d.seed_id = seed.seed_id;
  mocks.seed_id = seed.seed_id;
  if (new_digest) IndexLocked(seed);
  mocks_[seed.seed_id] = std::move(mocks);
  seeds_[seed.seed_id] = std::move(seed);
  return d;
}

std::optional<Seed> SeedStore::Get(const std::string &seed_id) const {
  std::lock_guard lock(mu_);
  auto it = seeds_.find(seed_id);
  if (it == seeds_.end()) return std::nullopt;
  return it->second;
}

std::optional<MockSet> SeedStore::Mocks(const std::string &seed_id) const {
  std::lock_guard lock(mu_);
  auto it = mocks_.find(seed_id);
  if (it == mocks_.end()) return std::nullopt;
  return it->second;
}

std::vector<Seed> SeedStore::Seeds(const std::string &app) const {
  std::lock_guard lock(mu_);
  std::vector<Seed> out;
  for (const auto &[id, s] : seeds_) {
    if (s.app == app) out.push_back(s);
  }
  return out;
}

std::vector<Seed> SeedStore::AllSeeds() const {
  std::lock_guard lock(mu_);
  std::vector<Seed> out;
  for (const auto &[id, s] : seeds_) out.push_back(s);
  return out;
}

std::vector<std::string> SeedStore::Apps() const {
  std::lock_guard lock(mu_);
  std::set<std::string> apps;
  for (const auto &[id, s] : seeds_) apps.insert(s.app);
  return {apps.begin(), apps.end()};
}

size_t SeedStore::size() const {
  std::lock_guard lock(mu_);
  return seeds_.size();
}

size_t SeedStore::size(const std::string &app) const {
  std::lock_guard lock(mu_);
  return std::count_if(seeds_.begin(), seeds_.end(),
                       [&](const auto &kv) { return kv.second.app == app; });
}

size_t SeedStore::DistinctDigests(const std::string &app) const {
  std::lock_guard lock(mu_);
  std::set<uint64_t> d;
  for (const auto &[id, s] : seeds_) {
    if (s.app == app) d.insert(s.cover_digest);
  }
  return d.size();
}

std::map<uint64_t, std::string> SeedStore::DigestIndex(const std::string &app) const {
  std::lock_guard lock(mu_);
  auto it = index_.find(app);
  return it == index_.end() ? std::map<uint64_t, std::string>{} : it->second;
}

bool SeedStore::Remove(const std::string &seed_id) {
  std::lock_guard lease(lease_);
  std::lock_guard lock(mu_);
  auto it = seeds_.find(seed_id);
  if (it == seeds_.end()) return false;
  UnindexLocked(it->second);
  mocks_.erase(seed_id);
  seeds_.erase(it);
  return true;
}

RefreshReport SeedStore::RefreshAll(Cluster &cluster, const std::string &app) {
  std::lock_guard lease(lease_);
  RefreshReport report;
  report.app = app;
  report.time_ms = cluster.now_ms();
  const std::vector<Seed> seeds = Seeds(app);
  if (seeds.empty()) return report;

  auto active = cluster.Active(app);
  const auto snapshot = cluster.Snapshot();
  const auto apps = cluster.ActiveApps();
  const auto points = EnumerateMockPoints(apps, app);
  for (const Seed &seed : seeds) {
    cluster.Restore(snapshot);
    try {
      SeedRun run = Finish(cluster, ExecuteRecord(cluster, seed, &points));
      std::lock_guard lock(mu_);
      Seed &stored = seeds_.at(seed.seed_id);
      const uint64_t old_digest = stored.cover_digest;
      if (run.trace.cover_digest != old_digest) {
        report.inconsistent.push_back({seed.seed_id, old_digest, run.trace.cover_digest});
        UnindexLocked(stored);
        stored.cover_digest = run.trace.cover_digest;
        IndexLocked(stored);
      }
      if (active) stored.app_version_id = active->version_id;
      run.mocks.seed_id = seed.seed_id;
      mocks_[seed.seed_id] = std::move(run.mocks);
      ++report.refreshed;
    } catch (const std::exception &e) {
      report.errors.emplace_back(seed.seed_id, e.what());
    }
  }
  cluster.Restore(snapshot);
  return report;
}

size_t SeedStore::Cleanup(uint64_t now_ms, uint64_t ttl_ms) {
  std::lock_guard lease(lease_);
  std::lock_guard lock(mu_);
  size_t removed = 0;
  for (auto it = seeds_.begin(); it != seeds_.end();) {
    const Seed &s = it->second;
    if (s.created_at + ttl_ms <= now_ms) {
      UnindexLocked(s);
      mocks_.erase(s.seed_id);
      it = seeds_.erase(it);
      ++removed;
    } else {
      ++it;
    }
  }
  return removed;
}

namespace {

void WriteJson(const fs::path &path, const json &j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw StoreIoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw StoreIoError("write failed for " + path.string());
}

json ReadJson(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw StoreIoError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace

void SeedStore::Save(const fs::path &dir) const {
  std::lock_guard lock(mu_);
  std::error_code ec;
  fs::remove_all(dir / "seeds", ec);
  fs::remove_all(dir / "mocks", ec);
  for (const auto &[id, s] : seeds_) {
    WriteJson(dir / "seeds" / s.app / (id + ".json"), SeedToJson(s));
  }
  for (const auto &[id, m] : mocks_) {
    WriteJson(dir / "mocks" / (id + ".json"), MockSetToJson(m));
  }
  json digests = json::object();
  for (const auto &[app, idx] : index_) {
    json per = json::object();
    for (const auto &[d, id] : idx) per[DigestHex(d)] = id;
    digests[app] = std::move(per);
  }
  json crashes = json::array();
  for (const auto &[app, kind, where] : crashes_) {
    crashes.push_back({{"app", app}, {"kind", CrashKindName(kind)}, {"at", where}});
  }
  WriteJson(dir / "index" / "digests.json",
            {{"digests", std::move(digests)},
             {"crashes", std::move(crashes)},
             {"next_id", next_id_}});
}

std::unique_ptr<SeedStore> SeedStore::Load(const fs::path &dir) {
  auto store = std::make_unique<SeedStore>();
  const fs::path index_path = dir / "index" / "digests.json";
  if (!fs::exists(index_path)) return store;
  try {
    json index = ReadJson(index_path);
    for (const auto &[app, per] : index.at("digests").items()) {
      for (const auto &[hex, id] : per.items()) {
        auto d = ParseDigestHex(hex);
        if (!d) throw ParseError("bad digest " + hex + " in " + index_path.string());
        store->index_[app][*d] = id.get<std::string>();
      }
    }
    for (const auto &c : index.at("crashes")) {
      auto kind = ParseCrashKind(c.at("kind").get<std::string>());
      if (!kind) throw ParseError("bad crash kind in " + index_path.string());
      store->crashes_.insert({c.at("app").get<std::string>(), *kind,
                              c.at("at").get<std::string>()});
    }
    store->next_id_ = index.at("next_id").get<uint64_t>();
  } catch (const json::exception &e) {
    throw ParseError(index_path.string() + ": " + e.what());
  }
  if (fs::exists(dir / "seeds")) {
    for (const auto &entry : fs::recursive_directory_iterator(dir / "seeds")) {
      if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
      Seed s = SeedFromJson(ReadJson(entry.path()));
      std::string id = s.seed_id;
      store->seeds_[id] = std::move(s);
    }
  }
  for (const auto &[id, s] : store->seeds_) {
    const fs::path mp = dir / "mocks" / (id + ".json");
    store->mocks_[id] = fs::exists(mp) ? MockSetFromJson(ReadJson(mp)) : MockSet{id, {}};
  }
  return store;
}

TriggerSubscription::TriggerSubscription(SeedStore &store, Cluster &cluster,
                                         TriggerConfig config,
                                         std::function<void(const RefreshReport &)> on_refresh)
    : store_(store), cluster_(cluster), config_(config), on_refresh_(std::move(on_refresh)) {
  listener_ = cluster_.Subscribe([this](const VersionEvent &e) { OnVersionEvent(e); });
  refresh_timer_ = cluster_.AddTimer(config_.refresh_interval_ms, [this](uint64_t t) {
    RefreshApps(store_.Apps(), TriggerLogEntry::Kind::kPeriodicRefresh, t);
  });
  cleanup_timer_ = cluster_.AddTimer(config_.cleanup_interval_ms, [this](uint64_t t) {
    {
      std::lock_guard lock(mu_);
      log_.push_back({TriggerLogEntry::Kind::kCleanup, t, {}});
    }
    store_.Cleanup(t, config_.ttl_ms);
  });
}

TriggerSubscription::~TriggerSubscription() {
  cluster_.Unsubscribe(listener_);
  cluster_.RemoveTimer(refresh_timer_);
  cluster_.RemoveTimer(cleanup_timer_);
}

std::vector<TriggerLogEntry> TriggerSubscription::log() const {
  std::lock_guard lock(mu_);
  return log_;
}

void TriggerSubscription::OnVersionEvent(const VersionEvent &event) {
  // Refresh every App whose seeds can reach the redeployed App.
  const auto apps = cluster_.ActiveApps();
  std::vector<std::string> affected;
  for (const auto &app : store_.Apps()) {
    if (CallClosure(apps, app).contains(event.app_id)) affected.push_back(app);
  }
  RefreshApps(affected, TriggerLogEntry::Kind::kVersionEvent, event.time_ms);
  cluster_.ResetTimer(refresh_timer_);
}

void TriggerSubscription::RefreshApps(const std::vector<std::string> &apps,
                                      TriggerLogEntry::Kind kind, uint64_t time_ms) {
  for (const auto &app : apps) {
    {
      std::lock_guard lock(mu_);
      log_.push_back({kind, time_ms, app});
    }
    if (!cluster_.IsDeployed(app)) continue;
    RefreshReport report = store_.RefreshAll(cluster_, app);
    if (on_refresh_) on_refresh_(report);
  }
}

std::unique_ptr<TriggerSubscription> ScheduleTriggers(
    SeedStore &store, Cluster &cluster, TriggerConfig config,
    std::function<void(const RefreshReport &)> on_refresh) {
  return std::make_unique<TriggerSubscription>(store, cluster, config, std::move(on_refresh));
}

}  // namespace meshfuzz
