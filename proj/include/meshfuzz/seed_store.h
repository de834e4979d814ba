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

#ifndef MESHFUZZ_SEED_STORE_H_
#define MESHFUZZ_SEED_STORE_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "meshfuzz/cluster.h"
#include "meshfuzz/mocking.h"
#include "meshfuzz/seed.h"

namespace meshfuzz {

inline constexpr uint64_t kHourMs = 3'600'000;
inline constexpr uint64_t kDayMs = 24 * kHourMs;

struct AdmitDecision {
  enum class Reason { kNewDigest, kNewCrash, kDuplicate };
  bool stored = false;
  Reason reason = Reason::kDuplicate;
  std::string seed_id;  // set when stored
};

std::string_view AdmitReasonName(AdmitDecision::Reason reason);

struct RefreshReport {
  struct Change {
    std::string seed_id;
    uint64_t old_digest = 0;
    uint64_t new_digest = 0;
  };
  std::string app;
  uint64_t time_ms = 0;
  size_t refreshed = 0;
  std::vector<Change> inconsistent;
  std::vector<std::pair<std::string, std::string>> errors;  // (seed_id, message)
};

nlohmann::json RefreshReportToJson(const RefreshReport &report);

// Seeds, their mock sets, and a per-App digest index (first seed wins).
// One writer at a time: admissions and refreshes serialize on an internal
// lease; reads are safe from any thread.
class SeedStore {
 public:
  SeedStore() = default;
  SeedStore(const SeedStore &) = delete;
  SeedStore &operator=(const SeedStore &) = delete;

  // Assigns seed_id when empty. Stores the seed iff its digest is not indexed
  // for its App, or it crashed with a (kind, block) not seen before for that
  // App. Crash-admitted duplicates are stored but not indexed.
  AdmitDecision Admit(Seed seed, MockSet mocks, const Outcome &outcome);

  std::optional<Seed> Get(const std::string &seed_id) const;
  std::optional<MockSet> Mocks(const std::string &seed_id) const;
  // Seeds targeting `app`, oldest first.
  std::vector<Seed> Seeds(const std::string &app) const;
  std::vector<Seed> AllSeeds() const;
  std::vector<std::string> Apps() const;
  size_t size() const;
  size_t size(const std::string &app) const;
  // C: stored seeds with a distinct digest for `app`.
  size_t DistinctDigests(const std::string &app) const;
  std::map<uint64_t, std::string> DigestIndex(const std::string &app) const;
  bool Remove(const std::string &seed_id);

  // Re-records every seed of `app` with real calls, each from the cluster
  // state at call time; the cluster is left as it was found.
  RefreshReport RefreshAll(Cluster &cluster, const std::string &app);
  // Deletes seeds with created_at + ttl <= now, with their mocks.
  size_t Cleanup(uint64_t now_ms, uint64_t ttl_ms);

  void Save(const std::filesystem::path &dir) const;
  static std::unique_ptr<SeedStore> Load(const std::filesystem::path &dir);

 private:
  using CrashKey = std::tuple<std::string, CrashKind, std::string>;

  void IndexLocked(const Seed &seed);
  void UnindexLocked(const Seed &seed);
  std::string NextIdLocked();

  mutable std::mutex mu_;
  std::mutex lease_;
  std::map<std::string, Seed> seeds_;
  std::map<std::string, MockSet> mocks_;
  std::map<std::string, std::map<uint64_t, std::string>> index_;
  std::set<CrashKey> crashes_;
  uint64_t next_id_ = 1;
};

struct TriggerConfig {
  uint64_t refresh_interval_ms = 12 * kHourMs;
  uint64_t cleanup_interval_ms = 24 * kHourMs;
  uint64_t ttl_ms = 3 * kDayMs;
};

struct TriggerLogEntry {
  enum class Kind { kVersionEvent, kPeriodicRefresh, kCleanup };
  Kind kind;
  uint64_t time_ms;
  std::string app;  // refreshed app; empty for cleanup
};

// The event listener plus the two periodic tasks. Unsubscribes on
// destruction. `on_refresh` sees every report as it is produced.
class TriggerSubscription {
 public:
  TriggerSubscription(SeedStore &store, Cluster &cluster, TriggerConfig config,
                      std::function<void(const RefreshReport &)> on_refresh = {});
  ~TriggerSubscription();
  TriggerSubscription(const TriggerSubscription &) = delete;
  TriggerSubscription &operator=(const TriggerSubscription &) = delete;

  std::vector<TriggerLogEntry> log() const;

 private:
  void OnVersionEvent(const VersionEvent &event);
  void RefreshApps(const std::vector<std::string> &apps, TriggerLogEntry::Kind kind,
                   uint64_t time_ms);

  SeedStore &store_;
  Cluster &cluster_;
  TriggerConfig config_;
  std::function<void(const RefreshReport &)> on_refresh_;
  int listener_ = 0;
  int refresh_timer_ = 0;
  int cleanup_timer_ = 0;
  mutable std::mutex mu_;
  std::vector<TriggerLogEntry> log_;
};

std::unique_ptr<TriggerSubscription> ScheduleTriggers(
    SeedStore &store, Cluster &cluster, TriggerConfig config = {},
    std::function<void(const RefreshReport &)> on_refresh = {});

}  // namespace meshfuzz

#endif  // MESHFUZZ_SEED_STORE_H_
