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

// Campaign progress tracking and the on/off switch that stops a campaign
// once the species-richness estimators say little is left to find.

#ifndef MESHFUZZ_MONITOR_H_
#define MESHFUZZ_MONITOR_H_

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "meshfuzz/coverage.h"
#include "meshfuzz/seed_store.h"

namespace meshfuzz {

struct CampaignStats {
  uint64_t n = 0;      // executions
  uint64_t S_hat = 0;  // blocks of the target App
  uint64_t S_n = 0;    // target blocks covered so far
  uint64_t f1 = 0;     // digests seen exactly once
  uint64_t f2 = 0;     // digests seen exactly twice
  uint64_t Q0 = 0;     // S_hat - S_n
  uint64_t Q1 = 0;     // covered blocks whose covering digests are all singletons
  uint64_t C = 0;      // stored seeds with distinct digests

  friend bool operator==(const CampaignStats &, const CampaignStats &) = default;
};

nlohmann::json StatsToJson(const CampaignStats &stats);

// f1 / n. Throws UndefinedEstimate for n = 0.
double DiscoveryRate(const CampaignStats &stats);
// C / (C + (n-1) f1^2 / (2 n f2)); with f2 = 0 the correction term becomes
// (n-1) f1 (f1-1) / (2n). Throws UndefinedEstimate for n = 0 or C = 0.
double UpperBoundU(const CampaignStats &stats);
// S_n + Q0 (1 - (1 - Q1 / (n Q0 + Q1))^m). Throws UndefinedEstimate for n = 0.
double ExtrapolateS(const CampaignStats &stats, uint64_t m);

// Incremental bookkeeping over an execution stream.
class CoverageTracker {
 public:
  CoverageTracker(std::string target_app, uint64_t target_blocks);

  // `probes` may span several Apps; only the target's blocks count toward
  // S_n, Q0 and Q1.
  void Ingest(uint64_t digest, const ProbeSet &probes);
  void SetStoredDistinct(uint64_t c) { stats_.C = c; }

  const CampaignStats &stats() const { return stats_; }
  const std::map<uint64_t, uint64_t> &frequencies() const { return freq_; }
  const std::string &target_app() const { return target_app_; }
  size_t distinct_digests() const { return freq_.size(); }

 private:
  std::string target_app_;
  CampaignStats stats_;
  std::map<uint64_t, uint64_t> freq_;
  std::map<uint64_t, std::vector<std::string>> digest_blocks_;
  std::map<std::string, uint64_t> block_digests_;     // distinct digests per block
  std::map<std::string, uint64_t> block_repeated_;    // ... with frequency >= 2
};

// From-scratch recomputation of everything but C, for cross-checking.
CampaignStats RecomputeStats(const std::string &target_app, uint64_t target_blocks,
                             const std::vector<std::pair<uint64_t, ProbeSet>> &log);

enum class SwitchReason { kUser, kVersionEvolution, kInconsistency, kSaturation, kBudget };
std::string_view SwitchReasonName(SwitchReason reason);

struct SwitchPolicy {
  double t1 = 0.01;
  double t2 = 0.005;
  uint64_t m_star = 0;  // 0 means m* = n
  uint64_t n_min = 200;
};

struct SwitchTransition {
  uint64_t at_n = 0;
  bool on = false;
  SwitchReason reason = SwitchReason::kUser;
};

class IntelligentSwitch {
 public:
  explicit IntelligentSwitch(SwitchPolicy policy = {}) : policy_(policy) {}

  bool on() const;
  // Turns off for saturation when warmed up and either the discovery rate or
  // the remaining-coverage gap U - S(n+m)/S_hat lies in [0, t2). No-op while off or
  // while a user command is in force.
  bool Decide(const CampaignStats &stats);
  void OnRefresh(const RefreshReport &report, uint64_t at_n);
  void OnVersionEvent(uint64_t at_n);
  // User commands win over every automatic rule until cleared.
  void User(bool on, uint64_t at_n);
  void ClearUser();
  void Budget(uint64_t at_n);

  std::vector<SwitchTransition> history() const;
  const SwitchPolicy &policy() const { return policy_; }

 private:
  void SetLocked(bool on, SwitchReason reason, uint64_t at_n);

  SwitchPolicy policy_;
  mutable std::mutex mu_;
  bool on_ = true;
  bool user_pinned_ = false;
  std::vector<SwitchTransition> history_;
};

// What a campaign reports progress to.
struct Monitor {
  Monitor(std::string target_app, uint64_t target_blocks, SwitchPolicy policy = {})
      : coverage(std::move(target_app), target_blocks), power(policy) {}

  CoverageTracker coverage;
  IntelligentSwitch power;
};

}  // namespace meshfuzz

#endif  // MESHFUZZ_MONITOR_H_
