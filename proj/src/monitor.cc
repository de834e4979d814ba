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

#include "meshfuzz/monitor.h"

#include <cmath>

#include "meshfuzz/errors.h"

namespace meshfuzz {

nlohmann::json StatsToJson(const CampaignStats &s) {
  return {{"n", s.n},   {"S_hat", s.S_hat}, {"S_n", s.S_n}, {"f1", s.f1},
          {"f2", s.f2}, {"Q0", s.Q0},       {"Q1", s.Q1},   {"C", s.C}};
}

double DiscoveryRate(const CampaignStats &s) {
  if (s.n == 0) throw UndefinedEstimate("discovery rate needs n >= 1");
  return static_cast<double>(s.f1) / static_cast<double>(s.n);
}

double UpperBoundU(const CampaignStats &s) {
  if (s.n == 0) throw UndefinedEstimate("U(n) needs n >= 1");
  if (s.C == 0) throw UndefinedEstimate("U(n) needs C >= 1");
  const double n = static_cast<double>(s.n);
  const double f1 = static_cast<double>(s.f1);
  const double f2 = static_cast<double>(s.f2);
  const double term = s.f2 > 0 ? (n - 1) * f1 * f1 / (2 * n * f2)
                               : (n - 1) * f1 * (f1 > 0 ? f1 - 1 : 0) / (2 * n);
  const double c = static_cast<double>(s.C);
  return c / (c + term);
}

double ExtrapolateS(const CampaignStats &s, uint64_t m) {
  if (s.n == 0) throw UndefinedEstimate("S(n+m) needs n >= 1");
  const double sn = static_cast<double>(s.S_n);
  if (s.Q0 == 0 || s.Q1 == 0 || m == 0) return sn;
  const double q0 = static_cast<double>(s.Q0);
  const double q1 = static_cast<double>(s.Q1);
  const double q = q1 / (static_cast<double>(s.n) * q0 + q1);
  // 1 - (1 - q)^m without cancellation for small q.
  return sn + q0 * -std::expm1(static_cast<double>(m) * std::log1p(-q));
}

CoverageTracker::CoverageTracker(std::string target_app, uint64_t target_blocks)
    : target_app_(std::move(target_app)) {
  stats_.S_hat = target_blocks;
  stats_.Q0 = target_blocks;
}

void CoverageTracker::Ingest(uint64_t digest, const ProbeSet &probes) {
  ++stats_.n;
  uint64_t &f = freq_[digest];
  ++f;
  if (f == 1) {
    ++stats_.f1;
    std::vector<std::string> blocks;
    for (const auto &p : probes) {
      if (p.app == target_app_) blocks.push_back(p.ToString());
    }
    for (const auto &b : blocks) {
      if (block_digests_[b]++ == 0) {
        ++stats_.S_n;
        ++stats_.Q1;
      }
    }
    digest_blocks_[digest] = std::move(blocks);
  } else if (f == 2) {
    --stats_.f1;
    ++stats_.f2;
    for (const auto &b : digest_blocks_[digest]) {
      if (block_repeated_[b]++ == 0) --stats_.Q1;
    }
  } else if (f == 3) {
    --stats_.f2;
  }
  stats_.Q0 = stats_.S_hat > stats_.S_n ? stats_.S_hat - stats_.S_n : 0;
}

CampaignStats RecomputeStats(const std::string &target_app, uint64_t target_blocks,
                             const std::vector<std::pair<uint64_t, ProbeSet>> &log) {
  CampaignStats s;
  s.S_hat = target_blocks;
  s.n = log.size();
  std::map<uint64_t, uint64_t> freq;
  for (const auto &[d, probes] : log) ++freq[d];
  for (const auto &[d, f] : freq) {
    s.f1 += f == 1;
    s.f2 += f == 2;
  }
  std::set<std::string> covered, repeated;
  for (const auto &[d, probes] : log) {
    for (const auto &p : probes) {
      if (p.app != target_app) continue;
      covered.insert(p.ToString());
      if (freq[d] >= 2) repeated.insert(p.ToString());
    }
  }
  s.S_n = covered.size();
  s.Q0 = s.S_hat > s.S_n ? s.S_hat - s.S_n : 0;
  s.Q1 = covered.size() - repeated.size();
  return s;
}

std::string_view SwitchReasonName(SwitchReason reason) {
  switch (reason) {
    case SwitchReason::kUser:
      return "user";
    case SwitchReason::kVersionEvolution:
      return "version_evolution";
    case SwitchReason::kInconsistency:
      return "inconsistency";
    case SwitchReason::kSaturation:
      return "saturation";
    case SwitchReason::kBudget:
      return "budget";
  }
  return "user";
}

bool IntelligentSwitch::on() const {
  std::lock_guard lock(mu_);
  return on_;
}

void IntelligentSwitch::SetLocked(bool on, SwitchReason reason, uint64_t at_n) {
  if (on_ == on) return;
  on_ = on;
  history_.push_back({at_n, on, reason});
}

bool IntelligentSwitch::Decide(const CampaignStats &stats) {
  std::lock_guard lock(mu_);
  if (!on_ || user_pinned_ || stats.n < policy_.n_min || stats.n == 0) return false;
  bool saturated = DiscoveryRate(stats) < policy_.t1;
  if (!saturated && stats.C > 0 && stats.S_hat > 0) {
    const uint64_t m = policy_.m_star ? policy_.m_star : stats.n;
    const double gap =
        UpperBoundU(stats) - ExtrapolateS(stats, m) / static_cast<double>(stats.S_hat);
    // A negative gap means the two estimators disagree (U lags while many
    // singletons remain), which is the opposite of saturation.
    saturated = gap >= 0 && gap < policy_.t2;
  }
  if (saturated) SetLocked(false, SwitchReason::kSaturation, stats.n);
  return saturated;
}

void IntelligentSwitch::OnRefresh(const RefreshReport &report, uint64_t at_n) {
  std::lock_guard lock(mu_);
  if (user_pinned_ || report.inconsistent.empty()) return;
  SetLocked(true, SwitchReason::kInconsistency, at_n);
}

void IntelligentSwitch::OnVersionEvent(uint64_t at_n) {
  std::lock_guard lock(mu_);
  if (user_pinned_) return;
  SetLocked(true, SwitchReason::kVersionEvolution, at_n);
}

void IntelligentSwitch::User(bool on, uint64_t at_n) {
  std::lock_guard lock(mu_);
  user_pinned_ = true;
  SetLocked(on, SwitchReason::kUser, at_n);
}

void IntelligentSwitch::ClearUser() {
  std::lock_guard lock(mu_);
  user_pinned_ = false;
}

void IntelligentSwitch::Budget(uint64_t at_n) {
  std::lock_guard lock(mu_);
  SetLocked(false, SwitchReason::kBudget, at_n);
}

std::vector<SwitchTransition> IntelligentSwitch::history() const {
  std::lock_guard lock(mu_);
  return history_;
}

}  // namespace meshfuzz
