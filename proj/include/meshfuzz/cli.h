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

#ifndef MESHFUZZ_CLI_H_
#define MESHFUZZ_CLI_H_

#include <atomic>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace meshfuzz {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFindings = 2;

struct BudgetSpec {
  uint64_t iterations = 0;
  std::optional<double> seconds;
};

// "500" -> 500 iterations; "30s", "5m", "2h" -> a wall-clock limit.
// nullopt on malformed text.
std::optional<BudgetSpec> ParseBudget(std::string_view text);

// Human-readable summary of a campaign or iteration report.
std::string RenderReport(const nlohmann::json &report);

// `args` excludes the program name. A non-null `interrupted` is polled as a
// graceful-stop request by running campaigns.
int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err,
           const std::atomic<bool> *interrupted = nullptr);

}  // namespace meshfuzz

#endif  // MESHFUZZ_CLI_H_
