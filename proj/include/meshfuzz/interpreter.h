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

#ifndef MESHFUZZ_INTERPRETER_H_
#define MESHFUZZ_INTERPRETER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "meshfuzz/app_spec.h"
#include "meshfuzz/coverage.h"
#include "meshfuzz/value.h"

namespace meshfuzz {

inline constexpr uint64_t kDefaultStepBudget = 100'000;

struct CrashInfo {
  CrashKind kind = CrashKind::kSysUnclearedThrowable;
  std::string message;
  ProbeId location;  // block where the crash originated

  friend bool operator==(const CrashInfo &, const CrashInfo &) = default;
};

nlohmann::json CrashToJson(const CrashInfo &crash);
CrashInfo CrashFromJson(const nlohmann::json &j);

struct Outcome {
  enum class Status { kReturned, kCrashed, kBudgetExhausted };

  Status status = Status::kReturned;
  Value value;      // kReturned
  CrashInfo crash;  // kCrashed

  static Outcome Returned(Value v) { return {Status::kReturned, std::move(v), {}}; }
  static Outcome Crashed(CrashInfo c) { return {Status::kCrashed, {}, std::move(c)}; }
  static Outcome BudgetExhausted() { return {Status::kBudgetExhausted, {}, {}}; }

  bool returned() const { return status == Status::kReturned; }
  bool crashed() const { return status == Status::kCrashed; }
  bool exhausted() const { return status == Status::kBudgetExhausted; }
  // "returned <v>", "crashed Sys_IO at A:h:b0", "budget_exhausted"
  std::string Summary() const;

  friend bool operator==(const Outcome &, const Outcome &) = default;
};

nlohmann::json OutcomeToJson(const Outcome &outcome);
Outcome OutcomeFromJson(const nlohmann::json &j);

// What an interception-eligible statement produced.
struct EffectOutput {
  enum class Kind { kValue, kMiss, kCrash, kExhausted };

  Kind kind = Kind::kValue;
  Value value;  // kValue; writes produce Bool(true)
  CrashInfo crash;
  // RPC only: the callee's recorded coverage.
  std::optional<SpanSketch> callee;

  static EffectOutput Of(Value v) { return {Kind::kValue, std::move(v), {}, {}}; }
  static EffectOutput Miss() { return {Kind::kMiss, {}, {}, {}}; }
  static EffectOutput Crash(CrashInfo c) { return {Kind::kCrash, {}, std::move(c), {}}; }
  static EffectOutput Exhausted() { return {Kind::kExhausted, {}, {}, {}}; }

  friend bool operator==(const EffectOutput &, const EffectOutput &) = default;
};

nlohmann::json EffectOutputToJson(const EffectOutput &out);
EffectOutput EffectOutputFromJson(const nlohmann::json &j);

struct EffectRequest {
  PointId point;
  PointKind kind = PointKind::kSystem;
  const Statement *statement = nullptr;
  // SysCall: (primitive name); StateRead/DbRead: (key);
  // StateWrite/DbWrite: (key, value); RpcCall: the argument values.
  ValueTuple input;
};

// The world as seen by one handler invocation.
class ExecutionEnv {
 public:
  virtual ~ExecutionEnv() = default;

  // Fired on every block entry, in execution order.
  virtual void OnProbe(const ProbeId &probe) = 0;
  // Every interception-eligible statement goes through here.
  virtual EffectOutput Perform(const EffectRequest &request) = 0;
  virtual void OnSink(std::string_view /*sink_id*/, const Value & /*value*/) {}
  // Called once per interpreted statement or terminator.
  virtual void OnStep() {}
  virtual uint64_t step_budget() const { return kDefaultStepBudget; }
};

// Interprets `handler` from its entry block until Return, Crash, or the step
// budget runs out. A step is one statement or one terminator. Reads that miss
// without a default crash with Sys_NullPointer; expression type errors crash
// with Sys_UnclearedThrowable.
//
// Throws UnknownHandler if the handler does not exist and ValidationError if
// the argument count does not match the parameter list.
Outcome ExecuteHandler(ExecutionEnv &env, const AppSpec &app,
                       std::string_view handler, std::span<const Bytes> args);

}  // namespace meshfuzz

#endif  // MESHFUZZ_INTERPRETER_H_
