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

#ifndef MESHFUZZ_VALUE_H_
#define MESHFUZZ_VALUE_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace meshfuzz {

// Arbitrary octets. std::string is used as the container so byte strings can
// be map keys and compared without ceremony; no encoding is implied.
using Bytes = std::string;

enum class ValueType { kInt, kBytes, kBool };

// Runtime value of the App interpreter: a signed 64-bit integer, a byte
// string, or a boolean.
class Value {
 public:
  Value() : rep_(int64_t{0}) {}

  static Value FromInt(int64_t v) { return Value(Rep(v)); }
  static Value FromBytes(Bytes v) { return Value(Rep(std::move(v))); }
  static Value FromBool(bool v) { return Value(Rep(v)); }

  ValueType type() const { return static_cast<ValueType>(rep_.index()); }
  bool is_int() const { return type() == ValueType::kInt; }
  bool is_bytes() const { return type() == ValueType::kBytes; }
  bool is_bool() const { return type() == ValueType::kBool; }

  int64_t as_int() const { return std::get<int64_t>(rep_); }
  const Bytes &as_bytes() const { return std::get<Bytes>(rep_); }
  bool as_bool() const { return std::get<bool>(rep_); }

  // Type-tagged text form: "i:<decimal>", "b:0x<hex>", "t:true|false".
  std::string ToCanonical() const;
  // Short human form used in messages.
  std::string ToDisplay() const;

  friend bool operator==(const Value &, const Value &) = default;
  friend auto operator<=>(const Value &, const Value &) = default;

 private:
  using Rep = std::variant<int64_t, Bytes, bool>;
  explicit Value(Rep rep) : rep_(std::move(rep)) {}
  Rep rep_;
};

using ValueTuple = std::vector<Value>;

std::string_view ValueTypeName(ValueType type);

// "0x" followed by lowercase hex digits.
std::string HexEncode(std::string_view bytes);
// Accepts "0x" + hex digits (either case on input). nullopt on malformed text.
std::optional<Bytes> HexDecode(std::string_view text);

// Literal encoding shared by App Spec files, mock files and reports:
// JSON integer -> Int, JSON bool -> Bool, "0x.." string -> Bytes.
// {"str": "text"} is also accepted on input as a UTF-8 byte literal.
nlohmann::json ValueToJson(const Value &value);
// Throws ParseError on anything else.
Value ValueFromJson(const nlohmann::json &j);

nlohmann::json TupleToJson(const ValueTuple &tuple);
ValueTuple TupleFromJson(const nlohmann::json &j);

enum class CrashKind {
  kBizException,
  kBizError,
  kSysNullPointer,
  kSysSql,
  kSysNumberFormat,
  kSysUnclearedThrowable,
  kSysIo,
  kSysArithmetic,
  kSysBounds,
};

inline constexpr CrashKind kAllCrashKinds[] = {
    CrashKind::kBizException,          CrashKind::kBizError,
    CrashKind::kSysNullPointer,        CrashKind::kSysSql,
    CrashKind::kSysNumberFormat,       CrashKind::kSysUnclearedThrowable,
    CrashKind::kSysIo,                 CrashKind::kSysArithmetic,
    CrashKind::kSysBounds,
};

// "Biz_Exception", "Sys_NullPointer", ...
std::string_view CrashKindName(CrashKind kind);
// Accepts the names above, and the "Sys:NullPointer" spelling.
std::optional<CrashKind> ParseCrashKind(std::string_view name);
// "Biz_Vul" or "Sys_Vul".
std::string_view CrashCategory(CrashKind kind);
inline bool IsSysVul(CrashKind kind) {
  return kind != CrashKind::kBizException && kind != CrashKind::kBizError;
}

}  // namespace meshfuzz

#endif  // MESHFUZZ_VALUE_H_
