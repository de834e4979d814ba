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

#include "meshfuzz/value.h"

#include <array>

#include "meshfuzz/errors.h"

namespace meshfuzz {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int HexNibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

bool IsPrintable(std::string_view s) {
  for (unsigned char c : s) {
    if (c < 0x20 || c > 0x7e) return false;
  }
  return true;
}

struct CrashKindEntry {
  CrashKind kind;
  std::string_view name;
  std::string_view alt;
};

constexpr std::array<CrashKindEntry, 9> kCrashKindNames = {{
    {CrashKind::kBizException, "Biz_Exception", "Biz:Exception"},
    {CrashKind::kBizError, "Biz_Error", "Biz:Error"},
    {CrashKind::kSysNullPointer, "Sys_NullPointer", "Sys:NullPointer"},
    {CrashKind::kSysSql, "Sys_SQL", "Sys:SQL"},
    {CrashKind::kSysNumberFormat, "Sys_NumberFormat", "Sys:NumberFormat"},
    {CrashKind::kSysUnclearedThrowable, "Sys_UnclearedThrowable",
     "Sys:UnclearedThrowable"},
    {CrashKind::kSysIo, "Sys_IO", "Sys:IO"},
    {CrashKind::kSysArithmetic, "Sys_Arithmetic", "Sys:Arithmetic"},
    {CrashKind::kSysBounds, "Sys_Bounds", "Sys:Bounds"},
}};

}  // namespace

std::string Value::ToCanonical() const {
  switch (type()) {
    case ValueType::kInt:
      return "i:" + std::to_string(as_int());
    case ValueType::kBytes:
      return "b:" + HexEncode(as_bytes());
    case ValueType::kBool:
      return as_bool() ? "t:true" : "t:false";
  }
  return {};
}

std::string Value::ToDisplay() const {
  switch (type()) {
    case ValueType::kInt:
      return std::to_string(as_int());
    case ValueType::kBytes:
      return IsPrintable(as_bytes()) ? as_bytes() : HexEncode(as_bytes());
    case ValueType::kBool:
      return as_bool() ? "true" : "false";
  }
  return {};
}

std::string_view ValueTypeName(ValueType type) {
  switch (type) {
    case ValueType::kInt:
      return "int";
    case ValueType::kBytes:
      return "bytes";
    case ValueType::kBool:
      return "bool";
  }
  return "?";
}

std::string HexEncode(std::string_view bytes) {
  std::string out = "0x";
  out.reserve(2 + 2 * bytes.size());
  for (unsigned char c : bytes) {
    out.push_back(kHexDigits[c >> 4]);
    out.push_back(kHexDigits[c & 0xf]);
  }
  return out;
}

std::optional<Bytes> HexDecode(std::string_view text) {
  if (text.size() < 2 || text[0] != '0' || (text[1] != 'x' && text[1] != 'X'))
    return std::nullopt;
  text.remove_prefix(2);
  if (text.size() % 2 != 0) return std::nullopt;
  Bytes out;
  out.reserve(text.size() / 2);
  for (size_t i = 0; i < text.size(); i += 2) {
    int hi = HexNibble(text[i]);
    int lo = HexNibble(text[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<char>((hi << 4) | lo));
  }
  return out;
}

nlohmann::json ValueToJson(const Value &value) {
  switch (value.type()) {
    case ValueType::kInt:
      return value.as_int();
    case ValueType::kBytes:
      return HexEncode(value.as_bytes());
    case ValueType::kBool:
      return value.as_bool();
  }
  return nullptr;
}

Value ValueFromJson(const nlohmann::json &j) {
  if (j.is_boolean()) return Value::FromBool(j.get<bool>());
  if (j.is_number_integer()) return Value::FromInt(j.get<int64_t>());
  if (j.is_string()) {
    auto bytes = HexDecode(j.get<std::string>());
    if (!bytes) {
      throw ParseError("byte literal must be 0x-prefixed hex, got \"" +
                       j.get<std::string>() + "\"");
    }
    return Value::FromBytes(std::move(*bytes));
  }
  if (j.is_object() && j.size() == 1 && j.contains("str") &&
      j["str"].is_string()) {
    return Value::FromBytes(j["str"].get<std::string>());
  }
  throw ParseError("not a value literal: " + j.dump());
}

nlohmann::json TupleToJson(const ValueTuple &tuple) {
  nlohmann::json out = nlohmann::json::array();
  for (const Value &v : tuple) out.push_back(ValueToJson(v));
  return out;
}

ValueTuple TupleFromJson(const nlohmann::json &j) {
  if (!j.is_array()) throw ParseError("value tuple must be an array");
  ValueTuple out;
  out.reserve(j.size());
  for (const auto &item : j) out.push_back(ValueFromJson(item));
  return out;
}

std::string_view CrashKindName(CrashKind kind) {
  for (const auto &e : kCrashKindNames) {
    if (e.kind == kind) return e.name;
  }
  return "?";
}

std::optional<CrashKind> ParseCrashKind(std::string_view name) {
  for (const auto &e : kCrashKindNames) {
    if (e.name == name || e.alt == name) return e.kind;
  }
  return std::nullopt;
}

std::string_view CrashCategory(CrashKind kind) {
  return IsSysVul(kind) ? "Sys_Vul" : "Biz_Vul";
}

}  // namespace meshfuzz
