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

// Declarative model of a versioned microservice App: handlers made of basic
// blocks, statements and terminators. An App is parsed from one JSON document
// per version:
//
//   {"app": "A", "version": "c0ffee", "state": {"counter": 0},
//    "handlers": [{"name": "h", "params": ["x"], "entry": "b0",
//                  "blocks": {"b0": {"stmts": [...], "term": {...}}}}]}
//
// Statements and terminators carry a "kind" discriminator. Expressions are
// literals (JSON integer, JSON bool, "0x.." hex bytes, {"str": ".."}),
// variables ({"var": "x"}) or operators ({"op": "add", "args": [..]}).

#ifndef MESHFUZZ_APP_SPEC_H_
#define MESHFUZZ_APP_SPEC_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "meshfuzz/value.h"

namespace meshfuzz {

enum class ExprOp {
  kLit,
  kVar,
  kAdd,
  kSub,
  kMul,
  kDiv,  // integer division, x/0 crashes with Sys_Arithmetic
  kMod,
  kNeg,
  kEq,
  kNe,
  kLt,
  kLe,
  kGt,
  kGe,
  kAnd,
  kOr,
  kNot,
  kConcat,
  kSlice,     // slice(bytes, start, end)
  kLen,       // len(bytes) -> int
  kByteAt,    // byte_at(bytes, i) -> int in [0, 255]
  kLeInt,     // le_int(bytes) -> int from the first <= 8 bytes, little-endian
  kIntBytes,  // int_bytes(int, width) -> width little-endian bytes, 1..8
  kParseInt,  // parse_int(bytes) -> decimal text to int (Sys_NumberFormat)
  kToStr,     // to_str(int) -> decimal text
};

struct Expr {
  ExprOp op = ExprOp::kLit;
  Value literal;
  std::string var;
  std::vector<Expr> args;

  static Expr Lit(Value v) { return {ExprOp::kLit, std::move(v), {}, {}}; }
  static Expr Var(std::string name) {
    return {ExprOp::kVar, {}, std::move(name), {}};
  }
  static Expr Op(ExprOp op, std::vector<Expr> args) {
    return {op, {}, {}, std::move(args)};
  }
};

enum class SysPrimitive { kRandom, kNow };

// Mock point classes: system (PS), internal state (PI), external (PE).
enum class PointKind { kSystem, kInternal, kExternal };
std::string_view PointKindName(PointKind kind);  // "PS", "PI", "PE"

struct AssignStmt {
  std::string var;
  Expr expr;
};
struct SysCallStmt {
  std::string var;
  SysPrimitive primitive = SysPrimitive::kRandom;
  std::vector<size_t> volatile_fields;
};
struct StateReadStmt {
  std::string var;
  Expr key;
  std::optional<Expr> fallback;  // used when the key is absent
  std::vector<size_t> volatile_fields;
};
struct StateWriteStmt {
  Expr key;
  Expr value;
  std::vector<size_t> volatile_fields;
};
struct RpcCallStmt {
  std::string var;
  std::string app;
  std::string handler;
  std::vector<Expr> args;
  std::vector<size_t> volatile_fields;
};
struct DbReadStmt {
  std::string var;
  std::string table;
  Expr key;
  std::optional<Expr> fallback;
  std::vector<size_t> volatile_fields;
};
struct DbWriteStmt {
  std::string table;
  Expr key;
  Expr value;
  std::vector<size_t> volatile_fields;
};
// Observation only: appends the value to the request's sink log.
struct EmitSinkStmt {
  std::string sink;
  Expr value;
};

using Statement =
    std::variant<AssignStmt, SysCallStmt, StateReadStmt, StateWriteStmt,
                 RpcCallStmt, DbReadStmt, DbWriteStmt, EmitSinkStmt>;

// nullopt for Assign and EmitSink.
std::optional<PointKind> MockPointKind(const Statement &stmt);
// Volatile input positions masked before mock input comparison.
const std::vector<size_t> &VolatileFields(const Statement &stmt);
// Arity of the input tuple captured at an interception point.
size_t InputArity(const Statement &stmt);

struct BranchTerm {
  Expr cond;
  std::string then_block;
  std::string else_block;
};
struct GotoTerm {
  std::string target;
};
struct ReturnTerm {
  Expr value;
};
struct CrashTerm {
  CrashKind kind = CrashKind::kBizError;
  Expr message;
};

using Terminator = std::variant<BranchTerm, GotoTerm, ReturnTerm, CrashTerm>;

struct Block {
  std::string id;
  std::vector<Statement> stmts;
  Terminator term;
};

struct Handler {
  std::string name;
  std::vector<std::string> params;
  std::map<std::string, Block> blocks;
  std::string entry;

  // Successor block ids of `block`, without duplicates, in then/else order.
  std::vector<std::string> Successors(const Block &block) const;
  // Blocks reachable from entry, sorted by id.
  std::vector<const Block *> ReachableBlocks() const;
};

struct AppSpec {
  std::string app_id;
  std::string version_id;
  std::vector<Handler> handlers;
  std::map<Bytes, Value> initial_state;

  const Handler *FindHandler(std::string_view name) const;
  size_t BlockCount() const;
};

// Throws ParseError for malformed documents and ValidationError for
// documents that violate the model invariants. Both name the offending
// element.
AppSpec ParseAppSpec(const nlohmann::json &doc);
AppSpec ParseAppSpecText(std::string_view text);
AppSpec LoadAppSpecFile(const std::filesystem::path &path);

// Re-validates a programmatically built spec. Throws ValidationError.
void ValidateAppSpec(const AppSpec &app);

nlohmann::json AppSpecToJson(const AppSpec &app);

// Tagged, length-prefixed text forms used for block diffing. Two blocks are
// equal under diffing iff these strings are equal byte-for-byte.
std::string CanonicalExpr(const Expr &expr);
std::string CanonicalStatement(const Statement &stmt);
std::string CanonicalTerminator(const Terminator &term);
std::string CanonicalBlockBody(const Block &block);

}  // namespace meshfuzz

#endif  // MESHFUZZ_APP_SPEC_H_
