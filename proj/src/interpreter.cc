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

#include "meshfuzz/interpreter.h"

#include <charconv>
#include <limits>
#include <map>

#include "meshfuzz/errors.h"
#include "overloaded.h"

namespace meshfuzz {

using nlohmann::json;
using internal::Overloaded;

std::string Outcome::Summary() const {
  switch (status) {
    case Status::kReturned:
      return "returned " + value.ToCanonical();
    case Status::kCrashed:
      return "crashed " + std::string(CrashKindName(crash.kind)) + " at " +
             crash.location.ToString();
    case Status::kBudgetExhausted:
      return "budget_exhausted";
  }
  return {};
}

json CrashToJson(const CrashInfo &crash) {
  return {{"kind", CrashKindName(crash.kind)},
          {"message", crash.message},
          {"at", crash.location.ToString()}};
}

CrashInfo CrashFromJson(const json &j) {
  auto kind = ParseCrashKind(j.at("kind").get<std::string>());
  if (!kind) throw ParseError("unknown crash kind " + j.at("kind").dump());
  auto at = ProbeId::Parse(j.at("at").get<std::string>());
  if (!at) throw ParseError("bad crash location " + j.at("at").dump());
  return {*kind, j.at("message").get<std::string>(), std::move(*at)};
}

json OutcomeToJson(const Outcome &outcome) {
  switch (outcome.status) {
    case Outcome::Status::kReturned:
      return {{"status", "returned"}, {"value", ValueToJson(outcome.value)}};
    case Outcome::Status::kCrashed:
      return {{"status", "crashed"}, {"crash", CrashToJson(outcome.crash)}};
    case Outcome::Status::kBudgetExhausted:
      return {{"status", "budget_exhausted"}};
  }
  return nullptr;
}

Outcome OutcomeFromJson(const json &j) {
  const std::string status = j.at("status").get<std::string>();
  if (status == "returned") return Outcome::Returned(ValueFromJson(j.at("value")));
  if (status == "crashed") return Outcome::Crashed(CrashFromJson(j.at("crash")));
  if (status == "budget_exhausted") return Outcome::BudgetExhausted();
  throw ParseError("unknown outcome status " + status);
}

json EffectOutputToJson(const EffectOutput &out) {
  json j;
  switch (out.kind) {
    case EffectOutput::Kind::kValue:
      j["value"] = ValueToJson(out.value);
      break;
    case EffectOutput::Kind::kMiss:
      j["miss"] = true;
      break;
    case EffectOutput::Kind::kCrash:
      j["crash"] = CrashToJson(out.crash);
      break;
    case EffectOutput::Kind::kExhausted:
      j["exhausted"] = true;
      break;
  }
  if (out.callee) j["callee"] = SketchToJson(*out.callee);
  return j;
}

EffectOutput EffectOutputFromJson(const json &j) {
  if (!j.is_object()) throw ParseError("mock output must be an object");
  EffectOutput out;
  if (j.contains("value")) {
    out = EffectOutput::Of(ValueFromJson(j["value"]));
  } else if (j.contains("miss")) {
    out = EffectOutput::Miss();
  } else if (j.contains("crash")) {
    out = EffectOutput::Crash(CrashFromJson(j["crash"]));
  } else if (j.contains("exhausted")) {
    out = EffectOutput::Exhausted();
  } else {
    throw ParseError("mock output has no result: " + j.dump());
  }
  if (j.contains("callee")) out.callee = SketchFromJson(j["callee"]);
  return out;
}

namespace {

// Raised inside the interpreter for runtime faults of the target; converted
// to a Crashed outcome at the current block.
struct Fault {
  CrashKind kind;
  std::string message;
};

[[noreturn]] void TypeFault(std::string message) {
  throw Fault{CrashKind::kSysUnclearedThrowable, std::move(message)};
}

int64_t WrapAdd(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) + static_cast<uint64_t>(b));
}
int64_t WrapSub(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) - static_cast<uint64_t>(b));
}
int64_t WrapMul(int64_t a, int64_t b) {
  return static_cast<int64_t>(static_cast<uint64_t>(a) * static_cast<uint64_t>(b));
}

class Interpreter {
 public:
  Interpreter(ExecutionEnv &env, const AppSpec &app, const Handler &handler)
      : env_(env), app_(app), handler_(handler), budget_(env.step_budget()) {}

  Outcome Run(std::span<const Bytes> args) {
    for (size_t i = 0; i < args.size(); ++i) {
      vars_[handler_.params[i]] = Value::FromBytes(args[i]);
    }
    const Block *block = &handler_.blocks.at(handler_.entry);
    while (true) {
      ProbeId here{app_.app_id, handler_.name, block->id};
      env_.OnProbe(here);
      for (size_t i = 0; i < block->stmts.size(); ++i) {
        if (!Step()) return Outcome::BudgetExhausted();
        std::optional<Outcome> done;
        try {
          done = Exec(block->stmts[i], here, i);
        } catch (const Fault &f) {
          return Outcome::Crashed({f.kind, f.message, here});
        }
        if (done) return std::move(*done);
      }
      if (!Step()) return Outcome::BudgetExhausted();
      try {
        auto next = std::visit(
            Overloaded{
                [&](const BranchTerm &t) -> std::variant<const Block *, Outcome> {
                  Value c = Eval(t.cond);
                  if (!c.is_bool()) TypeFault("branch condition is not bool");
                  return &handler_.blocks.at(c.as_bool() ? t.then_block : t.else_block);
                },
                [&](const GotoTerm &t) -> std::variant<const Block *, Outcome> {
                  return &handler_.blocks.at(t.target);
                },
                [&](const ReturnTerm &t) -> std::variant<const Block *, Outcome> {
                  return Outcome::Returned(Eval(t.value));
                },
                [&](const CrashTerm &t) -> std::variant<const Block *, Outcome> {
                  return Outcome::Crashed({t.kind, Eval(t.message).ToDisplay(), here});
                },
            },
            block->term);
        if (auto *out = std::get_if<Outcome>(&next)) return std::move(*out);
        block = std::get<const Block *>(next);
      } catch (const Fault &f) {
        return Outcome::Crashed({f.kind, f.message, here});
      }
    }
  }

 private:
  bool Step() {
    if (steps_ >= budget_) return false;
    ++steps_;
    env_.OnStep();
    return true;
  }

  // Returns an outcome when the statement ends the invocation.
  std::optional<Outcome> Exec(const Statement &stmt, const ProbeId &here,
                              size_t index) {
    if (const auto *s = std::get_if<AssignStmt>(&stmt)) {
      vars_[s->var] = Eval(s->expr);
      return std::nullopt;
    }
    if (const auto *s = std::get_if<EmitSinkStmt>(&stmt)) {
      env_.OnSink(s->sink, Eval(s->value));
      return std::nullopt;
    }

    EffectRequest req;
    req.point = {here.app, here.handler, here.block, index};
    req.kind = *MockPointKind(stmt);
    req.statement = &stmt;
    std::string target_var;
    const std::optional<Expr> *fallback = nullptr;
    std::visit(
        Overloaded{
            [&](const SysCallStmt &s) {
              req.input.push_back(Value::FromBytes(
                  s.primitive == SysPrimitive::kRandom ? "random" : "now"));
              target_var = s.var;
            },
            [&](const StateReadStmt &s) {
              req.input.push_back(Key(Eval(s.key)));
              target_var = s.var;
              fallback = &s.fallback;
            },
            [&](const StateWriteStmt &s) {
              req.input.push_back(Key(Eval(s.key)));
              req.input.push_back(Eval(s.value));
            },
            [&](const RpcCallStmt &s) {
              for (const auto &a : s.args) {
                Value v = Eval(a);
                if (!v.is_bytes()) TypeFault("rpc arguments must be bytes");
                req.input.push_back(std::move(v));
              }
              target_var = s.var;
            },
            [&](const DbReadStmt &s) {
              req.input.push_back(Key(Eval(s.key)));
              target_var = s.var;
              fallback = &s.fallback;
            },
            [&](const DbWriteStmt &s) {
              req.input.push_back(Key(Eval(s.key)));
              req.input.push_back(Eval(s.value));
              env_.OnSink("db:" + s.table, req.input[1]);
            },
            [](const auto &) {},
        },
        stmt);

    EffectOutput out = env_.Perform(req);
    switch (out.kind) {
      case EffectOutput::Kind::kValue:
        if (!target_var.empty()) vars_[target_var] = std::move(out.value);
        return std::nullopt;
      case EffectOutput::Kind::kMiss:
        if (fallback && *fallback) {
          vars_[target_var] = Eval(**fallback);
          return std::nullopt;
        }
        return Outcome::Crashed({CrashKind::kSysNullPointer,
                                 "read of absent key " + req.input[0].ToDisplay(),
                                 here});
      case EffectOutput::Kind::kCrash:
        return Outcome::Crashed(std::move(out.crash));
      case EffectOutput::Kind::kExhausted:
        return Outcome::BudgetExhausted();
    }
    return std::nullopt;
  }

  static Value Key(Value v) {
    if (!v.is_bytes()) TypeFault("state and table keys must be bytes");
    return v;
  }

  int64_t Int(const Expr &e) {
    Value v = Eval(e);
    if (!v.is_int()) TypeFault("expected int, got " + std::string(ValueTypeName(v.type())));
    return v.as_int();
  }
  Bytes Byt(const Expr &e) {
    Value v = Eval(e);
    if (!v.is_bytes())
      TypeFault("expected bytes, got " + std::string(ValueTypeName(v.type())));
    return v.as_bytes();
  }
  bool Bool(const Expr &e) {
    Value v = Eval(e);
    if (!v.is_bool())
      TypeFault("expected bool, got " + std::string(ValueTypeName(v.type())));
    return v.as_bool();
  }

  Value Compare(const Expr &lhs, const Expr &rhs, ExprOp op) {
    Value a = Eval(lhs);
    Value b = Eval(rhs);
    if (a.type() != b.type()) TypeFault("comparison of mismatched types");
    if (op == ExprOp::kEq) return Value::FromBool(a == b);
    if (op == ExprOp::kNe) return Value::FromBool(a != b);
    if (a.is_bool()) TypeFault("ordering comparison on bool");
    auto ord = a <=> b;
    switch (op) {
      case ExprOp::kLt:
        return Value::FromBool(ord < 0);
      case ExprOp::kLe:
        return Value::FromBool(ord <= 0);
      case ExprOp::kGt:
        return Value::FromBool(ord > 0);
      default:
        return Value::FromBool(ord >= 0);
    }
  }

  Value Eval(const Expr &e) {
    const auto &a = e.args;
    switch (e.op) {
      case ExprOp::kLit:
        return e.literal;
      case ExprOp::kVar: {
        auto it = vars_.find(e.var);
        if (it == vars_.end()) TypeFault("unbound variable " + e.var);
        return it->second;
      }
      case ExprOp::kAdd:
        return Value::FromInt(WrapAdd(Int(a[0]), Int(a[1])));
      case ExprOp::kSub:
        return Value::FromInt(WrapSub(Int(a[0]), Int(a[1])));
      case ExprOp::kMul:
        return Value::FromInt(WrapMul(Int(a[0]), Int(a[1])));
      case ExprOp::kDiv:
      case ExprOp::kMod: {
        int64_t x = Int(a[0]);
        int64_t y = Int(a[1]);
        if (y == 0) throw Fault{CrashKind::kSysArithmetic, "division by zero"};
        if (x == std::numeric_limits<int64_t>::min() && y == -1) {
          return Value::FromInt(e.op == ExprOp::kDiv ? x : 0);
        }
        return Value::FromInt(e.op == ExprOp::kDiv ? x / y : x % y);
      }
      case ExprOp::kNeg:
        return Value::FromInt(WrapSub(0, Int(a[0])));
      case ExprOp::kEq:
      case ExprOp::kNe:
      case ExprOp::kLt:
      case ExprOp::kLe:
      case ExprOp::kGt:
      case ExprOp::kGe:
        return Compare(a[0], a[1], e.op);
      case ExprOp::kAnd:
        return Value::FromBool(Bool(a[0]) && Bool(a[1]));
      case ExprOp::kOr:
        return Value::FromBool(Bool(a[0]) || Bool(a[1]));
      case ExprOp::kNot:
        return Value::FromBool(!Bool(a[0]));
      case ExprOp::kConcat:
        return Value::FromBytes(Byt(a[0]) + Byt(a[1]));
      case ExprOp::kSlice: {
        Bytes s = Byt(a[0]);
        int64_t begin = Int(a[1]);
        int64_t end = Int(a[2]);
        if (begin < 0 || end < begin || end > static_cast<int64_t>(s.size())) {
          throw Fault{CrashKind::kSysBounds,
                      "slice [" + std::to_string(begin) + ", " + std::to_string(end) +
                          ") of length " + std::to_string(s.size())};
        }
        return Value::FromBytes(s.substr(begin, end - begin));
      }
      case ExprOp::kLen:
        return Value::FromInt(static_cast<int64_t>(Byt(a[0]).size()));
      case ExprOp::kByteAt: {
        Bytes s = Byt(a[0]);
        int64_t i = Int(a[1]);
        if (i < 0 || i >= static_cast<int64_t>(s.size())) {
          throw Fault{CrashKind::kSysBounds, "byte index " + std::to_string(i) +
                                                 " of length " +
                                                 std::to_string(s.size())};
        }
        return Value::FromInt(static_cast<unsigned char>(s[i]));
      }
      case ExprOp::kLeInt: {
        Bytes s = Byt(a[0]);
        uint64_t v = 0;
        for (size_t i = 0; i < s.size() && i < 8; ++i) {
          v |= static_cast<uint64_t>(static_cast<unsigned char>(s[i])) << (8 * i);
        }
        return Value::FromInt(static_cast<int64_t>(v));
      }
      case ExprOp::kIntBytes: {
        uint64_t v = static_cast<uint64_t>(Int(a[0]));
        int64_t width = Int(a[1]);
        if (width < 1 || width > 8) {
          throw Fault{CrashKind::kSysBounds, "int_bytes width " + std::to_string(width)};
        }
        Bytes out(width, '\0');
        for (int64_t i = 0; i < width; ++i) out[i] = static_cast<char>(v >> (8 * i));
        return Value::FromBytes(std::move(out));
      }
      case ExprOp::kParseInt: {
        Bytes s = Byt(a[0]);
        int64_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
          throw Fault{CrashKind::kSysNumberFormat,
                      "not a number: " + Value::FromBytes(s).ToDisplay()};
        }
        return Value::FromInt(v);
      }
      case ExprOp::kToStr:
        return Value::FromBytes(std::to_string(Int(a[0])));
    }
    TypeFault("unknown operator");
  }

  ExecutionEnv &env_;
  const AppSpec &app_;
  const Handler &handler_;
  const uint64_t budget_;
  uint64_t steps_ = 0;
  std::map<std::string, Value> vars_;
};

}  // namespace

Outcome ExecuteHandler(ExecutionEnv &env, const AppSpec &app,
                       std::string_view handler, std::span<const Bytes> args) {
  const Handler *h = app.FindHandler(handler);
  if (!h) {
    throw UnknownHandler("\"" + std::string(handler) + "\" in app \"" +
                         app.app_id + "\"");
  }
  if (args.size() != h->params.size()) {
    throw ValidationError(app.app_id + ":" + h->name + " takes " +
                          std::to_string(h->params.size()) + " arguments, got " +
                          std::to_string(args.size()));
  }
  return Interpreter(env, app, *h).Run(args);
}

}  // namespace meshfuzz
