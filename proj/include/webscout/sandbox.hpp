#pragma once

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "webscout/script/ast.hpp"
#include "webscout/script/parser.hpp"
#include "webscout/script/value.hpp"

// Stateful, session-isolated interpreter for the agent scripting language.
// Bindings and function definitions persist across executions within one
// session; distinct sessions never observe each other. All failures come back
// as data in ExecutionOutput, never as exceptions.

namespace webscout::sandbox {

using script::List;
using script::Map;
using script::Program;
using script::Range;
using script::ScriptError;
using script::Stmt;
using script::Value;

struct ResourceLimits {
    std::chrono::milliseconds max_wall_time{30000};
    size_t max_stdout_bytes = 16384;
    long long max_loop_iterations = 100000;
    int max_tool_calls_per_execution = 256;
};

struct UrlRef {
    std::string url;
    std::string snippet;
};

struct ToolCallRecord {
    std::string builtin;
    std::string digest;        // compact argument preview
    std::vector<UrlRef> urls;  // pages this call touched
};

struct ExecutionOutput {
    std::string stdout_text;
    std::optional<std::string> error;
    std::chrono::microseconds wall_time{0};
    bool truncated = false;
    std::vector<ToolCallRecord> tool_calls;
};

inline constexpr std::string_view kTruncationMarker = "\n…[truncated]";
inline constexpr int kMaxCallDepth = 64;

// Per-execution mutable state shared with builtins: the stdout buffer, the
// tool-call log and the resource meters.
class ExecContext {
public:
    explicit ExecContext(const ResourceLimits& limits)
        : limits_(limits),
          deadline_(std::chrono::steady_clock::now() + limits.max_wall_time) {}

    void print(std::string_view text) {
        if (truncated_) return;
        size_t cap = limits_.max_stdout_bytes;
        if (stdout_.size() + text.size() <= cap) {
            stdout_.append(text);
            return;
        }
        truncated_ = true;
        std::string marker(kTruncationMarker);
        size_t keep = cap > marker.size() ? cap - marker.size() : 0;
        std::string combined = stdout_ + std::string(text);
        stdout_ = combined.substr(0, keep) + marker;
        if (stdout_.size() > cap) stdout_.resize(cap);
    }

    void record_tool_call(ToolCallRecord rec, int line) {
        if (static_cast<int>(tool_calls_.size()) >= limits_.max_tool_calls_per_execution)
            throw ScriptError{ScriptError::Kind::Limit, line,
                              "tool calls exceed the per-execution cap of " +
                                  std::to_string(limits_.max_tool_calls_per_execution)};
        tool_calls_.push_back(std::move(rec));
    }

    void check_deadline(int line) {
        if (std::chrono::steady_clock::now() > deadline_)
            throw ScriptError{ScriptError::Kind::Limit, line,
                              "wall time exceeds " +
                                  std::to_string(limits_.max_wall_time.count()) + " ms"};
    }

    void count_iteration(int line) {
        if (++iterations_ > limits_.max_loop_iterations)
            throw ScriptError{ScriptError::Kind::Limit, line,
                              "loop iterations exceed " +
                                  std::to_string(limits_.max_loop_iterations)};
        check_deadline(line);
    }

    const std::string& stdout_text() const { return stdout_; }
    bool truncated() const { return truncated_; }
    std::vector<ToolCallRecord> take_tool_calls() { return std::move(tool_calls_); }
    const ResourceLimits& limits() const { return limits_; }

private:
    ResourceLimits limits_;
    std::chrono::steady_clock::time_point deadline_;
    std::string stdout_;
    bool truncated_ = false;
    std::vector<ToolCallRecord> tool_calls_;
    long long iterations_ = 0;
};

struct BuiltinCall {
    ExecContext& ctx;
    int line;
    const std::vector<Value>& args;
};

using BuiltinFn = std::function<Value(const BuiltinCall&)>;

// --- builtin argument helpers (shared with the tool builtins) ---------------

[[noreturn]] inline void builtin_type_error(const BuiltinCall& call, const std::string& msg) {
    throw ScriptError{ScriptError::Kind::Type, call.line, msg};
}

inline void want_argc(const BuiltinCall& call, size_t min_args, size_t max_args,
                      const char* builtin) {
    if (call.args.size() < min_args || call.args.size() > max_args) {
        std::string expected = min_args == max_args
                                   ? std::to_string(min_args)
                                   : std::to_string(min_args) + ".." + std::to_string(max_args);
        builtin_type_error(call, std::string(builtin) + " expects " + expected +
                                     " argument(s), got " + std::to_string(call.args.size()));
    }
}

inline const std::string& want_string(const BuiltinCall& call, size_t i, const char* builtin) {
    if (i >= call.args.size() || !call.args[i].is_string())
        builtin_type_error(call, std::string(builtin) + " expects a string for argument " +
                                     std::to_string(i + 1));
    return call.args[i].as_string();
}

inline long long want_int(const BuiltinCall& call, size_t i, const char* builtin) {
    if (i >= call.args.size() || !call.args[i].is_int())
        builtin_type_error(call, std::string(builtin) + " expects an integer for argument " +
                                     std::to_string(i + 1));
    return call.args[i].as_int();
}

inline const List& want_list(const BuiltinCall& call, size_t i, const char* builtin) {
    if (i >= call.args.size() || !call.args[i].is_list())
        builtin_type_error(call, std::string(builtin) + " expects a list for argument " +
                                     std::to_string(i + 1));
    return call.args[i].as_list();
}

class BuiltinRegistry {
public:
    void add(std::string name, BuiltinFn fn) { fns_[std::move(name)] = std::move(fn); }

    bool has(std::string_view name) const { return fns_.find(std::string(name)) != fns_.end(); }

    const BuiltinFn* find(std::string_view name) const {
        auto it = fns_.find(std::string(name));
        return it == fns_.end() ? nullptr : &it->second;
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& [name, fn] : fns_) out.push_back(name);
        return out;
    }

    static BuiltinRegistry core();

private:
    std::map<std::string, BuiltinFn> fns_;
};

// --- core builtins -----------------------------------------------------------

namespace detail {

inline Value builtin_print(const BuiltinCall& call) {
    std::string line;
    for (size_t i = 0; i < call.args.size(); ++i) {
        if (i) line += ' ';
        line += script::repr(call.args[i]);
    }
    line += '\n';
    call.ctx.print(line);
    return Value();
}

inline Value builtin_len(const BuiltinCall& call) {
    want_argc(call, 1, 1, "len");
    const Value& v = call.args[0];
    if (v.is_string()) return Value(static_cast<long long>(v.as_string().size()));
    if (v.is_list()) return Value(static_cast<long long>(v.as_list().size()));
    if (v.is_map()) return Value(static_cast<long long>(v.as_map().size()));
    if (v.is_range()) return Value(v.as_range().size());
    builtin_type_error(call, std::string("len does not apply to ") + v.type_name());
}

inline Value builtin_range(const BuiltinCall& call) {
    want_argc(call, 1, 2, "range");
    if (call.args.size() == 1) return Value(Range{0, want_int(call, 0, "range")});
    return Value(Range{want_int(call, 0, "range"), want_int(call, 1, "range")});
}

inline Value builtin_str(const BuiltinCall& call) {
    want_argc(call, 1, 1, "str");
    return Value(script::repr(call.args[0]));
}

inline Value builtin_int(const BuiltinCall& call) {
    want_argc(call, 1, 1, "int");
    const Value& v = call.args[0];
    if (v.is_int()) return v;
    if (v.is_float()) return Value(static_cast<long long>(v.as_float()));
    if (v.is_bool()) return Value(static_cast<long long>(v.as_bool() ? 1 : 0));
    if (v.is_string()) {
        errno = 0;
        char* end = nullptr;
        const std::string& s = v.as_string();
        long long parsed = std::strtoll(s.c_str(), &end, 10);
        while (end && *end == ' ') ++end;
        if (errno == ERANGE || end == s.c_str() || (end && *end != '\0'))
            throw ScriptError{ScriptError::Kind::Runtime, call.line,
                              "int cannot parse '" + s + "'"};
        return Value(parsed);
    }
    builtin_type_error(call, std::string("int does not apply to ") + v.type_name());
}

inline Value builtin_append(const BuiltinCall& call) {
    want_argc(call, 2, 2, "append");
    List out = want_list(call, 0, "append");
    out.push_back(call.args[1]);
    return Value(std::move(out));
}

inline Value builtin_contains(const BuiltinCall& call) {
    want_argc(call, 2, 2, "contains");
    const Value& c = call.args[0];
    if (c.is_string()) {
        const std::string& needle = want_string(call, 1, "contains");
        return Value(c.as_string().find(needle) != std::string::npos);
    }
    if (c.is_list()) {
        for (const auto& item : c.as_list())
            if (item == call.args[1]) return Value(true);
        return Value(false);
    }
    if (c.is_map()) {
        const std::string& key = want_string(call, 1, "contains");
        return Value(c.as_map().count(key) > 0);
    }
    builtin_type_error(call, std::string("contains does not apply to ") + c.type_name());
}

inline Value builtin_lower(const BuiltinCall& call) {
    want_argc(call, 1, 1, "lower");
    std::string out = want_string(call, 0, "lower");
    for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return Value(std::move(out));
}

inline Value builtin_upper(const BuiltinCall& call) {
    want_argc(call, 1, 1, "upper");
    std::string out = want_string(call, 0, "upper");
    for (char& ch : out) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return Value(std::move(out));
}

inline Value builtin_split(const BuiltinCall& call) {
    want_argc(call, 2, 2, "split");
    const std::string& s = want_string(call, 0, "split");
    const std::string& sep = want_string(call, 1, "split");
    if (sep.empty()) builtin_type_error(call, "split separator must be non-empty");
    List out;
    size_t start = 0;
    while (true) {
        size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + sep.size();
    }
    return Value(std::move(out));
}

inline Value builtin_join(const BuiltinCall& call) {
    want_argc(call, 2, 2, "join");
    const List& items = want_list(call, 0, "join");
    const std::string& sep = want_string(call, 1, "join");
    std::string out;
    for (size_t i = 0; i < items.size(); ++i) {
        if (!items[i].is_string())
            builtin_type_error(call, "join expects a list of strings");
        if (i) out += sep;
        out += items[i].as_string();
    }
    return Value(std::move(out));
}

inline Value builtin_replace(const BuiltinCall& call) {
    want_argc(call, 3, 3, "replace");
    std::string s = want_string(call, 0, "replace");
    const std::string& from = want_string(call, 1, "replace");
    const std::string& to = want_string(call, 2, "replace");
    if (from.empty()) return Value(std::move(s));
    size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return Value(std::move(s));
}

inline Value builtin_strip(const BuiltinCall& call) {
    want_argc(call, 1, 1, "strip");
    const std::string& s = want_string(call, 0, "strip");
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return Value(s.substr(b, e - b));
}

inline Value builtin_keys(const BuiltinCall& call) {
    want_argc(call, 1, 1, "keys");
    if (!call.args[0].is_map()) builtin_type_error(call, "keys expects a map");
    List out;
    for (const auto& [k, v] : call.args[0].as_map()) out.emplace_back(k);
    return Value(std::move(out));
}

inline Value builtin_sorted(const BuiltinCall& call) {
    want_argc(call, 1, 1, "sorted");
    List out = want_list(call, 0, "sorted");
    bool all_strings = true, all_numbers = true;
    for (const auto& v : out) {
        all_strings = all_strings && v.is_string();
        all_numbers = all_numbers && v.is_number();
    }
    if (!all_strings && !all_numbers)
        builtin_type_error(call, "sorted expects all strings or all numbers");
    std::stable_sort(out.begin(), out.end(), [&](const Value& a, const Value& b) {
        if (all_strings) return a.as_string() < b.as_string();
        return a.as_number() < b.as_number();
    });
    return Value(std::move(out));
}

}  // namespace detail

inline BuiltinRegistry BuiltinRegistry::core() {
    BuiltinRegistry reg;
    reg.add("print", detail::builtin_print);
    reg.add("len", detail::builtin_len);
    reg.add("range", detail::builtin_range);
    reg.add("str", detail::builtin_str);
    reg.add("int", detail::builtin_int);
    reg.add("append", detail::builtin_append);
    reg.add("contains", detail::builtin_contains);
    reg.add("lower", detail::builtin_lower);
    reg.add("upper", detail::builtin_upper);
    reg.add("split", detail::builtin_split);
    reg.add("join", detail::builtin_join);
    reg.add("replace", detail::builtin_replace);
    reg.add("strip", detail::builtin_strip);
    reg.add("keys", detail::builtin_keys);
    reg.add("sorted", detail::builtin_sorted);
    return reg;
}

// --- the evaluator ------------------------------------------------------------

namespace detail {

struct ReturnSignal {
    Value value;
};

inline long long checked_add(long long a, long long b, int line) {
    long long r;
    if (__builtin_add_overflow(a, b, &r))
        throw ScriptError{ScriptError::Kind::Runtime, line, "integer overflow"};
    return r;
}

inline long long checked_sub(long long a, long long b, int line) {
    long long r;
    if (__builtin_sub_overflow(a, b, &r))
        throw ScriptError{ScriptError::Kind::Runtime, line, "integer overflow"};
    return r;
}

inline long long checked_mul(long long a, long long b, int line) {
    long long r;
    if (__builtin_mul_overflow(a, b, &r))
        throw ScriptError{ScriptError::Kind::Runtime, line, "integer overflow"};
    return r;
}

}  // namespace detail

// One isolated interpreter with persistent memory. Executions are serialized
// by an internal mutex; distinct sessions are fully independent.
class SessionState {
public:
    SessionState(std::string id, ResourceLimits limits, BuiltinRegistry builtins)
        : id_(std::move(id)), limits_(limits), builtins_(std::move(builtins)) {}

    const std::string& id() const { return id_; }
    int execution_count() const { return execution_count_; }

    size_t binding_count() const {
        std::lock_guard<std::mutex> lock(mu_);
        return globals_.size();
    }

    std::optional<Value> binding(std::string_view name) const {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = globals_.find(std::string(name));
        if (it == globals_.end()) return std::nullopt;
        return it->second;
    }

    // Canonical picture of the session state, for equivalence checks.
    std::map<std::string, std::string> bindings_snapshot() const {
        std::lock_guard<std::mutex> lock(mu_);
        std::map<std::string, std::string> out;
        for (const auto& [name, value] : globals_) out[name] = script::repr(value, true);
        return out;
    }

    ExecutionOutput execute(std::string_view source) {
        std::lock_guard<std::mutex> lock(mu_);
        ++execution_count_;
        ExecutionOutput out;
        ExecContext ctx(limits_);
        auto started = std::chrono::steady_clock::now();
        try {
            auto program = std::make_shared<const Program>(script::Parser::parse(source));
            current_program_ = program;
            Env env{nullptr, &ctx, 0};
            for (const auto& stmt : program->statements) {
                ctx.check_deadline(stmt->line);
                exec_stmt(*stmt, env);
            }
        } catch (const ScriptError& e) {
            out.error = e.text();
        } catch (const detail::ReturnSignal&) {
            out.error = "runtime error: return outside of a function";
        }
        current_program_.reset();
        out.stdout_text = ctx.stdout_text();
        out.truncated = ctx.truncated();
        out.tool_calls = ctx.take_tool_calls();
        out.wall_time = std::chrono::duration_cast<std::chrono::microseconds>(
            std::chrono::steady_clock::now() - started);
        return out;
    }

private:
    struct Env {
        std::map<std::string, Value>* locals;  // null at top level
        ExecContext* ctx;
        int depth;
    };

    struct Func {
        const Stmt* def;
        std::shared_ptr<const Program> owner;  // keeps the AST alive across executions
    };

    void exec_block(const std::vector<script::StmtPtr>& body, Env& env) {
        for (const auto& stmt : body) {
            env.ctx->check_deadline(stmt->line);
            exec_stmt(*stmt, env);
        }
    }

    void exec_stmt(const Stmt& stmt, Env& env) {
        switch (stmt.kind) {
            case Stmt::Kind::Expr:
                eval(*stmt.expr, env);
                return;
            case Stmt::Kind::Assign: {
                Value v = eval(*stmt.expr, env);
                if (env.locals)
                    (*env.locals)[stmt.name] = std::move(v);
                else
                    globals_[stmt.name] = std::move(v);
                return;
            }
            case Stmt::Kind::If: {
                if (eval_condition(*stmt.expr, env))
                    exec_block(stmt.body, env);
                else
                    exec_block(stmt.else_body, env);
                return;
            }
            case Stmt::Kind::For: {
                Value iterable = eval(*stmt.expr, env);
                auto assign_var = [&](Value v) {
                    if (env.locals)
                        (*env.locals)[stmt.name] = std::move(v);
                    else
                        globals_[stmt.name] = std::move(v);
                };
                if (iterable.is_list()) {
                    // the shared list is immutable, so iterating it directly is safe
                    for (const auto& item : iterable.as_list()) {
                        env.ctx->count_iteration(stmt.line);
                        assign_var(item);
                        exec_block(stmt.body, env);
                    }
                } else if (iterable.is_range()) {
                    Range r = iterable.as_range();
                    for (long long i = r.begin; i < r.end; ++i) {
                        env.ctx->count_iteration(stmt.line);
                        assign_var(Value(i));
                        exec_block(stmt.body, env);
                    }
                } else if (iterable.is_string()) {
                    for (char c : iterable.as_string()) {
                        env.ctx->count_iteration(stmt.line);
                        assign_var(Value(std::string(1, c)));
                        exec_block(stmt.body, env);
                    }
                } else {
                    throw ScriptError{ScriptError::Kind::Type, stmt.line,
                                      std::string("cannot iterate over ") +
                                          iterable.type_name()};
                }
                return;
            }
            case Stmt::Kind::While: {
                while (eval_condition(*stmt.expr, env)) {
                    env.ctx->count_iteration(stmt.line);
                    exec_block(stmt.body, env);
                }
                return;
            }
            case Stmt::Kind::FuncDef:
                functions_[stmt.name] = Func{&stmt, current_program_};
                return;
            case Stmt::Kind::Return: {
                detail::ReturnSignal sig;
                if (stmt.expr) sig.value = eval(*stmt.expr, env);
                throw sig;
            }
        }
    }

    bool eval_condition(const script::Expr& expr, Env& env) {
        Value v = eval(expr, env);
        if (!v.is_bool())
            throw ScriptError{ScriptError::Kind::Type, expr.line,
                              std::string("condition must be a boolean, got ") + v.type_name()};
        return v.as_bool();
    }

    Value lookup(const std::string& name, Env& env, int line) {
        if (env.locals) {
            auto it = env.locals->find(name);
            if (it != env.locals->end()) return it->second;
        }
        auto it = globals_.find(name);
        if (it != globals_.end()) return it->second;
        throw ScriptError{ScriptError::Kind::UndefinedName, line, "'" + name + "'"};
    }

    Value eval(const script::Expr& expr, Env& env) {
        using K = script::Expr::Kind;
        switch (expr.kind) {
            case K::NullLit: return Value();
            case K::BoolLit: return Value(expr.bool_value);
            case K::IntLit: return Value(expr.int_value);
            case K::FloatLit: return Value(expr.float_value);
            case K::StrLit: return Value(expr.str_value);
            case K::ListLit: {
                List items;
                items.reserve(expr.items.size());
                for (const auto& item : expr.items) items.push_back(eval(*item, env));
                return Value(std::move(items));
            }
            case K::MapLit: {
                Map entries;
                for (const auto& [key, value] : expr.entries)
                    entries[key] = eval(*value, env);
                return Value(std::move(entries));
            }
            case K::Name: return lookup(expr.name, env, expr.line);
            case K::Index: return eval_index(expr, env);
            case K::Call: return eval_call(expr, env);
            case K::Unary: {
                if (expr.name == "not") {
                    Value v = eval(*expr.items[0], env);
                    if (!v.is_bool())
                        throw ScriptError{ScriptError::Kind::Type, expr.line,
                                          std::string("'not' expects a boolean, got ") +
                                              v.type_name()};
                    return Value(!v.as_bool());
                }
                Value v = eval(*expr.items[0], env);
                if (v.is_int()) return Value(detail::checked_sub(0, v.as_int(), expr.line));
                if (v.is_float()) return Value(-v.as_float());
                throw ScriptError{ScriptError::Kind::Type, expr.line,
                                  std::string("unary '-' expects a number, got ") +
                                      v.type_name()};
            }
            case K::Binary: return eval_binary(expr, env);
        }
        throw ScriptError{ScriptError::Kind::Runtime, expr.line, "unreachable expression kind"};
    }

    Value eval_index(const script::Expr& expr, Env& env) {
        Value obj = eval(*expr.items[0], env);
        Value idx = eval(*expr.items[1], env);
        if (obj.is_list() || obj.is_string()) {
            if (!idx.is_int())
                throw ScriptError{ScriptError::Kind::Type, expr.line,
                                  std::string("index must be an integer, got ") +
                                      idx.type_name()};
            long long n = obj.is_list() ? static_cast<long long>(obj.as_list().size())
                                        : static_cast<long long>(obj.as_string().size());
            long long i = idx.as_int();
            if (i < 0) i += n;
            if (i < 0 || i >= n)
                throw ScriptError{ScriptError::Kind::Runtime, expr.line,
                                  "index " + std::to_string(idx.as_int()) +
                                      " out of range (size " + std::to_string(n) + ")"};
            if (obj.is_list()) return obj.as_list()[static_cast<size_t>(i)];
            return Value(std::string(1, obj.as_string()[static_cast<size_t>(i)]));
        }
        if (obj.is_map()) {
            if (!idx.is_string())
                throw ScriptError{ScriptError::Kind::Type, expr.line,
                                  std::string("map keys are strings, got ") + idx.type_name()};
            auto it = obj.as_map().find(idx.as_string());
            if (it == obj.as_map().end())
                throw ScriptError{ScriptError::Kind::Runtime, expr.line,
                                  "key not found: '" + idx.as_string() + "'"};
            return it->second;
        }
        throw ScriptError{ScriptError::Kind::Type, expr.line,
                          std::string("cannot index ") + obj.type_name()};
    }

    Value eval_call(const script::Expr& expr, Env& env) {
        // user-defined functions shadow builtins
        auto fit = functions_.find(expr.name);
        if (fit != functions_.end()) {
            if (env.depth + 1 > kMaxCallDepth)
                throw ScriptError{ScriptError::Kind::Limit, expr.line,
                                  "call depth exceeds " + std::to_string(kMaxCallDepth)};
            const Stmt& def = *fit->second.def;
            if (def.params.size() != expr.items.size())
                throw ScriptError{ScriptError::Kind::Runtime, expr.line,
                                  def.name + " expects " + std::to_string(def.params.size()) +
                                      " argument(s), got " + std::to_string(expr.items.size())};
            std::map<std::string, Value> locals;
            for (size_t i = 0; i < def.params.size(); ++i)
                locals[def.params[i]] = eval(*expr.items[i], env);
            Env inner{&locals, env.ctx, env.depth + 1};
            try {
                exec_block(def.body, inner);
            } catch (detail::ReturnSignal& sig) {
                return std::move(sig.value);
            }
            return Value();
        }
        if (const BuiltinFn* fn = builtins_.find(expr.name)) {
            std::vector<Value> args;
            args.reserve(expr.items.size());
            for (const auto& item : expr.items) args.push_back(eval(*item, env));
            env.ctx->check_deadline(expr.line);
            return (*fn)(BuiltinCall{*env.ctx, expr.line, args});
        }
        throw ScriptError{ScriptError::Kind::UndefinedName, expr.line,
                          "'" + expr.name + "' is not a function or builtin"};
    }

    Value eval_binary(const script::Expr& expr, Env& env) {
        const std::string& op = expr.name;
        if (op == "and" || op == "or") {
            Value lhs = eval(*expr.items[0], env);
            if (!lhs.is_bool())
                throw ScriptError{ScriptError::Kind::Type, expr.line,
                                  "'" + op + "' expects booleans, got " +
                                      std::string(lhs.type_name())};
            if (op == "and" && !lhs.as_bool()) return Value(false);
            if (op == "or" && lhs.as_bool()) return Value(true);
            Value rhs = eval(*expr.items[1], env);
            if (!rhs.is_bool())
                throw ScriptError{ScriptError::Kind::Type, expr.line,
                                  "'" + op + "' expects booleans, got " +
                                      std::string(rhs.type_name())};
            return rhs;
        }
        Value lhs = eval(*expr.items[0], env);
        Value rhs = eval(*expr.items[1], env);
        if (op == "==") return Value(lhs == rhs);
        if (op == "!=") return Value(!(lhs == rhs));
        if (op == "+") {
            if (lhs.is_int() && rhs.is_int())
                return Value(detail::checked_add(lhs.as_int(), rhs.as_int(), expr.line));
            if (lhs.is_number() && rhs.is_number())
                return Value(lhs.as_number() + rhs.as_number());
            if (lhs.is_string() && rhs.is_string()) return Value(lhs.as_string() + rhs.as_string());
            throw ScriptError{ScriptError::Kind::Type, expr.line,
                              std::string("cannot add ") + lhs.type_name() + " and " +
                                  rhs.type_name()};
        }
        if (op == "-" || op == "*") {
            if (lhs.is_int() && rhs.is_int())
                return Value(op == "-"
                                 ? detail::checked_sub(lhs.as_int(), rhs.as_int(), expr.line)
                                 : detail::checked_mul(lhs.as_int(), rhs.as_int(), expr.line));
            if (lhs.is_number() && rhs.is_number())
                return Value(op == "-" ? lhs.as_number() - rhs.as_number()
                                       : lhs.as_number() * rhs.as_number());
            throw ScriptError{ScriptError::Kind::Type, expr.line,
                              "'" + op + "' expects numbers"};
        }
        if (op == "/") {
            if (lhs.is_int() && rhs.is_int()) {
                if (rhs.as_int() == 0)
                    throw ScriptError{ScriptError::Kind::Runtime, expr.line, "division by zero"};
                if (lhs.as_int() == std::numeric_limits<long long>::min() && rhs.as_int() == -1)
                    throw ScriptError{ScriptError::Kind::Runtime, expr.line, "integer overflow"};
                return Value(lhs.as_int() / rhs.as_int());
            }
            if (lhs.is_number() && rhs.is_number()) {
                if (rhs.as_number() == 0.0)
                    throw ScriptError{ScriptError::Kind::Runtime, expr.line, "division by zero"};
                return Value(lhs.as_number() / rhs.as_number());
            }
            throw ScriptError{ScriptError::Kind::Type, expr.line, "'/' expects numbers"};
        }
        if (op == "%") {
            if (!lhs.is_int() || !rhs.is_int())
                throw ScriptError{ScriptError::Kind::Type, expr.line, "'%' expects integers"};
            if (rhs.as_int() == 0)
                throw ScriptError{ScriptError::Kind::Runtime, expr.line, "modulo by zero"};
            if (lhs.as_int() == std::numeric_limits<long long>::min() && rhs.as_int() == -1)
                throw ScriptError{ScriptError::Kind::Runtime, expr.line, "integer overflow"};
            return Value(lhs.as_int() % rhs.as_int());
        }
        // ordering comparisons
        bool lt_ok = (lhs.is_number() && rhs.is_number()) || (lhs.is_string() && rhs.is_string());
        if (!lt_ok)
            throw ScriptError{ScriptError::Kind::Type, expr.line,
                              std::string("cannot compare ") + lhs.type_name() + " and " +
                                  rhs.type_name()};
        int cmp;
        if (lhs.is_string())
            cmp = lhs.as_string() < rhs.as_string() ? -1
                  : lhs.as_string() == rhs.as_string() ? 0
                                                       : 1;
        else
            cmp = lhs.as_number() < rhs.as_number() ? -1
                  : lhs.as_number() == rhs.as_number() ? 0
                                                       : 1;
        if (op == "<") return Value(cmp < 0);
        if (op == "<=") return Value(cmp <= 0);
        if (op == ">") return Value(cmp > 0);
        if (op == ">=") return Value(cmp >= 0);
        throw ScriptError{ScriptError::Kind::Runtime, expr.line, "unknown operator '" + op + "'"};
    }

    std::string id_;
    ResourceLimits limits_;
    BuiltinRegistry builtins_;
    int execution_count_ = 0;
    std::map<std::string, Value> globals_;
    std::map<std::string, Func> functions_;
    std::shared_ptr<const Program> current_program_;
    mutable std::mutex mu_;
};

// Session host. Creation and destruction are cheap; destroy is idempotent and
// an execute on a destroyed session reports "session closed" as data.
class Sandbox {
public:
    std::string create_session(const ResourceLimits& limits, BuiltinRegistry builtins) {
        std::lock_guard<std::mutex> lock(mu_);
        std::string id = "s" + std::to_string(++counter_);
        sessions_[id] = std::make_shared<SessionState>(id, limits, std::move(builtins));
        return id;
    }

    ExecutionOutput execute(const std::string& session_id, std::string_view script) {
        std::shared_ptr<SessionState> session = find(session_id);
        if (!session) {
            ExecutionOutput out;
            out.error = "session closed: " + session_id;
            return out;
        }
        return session->execute(script);
    }

    void destroy_session(const std::string& session_id) {
        std::lock_guard<std::mutex> lock(mu_);
        sessions_.erase(session_id);
    }

    bool exists(const std::string& session_id) const {
        std::lock_guard<std::mutex> lock(mu_);
        return sessions_.count(session_id) > 0;
    }

    std::shared_ptr<SessionState> find(const std::string& session_id) const {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = sessions_.find(session_id);
        return it == sessions_.end() ? nullptr : it->second;
    }

private:
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<SessionState>> sessions_;
    long long counter_ = 0;
};

}  // namespace webscout::sandbox
