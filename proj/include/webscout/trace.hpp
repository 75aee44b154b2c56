#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "webscout/llm.hpp"

namespace webscout::trace {

enum class Actor { Planner, Executor, Sandbox, Tool, Backend };
enum class EventKind { Turn, Delegate, Result, ScriptRun, ToolCall, Replan, Final };

inline std::string_view actor_name(Actor a) {
    switch (a) {
        case Actor::Planner: return "planner";
        case Actor::Executor: return "executor";
        case Actor::Sandbox: return "sandbox";
        case Actor::Tool: return "tool";
        case Actor::Backend: return "backend";
    }
    return "backend";
}

inline std::string_view kind_name(EventKind k) {
    switch (k) {
        case EventKind::Turn: return "turn";
        case EventKind::Delegate: return "delegate";
        case EventKind::Result: return "result";
        case EventKind::ScriptRun: return "script_run";
        case EventKind::ToolCall: return "tool_call";
        case EventKind::Replan: return "replan";
        case EventKind::Final: return "final";
    }
    return "turn";
}

inline std::optional<Actor> parse_actor(std::string_view s) {
    if (s == "planner") return Actor::Planner;
    if (s == "executor") return Actor::Executor;
    if (s == "sandbox") return Actor::Sandbox;
    if (s == "tool") return Actor::Tool;
    if (s == "backend") return Actor::Backend;
    return std::nullopt;
}

inline std::optional<EventKind> parse_kind(std::string_view s) {
    if (s == "turn") return EventKind::Turn;
    if (s == "delegate") return EventKind::Delegate;
    if (s == "result") return EventKind::Result;
    if (s == "script_run") return EventKind::ScriptRun;
    if (s == "tool_call") return EventKind::ToolCall;
    if (s == "replan") return EventKind::Replan;
    if (s == "final") return EventKind::Final;
    return std::nullopt;
}

// One appended record per model turn, delegation, script run, tool call,
// replan or final answer. The timestamp is a per-run logical counter, not a
// wall clock, so repeated runs serialize identically.
struct TraceEvent {
    std::string run_id;
    long long timestamp = 0;
    Actor actor = Actor::Backend;
    EventKind kind = EventKind::Turn;
    nlohmann::json payload = nlohmann::json::object();
    std::optional<llm::TokenUsage> tokens;
};

inline std::string to_json_line(const TraceEvent& ev) {
    nlohmann::json j;
    j["run"] = ev.run_id;
    j["t"] = ev.timestamp;
    j["actor"] = actor_name(ev.actor);
    j["kind"] = kind_name(ev.kind);
    j["payload"] = ev.payload;
    if (ev.tokens) {
        j["tokens"] = {{"prompt", ev.tokens->prompt_tokens},
                       {"completion", ev.tokens->completion_tokens}};
    }
    return j.dump();
}

inline std::optional<TraceEvent> parse_trace_line(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    TraceEvent ev;
    if (!j.contains("run") || !j["run"].is_string()) return std::nullopt;
    ev.run_id = j["run"].get<std::string>();
    if (!j.contains("t") || !j["t"].is_number()) return std::nullopt;
    ev.timestamp = j["t"].get<long long>();
    auto actor = parse_actor(j.value("actor", ""));
    auto kind = parse_kind(j.value("kind", ""));
    if (!actor || !kind) return std::nullopt;
    ev.actor = *actor;
    ev.kind = *kind;
    ev.payload = j.value("payload", nlohmann::json::object());
    if (j.contains("tokens") && j["tokens"].is_object()) {
        llm::TokenUsage usage;
        usage.prompt_tokens = j["tokens"].value("prompt", 0LL);
        usage.completion_tokens = j["tokens"].value("completion", 0LL);
        ev.tokens = usage;
    }
    return ev;
}

class TraceSink {
public:
    virtual ~TraceSink() = default;
    virtual void append(const TraceEvent& event) = 0;
};

class NullSink : public TraceSink {
public:
    void append(const TraceEvent&) override {}
};

class MemorySink : public TraceSink {
public:
    void append(const TraceEvent& event) override {
        std::lock_guard<std::mutex> lock(mu_);
        events_.push_back(event);
    }

    std::vector<TraceEvent> events() const {
        std::lock_guard<std::mutex> lock(mu_);
        return events_;
    }

private:
    mutable std::mutex mu_;
    std::vector<TraceEvent> events_;
};

inline std::string sanitize_run_id(std::string_view run_id) {
    std::string out;
    for (char c : run_id)
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c
                                                                                          : '_');
    return out.empty() ? "run" : out;
}

// One append-only file per run id under a directory. Appends from concurrent
// episodes are serialized; events of different runs land in different files.
class DirectorySink : public TraceSink {
public:
    explicit DirectorySink(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    void append(const TraceEvent& event) override {
        std::lock_guard<std::mutex> lock(mu_);
        auto& stream = streams_[event.run_id];
        if (!stream.is_open()) {
            stream.open(file_for(event.run_id), std::ios::trunc);
        }
        stream << to_json_line(event) << "\n";
        stream.flush();
    }

    std::filesystem::path file_for(std::string_view run_id) const {
        return dir_ / (sanitize_run_id(run_id) + ".trace.jsonl");
    }

private:
    std::filesystem::path dir_;
    std::map<std::string, std::ofstream> streams_;
    std::mutex mu_;
};

// Binds a sink to one run id and hands out monotone logical timestamps.
class TraceWriter {
public:
    TraceWriter(TraceSink& sink, std::string run_id)
        : sink_(&sink), run_id_(std::move(run_id)) {}

    void emit(Actor actor, EventKind kind, nlohmann::json payload = nlohmann::json::object(),
              std::optional<llm::TokenUsage> tokens = std::nullopt) {
        TraceEvent ev;
        ev.run_id = run_id_;
        ev.timestamp = next_.fetch_add(1);
        ev.actor = actor;
        ev.kind = kind;
        ev.payload = std::move(payload);
        ev.tokens = tokens;
        sink_->append(ev);
    }

    const std::string& run_id() const { return run_id_; }

private:
    TraceSink* sink_;
    std::string run_id_;
    std::atomic<long long> next_{0};
};

struct TraceFile {
    std::vector<TraceEvent> events;
    int skipped_lines = 0;
};

inline TraceFile read_trace_file(const std::filesystem::path& path) {
    TraceFile out;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        if (auto ev = parse_trace_line(line))
            out.events.push_back(std::move(*ev));
        else
            ++out.skipped_lines;
    }
    return out;
}

}  // namespace webscout::trace
