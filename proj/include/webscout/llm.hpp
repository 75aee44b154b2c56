#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "webscout/util.hpp"

namespace webscout::llm {

enum class Role { System, User, Assistant };

inline std::string_view role_name(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

struct Message {
    Role role = Role::User;
    std::string content;
};

struct CompletionParams {
    int max_completion_tokens = 65536;
    double temperature = 0.6;
    std::vector<std::string> stop_sequences;
};

struct TokenUsage {
    long long prompt_tokens = 0;
    long long completion_tokens = 0;

    long long total() const { return prompt_tokens + completion_tokens; }
};

struct Completion {
    std::string text;
    TokenUsage usage;
};

class CompletionError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    virtual Completion complete(const std::vector<Message>& messages,
                                const CompletionParams& params) = 0;
};

// Stable key for record/replay: hash of role:content pairs with a record
// separator so adjacent messages cannot alias.
inline std::string prompt_digest(const std::vector<Message>& messages) {
    std::string buf;
    for (const auto& m : messages) {
        buf += role_name(m.role);
        buf += ':';
        buf += m.content;
        buf += '\x1e';
    }
    return hex64(fnv1a64(buf));
}

// Deterministic token proxy for non-live backends: one token per 4 chars.
inline long long synthetic_token_count(std::string_view text) {
    return static_cast<long long>(text.size() / 4);
}

inline TokenUsage synthetic_usage(const std::vector<Message>& messages, std::string_view reply) {
    TokenUsage usage;
    for (const auto& m : messages) usage.prompt_tokens += synthetic_token_count(m.content);
    usage.completion_tokens = synthetic_token_count(reply);
    return usage;
}

inline void check_preconditions(const std::vector<Message>& messages) {
    if (messages.empty()) throw CompletionError("completion requires a non-empty message list");
    if (messages.front().role != Role::System)
        throw CompletionError("first message must carry the system role");
}

// Entry point used by the orchestrator; precondition checks live here so
// every backend sees well-formed requests.
inline Completion complete(const std::vector<Message>& messages, const CompletionParams& params,
                           CompletionBackend& backend) {
    check_preconditions(messages);
    return backend.complete(messages, params);
}

// Replays a fixed queue of responses by turn index.
class QueueBackend : public CompletionBackend {
public:
    QueueBackend() = default;
    explicit QueueBackend(std::vector<std::string> responses) : responses_(std::move(responses)) {}

    void push(std::string response) { responses_.push_back(std::move(response)); }

    Completion complete(const std::vector<Message>& messages,
                        const CompletionParams&) override {
        size_t idx = next_.fetch_add(1);
        if (idx >= responses_.size())
            throw CompletionError("script underrun: queued " + std::to_string(responses_.size()) +
                                  " responses, call #" + std::to_string(idx + 1) + " requested");
        return {responses_[idx], synthetic_usage(messages, responses_[idx])};
    }

    size_t calls() const { return next_.load(); }

private:
    std::vector<std::string> responses_;
    std::atomic<size_t> next_{0};
};

// Computes the response from the full message list. The function must be a
// pure function of its input for runs to stay reproducible.
class PolicyBackend : public CompletionBackend {
public:
    using PolicyFn = std::function<std::string(const std::vector<Message>&)>;

    explicit PolicyBackend(PolicyFn fn) : fn_(std::move(fn)) {}

    Completion complete(const std::vector<Message>& messages,
                        const CompletionParams&) override {
        std::string text = fn_(messages);
        return {text, synthetic_usage(messages, text)};
    }

private:
    PolicyFn fn_;
};

struct CassetteRecord {
    std::string digest;
    std::string response;
    TokenUsage usage;
};

inline std::string cassette_line(const CassetteRecord& rec) {
    nlohmann::json j;
    j["digest"] = rec.digest;
    j["response"] = rec.response;
    j["prompt_tokens"] = rec.usage.prompt_tokens;
    j["completion_tokens"] = rec.usage.completion_tokens;
    return j.dump();
}

inline CassetteRecord parse_cassette_line(const std::string& line) {
    auto j = nlohmann::json::parse(line);
    CassetteRecord rec;
    rec.digest = j.at("digest").get<std::string>();
    rec.response = j.at("response").get<std::string>();
    rec.usage.prompt_tokens = j.value("prompt_tokens", 0LL);
    rec.usage.completion_tokens = j.value("completion_tokens", 0LL);
    return rec;
}

// Wraps another backend and appends every exchange to a cassette file
// (line-delimited records keyed by prompt digest).
class RecordingBackend : public CompletionBackend {
public:
    RecordingBackend(CompletionBackend& inner, const std::string& cassette_path)
        : inner_(inner), out_(cassette_path, std::ios::trunc) {
        if (!out_.good())
            throw CompletionError("cannot open cassette for writing: " + cassette_path);
    }

    Completion complete(const std::vector<Message>& messages,
                        const CompletionParams& params) override {
        Completion c = inner_.complete(messages, params);
        CassetteRecord rec{prompt_digest(messages), c.text, c.usage};
        std::lock_guard<std::mutex> lock(mu_);
        out_ << cassette_line(rec) << "\n";
        out_.flush();
        return c;
    }

private:
    CompletionBackend& inner_;
    std::ofstream out_;
    std::mutex mu_;
};

// Answers from a cassette by prompt digest. Each recorded occurrence serves
// exactly one call; a miss is an error naming the nearest recorded digest.
class ReplayBackend : public CompletionBackend {
public:
    explicit ReplayBackend(std::vector<CassetteRecord> records) {
        for (auto& rec : records) by_digest_[rec.digest].push_back(std::move(rec));
    }

    static ReplayBackend from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in.good()) throw CompletionError("cannot open cassette: " + path);
        std::vector<CassetteRecord> records;
        std::string line;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            records.push_back(parse_cassette_line(line));
        }
        return ReplayBackend(std::move(records));
    }

    Completion complete(const std::vector<Message>& messages,
                        const CompletionParams&) override {
        std::string digest = prompt_digest(messages);
        std::lock_guard<std::mutex> lock(mu_);
        auto it = by_digest_.find(digest);
        if (it == by_digest_.end() || it->second.empty())
            throw CompletionError("replay miss for digest " + digest +
                                  "; nearest recorded: " + nearest_locked(digest));
        CassetteRecord rec = std::move(it->second.front());
        it->second.pop_front();
        return {std::move(rec.response), rec.usage};
    }

private:
    std::string nearest_locked(const std::string& digest) const {
        std::string best = "(cassette empty)";
        size_t best_len = 0;
        bool found = false;
        for (const auto& [key, queue] : by_digest_) {
            size_t common = 0;
            while (common < key.size() && common < digest.size() && key[common] == digest[common])
                ++common;
            if (!found || common > best_len) {
                best = key;
                best_len = common;
                found = true;
            }
        }
        return best;
    }

    std::map<std::string, std::deque<CassetteRecord>> by_digest_;
    std::mutex mu_;
};

struct HttpBackendConfig {
    std::string base_url;  // e.g. http://127.0.0.1:8080/v1
    std::string api_key;
    std::string model;
    int max_retries = 3;
    int initial_backoff_ms = 200;
    int timeout_s = 120;
};

// Environment variable names for the live backend; a role prefix such as
// WEBSCOUT_PLANNER_ / WEBSCOUT_EXECUTOR_ overrides the shared values.
inline HttpBackendConfig http_config_from_env(const std::string& role_prefix = "") {
    auto getenv_or = [](const std::string& key, const std::string& fallback_key) -> std::string {
        if (!key.empty())
            if (const char* v = std::getenv(key.c_str())) return v;
        if (const char* v = std::getenv(fallback_key.c_str())) return v;
        return "";
    };
    std::string prefix = role_prefix.empty() ? "" : "WEBSCOUT_" + role_prefix + "_";
    HttpBackendConfig cfg;
    cfg.base_url = getenv_or(prefix.empty() ? "" : prefix + "API_BASE", "WEBSCOUT_API_BASE");
    cfg.api_key = getenv_or(prefix.empty() ? "" : prefix + "API_KEY", "WEBSCOUT_API_KEY");
    cfg.model = getenv_or(prefix.empty() ? "" : prefix + "MODEL", "WEBSCOUT_MODEL");
    return cfg;
}

}  // namespace webscout::llm
