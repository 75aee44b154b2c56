#pragma once

#include <chrono>
#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "webscout/llm.hpp"
#include "webscout/search_types.hpp"

// Live-mode backends: an OpenAI-compatible chat-completion client, a plain
// HTTP page fetcher, and a SERP-API search backend. Everything here talks
// real HTTP; the rest of the library never does.

namespace webscout::live {

inline constexpr const char* kUserAgent = "webscout/1.0 (research agent; GET only)";

struct UrlParts {
    std::string origin;  // scheme://host[:port]
    std::string path;    // leading path prefix, possibly empty
};

inline UrlParts split_url(const std::string& url) {
    size_t scheme = url.find("://");
    if (scheme == std::string::npos) throw std::invalid_argument("url lacks a scheme: " + url);
    size_t path_at = url.find('/', scheme + 3);
    UrlParts parts;
    if (path_at == std::string::npos) {
        parts.origin = url;
    } else {
        parts.origin = url.substr(0, path_at);
        parts.path = url.substr(path_at);
        if (parts.path == "/") parts.path.clear();
    }
    return parts;
}

// Chat-completion client with bounded retries and exponential backoff.
class HttpCompletionBackend : public llm::CompletionBackend {
public:
    explicit HttpCompletionBackend(llm::HttpBackendConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.base_url.empty())
            throw llm::CompletionError("live backend requires a base url "
                                       "(WEBSCOUT_API_BASE)");
    }

    llm::Completion complete(const std::vector<llm::Message>& messages,
                             const llm::CompletionParams& params) override {
        nlohmann::json body;
        body["model"] = cfg_.model;
        body["max_tokens"] = params.max_completion_tokens;
        body["temperature"] = params.temperature;
        if (!params.stop_sequences.empty()) body["stop"] = params.stop_sequences;
        auto& msgs = body["messages"] = nlohmann::json::array();
        for (const auto& m : messages)
            msgs.push_back({{"role", llm::role_name(m.role)}, {"content", m.content}});

        UrlParts parts = split_url(cfg_.base_url);
        std::string endpoint = parts.path + "/chat/completions";
        std::string last_error;
        int backoff_ms = cfg_.initial_backoff_ms;
        for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
                backoff_ms *= 2;
            }
            httplib::Client client(parts.origin);
            client.set_read_timeout(cfg_.timeout_s, 0);
            httplib::Headers headers = {{"User-Agent", kUserAgent}};
            if (!cfg_.api_key.empty())
                headers.emplace("Authorization", "Bearer " + cfg_.api_key);
            auto res = client.Post(endpoint, headers, body.dump(), "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status != 200) {
                last_error = "status " + std::to_string(res->status);
                continue;
            }
            try {
                auto j = nlohmann::json::parse(res->body);
                llm::Completion out;
                out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
                if (j.contains("usage")) {
                    out.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0LL);
                    out.usage.completion_tokens = j["usage"].value("completion_tokens", 0LL);
                } else {
                    out.usage = llm::synthetic_usage(messages, out.text);
                }
                return out;
            } catch (const std::exception& e) {
                last_error = std::string("malformed response: ") + e.what();
            }
        }
        throw llm::CompletionError("completion failed after " +
                                   std::to_string(cfg_.max_retries + 1) + " attempt(s): " +
                                   last_error);
    }

private:
    llm::HttpBackendConfig cfg_;
};

// Plain GET fetcher with a custom agent string. Network failures come back
// as status 0 plus an error note, never as exceptions.
class HttpFetcher : public tools::PageFetcher {
public:
    explicit HttpFetcher(int timeout_s = 30) : timeout_s_(timeout_s) {}

    tools::FetchResult fetch(const std::string& url) override {
        tools::FetchResult out;
        UrlParts parts;
        try {
            parts = split_url(url);
        } catch (const std::exception& e) {
            out.error = e.what();
            return out;
        }
        httplib::Client client(parts.origin);
        client.set_read_timeout(timeout_s_, 0);
        client.set_follow_location(true);
        auto res = client.Get(parts.path.empty() ? "/" : parts.path,
                              {{"User-Agent", kUserAgent}});
        if (!res) {
            out.error = "transport error: " + httplib::to_string(res.error());
            return out;
        }
        out.status = res->status;
        out.content_type = res->get_header_value("Content-Type");
        out.body = res->body;
        if (!out.ok()) out.error = "status " + std::to_string(res->status);
        return out;
    }

private:
    int timeout_s_;
};

struct SerpConfig {
    std::string base_url;  // endpoint returning SERP JSON
    std::string api_key;

    static SerpConfig from_env() {
        SerpConfig cfg;
        if (const char* v = std::getenv("WEBSCOUT_SERP_API_BASE")) cfg.base_url = v;
        if (const char* v = std::getenv("WEBSCOUT_SERP_API_KEY")) cfg.api_key = v;
        return cfg;
    }
};

// Speaks a SERP-API style JSON contract: organic_results with title/link/
// snippet, optional knowledge_graph, optional related_searches.
class SerpApiBackend : public tools::SearchBackend {
public:
    explicit SerpApiBackend(SerpConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.base_url.empty())
            throw std::invalid_argument("SERP backend requires a base url "
                                        "(WEBSCOUT_SERP_API_BASE)");
    }

    tools::SearchResponse search(const std::string& query, int k) override {
        tools::SearchResponse resp;
        resp.query = query;
        UrlParts parts = split_url(cfg_.base_url);
        httplib::Client client(parts.origin);
        client.set_read_timeout(30, 0);
        httplib::Params params = {{"q", query}, {"num", std::to_string(k)}};
        if (!cfg_.api_key.empty()) params.emplace("api_key", cfg_.api_key);
        auto res = client.Get(parts.path.empty() ? "/" : parts.path, params,
                              {{"User-Agent", kUserAgent}});
        if (!res) {
            resp.error = "transport error: " + httplib::to_string(res.error());
            return resp;
        }
        if (res->status != 200) {
            resp.error = "status " + std::to_string(res->status);
            return resp;
        }
        try {
            auto j = nlohmann::json::parse(res->body);
            int rank = 1;
            for (const auto& item : j.value("organic_results", nlohmann::json::array())) {
                if (rank > k) break;
                tools::SearchPreview p;
                p.title = item.value("title", "");
                p.url = item.value("link", "");
                p.snippet = item.value("snippet", "");
                p.rank = rank++;
                resp.previews.push_back(std::move(p));
            }
            if (j.contains("knowledge_graph")) {
                const auto& kg = j["knowledge_graph"];
                tools::EntityFact e;
                e.name = kg.value("title", "");
                e.description = kg.value("description", "");
                for (auto it = kg.begin(); it != kg.end(); ++it)
                    if (it.value().is_string() && it.key() != "title" &&
                        it.key() != "description")
                        e.attributes[it.key()] = it.value().get<std::string>();
                if (!e.name.empty()) resp.entity_facts.push_back(std::move(e));
            }
            for (const auto& r : j.value("related_searches", nlohmann::json::array())) {
                if (r.is_string())
                    resp.related_queries.push_back(r.get<std::string>());
                else if (r.is_object() && r.contains("query"))
                    resp.related_queries.push_back(r["query"].get<std::string>());
            }
        } catch (const std::exception& e) {
            resp.entity_facts.clear();
            resp.previews.clear();
            resp.related_queries.clear();
            resp.error = std::string("malformed SERP response: ") + e.what();
        }
        return resp;
    }

private:
    SerpConfig cfg_;
};

}  // namespace webscout::live
