#pragma once

#include <string>
#include <vector>

#include "webscout/primitives.hpp"
#include "webscout/sandbox.hpp"
#include "webscout/tools.hpp"

// Registers the web tools and search primitives as sandbox builtins. The
// returned registry is self-contained: closures capture the environment by
// value (pointers), so the backends must outlive the sessions using it.

namespace webscout::toolkit {

using sandbox::BuiltinCall;
using sandbox::BuiltinRegistry;
using script::List;
using script::Map;
using script::Value;

struct ToolEnv {
    tools::SearchBackend* search = nullptr;
    tools::PageFetcher* fetcher = nullptr;
    primitives::ExpansionBackend* expander = nullptr;
    primitives::ConditionEvaluator* evaluator = nullptr;
    tools::SectionSelector* selector = nullptr;  // defaults to keyword overlap
    int default_top_k = 10;
    int max_variants = 8;
    int batch_concurrency = 4;
};

namespace detail {

inline std::string clip(const std::string& s, size_t n = 60) {
    return s.size() <= n ? s : s.substr(0, n) + "…";
}

inline Value response_to_value(const tools::SearchResponse& r) {
    Map m;
    m["query"] = Value(r.query);
    List previews;
    for (const auto& p : r.previews) {
        Map pm;
        pm["title"] = Value(p.title);
        pm["url"] = Value(p.url);
        pm["snippet"] = Value(p.snippet);
        pm["rank"] = Value(static_cast<long long>(p.rank));
        previews.emplace_back(std::move(pm));
    }
    m["previews"] = Value(std::move(previews));
    List facts;
    for (const auto& e : r.entity_facts) {
        Map em;
        em["name"] = Value(e.name);
        em["description"] = Value(e.description);
        Map attrs;
        for (const auto& [k, v] : e.attributes) attrs[k] = Value(v);
        em["attributes"] = Value(std::move(attrs));
        facts.emplace_back(std::move(em));
    }
    m["entity_facts"] = Value(std::move(facts));
    List related;
    for (const auto& q : r.related_queries) related.emplace_back(q);
    m["related_queries"] = Value(std::move(related));
    m["error"] = r.error ? Value(*r.error) : Value();
    return Value(std::move(m));
}

inline Value page_to_value(const tools::ParsedPage& p) {
    Map m;
    m["url"] = Value(p.url);
    m["main_content"] = Value(p.main_content);
    List sections;
    for (const auto& s : p.relevant_sections) {
        Map sm;
        sm["heading"] = Value(s.heading);
        sm["excerpt"] = Value(s.excerpt);
        sections.emplace_back(std::move(sm));
    }
    m["relevant_sections"] = Value(std::move(sections));
    List links;
    for (const auto& l : p.sublinks) {
        Map lm;
        lm["url"] = Value(l.url);
        lm["description"] = Value(l.description);
        links.emplace_back(std::move(lm));
    }
    m["sublinks"] = Value(std::move(links));
    m["strategy"] = Value(std::string(tools::strategy_name(p.strategy)));
    m["used_fallback"] = Value(p.used_fallback);
    m["html_failure"] = p.html_failure ? Value(*p.html_failure) : Value();
    m["error"] = p.error ? Value(*p.error) : Value();
    return Value(std::move(m));
}

inline sandbox::ToolCallRecord search_record(const std::string& query, int k,
                                             const tools::SearchResponse& resp) {
    sandbox::ToolCallRecord rec;
    rec.builtin = "web_search";
    rec.digest = "web_search(\"" + clip(query) + "\", " + std::to_string(k) + ")" +
                 (resp.error ? " !error" : "");
    for (const auto& p : resp.previews) rec.urls.push_back({p.url, p.snippet});
    return rec;
}

}  // namespace detail

// Builds the sandbox registry for one executor session. When primitives are
// disabled only the plain web tools remain registered.
inline BuiltinRegistry make_tool_registry(const ToolEnv& env, bool primitives_enabled = true) {
    BuiltinRegistry reg = BuiltinRegistry::core();

    reg.add("web_search", [env](const BuiltinCall& call) {
        sandbox::want_argc(call, 1, 2, "web_search");
        const std::string& query = sandbox::want_string(call, 0, "web_search");
        int k = call.args.size() > 1 ? static_cast<int>(sandbox::want_int(call, 1, "web_search"))
                                     : env.default_top_k;
        auto resp = tools::web_search(query, k, *env.search);
        call.ctx.record_tool_call(detail::search_record(query, k, resp), call.line);
        return detail::response_to_value(resp);
    });

    reg.add("parse_page", [env](const BuiltinCall& call) {
        sandbox::want_argc(call, 1, 2, "parse_page");
        const std::string& url = sandbox::want_string(call, 0, "parse_page");
        std::string query =
            call.args.size() > 1 ? sandbox::want_string(call, 1, "parse_page") : "";
        auto& selector = env.selector ? *env.selector : tools::default_section_selector();
        auto page = tools::parse_general(url, query, *env.fetcher, selector);
        sandbox::ToolCallRecord rec;
        rec.builtin = "parse_page";
        rec.digest = "parse_page(\"" + detail::clip(url) + "\")" +
                     (page.used_fallback ? " !fallback" : "") + (page.error ? " !error" : "");
        if (!page.error) rec.urls.push_back({page.url, detail::clip(page.main_content, 100)});
        call.ctx.record_tool_call(std::move(rec), call.line);
        return detail::page_to_value(page);
    });

    reg.add("parse_paper", [env](const BuiltinCall& call) {
        sandbox::want_argc(call, 1, 2, "parse_paper");
        const std::string& identifier = sandbox::want_string(call, 0, "parse_paper");
        std::string query =
            call.args.size() > 1 ? sandbox::want_string(call, 1, "parse_paper") : "";
        auto& selector = env.selector ? *env.selector : tools::default_section_selector();
        auto page = tools::parse_paper(identifier, query, *env.fetcher, selector);
        sandbox::ToolCallRecord rec;
        rec.builtin = "parse_paper";
        rec.digest = "parse_paper(\"" + detail::clip(identifier) + "\") strategy=" +
                     tools::strategy_name(page.strategy) +
                     (page.html_failure ? " !html_failed:" + detail::clip(*page.html_failure, 40)
                                        : "") +
                     (page.error ? " !error" : "");
        if (!page.error) rec.urls.push_back({page.url, detail::clip(page.main_content, 100)});
        call.ctx.record_tool_call(std::move(rec), call.line);
        return detail::page_to_value(page);
    });

    if (!primitives_enabled) return reg;

    reg.add("generate_keywords", [env](const BuiltinCall& call) {
        sandbox::want_argc(call, 1, 2, "generate_keywords");
        const std::string& seed = sandbox::want_string(call, 0, "generate_keywords");
        int max_variants = call.args.size() > 1
                               ? static_cast<int>(sandbox::want_int(call, 1, "generate_keywords"))
                               : env.max_variants;
        primitives::KeywordSet ks;
        try {
            ks = primitives::generate_keywords(seed, *env.expander, max_variants);
        } catch (const std::invalid_argument& e) {
            sandbox::builtin_type_error(call, e.what());
        }
        sandbox::ToolCallRecord rec;
        rec.builtin = "generate_keywords";
        rec.digest = "generate_keywords(\"" + detail::clip(seed) + "\") -> " +
                     std::to_string(ks.variants.size()) + (ks.degraded ? " !degraded" : "");
        call.ctx.record_tool_call(std::move(rec), call.line);
        List out;
        for (const auto& v : ks.variants) out.emplace_back(v);
        return Value(std::move(out));
    });

    reg.add("batch_search", [env](const BuiltinCall& call) {
        sandbox::want_argc(call, 1, 2, "batch_search");
        const List& items = sandbox::want_list(call, 0, "batch_search");
        int k = call.args.size() > 1
                    ? static_cast<int>(sandbox::want_int(call, 1, "batch_search"))
                    : env.default_top_k;
        std::vector<std::string> keywords;
        for (const auto& item : items) {
            if (!item.is_string())
                sandbox::builtin_type_error(call, "batch_search expects a list of strings");
            keywords.push_back(item.as_string());
        }
        auto responses = primitives::batch_search(keywords, *env.search,
                                                  env.batch_concurrency, k);
        // the fan-out runs in parallel; record in keyword order so traces
        // stay deterministic
        List out;
        for (size_t i = 0; i < responses.size(); ++i) {
            call.ctx.record_tool_call(detail::search_record(keywords[i], k, responses[i]),
                                      call.line);
            out.push_back(detail::response_to_value(responses[i]));
        }
        return Value(std::move(out));
    });

    reg.add("check_condition", [env](const BuiltinCall& call) {
        sandbox::want_argc(call, 2, 2, "check_condition");
        const List& items = sandbox::want_list(call, 0, "check_condition");
        const std::string& condition = sandbox::want_string(call, 1, "check_condition");
        std::vector<std::string> pages;
        for (const auto& item : items) {
            if (!item.is_string())
                sandbox::builtin_type_error(call, "check_condition expects a list of strings");
            pages.push_back(item.as_string());
        }
        auto verdicts = primitives::check_condition(pages, condition, *env.evaluator);
        sandbox::ToolCallRecord rec;
        rec.builtin = "check_condition";
        rec.digest = "check_condition(" + std::to_string(pages.size()) + " pages, \"" +
                     detail::clip(condition) + "\")";
        call.ctx.record_tool_call(std::move(rec), call.line);
        List out;
        for (const auto& v : verdicts) out.emplace_back(v.value);
        return Value(std::move(out));
    });

    return reg;
}

// Tool names as listed in the executor's system prompt (registry names minus
// the core language builtins).
inline std::vector<std::string> tool_names(const BuiltinRegistry& reg) {
    auto core = BuiltinRegistry::core().names();
    std::vector<std::string> out;
    for (const auto& name : reg.names()) {
        bool is_core = std::find(core.begin(), core.end(), name) != core.end();
        if (!is_core) out.push_back(name);
    }
    return out;
}

}  // namespace webscout::toolkit
