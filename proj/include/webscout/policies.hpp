#pragma once

#include <string>
#include <vector>

#include "webscout/llm.hpp"
#include "webscout/protocol.hpp"
#include "webscout/util.hpp"

// Rule-scripted planner and executor policies: deterministic completion
// functions that solve the synthetic closed-world tasks through the real
// pipeline. They stand in for live models in tests, benchmarks and demos.

namespace webscout::policies {

inline std::vector<std::string> quoted_values(const std::string& text) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (true) {
        size_t open = text.find('"', pos);
        if (open == std::string::npos) break;
        size_t close = text.find('"', open + 1);
        if (close == std::string::npos) break;
        std::string v = text.substr(open + 1, close - open - 1);
        if (!trim(v).empty()) out.push_back(std::move(v));
        pos = close + 1;
    }
    return out;
}

namespace detail {

inline std::string script_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string predicate_for(const std::vector<std::string>& values) {
    // conjunction of quoted substrings, escaped for a script string literal
    std::string pred;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) pred += " AND ";
        pred += "\\\"" + values[i] + "\\\"";
    }
    return pred;
}

// Primitive-driven search: expand keywords for two constraint values, batch
// the whole set, parse every unique preview, then filter with one
// check_condition call over all pages.
inline std::string primitive_script(const std::vector<std::string>& values) {
    std::string compound = join(values, " ");
    std::string s;
    s += "query = " + script_quote(compound) + "\n";
    s += "kws = generate_keywords(" + script_quote(values[0]) + ")\n";
    s += "kws = append(kws, query)\n";
    if (values.size() > 1) {
        s += "more = generate_keywords(" + script_quote(values[1]) + ")\n";
        s += "for m in more { kws = append(kws, m) }\n";
    }
    s += "rs = batch_search(kws)\n";
    s += "seen = []\n";
    s += "pages = []\n";
    s += "titles = []\n";
    s += "for r in rs {\n";
    s += "  for p in r[\"previews\"] {\n";
    s += "    u = p[\"url\"]\n";
    s += "    if contains(seen, u) { } else {\n";
    s += "      seen = append(seen, u)\n";
    s += "      pg = parse_page(u, query)\n";
    s += "      pages = append(pages, pg[\"main_content\"])\n";
    s += "      titles = append(titles, p[\"title\"])\n";
    s += "    }\n";
    s += "  }\n";
    s += "}\n";
    s += "flags = check_condition(pages, \"" + predicate_for(values) + "\")\n";
    s += "for i in range(len(flags)) {\n";
    s += "  if flags[i] { print(\"MATCH: \" + titles[i] + \" @ \" + seen[i]) }\n";
    s += "}\n";
    s += "print(\"checked \" + str(len(pages)) + \" pages\")\n";
    return s;
}

// Plain-tool variant for the primitives-disabled ablation: single search,
// manual substring filtering.
inline std::string plain_script(const std::vector<std::string>& values) {
    std::string compound = join(values, " ");
    std::string s;
    s += "query = " + script_quote(compound) + "\n";
    s += "r = web_search(query, 10)\n";
    s += "seen = []\n";
    s += "for p in r[\"previews\"] {\n";
    s += "  u = p[\"url\"]\n";
    s += "  if contains(seen, u) { } else {\n";
    s += "    seen = append(seen, u)\n";
    s += "    pg = parse_page(u, query)\n";
    s += "    body = pg[\"main_content\"]\n";
    s += "    ok = true\n";
    for (const auto& v : values)
        s += "    ok = ok and contains(body, " + script_quote(v) + ")\n";
    s += "    if ok { print(\"MATCH: \" + p[\"title\"] + \" @ \" + u) }\n";
    s += "  }\n";
    s += "}\n";
    return s;
}

struct MatchLine {
    std::string title;
    std::string url;
};

inline std::vector<MatchLine> parse_match_lines(const std::string& output) {
    std::vector<MatchLine> out;
    for (const auto& raw : split_lines(output)) {
        std::string line = trim(raw);
        if (!line.starts_with("MATCH: ")) continue;
        std::string rest = line.substr(7);
        size_t at = rest.rfind(" @ ");
        MatchLine m;
        if (at == std::string::npos) {
            m.title = trim(rest);
        } else {
            m.title = trim(rest.substr(0, at));
            m.url = trim(rest.substr(at + 3));
        }
        if (!m.title.empty()) out.push_back(std::move(m));
    }
    return out;
}

}  // namespace detail

// Executor policy: first turn emits one search-and-filter script derived from
// the quoted constraint values in the sub-task; the next turn distills the
// printed matches into a plain-text answer.
inline std::string executor_policy(const std::vector<llm::Message>& messages) {
    bool primitives_available =
        !messages.empty() &&
        messages.front().content.find("batch_search") != std::string::npos;

    std::string task;
    for (const auto& m : messages) {
        if (m.role == llm::Role::User) {
            task = m.content;
            break;
        }
    }
    auto values = quoted_values(task);

    std::vector<std::string> exec_results;
    for (const auto& m : messages) {
        if (m.role != llm::Role::User) continue;
        for (const auto& b :
             protocol::extract_blocks(m.content, protocol::Tag::ExecutionResults))
            exec_results.push_back(b.content);
    }

    if (!exec_results.empty()) {
        auto matches = detail::parse_match_lines(exec_results.back());
        if (!matches.empty()) {
            // profile pages carry the bare entity name; prefer them
            for (const auto& m : matches)
                if (m.url.find("/wiki/") != std::string::npos) return m.title;
            return matches[0].title;
        }
        if (exec_results.size() == 1 && primitives_available && !values.empty()) {
            // one broader retry before giving up
            return "The filtered search found nothing; trying plain search.\n<code>\n" +
                   detail::plain_script(values) + "</code>";
        }
        return "No matching entity found.";
    }

    if (values.empty()) return "No searchable constraints found in the sub-task.";
    std::string script = primitives_available ? detail::primitive_script(values)
                                              : detail::plain_script(values);
    return "Searching the archive for the constrained entity.\n<code>\n" + script + "</code>";
}

// Planner policy: delegate the question once, then finalize on the
// executor's distilled answer with high confidence (low when it failed).
inline std::string planner_policy(const std::vector<llm::Message>& messages) {
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role != llm::Role::User) continue;
        auto blocks = protocol::extract_blocks(it->content, protocol::Tag::Result);
        if (blocks.empty()) continue;
        std::string summary = trim(blocks[0].content);
        auto lines = split_lines(summary);
        std::string first_line = lines.empty() ? "" : trim(lines[0]);
        bool failed = first_line.empty() || summary.starts_with("[degraded") ||
                      summary.starts_with("No matching") || summary.starts_with("No searchable");
        if (failed)
            return "The executor could not confirm a match.\nFINAL ANSWER: unknown\n"
                   "CONFIDENCE: 0.2";
        return "The executor confirmed a unique match.\nFINAL ANSWER: " + first_line +
               "\nCONFIDENCE: 0.95";
    }

    std::string question;
    for (const auto& m : messages) {
        if (m.role == llm::Role::User) {
            question = m.content;
            break;
        }
    }
    size_t notes = question.find("\n\nNotes from the previous attempt:");
    if (notes != std::string::npos) question.resize(notes);
    return "The question pins several attributes; one retrieval pass should settle it.\n"
           "<task>" +
           question + "</task>";
}

inline llm::PolicyBackend make_planner_backend() {
    return llm::PolicyBackend(planner_policy);
}

inline llm::PolicyBackend make_executor_backend() {
    return llm::PolicyBackend(executor_policy);
}

}  // namespace webscout::policies
