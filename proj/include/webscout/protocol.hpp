#pragma once

#include <array>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "webscout/util.hpp"

// Tagged-block message protocol. All planner<->executor and
// executor<->sandbox traffic is carried in <task>/<result>/<code>/
// <execution_results> blocks embedded in otherwise free-form model output.

namespace webscout::protocol {

enum class Tag { Task, Result, Code, ExecutionResults };

inline std::string_view tag_name(Tag t) {
    switch (t) {
        case Tag::Task: return "task";
        case Tag::Result: return "result";
        case Tag::Code: return "code";
        case Tag::ExecutionResults: return "execution_results";
    }
    return "";
}

inline std::string open_tag(Tag t) { return "<" + std::string(tag_name(t)) + ">"; }
inline std::string close_tag(Tag t) { return "</" + std::string(tag_name(t)) + ">"; }

// A literal close tag inside wrapped content is escaped by prefixing this
// 4-byte sentinel; extraction strips it. NUL keeps it out of honest model text.
inline const std::string& escape_sentinel() {
    static const std::string sentinel("\0ESC", 4);
    return sentinel;
}

struct TagBlock {
    Tag tag;
    std::string content;
    size_t span_begin = 0;  // offset of '<' of the open tag
    size_t span_end = 0;    // one past '>' of the close tag
};

namespace detail {

inline std::string escape_close_tags(std::string_view content, const std::string& close) {
    std::string out;
    out.reserve(content.size());
    size_t pos = 0;
    while (pos < content.size()) {
        size_t hit = content.find(close, pos);
        if (hit == std::string_view::npos) {
            out.append(content.substr(pos));
            break;
        }
        out.append(content.substr(pos, hit - pos));
        out.append(escape_sentinel());
        out.append(close);
        pos = hit + close.size();
    }
    return out;
}

inline std::string strip_escapes(std::string_view content, const std::string& close) {
    const std::string& sentinel = escape_sentinel();
    std::string pattern = sentinel + close;
    std::string out;
    out.reserve(content.size());
    size_t pos = 0;
    while (pos < content.size()) {
        size_t hit = content.find(pattern, pos);
        if (hit == std::string_view::npos) {
            out.append(content.substr(pos));
            break;
        }
        out.append(content.substr(pos, hit - pos));
        out.append(close);
        pos = hit + pattern.size();
    }
    return out;
}

// One leading and one trailing newline belong to the wrapping, not the content.
inline std::string_view strip_single_newlines(std::string_view s) {
    if (s.starts_with("\r\n"))
        s.remove_prefix(2);
    else if (s.starts_with("\n"))
        s.remove_prefix(1);
    if (s.ends_with("\r\n"))
        s.remove_suffix(2);
    else if (s.ends_with("\n"))
        s.remove_suffix(1);
    return s;
}

inline bool is_escaped_close(std::string_view text, size_t close_pos) {
    const std::string& sentinel = escape_sentinel();
    return close_pos >= sentinel.size() &&
           text.substr(close_pos - sentinel.size(), sentinel.size()) == sentinel;
}

}  // namespace detail

// Scans for every well-formed block of `tag`, in source order. A block runs
// from an open tag to the first following unescaped close tag; nested open
// tags of the same name are treated as plain content (the outermost open
// wins). Unclosed opens yield nothing. Never fails on malformed input.
inline std::vector<TagBlock> extract_blocks(std::string_view text, Tag tag) {
    std::vector<TagBlock> out;
    const std::string open = open_tag(tag);
    const std::string close = close_tag(tag);
    size_t pos = 0;
    while (pos < text.size()) {
        size_t o = text.find(open, pos);
        if (o == std::string_view::npos) break;
        size_t content_begin = o + open.size();
        size_t c = content_begin;
        size_t close_at = std::string_view::npos;
        while (true) {
            c = text.find(close, c);
            if (c == std::string_view::npos) break;
            if (detail::is_escaped_close(text, c)) {
                c += close.size();
                continue;
            }
            close_at = c;
            break;
        }
        if (close_at == std::string_view::npos) break;  // no unescaped close left at all
        std::string_view raw = text.substr(content_begin, close_at - content_begin);
        TagBlock block;
        block.tag = tag;
        block.content = detail::strip_escapes(detail::strip_single_newlines(raw), close);
        block.span_begin = o;
        block.span_end = close_at + close.size();
        pos = block.span_end;
        out.push_back(std::move(block));
    }
    return out;
}

// Inverse of extract_blocks for a single block:
// extract_blocks(wrap_block(t, c), t) == [c] for any content c.
inline std::string wrap_block(Tag tag, std::string_view content) {
    return open_tag(tag) + "\n" + detail::escape_close_tags(content, close_tag(tag)) + "\n" +
           close_tag(tag);
}

struct Delegate {
    std::string sub_task;
};
struct Finalize {
    std::string answer;
    double confidence = 0.0;
};
struct Continue {};

using PlannerAction = std::variant<Delegate, Finalize, Continue>;

struct RunScript {
    std::string script;
};
struct FinalResult {
    std::string summary;
};

using ExecutorAction = std::variant<RunScript, FinalResult>;

inline constexpr std::string_view kAnswerMarker = "FINAL ANSWER:";
inline constexpr std::string_view kConfidenceMarker = "CONFIDENCE:";

namespace detail {

// Confidence is the first parseable real after the marker, clamped to [0,1].
// A marker without a parseable number reads as 0.0, which forces replanning.
inline double parse_confidence_after(std::string_view text) {
    size_t at = text.find(kConfidenceMarker);
    if (at == std::string_view::npos) return 0.0;
    std::string tail(text.substr(at + kConfidenceMarker.size()));
    const char* begin = tail.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) return 0.0;
    return clamp01(v);
}

}  // namespace detail

// First <task> block wins; otherwise an answer-marker line finalizes;
// otherwise the planner is still thinking. Never throws on arbitrary input.
inline PlannerAction parse_planner_turn(std::string_view text,
                                        std::string_view answer_marker = kAnswerMarker) {
    for (const auto& block : extract_blocks(text, Tag::Task)) {
        std::string task = trim(block.content);
        if (!task.empty()) return Delegate{std::move(task)};
    }

    size_t line_start = 0;
    while (line_start <= text.size()) {
        size_t line_end = text.find('\n', line_start);
        if (line_end == std::string_view::npos) line_end = text.size();
        std::string_view line = text.substr(line_start, line_end - line_start);
        size_t first = 0;
        while (first < line.size() && std::isspace(static_cast<unsigned char>(line[first])))
            ++first;
        if (line.substr(first).starts_with(answer_marker)) {
            size_t answer_begin = line_start + first + answer_marker.size();
            size_t answer_end = text.size();
            size_t conf_at = text.find(kConfidenceMarker, answer_begin);
            if (conf_at != std::string_view::npos) answer_end = conf_at;
            std::string answer = trim(text.substr(answer_begin, answer_end - answer_begin));
            return Finalize{std::move(answer),
                            detail::parse_confidence_after(text.substr(answer_begin))};
        }
        if (line_end == text.size()) break;
        line_start = line_end + 1;
    }
    return Continue{};
}

namespace detail {

// Reasoning models front-load a <think> section; it is not part of the result.
inline std::string strip_think_sections(std::string_view text) {
    std::string out(text);
    while (true) {
        size_t open = out.find("<think>");
        if (open == std::string::npos) break;
        size_t close = out.find("</think>", open);
        if (close == std::string::npos) break;
        out.erase(open, close + 8 - open);
    }
    return out;
}

}  // namespace detail

// First <code> block wins; a turn with no code is the executor's final,
// distilled answer. Never throws on arbitrary input.
inline ExecutorAction parse_executor_turn(std::string_view text) {
    for (const auto& block : extract_blocks(text, Tag::Code)) {
        if (!trim(block.content).empty()) return RunScript{block.content};
    }
    return FinalResult{trim(detail::strip_think_sections(text))};
}

}  // namespace webscout::protocol
