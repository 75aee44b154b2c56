#pragma once

#include <string>
#include <utility>
#include <vector>

// Independent re-derivation of tag-block extraction, used as the oracle for
// the production scanner. Works from exhaustive position lists instead of a
// single left-to-right scan, and re-implements newline stripping and sentinel
// removal from scratch.

namespace testsupport {

struct OracleBlock {
    size_t span_begin;
    size_t span_end;
    std::string content;
};

inline const std::string& oracle_sentinel() {
    static const std::string s("\0ESC", 4);
    return s;
}

inline std::vector<OracleBlock> oracle_extract(const std::string& text, const std::string& name) {
    const std::string open = "<" + name + ">";
    const std::string close = "</" + name + ">";
    const std::string& sentinel = oracle_sentinel();

    std::vector<size_t> opens;
    for (size_t p = text.find(open); p != std::string::npos; p = text.find(open, p + 1))
        opens.push_back(p);
    std::vector<size_t> closes;
    for (size_t p = text.find(close); p != std::string::npos; p = text.find(close, p + 1)) {
        bool escaped = p >= sentinel.size() &&
                       text.compare(p - sentinel.size(), sentinel.size(), sentinel) == 0;
        if (!escaped) closes.push_back(p);
    }

    std::vector<OracleBlock> out;
    size_t cursor = 0;
    size_t oi = 0, ci = 0;
    while (oi < opens.size()) {
        size_t o = opens[oi];
        if (o < cursor) {
            ++oi;
            continue;
        }
        size_t content_begin = o + open.size();
        while (ci < closes.size() && closes[ci] < content_begin) ++ci;
        if (ci == closes.size()) break;
        size_t c = closes[ci];

        std::string raw = text.substr(content_begin, c - content_begin);
        // strip one leading and one trailing newline
        if (raw.size() >= 2 && raw[0] == '\r' && raw[1] == '\n')
            raw.erase(0, 2);
        else if (!raw.empty() && raw[0] == '\n')
            raw.erase(0, 1);
        if (raw.size() >= 2 && raw[raw.size() - 2] == '\r' && raw.back() == '\n')
            raw.erase(raw.size() - 2);
        else if (!raw.empty() && raw.back() == '\n')
            raw.pop_back();
        // drop the sentinel before every escaped close tag
        std::string pattern = sentinel + close;
        std::string content;
        size_t p = 0;
        while (p < raw.size()) {
            size_t hit = raw.find(pattern, p);
            if (hit == std::string::npos) {
                content += raw.substr(p);
                break;
            }
            content += raw.substr(p, hit - p);
            content += close;
            p = hit + pattern.size();
        }

        out.push_back({o, c + close.size(), content});
        cursor = c + close.size();
        ++ci;
        ++oi;
        while (oi < opens.size() && opens[oi] < cursor) ++oi;
    }
    return out;
}

}  // namespace testsupport
