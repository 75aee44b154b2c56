#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "webscout/search_types.hpp"
#include "webscout/util.hpp"

// Small hand-rolled HTML helpers: enough for boilerplate-heavy article pages
// and the simulated corpus renderer. No DOM, no JavaScript, no CSS.

namespace webscout::html {

namespace detail {

inline bool is_container_tag(std::string_view name) {
    static const char* tags[] = {"div",    "section", "article", "nav",  "header", "footer",
                                 "aside",  "main",    "body",    "html", "head",   "table",
                                 "title"};
    for (const char* t : tags)
        if (name == t) return true;
    return false;
}

inline std::string decode_entities(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '&') {
            if (text.substr(i).starts_with("&amp;")) {
                out += '&';
                i += 5;
                continue;
            }
            if (text.substr(i).starts_with("&lt;")) {
                out += '<';
                i += 4;
                continue;
            }
            if (text.substr(i).starts_with("&gt;")) {
                out += '>';
                i += 4;
                continue;
            }
            if (text.substr(i).starts_with("&quot;")) {
                out += '"';
                i += 6;
                continue;
            }
            if (text.substr(i).starts_with("&#39;")) {
                out += '\'';
                i += 5;
                continue;
            }
        }
        out += text[i++];
    }
    return out;
}

inline std::string collapse_ws(std::string_view text) {
    std::string out;
    bool pending_space = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out += ' ';
            pending_space = false;
            out += c;
        }
    }
    return out;
}

// Lowercased element name of the tag starting at '<'; empty for comments etc.
inline std::string tag_name_at(std::string_view html, size_t lt) {
    size_t i = lt + 1;
    if (i < html.size() && html[i] == '/') ++i;
    std::string name;
    while (i < html.size() &&
           (std::isalnum(static_cast<unsigned char>(html[i])) || html[i] == '-')) {
        name += static_cast<char>(std::tolower(static_cast<unsigned char>(html[i])));
        ++i;
    }
    return name;
}

inline size_t skip_element_content(std::string_view html, size_t after_open,
                                   std::string_view name) {
    std::string close = "</" + std::string(name);
    size_t pos = html.find(close, after_open);
    if (pos == std::string_view::npos) return html.size();
    size_t gt = html.find('>', pos);
    return gt == std::string_view::npos ? html.size() : gt + 1;
}

}  // namespace detail

// Plain text of an HTML document: script/style dropped, tags become spaces,
// common entities decoded, whitespace collapsed.
inline std::string strip_tags(std::string_view html) {
    std::string text;
    size_t i = 0;
    while (i < html.size()) {
        if (html[i] == '<') {
            std::string name = detail::tag_name_at(html, i);
            size_t gt = html.find('>', i);
            if (gt == std::string_view::npos) break;
            i = gt + 1;
            if (name == "script" || name == "style")
                i = detail::skip_element_content(html, i, name);
            text += ' ';
            continue;
        }
        text += html[i++];
    }
    return detail::collapse_ws(detail::decode_entities(text));
}

struct Chunk {
    std::string text;     // collapsed text content
    size_t markup = 0;    // bytes spent on tags inside the chunk
    size_t order = 0;
};

// Splits a document at container-tag boundaries; inline markup stays inside
// its chunk and counts against its density.
inline std::vector<Chunk> density_chunks(std::string_view html) {
    std::vector<Chunk> chunks;
    std::string raw_text;
    size_t markup = 0;
    auto flush = [&]() {
        Chunk c;
        c.text = detail::collapse_ws(detail::decode_entities(raw_text));
        c.markup = markup;
        c.order = chunks.size();
        if (!c.text.empty() || c.markup > 0) chunks.push_back(std::move(c));
        raw_text.clear();
        markup = 0;
    };
    size_t i = 0;
    while (i < html.size()) {
        if (html[i] == '<') {
            std::string name = detail::tag_name_at(html, i);
            size_t gt = html.find('>', i);
            if (gt == std::string_view::npos) break;
            size_t tag_len = gt + 1 - i;
            if (name == "script" || name == "style") {
                size_t end = detail::skip_element_content(html, gt + 1, name);
                markup += end - i;
                i = end;
                continue;
            }
            if (detail::is_container_tag(name)) {
                flush();
                markup += tag_len;
            } else {
                markup += tag_len;
            }
            i = gt + 1;
            continue;
        }
        raw_text += html[i++];
    }
    flush();
    return chunks;
}

// The main-content heuristic: the contiguous chunk with the best
// length-weighted text-to-markup ratio wins. Empty when the page has no text.
inline std::string extract_main_content(std::string_view html) {
    auto chunks = density_chunks(html);
    double best_score = 0.0;
    const Chunk* best = nullptr;
    for (const auto& c : chunks) {
        double len = static_cast<double>(c.text.size());
        double density = len / (len + static_cast<double>(c.markup) + 1.0);
        double score = len * density;
        if (score > best_score) {
            best_score = score;
            best = &c;
        }
    }
    return best ? best->text : std::string();
}

inline std::string resolve_href(std::string_view href, std::string_view base_url) {
    if (href.starts_with("http://") || href.starts_with("https://")) return std::string(href);
    size_t scheme = base_url.find("://");
    if (scheme == std::string_view::npos) return std::string(href);
    if (href.starts_with("/")) {
        size_t host_end = base_url.find('/', scheme + 3);
        std::string_view origin =
            host_end == std::string_view::npos ? base_url : base_url.substr(0, host_end);
        return std::string(origin) + std::string(href);
    }
    size_t last_slash = base_url.rfind('/');
    if (last_slash <= scheme + 2) return std::string(base_url) + "/" + std::string(href);
    return std::string(base_url.substr(0, last_slash + 1)) + std::string(href);
}

// All anchors with their visible text as the short description.
inline std::vector<tools::SubLink> harvest_links(std::string_view html,
                                                 std::string_view base_url = "") {
    std::vector<tools::SubLink> links;
    size_t i = 0;
    while (true) {
        size_t a = html.find("<a", i);
        if (a == std::string_view::npos) break;
        size_t gt = html.find('>', a);
        if (gt == std::string_view::npos) break;
        std::string_view tag = html.substr(a, gt - a);
        size_t href = tag.find("href=");
        if (href == std::string_view::npos) {
            i = gt + 1;
            continue;
        }
        size_t q = href + 5;
        std::string url;
        if (q < tag.size() && (tag[q] == '"' || tag[q] == '\'')) {
            char quote = tag[q];
            size_t end = tag.find(quote, q + 1);
            if (end != std::string_view::npos) url = std::string(tag.substr(q + 1, end - q - 1));
        }
        size_t close = html.find("</a>", gt);
        std::string text = close == std::string_view::npos
                               ? std::string()
                               : strip_tags(html.substr(gt + 1, close - gt - 1));
        if (!url.empty()) {
            tools::SubLink link;
            link.url = base_url.empty() ? url : resolve_href(url, base_url);
            link.description = text;
            links.push_back(std::move(link));
        }
        i = close == std::string_view::npos ? gt + 1 : close + 4;
    }
    return links;
}

inline std::string find_title(std::string_view html) {
    size_t open = html.find("<title");
    if (open == std::string_view::npos) return "";
    size_t gt = html.find('>', open);
    size_t close = html.find("</title>", open);
    if (gt == std::string_view::npos || close == std::string_view::npos || close < gt) return "";
    return strip_tags(html.substr(gt + 1, close - gt - 1));
}

namespace detail {

struct HeadingPos {
    size_t open = 0;   // '<' of the heading open tag
    size_t after = 0;  // one past '>' of the heading close tag
    std::string text;
};

inline std::vector<HeadingPos> find_headings(std::string_view html) {
    std::vector<HeadingPos> headings;
    size_t i = 0;
    while (i < html.size()) {
        size_t lt = html.find('<', i);
        if (lt == std::string_view::npos) break;
        std::string name = tag_name_at(html, lt);
        bool is_heading = name.size() == 2 && name[0] == 'h' && name[1] >= '1' &&
                          name[1] <= '6' && lt + 1 < html.size() && html[lt + 1] != '/';
        if (is_heading) {
            size_t gt = html.find('>', lt);
            size_t close = html.find("</" + name, lt);
            if (gt != std::string_view::npos && close != std::string_view::npos && close > gt) {
                size_t close_gt = html.find('>', close);
                HeadingPos h;
                h.open = lt;
                h.after = close_gt == std::string_view::npos ? html.size() : close_gt + 1;
                h.text = strip_tags(html.substr(gt + 1, close - gt - 1));
                headings.push_back(std::move(h));
                i = headings.back().after;
                continue;
            }
        }
        i = lt + 1;
    }
    return headings;
}

}  // namespace detail

// Heading-delimited sections; documents without headings yield one unnamed
// section holding the leading text.
inline std::vector<tools::Section> split_sections(std::string_view html, size_t excerpt_cap = 480) {
    std::vector<tools::Section> sections;
    auto headings = detail::find_headings(html);
    if (headings.empty()) {
        std::string text = strip_tags(html);
        if (!text.empty()) sections.push_back({"", text.substr(0, excerpt_cap)});
        return sections;
    }
    for (size_t h = 0; h < headings.size(); ++h) {
        size_t begin = headings[h].after;
        size_t end = h + 1 < headings.size() ? headings[h + 1].open : html.size();
        std::string excerpt = strip_tags(html.substr(begin, end - begin));
        sections.push_back({headings[h].text, excerpt.substr(0, excerpt_cap)});
    }
    return sections;
}

}  // namespace webscout::html
