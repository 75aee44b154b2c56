#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "webscout/corpus.hpp"
#include "webscout/html.hpp"
#include "webscout/search_types.hpp"
#include "webscout/util.hpp"

// Web search and web parse, each behind one interface with a simulated
// backend here and live HTTP backends in live.hpp.

namespace webscout::tools {

// --- snippets and scoring ----------------------------------------------------

// The highest-scoring 160-char window around the first query-term hit; the
// head of the document when nothing hits.
inline std::string make_snippet(const std::string& text,
                                const std::set<std::string>& query_tokens,
                                size_t width = 160) {
    if (text.size() <= width) return text;

    // token positions
    size_t first_hit = std::string::npos;
    {
        std::string cur;
        size_t start = 0;
        for (size_t i = 0; i <= text.size(); ++i) {
            bool alnum = i < text.size() && std::isalnum(static_cast<unsigned char>(text[i]));
            if (alnum) {
                if (cur.empty()) start = i;
                cur += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
            } else if (!cur.empty()) {
                if (query_tokens.count(cur)) {
                    first_hit = start;
                    break;
                }
                cur.clear();
            }
        }
    }
    if (first_hit == std::string::npos) return text.substr(0, width);

    size_t best_start = first_hit >= width / 2 ? first_hit - width / 2 : 0;
    int best_score = -1;
    for (size_t back = 0; back <= 120; back += 20) {
        size_t start = first_hit >= back ? first_hit - back : 0;
        if (start + width > text.size()) start = text.size() - width;
        auto window_tokens = token_set(text.substr(start, width));
        int score = 0;
        for (const auto& t : query_tokens)
            if (window_tokens.count(t)) ++score;
        if (score > best_score) {
            best_score = score;
            best_start = start;
        }
        if (start == 0) break;
    }
    return text.substr(best_start, width);
}

// Weighted distinct-token overlap: title counts triple, snippet and body once.
inline int score_document(const std::set<std::string>& query_tokens,
                          const std::set<std::string>& title_tokens,
                          const std::set<std::string>& snippet_tokens,
                          const std::set<std::string>& body_tokens) {
    int title = 0, snippet = 0, body = 0;
    for (const auto& t : query_tokens) {
        if (title_tokens.count(t)) ++title;
        if (snippet_tokens.count(t)) ++snippet;
        if (body_tokens.count(t)) ++body;
    }
    return 3 * title + snippet + body;
}

// --- simulated search over a corpus ------------------------------------------

// Deterministic stand-in for a live search engine: an in-memory inverted
// index with exhaustively checkable ranking (ties broken by ascending doc id).
class SimSearchBackend : public SearchBackend {
public:
    explicit SimSearchBackend(const corpus::Corpus& corpus) : corpus_(&corpus) {
        docs_.reserve(corpus.docs.size());
        for (const auto& d : corpus.docs) {
            IndexedDoc idx;
            idx.doc_id = d.doc_id;
            idx.title = d.title;
            idx.url = d.url;
            idx.text = html::strip_tags(d.body);
            idx.title_tokens = token_set(d.title);
            idx.body_tokens = token_set(idx.text);
            size_t slot = docs_.size();
            for (const auto& t : idx.title_tokens) postings_[t].push_back(slot);
            for (const auto& t : idx.body_tokens)
                if (!idx.title_tokens.count(t)) postings_[t].push_back(slot);
            docs_.push_back(std::move(idx));
        }
    }

    SearchResponse search(const std::string& query, int k) override {
        SearchResponse resp;
        resp.query = query;
        auto query_tokens = token_set(query);
        if (query_tokens.empty() || k < 1) return resp;

        std::set<size_t> candidates;
        for (const auto& t : query_tokens) {
            auto it = postings_.find(t);
            if (it == postings_.end()) continue;
            candidates.insert(it->second.begin(), it->second.end());
        }

        struct Hit {
            long long doc_id;
            int score;
            size_t slot;
            std::string snippet;
        };
        std::vector<Hit> hits;
        for (size_t slot : candidates) {
            const auto& d = docs_[slot];
            std::string snippet = make_snippet(d.text, query_tokens);
            int score = score_document(query_tokens, d.title_tokens, token_set(snippet),
                                       d.body_tokens);
            if (score > 0) hits.push_back({d.doc_id, score, slot, std::move(snippet)});
        }
        std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.doc_id < b.doc_id;
        });
        if (static_cast<int>(hits.size()) > k) hits.resize(static_cast<size_t>(k));

        for (size_t i = 0; i < hits.size(); ++i) {
            SearchPreview p;
            p.title = docs_[hits[i].slot].title;
            p.url = docs_[hits[i].slot].url;
            p.snippet = hits[i].snippet;
            p.rank = static_cast<int>(i) + 1;
            resp.previews.push_back(std::move(p));
        }

        // entity facts for queries that name an entity in full
        for (const auto& e : corpus_->entities) {
            auto name_tokens = token_set(e.name);
            bool all = !name_tokens.empty();
            for (const auto& t : name_tokens) all = all && query_tokens.count(t) > 0;
            if (all) resp.entity_facts.push_back(e);
        }

        // follow-up suggestions: the query refined by a fresh title token
        for (size_t i = 0; i < hits.size() && resp.related_queries.size() < 3; ++i) {
            for (const auto& tok : tokenize(docs_[hits[i].slot].title)) {
                if (query_tokens.count(tok)) continue;
                std::string suggestion = query + " " + tok;
                if (std::find(resp.related_queries.begin(), resp.related_queries.end(),
                              suggestion) == resp.related_queries.end())
                    resp.related_queries.push_back(suggestion);
                break;
            }
        }
        return resp;
    }

private:
    struct IndexedDoc {
        long long doc_id;
        std::string title;
        std::string url;
        std::string text;
        std::set<std::string> title_tokens;
        std::set<std::string> body_tokens;
    };

    const corpus::Corpus* corpus_;
    std::vector<IndexedDoc> docs_;
    std::map<std::string, std::vector<size_t>> postings_;
};

// Guarded entry point: never throws, failures land in the error field.
inline SearchResponse web_search(const std::string& query, int k, SearchBackend& backend) {
    SearchResponse resp;
    resp.query = query;
    if (trim(query).empty()) {
        resp.error = "empty query";
        return resp;
    }
    if (k < 1) {
        resp.error = "k must be at least 1";
        return resp;
    }
    try {
        resp = backend.search(query, k);
    } catch (const std::exception& e) {
        resp.entity_facts.clear();
        resp.previews.clear();
        resp.related_queries.clear();
        resp.error = std::string("search failed: ") + e.what();
    }
    return resp;
}

// --- fetchers -----------------------------------------------------------------

// Immutable URL -> page map; the closed-world stand-in for the web.
class FixtureFetcher : public PageFetcher {
public:
    FixtureFetcher() = default;

    static FixtureFetcher from_corpus(const corpus::Corpus& corpus) {
        FixtureFetcher f;
        for (const auto& d : corpus.docs) f.add(d.url, 200, "text/html", d.body);
        return f;
    }

    void add(const std::string& url, int status, const std::string& content_type,
             const std::string& body) {
        FetchResult r;
        r.status = status;
        r.content_type = content_type;
        r.body = body;
        pages_[url] = std::move(r);
    }

    FetchResult fetch(const std::string& url) override {
        auto it = pages_.find(url);
        if (it != pages_.end()) return it->second;
        FetchResult miss;
        miss.status = 404;
        miss.error = "no fixture for " + url;
        return miss;
    }

private:
    std::map<std::string, FetchResult> pages_;
};

// --- relevance selection --------------------------------------------------------

class SectionSelector {
public:
    virtual ~SectionSelector() = default;
    virtual std::vector<Section> select(const std::vector<Section>& sections,
                                        const std::string& query, size_t max_sections) = 0;
};

// Simulated-mode selector: distinct query-token overlap, ties by document
// order, zero-overlap sections dropped.
class OverlapSectionSelector : public SectionSelector {
public:
    std::vector<Section> select(const std::vector<Section>& sections, const std::string& query,
                                size_t max_sections) override {
        auto query_tokens = token_set(query);
        struct Scored {
            size_t order;
            int score;
        };
        std::vector<Scored> scored;
        for (size_t i = 0; i < sections.size(); ++i) {
            auto tokens = token_set(sections[i].heading + " " + sections[i].excerpt);
            int s = 0;
            for (const auto& t : query_tokens)
                if (tokens.count(t)) ++s;
            if (s > 0) scored.push_back({i, s});
        }
        std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.order < b.order;
        });
        if (scored.size() > max_sections) scored.resize(max_sections);
        std::vector<Section> out;
        for (const auto& s : scored) out.push_back(sections[s.order]);
        return out;
    }
};

inline OverlapSectionSelector& default_section_selector() {
    static OverlapSectionSelector selector;
    return selector;
}

// --- general webpage parsing ----------------------------------------------------

inline ParsedPage parse_general(const std::string& url, const std::string& query,
                                PageFetcher& fetcher,
                                SectionSelector& selector = default_section_selector()) {
    ParsedPage page;
    page.url = url;
    page.strategy = ParseStrategy::General;
    FetchResult r;
    try {
        r = fetcher.fetch(url);
    } catch (const std::exception& e) {
        page.error = std::string("fetch failed: ") + e.what();
        return page;
    }
    if (!r.ok()) {
        page.error = "fetch failed: status " + std::to_string(r.status) +
                     (r.error ? " (" + *r.error + ")" : "");
        return page;
    }
    page.main_content = html::extract_main_content(r.body);
    if (page.main_content.empty()) {
        page.main_content = html::strip_tags(r.body);
        page.used_fallback = true;
    }
    page.relevant_sections = selector.select(html::split_sections(r.body), query, 3);
    page.sublinks = html::harvest_links(r.body, url);
    return page;
}

// --- scientific-paper parsing -----------------------------------------------------

// HTML rendition first; the official PDF only after that route failed.
struct PaperRoutes {
    std::string html_url;
    std::string pdf_url;
};

inline PaperRoutes paper_routes(const std::string& identifier) {
    PaperRoutes routes;
    if (identifier.starts_with("http://") || identifier.starts_with("https://")) {
        routes.html_url = identifier;
        std::string pdf = identifier;
        size_t html_at = pdf.find("/html/");
        size_t abs_at = pdf.find("/abs/");
        if (html_at != std::string::npos)
            pdf.replace(html_at, 6, "/pdf/");
        else if (abs_at != std::string::npos)
            pdf.replace(abs_at, 5, "/pdf/");
        if (!pdf.ends_with(".pdf")) pdf += ".pdf";
        routes.pdf_url = pdf;
        return routes;
    }
    routes.html_url = "https://ar5iv.org/html/" + identifier;
    routes.pdf_url = "https://arxiv.org/pdf/" + identifier + ".pdf";
    return routes;
}

// A fetched rendition under 1KB or without a body element counts as
// incomplete and falls through to the PDF route.
inline bool html_fetch_complete(const FetchResult& r) {
    return r.ok() && r.body.size() >= 1024 && r.body.find("<body") != std::string::npos;
}

// Text of an uncompressed PDF: string operands inside content streams.
// Compressed streams are out of scope for the fixture-backed mode.
inline std::string pdf_extract_text(const std::string& bytes) {
    if (!bytes.starts_with("%PDF")) return bytes;  // plain-text stand-in
    std::string out;
    size_t i = 0;
    while (i < bytes.size()) {
        if (bytes[i] != '(') {
            ++i;
            continue;
        }
        ++i;
        std::string run;
        int depth = 1;
        while (i < bytes.size() && depth > 0) {
            char c = bytes[i];
            if (c == '\\' && i + 1 < bytes.size()) {
                char esc = bytes[i + 1];
                if (esc == 'n')
                    run += '\n';
                else if (esc == 't')
                    run += '\t';
                else
                    run += esc;
                i += 2;
                continue;
            }
            if (c == '(') ++depth;
            if (c == ')') {
                --depth;
                if (depth == 0) break;
            }
            run += c;
            ++i;
        }
        ++i;
        if (!run.empty()) {
            if (!out.empty()) out += ' ';
            out += run;
        }
    }
    return out;
}

inline ParsedPage parse_paper(const std::string& identifier, const std::string& query,
                              PageFetcher& fetcher,
                              SectionSelector& selector = default_section_selector()) {
    PaperRoutes routes = paper_routes(identifier);
    ParsedPage page;
    page.url = routes.html_url;

    FetchResult html_result = fetcher.fetch(routes.html_url);
    if (html_fetch_complete(html_result)) {
        page.strategy = ParseStrategy::PaperHtml;
        page.main_content = html::extract_main_content(html_result.body);
        if (page.main_content.empty()) {
            page.main_content = html::strip_tags(html_result.body);
            page.used_fallback = true;
        }
        page.relevant_sections = selector.select(html::split_sections(html_result.body), query, 3);
        page.sublinks = html::harvest_links(html_result.body, routes.html_url);
        return page;
    }
    std::string html_failure =
        html_result.ok() ? "incomplete rendition (" + std::to_string(html_result.body.size()) +
                               " bytes)"
                         : "status " + std::to_string(html_result.status);

    FetchResult pdf_result = fetcher.fetch(routes.pdf_url);
    if (pdf_result.ok()) {
        page.url = routes.pdf_url;
        page.strategy = ParseStrategy::PaperPdf;
        page.html_failure = html_failure;
        page.main_content = pdf_extract_text(pdf_result.body);
        // paragraph-level passages stand in for sections in a PDF
        std::vector<Section> passages;
        for (const auto& para : split(page.main_content, '\n')) {
            std::string p = trim(para);
            if (!p.empty()) passages.push_back({"", p.substr(0, 480)});
        }
        if (passages.empty() && !page.main_content.empty())
            passages.push_back({"", page.main_content.substr(0, 480)});
        page.relevant_sections = selector.select(passages, query, 3);
        return page;
    }

    page.strategy = ParseStrategy::PaperPdf;
    page.error = "both routes failed; html: " + html_failure +
                 ", pdf: status " + std::to_string(pdf_result.status);
    return page;
}

}  // namespace webscout::tools
