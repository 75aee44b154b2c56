#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace webscout::tools {

struct SearchPreview {
    std::string title;
    std::string url;
    std::string snippet;
    int rank = 1;  // 1..k within a response, no gaps
};

// Structured facts attached to queries that name a known entity.
struct EntityFact {
    std::string name;
    std::string description;
    std::map<std::string, std::string> attributes;
};

struct SearchResponse {
    std::string query;
    std::vector<EntityFact> entity_facts;
    std::vector<SearchPreview> previews;
    std::vector<std::string> related_queries;
    std::optional<std::string> error;  // set implies the three lists are empty
};

enum class ParseStrategy { General, PaperHtml, PaperPdf };

inline const char* strategy_name(ParseStrategy s) {
    switch (s) {
        case ParseStrategy::General: return "general";
        case ParseStrategy::PaperHtml: return "paper_html";
        case ParseStrategy::PaperPdf: return "paper_pdf";
    }
    return "general";
}

struct Section {
    std::string heading;
    std::string excerpt;
};

struct SubLink {
    std::string url;
    std::string description;
};

struct ParsedPage {
    std::string url;
    std::string main_content;
    std::vector<Section> relevant_sections;
    std::vector<SubLink> sublinks;
    ParseStrategy strategy = ParseStrategy::General;
    bool used_fallback = false;                // primary extraction came up empty
    std::optional<std::string> html_failure;   // why the HTML route was abandoned
    std::optional<std::string> error;
};

struct FetchResult {
    int status = 0;  // 0 means the request itself failed
    std::string content_type;
    std::string body;
    std::optional<std::string> error;

    bool ok() const { return status >= 200 && status < 300; }
};

class PageFetcher {
public:
    virtual ~PageFetcher() = default;
    virtual FetchResult fetch(const std::string& url) = 0;
};

class SearchBackend {
public:
    virtual ~SearchBackend() = default;
    virtual SearchResponse search(const std::string& query, int k) = 0;
};

}  // namespace webscout::tools
