#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "webscout/llm.hpp"
#include "webscout/search_types.hpp"
#include "webscout/util.hpp"

// The three standardized search programming primitives: keyword expansion,
// parallel batch search, and programmable condition checking. All three
// preserve the order and cardinality of their list inputs.

namespace webscout::primitives {

// --- keyword expansion ---------------------------------------------------------

struct KeywordSet {
    std::string seed;
    std::vector<std::string> variants;  // variants[0] == seed, no duplicates
    bool degraded = false;              // expansion backend failed; seed only
};

class ExpansionBackend {
public:
    virtual ~ExpansionBackend() = default;
    virtual std::vector<std::string> expand(const std::string& seed, int max_extra) = 0;
};

// Deterministic rule table: quoted-phrase form, site-restricted form, then
// single-word synonym substitutions.
class RuleExpansion : public ExpansionBackend {
public:
    std::vector<std::string> expand(const std::string& seed, int max_extra) override {
        std::vector<std::string> out;
        out.push_back("\"" + seed + "\"");
        out.push_back(seed + " site:wikipedia.org");
        static const std::vector<std::pair<std::string, std::string>> synonyms = {
            {"paper", "publication"}, {"author", "writer"},      {"university", "college"},
            {"researcher", "scientist"}, {"received", "won"},    {"studied", "trained"},
            {"works", "research"},    {"born", "birthplace"},    {"award", "prize"},
        };
        auto words = split(seed, ' ');
        for (const auto& [from, to] : synonyms) {
            for (size_t i = 0; i < words.size(); ++i) {
                if (to_lower(words[i]) != from) continue;
                auto variant = words;
                variant[i] = to;
                out.push_back(join(variant, " "));
            }
        }
        out.push_back(seed + " profile");
        if (static_cast<int>(out.size()) > max_extra) out.resize(static_cast<size_t>(max_extra));
        return out;
    }
};

// Live-mode expansion: one completion, one variant per line.
class LlmExpansion : public ExpansionBackend {
public:
    LlmExpansion(llm::CompletionBackend& backend, llm::CompletionParams params = {})
        : backend_(&backend), params_(std::move(params)) {}

    std::vector<std::string> expand(const std::string& seed, int max_extra) override {
        std::vector<llm::Message> messages = {
            {llm::Role::System,
             "You expand search queries. Reply with one search query per line, nothing else. "
             "Prefer advanced forms: quoted phrases, site: restrictions, synonyms."},
            {llm::Role::User, "Seed query: " + seed + "\nGive up to " +
                                  std::to_string(max_extra) + " variants."}};
        auto completion = llm::complete(messages, params_, *backend_);
        std::vector<std::string> out;
        for (const auto& line : split_lines(completion.text)) {
            std::string v = trim(line);
            if (!v.empty()) out.push_back(v);
            if (static_cast<int>(out.size()) >= max_extra) break;
        }
        return out;
    }

private:
    llm::CompletionBackend* backend_;
    llm::CompletionParams params_;
};

// Seed plus up to max_variants-1 distinct expansions; a failing backend
// degrades to the seed alone rather than erroring.
inline KeywordSet generate_keywords(const std::string& seed, ExpansionBackend& expander,
                                    int max_variants = 8) {
    if (trim(seed).empty()) throw std::invalid_argument("generate_keywords: empty seed");
    KeywordSet ks;
    ks.seed = seed;
    ks.variants.push_back(seed);
    if (max_variants <= 1) return ks;
    std::vector<std::string> extra;
    try {
        extra = expander.expand(seed, max_variants - 1);
    } catch (const std::exception&) {
        ks.degraded = true;
        return ks;
    }
    std::set<std::string> seen{seed};
    for (auto& v : extra) {
        if (static_cast<int>(ks.variants.size()) >= max_variants) break;
        if (trim(v).empty() || !seen.insert(v).second) continue;
        ks.variants.push_back(std::move(v));
    }
    return ks;
}

// --- parallel batch search -------------------------------------------------------

// Index-aligned fan-out with at most `concurrency` requests in flight.
// Per-query failures yield an empty response carrying an error note; the
// batch itself never fails.
inline std::vector<tools::SearchResponse> batch_search(const std::vector<std::string>& keywords,
                                                       tools::SearchBackend& backend,
                                                       int concurrency, int k = 10) {
    std::vector<tools::SearchResponse> results(keywords.size());
    if (keywords.empty()) return results;
    if (concurrency < 1) concurrency = 1;

    auto run_one = [&](size_t i) {
        try {
            results[i] = backend.search(keywords[i], k);
            if (results[i].error) {
                results[i].entity_facts.clear();
                results[i].previews.clear();
                results[i].related_queries.clear();
            }
            results[i].query = keywords[i];
        } catch (const std::exception& e) {
            tools::SearchResponse failed;
            failed.query = keywords[i];
            failed.error = std::string("search failed: ") + e.what();
            results[i] = std::move(failed);
        }
    };

    size_t workers = std::min(static_cast<size_t>(concurrency), keywords.size());
    if (workers <= 1) {
        for (size_t i = 0; i < keywords.size(); ++i) run_one(i);
        return results;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= keywords.size()) break;
                run_one(i);
            }
        });
    }
    for (auto& t : pool) t.join();
    return results;
}

// --- condition checking ------------------------------------------------------------

struct ConditionVerdict {
    int page_index = 0;
    bool value = false;
    std::string rationale;  // empty when the verdict is direct
};

class ConditionEvaluator {
public:
    virtual ~ConditionEvaluator() = default;
    // nullopt means "cannot be determined"; throwing means the evaluator broke
    virtual std::optional<bool> evaluate(const std::string& page,
                                         const std::string& condition) = 0;
};

// --- the predicate mini-syntax (simulated mode) --------------------------------
//
//   predicate := or ;  or := and { "OR" and } ;  and := unary { ["AND"] unary }
//   unary     := "NOT" unary | atom
//   atom      := QUOTED | WORD | "(" predicate ")"
//
// Quoted strings match as case-insensitive substrings; bare words match as
// whole words. Adjacent atoms conjoin. The helper verbs `contains` and
// `mentions` read as noise and introduce the atom that follows them.

namespace predicate {

struct Node {
    enum class Kind { And, Or, Not, Substr, Word };
    Kind kind = Kind::Word;
    std::string text;
    std::vector<Node> kids;
};

namespace detail {

struct PToken {
    enum class Kind { And, Or, Not, LParen, RParen, Quoted, Word, End };
    Kind kind;
    std::string text;
};

inline std::vector<PToken> lex(const std::string& condition) {
    std::vector<PToken> out;
    size_t i = 0;
    while (i < condition.size()) {
        char c = condition[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '(') {
            out.push_back({PToken::Kind::LParen, "("});
            ++i;
            continue;
        }
        if (c == ')') {
            out.push_back({PToken::Kind::RParen, ")"});
            ++i;
            continue;
        }
        if (c == '"' || c == '\'') {
            size_t close = condition.find(c, i + 1);
            if (close == std::string::npos)
                throw std::runtime_error("unterminated quote in predicate");
            out.push_back({PToken::Kind::Quoted, condition.substr(i + 1, close - i - 1)});
            i = close + 1;
            continue;
        }
        size_t start = i;
        while (i < condition.size() && !std::isspace(static_cast<unsigned char>(condition[i])) &&
               condition[i] != '(' && condition[i] != ')' && condition[i] != '"' &&
               condition[i] != '\'')
            ++i;
        std::string word = condition.substr(start, i - start);
        if (word == "AND")
            out.push_back({PToken::Kind::And, word});
        else if (word == "OR")
            out.push_back({PToken::Kind::Or, word});
        else if (word == "NOT")
            out.push_back({PToken::Kind::Not, word});
        else if (word == "contains" || word == "mentions")
            continue;  // atom introducers, semantically empty
        else
            out.push_back({PToken::Kind::Word, word});
    }
    out.push_back({PToken::Kind::End, ""});
    return out;
}

class PParser {
public:
    explicit PParser(std::vector<PToken> tokens) : tokens_(std::move(tokens)) {}

    Node parse() {
        Node n = parse_or();
        if (tokens_[pos_].kind != PToken::Kind::End)
            throw std::runtime_error("trailing input in predicate");
        return n;
    }

private:
    Node parse_or() {
        Node lhs = parse_and();
        while (tokens_[pos_].kind == PToken::Kind::Or) {
            ++pos_;
            Node parent;
            parent.kind = Node::Kind::Or;
            parent.kids.push_back(std::move(lhs));
            parent.kids.push_back(parse_and());
            lhs = std::move(parent);
        }
        return lhs;
    }

    bool starts_atom() const {
        auto k = tokens_[pos_].kind;
        return k == PToken::Kind::Not || k == PToken::Kind::Quoted ||
               k == PToken::Kind::Word || k == PToken::Kind::LParen;
    }

    Node parse_and() {
        Node lhs = parse_unary();
        while (tokens_[pos_].kind == PToken::Kind::And || starts_atom()) {
            if (tokens_[pos_].kind == PToken::Kind::And) ++pos_;
            Node parent;
            parent.kind = Node::Kind::And;
            parent.kids.push_back(std::move(lhs));
            parent.kids.push_back(parse_unary());
            lhs = std::move(parent);
        }
        return lhs;
    }

    Node parse_unary() {
        if (tokens_[pos_].kind == PToken::Kind::Not) {
            ++pos_;
            Node n;
            n.kind = Node::Kind::Not;
            n.kids.push_back(parse_unary());
            return n;
        }
        const PToken& t = tokens_[pos_];
        if (t.kind == PToken::Kind::Quoted) {
            Node n;
            n.kind = Node::Kind::Substr;
            n.text = t.text;
            ++pos_;
            return n;
        }
        if (t.kind == PToken::Kind::Word) {
            Node n;
            n.kind = Node::Kind::Word;
            n.text = t.text;
            ++pos_;
            return n;
        }
        if (t.kind == PToken::Kind::LParen) {
            ++pos_;
            Node n = parse_or();
            if (tokens_[pos_].kind != PToken::Kind::RParen)
                throw std::runtime_error("missing ')' in predicate");
            ++pos_;
            return n;
        }
        throw std::runtime_error("predicate expects a term");
    }

    std::vector<PToken> tokens_;
    size_t pos_ = 0;
};

}  // namespace detail

inline Node parse(const std::string& condition) {
    auto tokens = detail::lex(condition);
    if (tokens.size() == 1) throw std::runtime_error("empty predicate");
    return detail::PParser(std::move(tokens)).parse();
}

struct PageView {
    std::string lower;
    std::set<std::string> words;

    explicit PageView(const std::string& page)
        : lower(to_lower(page)), words(token_set(page)) {}
};

inline bool eval(const Node& node, const PageView& page) {
    switch (node.kind) {
        case Node::Kind::And:
            return eval(node.kids[0], page) && eval(node.kids[1], page);
        case Node::Kind::Or:
            return eval(node.kids[0], page) || eval(node.kids[1], page);
        case Node::Kind::Not:
            return !eval(node.kids[0], page);
        case Node::Kind::Substr:
            return node.text.empty() ||
                   page.lower.find(to_lower(node.text)) != std::string::npos;
        case Node::Kind::Word: {
            auto toks = tokenize(node.text);
            for (const auto& t : toks)
                if (!page.words.count(t)) return false;
            return true;
        }
    }
    return false;
}

}  // namespace predicate

// Deterministic evaluator over the predicate mini-syntax.
class PredicateEvaluator : public ConditionEvaluator {
public:
    std::optional<bool> evaluate(const std::string& page,
                                 const std::string& condition) override {
        auto node = predicate::parse(condition);  // throws on syntax errors
        predicate::PageView view(page);
        return predicate::eval(node, view);
    }
};

// Live-mode evaluator: asks a model for a strict true/false.
class LlmConditionEvaluator : public ConditionEvaluator {
public:
    LlmConditionEvaluator(llm::CompletionBackend& backend, llm::CompletionParams params = {})
        : backend_(&backend), params_(std::move(params)) {}

    std::optional<bool> evaluate(const std::string& page,
                                 const std::string& condition) override {
        std::vector<llm::Message> messages = {
            {llm::Role::System,
             "Decide whether the document satisfies the condition. Reply with exactly "
             "TRUE or FALSE."},
            {llm::Role::User, "Condition: " + condition + "\n\nDocument:\n" + page}};
        auto completion = llm::complete(messages, params_, *backend_);
        std::string reply = to_lower(trim(completion.text));
        if (reply.starts_with("true")) return true;
        if (reply.starts_with("false")) return false;
        return std::nullopt;  // undetermined
    }

private:
    llm::CompletionBackend* backend_;
    llm::CompletionParams params_;
};

// One verdict per page, index-aligned. Undetermined collapses to false; a
// broken evaluator yields false with an "evaluator error" rationale.
inline std::vector<ConditionVerdict> check_condition(const std::vector<std::string>& pages,
                                                     const std::string& condition,
                                                     ConditionEvaluator& evaluator) {
    std::vector<ConditionVerdict> verdicts;
    verdicts.reserve(pages.size());
    for (size_t i = 0; i < pages.size(); ++i) {
        ConditionVerdict v;
        v.page_index = static_cast<int>(i);
        try {
            auto result = evaluator.evaluate(pages[i], condition);
            if (result.has_value()) {
                v.value = *result;
            } else {
                v.value = false;
                v.rationale = "undetermined";
            }
        } catch (const std::exception&) {
            v.value = false;
            v.rationale = "evaluator error";
        }
        verdicts.push_back(std::move(v));
    }
    return verdicts;
}

// --- politeness control for live backends -------------------------------------

// Token bucket: `rate` refills per second up to `capacity`; acquire blocks.
class TokenBucket {
public:
    TokenBucket(double rate_per_s, double capacity)
        : rate_(rate_per_s), capacity_(capacity), tokens_(capacity),
          last_(std::chrono::steady_clock::now()) {}

    bool try_acquire() {
        std::lock_guard<std::mutex> lock(mu_);
        refill_locked();
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return true;
        }
        return false;
    }

    void acquire() {
        while (!try_acquire())
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }

private:
    void refill_locked() {
        auto now = std::chrono::steady_clock::now();
        double elapsed = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        tokens_ = std::min(capacity_, tokens_ + elapsed * rate_);
    }

    double rate_;
    double capacity_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mu_;
};

// Wraps a live backend with the default politeness budget (8 requests/s).
class RateLimitedSearchBackend : public tools::SearchBackend {
public:
    RateLimitedSearchBackend(tools::SearchBackend& inner, double rate_per_s = 8.0)
        : inner_(&inner), bucket_(rate_per_s, rate_per_s) {}

    tools::SearchResponse search(const std::string& query, int k) override {
        bucket_.acquire();
        return inner_->search(query, k);
    }

private:
    tools::SearchBackend* inner_;
    TokenBucket bucket_;
};

}  // namespace webscout::primitives
