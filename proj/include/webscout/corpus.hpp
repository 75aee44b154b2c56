#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "webscout/search_types.hpp"
#include "webscout/util.hpp"

// Deterministic synthetic web corpus: fictional researchers with overlapping
// attributes, wiki-style profile pages plus partial-coverage side pages, and
// uniquely-answerable multi-constraint questions over them. Everything is a
// pure function of (spec, seed).

namespace webscout::corpus {

struct SimDocument {
    long long doc_id = 0;
    std::string url;
    std::string title;
    std::string body;  // rendered HTML, served verbatim by the fixture fetcher
    std::vector<long long> outlinks;
    std::optional<tools::EntityFact> entity;
};

struct CorpusSpec {
    int entity_count = 20;
    int docs_per_entity = 4;
    double distractor_density = 0.3;  // fraction of entities cloned from another
                                      // entity with one attribute changed
};

struct Corpus {
    CorpusSpec spec;
    std::uint64_t seed = 0;
    std::vector<SimDocument> docs;
    std::vector<tools::EntityFact> entities;

    const SimDocument* find_doc(std::string_view url) const {
        for (const auto& d : docs)
            if (d.url == url) return &d;
        return nullptr;
    }
};

namespace pools {

inline const std::vector<std::string>& first_names() {
    static const std::vector<std::string> v = {
        "Alda",   "Bram",  "Cyra",   "Dorin", "Elba",   "Ferris", "Gaila",  "Harven",
        "Ilsa",   "Jorvik", "Kessa", "Lorn",  "Mirela", "Nesta",  "Orin",   "Pelia",
        "Quilla", "Rosk",  "Sylva",  "Torben", "Ulma",  "Vasco",  "Wrenna", "Zorah"};
    return v;
}

inline const std::vector<std::string>& last_names() {
    static const std::vector<std::string> v = {
        "Arkwright", "Bellamy",  "Crowther",  "Danvers",    "Eastgate",  "Fairburn",
        "Galloway",  "Hartwell", "Inglewood", "Jessop",     "Kirkby",    "Lockridge",
        "Mayfield",  "Northam",  "Oakhurst",  "Pemberton",  "Quimby",    "Rutherford",
        "Sedgwick",  "Thackeray", "Underhill", "Vance",     "Whitlock",  "Yardley"};
    return v;
}

inline const std::vector<std::string>& universities() {
    static const std::vector<std::string> v = {
        "Whitfield University", "Kestrel Institute",     "Morrowgate College",
        "Halverston University", "Drumlin Polytechnic",  "Averlyn College",
        "Stoneferry University", "Quennell Institute",   "Tarnwick College",
        "Veldhaven University",  "Ostermead College",    "Pinnefold University"};
    return v;
}

inline const std::vector<std::string>& topics() {
    static const std::vector<std::string> v = {
        "tidal energy storage",    "glacial microbial ecology", "ancient trade networks",
        "coral reef acoustics",    "desert soil hydrology",     "volcanic lightning physics",
        "deep cave biology",       "arctic ice dynamics",       "urban heat islands",
        "river delta sediments",   "forest canopy chemistry",   "seismic wave imaging"};
    return v;
}

inline const std::vector<std::string>& cities() {
    static const std::vector<std::string> v = {
        "Maplebury",    "Gullsport",      "Fernhollow", "Brackenridge", "Saltmarsh Bay",
        "Windmere Falls", "Thornfield",   "Cinderlake", "Roanmoor",     "Pellworth",
        "Dunhaven",     "Larkspur Valley"};
    return v;
}

inline const std::vector<std::string>& awards() {
    static const std::vector<std::string> v = {
        "Meridian Prize", "Lowell Medal",   "Atherton Fellowship", "Corvid Award",
        "Selwyn Grant",   "Harbinger Medal", "Tideway Prize",      "Foxglove Honor"};
    return v;
}

inline const std::vector<std::string>& years() {
    static const std::vector<std::string> v = {"2015", "2016", "2017", "2018", "2019", "2020"};
    return v;
}

}  // namespace pools

// Attribute keys every entity carries, in canonical order.
inline const std::vector<std::string>& attribute_keys() {
    static const std::vector<std::string> v = {"studied_at", "works_on", "born_in", "award",
                                               "active_since"};
    return v;
}

inline const std::vector<std::string>& pool_for(std::string_view key) {
    if (key == "studied_at") return pools::universities();
    if (key == "works_on") return pools::topics();
    if (key == "born_in") return pools::cities();
    if (key == "award") return pools::awards();
    if (key == "active_since") return pools::years();
    throw std::invalid_argument("unknown attribute key: " + std::string(key));
}

// The sentence realizing one attribute inside a page body.
inline std::string attribute_sentence(std::string_view name, std::string_view key,
                                      std::string_view value) {
    std::string n(name), v(value);
    if (key == "studied_at") return n + " studied at " + v + ".";
    if (key == "works_on") return n + " works on " + v + ".";
    if (key == "born_in") return n + " was born in " + v + ".";
    if (key == "award") return n + " received the " + v + ".";
    if (key == "active_since") return n + " has been active since " + v + ".";
    return n + " relates to " + v + ".";
}

inline std::string slugify(std::string_view text) {
    std::string out;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        else if (!out.empty() && out.back() != '_')
            out += '_';
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

namespace detail {

inline std::string render_page(const std::string& title,
                               const std::vector<std::string>& paragraphs,
                               const std::vector<std::pair<std::string, std::string>>& links) {
    std::string h;
    h += "<html><head><title>" + title + "</title></head>\n<body>\n";
    h += "<div class=\"nav\"><a href=\"https://simweb.org/index\">Index</a> "
         "<a href=\"https://simweb.org/about\">About</a> "
         "<a href=\"https://simweb.org/random\">Random page</a></div>\n";
    h += "<div class=\"content\">\n<h1>" + title + "</h1>\n";
    for (const auto& p : paragraphs) h += "<p>" + p + "</p>\n";
    h += "</div>\n";
    if (!links.empty()) {
        h += "<div class=\"related\"><h2>Related pages</h2>\n";
        for (const auto& [url, text] : links)
            h += "<a href=\"" + url + "\">" + text + "</a>\n";
        h += "</div>\n";
    }
    h += "<div class=\"footer\">Simweb Research Archive. Content provided as is. "
         "Browse responsibly.</div>\n</body></html>\n";
    return h;
}

inline std::string flavor_sentence(std::string_view name, SeededRng& rng) {
    static const std::vector<std::string> tails = {
        " is a researcher listed in the Simweb Research Archive.",
        " has published extensively in regional journals.",
        " regularly speaks at field workshops.",
        " maintains a long-running collaboration with two observatories.",
        " curates an open dataset for fellow researchers."};
    return std::string(name) + rng.pick(tails);
}

}  // namespace detail

// Generates entities, their document set and link structure. Errors when the
// spec demands more unique names than the pool can provide.
inline Corpus build_corpus(const CorpusSpec& spec, std::uint64_t seed) {
    if (spec.entity_count <= 0 || spec.docs_per_entity <= 0)
        throw std::invalid_argument("corpus spec sizes must be positive");
    if (spec.distractor_density < 0.0 || spec.distractor_density > 1.0)
        throw std::invalid_argument("distractor_density must be in [0,1]");
    const size_t name_pool =
        pools::first_names().size() * pools::last_names().size();
    if (static_cast<size_t>(spec.entity_count) > name_pool)
        throw std::invalid_argument("entity_count " + std::to_string(spec.entity_count) +
                                    " exceeds name pool of " + std::to_string(name_pool));

    SeededRng rng(seed);

    // unique names via a shuffled prefix of the full (first, last) cross product
    std::vector<std::pair<size_t, size_t>> name_idx;
    for (size_t f = 0; f < pools::first_names().size(); ++f)
        for (size_t l = 0; l < pools::last_names().size(); ++l) name_idx.emplace_back(f, l);
    rng.shuffle(name_idx);

    Corpus corpus;
    corpus.spec = spec;
    corpus.seed = seed;

    const int clone_count =
        static_cast<int>(spec.distractor_density * spec.entity_count);
    const int base_count = spec.entity_count - clone_count;

    for (int i = 0; i < spec.entity_count; ++i) {
        auto [f, l] = name_idx[static_cast<size_t>(i)];
        tools::EntityFact e;
        e.name = pools::first_names()[f] + " " + pools::last_names()[l];
        if (i < base_count || corpus.entities.empty()) {
            for (const auto& key : attribute_keys())
                e.attributes[key] = rng.pick(pool_for(key));
        } else {
            // distractor: copy an earlier entity, change exactly one attribute
            const auto& base =
                corpus.entities[static_cast<size_t>(rng.uniform(corpus.entities.size()))];
            e.attributes = base.attributes;
            const auto& keys = attribute_keys();
            const std::string& flip = keys[static_cast<size_t>(rng.uniform(keys.size()))];
            const auto& pool = pool_for(flip);
            std::string current = e.attributes[flip];
            std::string replacement = current;
            while (replacement == current)
                replacement = pool[static_cast<size_t>(rng.uniform(pool.size()))];
            e.attributes[flip] = replacement;
        }
        e.description = "Researcher in " + e.attributes["works_on"] + ", trained at " +
                        e.attributes["studied_at"] + ".";
        corpus.entities.push_back(std::move(e));
    }

    // documents: profile (all attributes, carries the entity record) plus
    // side pages covering attribute subsets
    std::vector<std::vector<long long>> entity_docs(corpus.entities.size());
    for (size_t ei = 0; ei < corpus.entities.size(); ++ei) {
        const auto& e = corpus.entities[ei];
        std::string slug = slugify(e.name);

        SimDocument profile;
        profile.doc_id = static_cast<long long>(corpus.docs.size());
        profile.url = "https://simweb.org/wiki/" + slug;
        profile.title = e.name;
        profile.entity = e;
        std::vector<std::string> paras;
        paras.push_back(e.name + " is a researcher profiled in the Simweb Research Archive.");
        std::string facts;
        for (const auto& key : attribute_keys())
            facts += attribute_sentence(e.name, key, e.attributes.at(key)) + " ";
        paras.push_back(trim(facts));
        paras.push_back(detail::flavor_sentence(e.name, rng));
        corpus.docs.push_back(std::move(profile));
        entity_docs[ei].push_back(corpus.docs.back().doc_id);
        // body rendered after outlinks are known; stash paragraphs in body for now
        corpus.docs.back().body = join(paras, "\x1f");

        static const std::vector<std::string> side_kinds = {"interview", "notes", "talk",
                                                            "dispatch"};
        for (int d = 1; d < spec.docs_per_entity; ++d) {
            const std::string& kind = side_kinds[static_cast<size_t>(d - 1) % side_kinds.size()];
            SimDocument side;
            side.doc_id = static_cast<long long>(corpus.docs.size());
            side.url = "https://simweb.org/" + kind + "/" + slug + "_" + std::to_string(d);
            side.title =
                (kind == "interview" ? "Interview with " + e.name
                 : kind == "notes"   ? "Field notes: " + e.name
                 : kind == "talk"    ? e.name + " at the annual colloquium"
                                     : "Dispatch on " + e.name);
            std::vector<std::string> keys = attribute_keys();
            rng.shuffle(keys);
            size_t mention = 2 <= keys.size() ? 2 : keys.size();
            std::vector<std::string> sp;
            sp.push_back(side.title + ". An archival page about " + e.name + ".");
            std::string facts2;
            for (size_t m = 0; m < mention; ++m)
                facts2 += attribute_sentence(e.name, keys[m], e.attributes.at(keys[m])) + " ";
            sp.push_back(trim(facts2));
            sp.push_back(detail::flavor_sentence(e.name, rng));
            side.body = join(sp, "\x1f");
            corpus.docs.push_back(std::move(side));
            entity_docs[ei].push_back(corpus.docs.back().doc_id);
        }
    }

    // hub page linking every profile
    SimDocument hub;
    hub.doc_id = static_cast<long long>(corpus.docs.size());
    hub.url = "https://simweb.org/index";
    hub.title = "Simweb Research Archive";
    hub.body = std::string("The archive catalogs independent researchers and their work.") +
               "\x1f" + "Profiles are listed below.";
    corpus.docs.push_back(std::move(hub));
    long long hub_id = corpus.docs.back().doc_id;

    // link structure: profile <-> side pages, hub -> profiles, occasional
    // cross-entity link
    for (size_t ei = 0; ei < entity_docs.size(); ++ei) {
        const auto& ids = entity_docs[ei];
        for (size_t k = 0; k < ids.size(); ++k) {
            auto& doc = corpus.docs[static_cast<size_t>(ids[k])];
            for (size_t j = 0; j < ids.size(); ++j)
                if (j != k) doc.outlinks.push_back(ids[j]);
            if (k == 0 && rng.chance(0.5)) {
                size_t other = static_cast<size_t>(rng.uniform(entity_docs.size()));
                if (other != ei) doc.outlinks.push_back(entity_docs[other][0]);
            }
        }
        corpus.docs[static_cast<size_t>(hub_id)].outlinks.push_back(ids[0]);
    }

    // render bodies now that outlinks exist
    for (auto& doc : corpus.docs) {
        std::vector<std::string> paras = split(doc.body, '\x1f');
        std::vector<std::pair<std::string, std::string>> links;
        for (long long target : doc.outlinks) {
            const auto& t = corpus.docs[static_cast<size_t>(target)];
            links.emplace_back(t.url, t.title);
        }
        doc.body = detail::render_page(doc.title, paras, links);
    }
    return corpus;
}

// --- persistence -----------------------------------------------------------
// Directory layout: manifest.json + docs.jsonl (one document per line).

inline nlohmann::json doc_to_json(const SimDocument& d) {
    nlohmann::json j;
    j["doc_id"] = d.doc_id;
    j["url"] = d.url;
    j["title"] = d.title;
    j["body"] = d.body;
    j["outlinks"] = d.outlinks;
    if (d.entity) {
        j["entity"] = {{"name", d.entity->name},
                       {"description", d.entity->description},
                       {"attributes", d.entity->attributes}};
    }
    return j;
}

inline SimDocument doc_from_json(const nlohmann::json& j) {
    SimDocument d;
    d.doc_id = j.at("doc_id").get<long long>();
    d.url = j.at("url").get<std::string>();
    d.title = j.at("title").get<std::string>();
    d.body = j.at("body").get<std::string>();
    d.outlinks = j.value("outlinks", std::vector<long long>{});
    if (j.contains("entity")) {
        tools::EntityFact e;
        e.name = j["entity"].value("name", "");
        e.description = j["entity"].value("description", "");
        if (j["entity"].contains("attributes"))
            e.attributes =
                j["entity"]["attributes"].get<std::map<std::string, std::string>>();
        d.entity = std::move(e);
    }
    return d;
}

inline void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["entity_count"] = corpus.spec.entity_count;
    manifest["docs_per_entity"] = corpus.spec.docs_per_entity;
    manifest["distractor_density"] = corpus.spec.distractor_density;
    manifest["seed"] = corpus.seed;
    manifest["documents"] = corpus.docs.size();
    std::ofstream mf(dir / "manifest.json");
    mf << manifest.dump(2) << "\n";
    std::ofstream df(dir / "docs.jsonl");
    for (const auto& d : corpus.docs) df << doc_to_json(d).dump() << "\n";
}

inline Corpus load_corpus(const std::filesystem::path& dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf.good())
        throw std::runtime_error("corpus manifest not found under " + dir.string());
    nlohmann::json manifest = nlohmann::json::parse(mf);
    Corpus corpus;
    corpus.spec.entity_count = manifest.value("entity_count", 0);
    corpus.spec.docs_per_entity = manifest.value("docs_per_entity", 0);
    corpus.spec.distractor_density = manifest.value("distractor_density", 0.0);
    corpus.seed = manifest.value("seed", 0ULL);
    std::ifstream df(dir / "docs.jsonl");
    if (!df.good()) throw std::runtime_error("docs.jsonl not found under " + dir.string());
    std::string line;
    while (std::getline(df, line)) {
        if (trim(line).empty()) continue;
        corpus.docs.push_back(doc_from_json(nlohmann::json::parse(line)));
        if (corpus.docs.back().entity) corpus.entities.push_back(*corpus.docs.back().entity);
    }
    return corpus;
}

// --- synthetic tasks --------------------------------------------------------

struct SyntheticTask {
    std::string question;
    std::string gold_answer;
    int constraint_count = 0;
    std::vector<long long> supporting_doc_ids;
    std::uint64_t seed = 0;
};

// Question templates are plain data so the phrasing can be edited without
// touching code. Defaults mirror assets/templates/constraint_templates.txt.
struct TemplateSet {
    std::string question = "Which researcher {clauses}?";
    std::map<std::string, std::string> clauses = {
        {"studied_at", "studied at \"{value}\""},
        {"works_on", "works on \"{value}\""},
        {"born_in", "was born in \"{value}\""},
        {"award", "received the \"{value}\""},
        {"active_since", "has been active since \"{value}\""},
    };

    static TemplateSet load(const std::filesystem::path& file) {
        std::ifstream in(file);
        if (!in.good()) throw std::runtime_error("template file not found: " + file.string());
        TemplateSet t;
        t.clauses.clear();
        std::string line;
        while (std::getline(in, line)) {
            std::string s = trim(line);
            if (s.empty() || s[0] == '#') continue;
            size_t eq = s.find('=');
            if (eq == std::string::npos) continue;
            std::string key = trim(s.substr(0, eq));
            std::string value = trim(s.substr(eq + 1));
            if (key == "question")
                t.question = value;
            else if (key.starts_with("clause."))
                t.clauses[key.substr(7)] = value;
        }
        if (t.clauses.empty()) throw std::runtime_error("template file defines no clauses");
        return t;
    }
};

inline std::string replace_all(std::string text, std::string_view what, std::string_view with) {
    size_t pos = 0;
    while ((pos = text.find(what, pos)) != std::string::npos) {
        text.replace(pos, what.size(), with);
        pos += with.size();
    }
    return text;
}

inline std::string render_question(const TemplateSet& templates,
                                   const std::vector<std::pair<std::string, std::string>>&
                                       constraints) {
    std::vector<std::string> rendered;
    for (const auto& [key, value] : constraints) {
        auto it = templates.clauses.find(key);
        std::string clause = it == templates.clauses.end() ? "matches \"{value}\"" : it->second;
        rendered.push_back(replace_all(clause, "{value}", value));
    }
    std::string clauses;
    for (size_t i = 0; i < rendered.size(); ++i) {
        if (i == 0)
            clauses = rendered[i];
        else if (i + 1 == rendered.size())
            clauses += (rendered.size() == 2 ? " and " : ", and ") + rendered[i];
        else
            clauses += ", " + rendered[i];
    }
    return replace_all(templates.question, "{clauses}", clauses);
}

inline int count_satisfiers(const Corpus& corpus,
                            const std::vector<std::pair<std::string, std::string>>& constraints) {
    int n = 0;
    for (const auto& e : corpus.entities) {
        bool all = true;
        for (const auto& [key, value] : constraints) {
            auto it = e.attributes.find(key);
            if (it == e.attributes.end() || it->second != value) {
                all = false;
                break;
            }
        }
        if (all) ++n;
    }
    return n;
}

// Samples constraint conjunctions until exactly one entity satisfies them;
// the uniqueness scan is part of the contract, not just a test.
inline SyntheticTask generate_task(const Corpus& corpus, int constraint_count,
                                   std::uint64_t seed,
                                   const TemplateSet& templates = TemplateSet{}) {
    if (constraint_count < 2)
        throw std::invalid_argument("constraint_count must be at least 2");
    if (static_cast<size_t>(constraint_count) > attribute_keys().size())
        throw std::invalid_argument("constraint_count exceeds available attribute keys");
    if (corpus.entities.empty()) throw std::invalid_argument("corpus has no entities");

    SeededRng rng(seed);
    const int max_attempts = 500;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        const auto& target =
            corpus.entities[static_cast<size_t>(rng.uniform(corpus.entities.size()))];
        std::vector<std::string> keys = attribute_keys();
        rng.shuffle(keys);
        std::vector<std::pair<std::string, std::string>> constraints;
        for (int i = 0; i < constraint_count; ++i)
            constraints.emplace_back(keys[static_cast<size_t>(i)],
                                     target.attributes.at(keys[static_cast<size_t>(i)]));
        if (count_satisfiers(corpus, constraints) != 1) continue;

        SyntheticTask task;
        task.question = render_question(templates, constraints);
        task.gold_answer = target.name;
        task.constraint_count = constraint_count;
        task.seed = seed;
        for (const auto& d : corpus.docs) {
            if (d.body.find(target.name) == std::string::npos) continue;
            for (const auto& [key, value] : constraints) {
                if (d.body.find(value) != std::string::npos) {
                    task.supporting_doc_ids.push_back(d.doc_id);
                    break;
                }
            }
        }
        return task;
    }
    throw std::runtime_error("no unique constraint conjunction found after " +
                             std::to_string(max_attempts) + " attempts");
}

// Normalized comparison: case-fold, punctuation and articles stripped,
// whitespace collapsed, then exact match.
inline std::string normalize_answer(std::string_view text) {
    std::string spaced;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            spaced += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        else
            spaced += ' ';
    }
    std::vector<std::string> kept;
    for (const auto& tok : split(spaced, ' ')) {
        if (tok.empty() || tok == "a" || tok == "an" || tok == "the") continue;
        kept.push_back(tok);
    }
    return join(kept, " ");
}

inline bool judge_answer(std::string_view predicted, std::string_view gold) {
    return normalize_answer(predicted) == normalize_answer(gold);
}

// --- task persistence (line-delimited records) ------------------------------

inline void save_tasks(const std::vector<SyntheticTask>& tasks,
                       const std::filesystem::path& file) {
    std::ofstream out(file);
    for (const auto& t : tasks) {
        nlohmann::json j;
        j["question"] = t.question;
        j["gold_answer"] = t.gold_answer;
        j["constraint_count"] = t.constraint_count;
        j["supporting_doc_ids"] = t.supporting_doc_ids;
        j["seed"] = t.seed;
        out << j.dump() << "\n";
    }
}

inline std::vector<SyntheticTask> load_tasks(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in.good()) throw std::runtime_error("task file not found: " + file.string());
    std::vector<SyntheticTask> tasks;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        SyntheticTask t;
        t.question = j.at("question").get<std::string>();
        t.gold_answer = j.at("gold_answer").get<std::string>();
        t.constraint_count = j.value("constraint_count", 0);
        t.supporting_doc_ids = j.value("supporting_doc_ids", std::vector<long long>{});
        t.seed = j.value("seed", 0ULL);
        tasks.push_back(std::move(t));
    }
    return tasks;
}

}  // namespace webscout::corpus
