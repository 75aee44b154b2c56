#include <catch2/catch_amalgamated.hpp>

#include "webscout/corpus.hpp"

#include <filesystem>
#include <set>

using namespace webscout::corpus;

namespace {

CorpusSpec small_spec() {
    CorpusSpec spec;
    spec.entity_count = 10;
    spec.docs_per_entity = 3;
    spec.distractor_density = 0.3;
    return spec;
}

std::string corpus_fingerprint(const Corpus& c) {
    std::string fp;
    for (const auto& d : c.docs) {
        fp += d.url;
        fp += '|';
        fp += d.title;
        fp += '|';
        fp += d.body;
        for (auto id : d.outlinks) fp += std::to_string(id) + ",";
        fp += '\n';
    }
    return fp;
}

}  // namespace

TEST_CASE("build_corpus is bit-reproducible per seed") {
    auto a = build_corpus(small_spec(), 7);
    auto b = build_corpus(small_spec(), 7);
    CHECK(corpus_fingerprint(a) == corpus_fingerprint(b));
    auto c = build_corpus(small_spec(), 8);
    CHECK(corpus_fingerprint(a) != corpus_fingerprint(c));
}

TEST_CASE("every outlink resolves and urls are unique") {
    auto corpus = build_corpus(small_spec(), 42);
    std::set<std::string> urls;
    for (const auto& d : corpus.docs) {
        CHECK(urls.insert(d.url).second);
        for (auto id : d.outlinks) {
            REQUIRE(id >= 0);
            REQUIRE(static_cast<size_t>(id) < corpus.docs.size());
        }
    }
}

TEST_CASE("counting oracle: corpus shape matches the spec exactly") {
    auto spec = small_spec();
    auto corpus = build_corpus(spec, 11);

    CHECK(corpus.entities.size() == static_cast<size_t>(spec.entity_count));
    // profile + side docs per entity, plus the hub page
    CHECK(corpus.docs.size() ==
          static_cast<size_t>(spec.entity_count * spec.docs_per_entity) + 1);

    // every attribute value comes from its pool
    for (const auto& e : corpus.entities) {
        REQUIRE(e.attributes.size() == attribute_keys().size());
        for (const auto& key : attribute_keys()) {
            const auto& pool = pool_for(key);
            const std::string& value = e.attributes.at(key);
            CHECK(std::find(pool.begin(), pool.end(), value) != pool.end());
        }
    }

    // distractor proportion: floor(density * N) entities share all but one
    // attribute with some other entity (independent pairwise scan)
    int near_duplicates = 0;
    for (size_t i = 0; i < corpus.entities.size(); ++i) {
        bool close_to_other = false;
        for (size_t j = 0; j < corpus.entities.size(); ++j) {
            if (i == j) continue;
            int shared = 0;
            for (const auto& key : attribute_keys())
                if (corpus.entities[i].attributes.at(key) ==
                    corpus.entities[j].attributes.at(key))
                    ++shared;
            if (shared + 1 >= static_cast<int>(attribute_keys().size())) {
                close_to_other = true;
                break;
            }
        }
        if (close_to_other) ++near_duplicates;
    }
    int promised = static_cast<int>(spec.distractor_density * spec.entity_count);
    CHECK(near_duplicates >= promised);
}

TEST_CASE("oversized entity demand errors") {
    CorpusSpec spec;
    spec.entity_count = 100000;
    CHECK_THROWS_AS(build_corpus(spec, 1), std::invalid_argument);
    CorpusSpec zero;
    zero.entity_count = 0;
    CHECK_THROWS_AS(build_corpus(zero, 1), std::invalid_argument);
}

TEST_CASE("corpus persists and reloads") {
    auto dir = std::filesystem::temp_directory_path() / "webscout_corpus_test";
    std::filesystem::remove_all(dir);
    auto corpus = build_corpus(small_spec(), 3);
    save_corpus(corpus, dir);
    auto loaded = load_corpus(dir);
    CHECK(corpus_fingerprint(corpus) == corpus_fingerprint(loaded));
    CHECK(loaded.entities.size() == corpus.entities.size());
    std::filesystem::remove_all(dir);
}

TEST_CASE("generate_task produces a uniquely-answerable question") {
    auto corpus = build_corpus(small_spec(), 21);
    auto task = generate_task(corpus, 3, 5);

    CHECK(task.constraint_count == 3);
    CHECK_FALSE(task.question.empty());
    CHECK_FALSE(task.supporting_doc_ids.empty());

    // exhaustive solvability scan: exactly one entity's profile satisfies the
    // question's quoted constraint values
    std::vector<std::string> quoted;
    size_t pos = 0;
    while (true) {
        size_t open = task.question.find('"', pos);
        if (open == std::string::npos) break;
        size_t close = task.question.find('"', open + 1);
        if (close == std::string::npos) break;
        quoted.push_back(task.question.substr(open + 1, close - open - 1));
        pos = close + 1;
    }
    REQUIRE(quoted.size() == 3);
    int satisfiers = 0;
    std::string satisfier;
    for (const auto& e : corpus.entities) {
        bool all = true;
        for (const auto& value : quoted) {
            bool has = false;
            for (const auto& [k, v] : e.attributes) has = has || v == value;
            all = all && has;
        }
        if (all) {
            ++satisfiers;
            satisfier = e.name;
        }
    }
    CHECK(satisfiers == 1);
    CHECK(satisfier == task.gold_answer);

    // determinism
    auto again = generate_task(corpus, 3, 5);
    CHECK(again.question == task.question);
    CHECK(again.gold_answer == task.gold_answer);
}

TEST_CASE("generate_task rejects fewer than two constraints") {
    auto corpus = build_corpus(small_spec(), 2);
    CHECK_THROWS_AS(generate_task(corpus, 1, 1), std::invalid_argument);
}

TEST_CASE("judge_answer normalizes case, punctuation and articles") {
    CHECK(judge_answer("The Eiffel Tower", "eiffel tower"));
    CHECK_FALSE(judge_answer("Paris, France", "Paris"));
    CHECK(judge_answer("  Alda   Vance.", "alda vance"));
    CHECK(judge_answer("An answer", "answer"));
    CHECK_FALSE(judge_answer("", "something"));
}

TEST_CASE("judge_answer accepts random case and punctuation perturbations") {
    auto corpus = build_corpus(small_spec(), 31);
    webscout::SeededRng rng(99);
    static const std::vector<std::string> punct = {",", ".", "!", "  ", " - "};
    int checked = 0;
    for (int iter = 0; iter < 100; ++iter) {
        const auto& gold = corpus.entities[iter % corpus.entities.size()].name;
        std::string mutated;
        for (size_t i = 0; i < gold.size(); ++i) {
            char c = gold[i];
            mutated += rng.chance(0.5) ? static_cast<char>(std::toupper(c))
                                       : static_cast<char>(std::tolower(c));
            // extra punctuation only at word boundaries; inside a word it
            // would change the token stream, not just the decoration
            bool boundary = i + 1 == gold.size() || gold[i + 1] == ' ';
            if (boundary && rng.chance(0.3)) mutated += punct[rng.uniform(punct.size())];
        }
        if (rng.chance(0.5)) mutated = "The " + mutated;
        CHECK(judge_answer(mutated, gold));
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("tasks persist and reload") {
    auto corpus = build_corpus(small_spec(), 17);
    std::vector<SyntheticTask> tasks;
    for (int i = 0; i < 4; ++i) tasks.push_back(generate_task(corpus, 2, 100 + i));
    auto file = std::filesystem::temp_directory_path() / "webscout_tasks_test.jsonl";
    save_tasks(tasks, file);
    auto loaded = load_tasks(file);
    REQUIRE(loaded.size() == tasks.size());
    for (size_t i = 0; i < tasks.size(); ++i) {
        CHECK(loaded[i].question == tasks[i].question);
        CHECK(loaded[i].gold_answer == tasks[i].gold_answer);
        CHECK(loaded[i].seed == tasks[i].seed);
    }
    std::filesystem::remove(file);
}

TEST_CASE("template files drive the question phrasing") {
    auto file = std::filesystem::temp_directory_path() / "webscout_templates_test.txt";
    {
        std::ofstream out(file);
        out << "# test templates\n";
        out << "question = Name the person who {clauses}.\n";
        out << "clause.studied_at = trained at \"{value}\"\n";
        out << "clause.works_on = studies \"{value}\"\n";
        out << "clause.born_in = comes from \"{value}\"\n";
        out << "clause.award = holds the \"{value}\"\n";
        out << "clause.active_since = has worked since \"{value}\"\n";
    }
    auto templates = TemplateSet::load(file);
    auto corpus = build_corpus(small_spec(), 23);
    auto task = generate_task(corpus, 2, 9, templates);
    CHECK(task.question.starts_with("Name the person who "));
    std::filesystem::remove(file);
}
