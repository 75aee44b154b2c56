#include <catch2/catch_amalgamated.hpp>

#include "webscout/protocol.hpp"

#include "support/protocol_oracle.hpp"

#include <random>

using namespace webscout::protocol;

namespace {

// Tag-fragment-heavy random text so the scanner sees plenty of near-misses.
std::string random_tag_soup(std::mt19937_64& rng, size_t max_pieces) {
    static const std::vector<std::string> pieces = {
        "<task>", "</task>", "<code>", "</code>", "<result>", "</result>",
        "<execution_results>", "</execution_results>", "a", "b", "c", "<", ">", "/", "\n",
        "<tas", "k>", "</", "task>", "x y", std::string("\0ESC", 4), "<code>r=1</code>"};
    size_t n = rng() % (max_pieces + 1);
    std::string out;
    for (size_t i = 0; i < n; ++i) out += pieces[rng() % pieces.size()];
    return out;
}

std::string random_content(std::mt19937_64& rng, size_t max_len) {
    static const std::string alphabet = [] {
        std::string a = "abc</task></code>\n <>()xy";
        a += '\0';  // the escape sentinel's first byte must appear in inputs
        a += "ESC";
        return a;
    }();
    size_t n = rng() % (max_len + 1);
    std::string out;
    for (size_t i = 0; i < n; ++i) out += alphabet[rng() % alphabet.size()];
    return out;
}

}  // namespace

TEST_CASE("extract_blocks basics") {
    CHECK(extract_blocks("", Tag::Task).empty());

    auto blocks = extract_blocks("a<task>find X</task>b", Tag::Task);
    REQUIRE(blocks.size() == 1);
    CHECK(blocks[0].content == "find X");
    CHECK(blocks[0].span_begin == 1);
    CHECK(blocks[0].span_end == 20);

    CHECK(extract_blocks("<task>unclosed", Tag::Task).empty());
    CHECK(extract_blocks("</task>stray close", Tag::Task).empty());
}

TEST_CASE("extract_blocks: two code blocks and one unclosed task") {
    std::string text =
        "think<task>never closed\n"
        "<code>r = web_search(\"q\")</code>mid<code>print(r)</code>tail";
    auto blocks = extract_blocks(text, Tag::Code);
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0].content == "r = web_search(\"q\")");
    CHECK(blocks[1].content == "print(r)");
    CHECK(blocks[0].span_end <= blocks[1].span_begin);

    auto oracle = testsupport::oracle_extract(text, "code");
    REQUIRE(oracle.size() == 2);
    CHECK(oracle[0].content == blocks[0].content);
    CHECK(oracle[1].content == blocks[1].content);
    CHECK(extract_blocks(text, Tag::Task).empty());
}

TEST_CASE("extract_blocks matches the position-list oracle on tag soup") {
    std::mt19937_64 rng(20240817);
    for (int iter = 0; iter < 3000; ++iter) {
        std::string text = random_tag_soup(rng, 30);
        for (Tag tag : {Tag::Task, Tag::Result, Tag::Code, Tag::ExecutionResults}) {
            auto got = extract_blocks(text, tag);
            auto want = testsupport::oracle_extract(text, std::string(tag_name(tag)));
            REQUIRE(got.size() == want.size());
            for (size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].content == want[i].content);
                CHECK(got[i].span_begin == want[i].span_begin);
                CHECK(got[i].span_end == want[i].span_end);
            }
        }
    }
}

TEST_CASE("wrap_block round-trips") {
    CHECK(wrap_block(Tag::Result, "done") == "<result>\ndone\n</result>");

    auto empty = extract_blocks(wrap_block(Tag::ExecutionResults, ""), Tag::ExecutionResults);
    REQUIRE(empty.size() == 1);
    CHECK(empty[0].content.empty());

    std::string with_close = "x = \"</code>\" + y";
    auto blocks = extract_blocks(wrap_block(Tag::Code, with_close), Tag::Code);
    REQUIRE(blocks.size() == 1);
    CHECK(blocks[0].content == with_close);
}

TEST_CASE("wrap/extract identity on random contents") {
    std::mt19937_64 rng(7);
    for (int iter = 0; iter < 3000; ++iter) {
        std::string content = random_content(rng, 60);
        for (Tag tag : {Tag::Task, Tag::Code, Tag::ExecutionResults}) {
            auto blocks = extract_blocks(wrap_block(tag, content), tag);
            REQUIRE(blocks.size() == 1);
            REQUIRE(blocks[0].content == content);
        }
    }
}

TEST_CASE("blocks come back in strictly increasing span order") {
    std::mt19937_64 rng(99);
    for (int iter = 0; iter < 500; ++iter) {
        std::string text = random_tag_soup(rng, 40);
        auto blocks = extract_blocks(text, Tag::Task);
        for (size_t i = 1; i < blocks.size(); ++i) {
            CHECK(blocks[i - 1].span_end <= blocks[i].span_begin);
            CHECK(blocks[i].span_begin < blocks[i].span_end);
        }
        for (const auto& b : blocks) CHECK(b.span_end <= text.size());
    }
}

TEST_CASE("parse_planner_turn") {
    auto delegate = parse_planner_turn("let me check\n<task>verify author list</task>\nmore");
    REQUIRE(std::holds_alternative<Delegate>(delegate));
    CHECK(std::get<Delegate>(delegate).sub_task == "verify author list");

    auto final = parse_planner_turn("FINAL ANSWER: Paris\nCONFIDENCE: 0.9");
    REQUIRE(std::holds_alternative<Finalize>(final));
    CHECK(std::get<Finalize>(final).answer == "Paris");
    CHECK(std::get<Finalize>(final).confidence == 0.9);

    CHECK(std::holds_alternative<Continue>(parse_planner_turn("let me think more…")));

    // first task block wins over later ones and over the answer marker
    auto first = parse_planner_turn("<task>one</task><task>two</task>");
    CHECK(std::get<Delegate>(first).sub_task == "one");

    // unparseable confidence forces the replanning path
    auto degraded = parse_planner_turn("FINAL ANSWER: Rome\nCONFIDENCE: very high");
    REQUIRE(std::holds_alternative<Finalize>(degraded));
    CHECK(std::get<Finalize>(degraded).confidence == 0.0);

    auto missing = parse_planner_turn("FINAL ANSWER: Rome");
    REQUIRE(std::holds_alternative<Finalize>(missing));
    CHECK(std::get<Finalize>(missing).answer == "Rome");
    CHECK(std::get<Finalize>(missing).confidence == 0.0);

    // clamping
    auto clamped = parse_planner_turn("FINAL ANSWER: x\nCONFIDENCE: 3.5");
    CHECK(std::get<Finalize>(clamped).confidence == 1.0);
}

TEST_CASE("parse_executor_turn") {
    auto run = parse_executor_turn("…<code>r = web_search(\"EMNLP 2021\")</code>");
    REQUIRE(std::holds_alternative<RunScript>(run));
    CHECK(std::get<RunScript>(run).script == "r = web_search(\"EMNLP 2021\")");

    auto final = parse_executor_turn("The answer is page 4.");
    REQUIRE(std::holds_alternative<FinalResult>(final));
    CHECK(std::get<FinalResult>(final).summary == "The answer is page 4.");

    auto two = parse_executor_turn("<code>first()</code> then <code>second()</code>");
    REQUIRE(std::holds_alternative<RunScript>(two));
    CHECK(std::get<RunScript>(two).script == "first()");

    auto thought = parse_executor_turn("<think>internal chains</think>\nIt is 42.");
    CHECK(std::get<FinalResult>(thought).summary == "It is 42.");
}

TEST_CASE("parse_* never throws on tag soup") {
    std::mt19937_64 rng(5150);
    for (int iter = 0; iter < 5000; ++iter) {
        std::string text = random_tag_soup(rng, 50);
        CHECK_NOTHROW(parse_planner_turn(text));
        CHECK_NOTHROW(parse_executor_turn(text));
        for (Tag tag : {Tag::Task, Tag::Result, Tag::Code, Tag::ExecutionResults})
            CHECK_NOTHROW(extract_blocks(text, tag));
    }
}
