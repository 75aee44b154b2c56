#include <catch2/catch_amalgamated.hpp>

#include "webscout/llm.hpp"

#include <filesystem>

using namespace webscout::llm;

namespace {

std::vector<Message> simple_prompt(const std::string& user) {
    return {{Role::System, "You are a test."}, {Role::User, user}};
}

}  // namespace

TEST_CASE("default completion params follow the configured model settings") {
    CompletionParams params;
    CHECK(params.max_completion_tokens == 65536);
    CHECK(params.temperature == 0.6);
}

TEST_CASE("queue backend replays in order and underruns loudly") {
    QueueBackend backend({"hello"});
    auto c = complete(simple_prompt("hi"), {}, backend);
    CHECK(c.text == "hello");
    CHECK_THROWS_WITH(complete(simple_prompt("hi"), {}, backend),
                      Catch::Matchers::ContainsSubstring("script underrun"));
}

TEST_CASE("preconditions are enforced") {
    QueueBackend backend({"x"});
    CHECK_THROWS_AS(complete({}, {}, backend), CompletionError);
    CHECK_THROWS_AS(complete({{Role::User, "no system"}}, {}, backend), CompletionError);
}

TEST_CASE("synthetic usage counts a token per four chars") {
    QueueBackend backend({"12345678"});
    auto c = complete(simple_prompt("abcd"), {}, backend);
    CHECK(c.usage.completion_tokens == 2);
    CHECK(c.usage.prompt_tokens ==
          synthetic_token_count("You are a test.") + synthetic_token_count("abcd"));
}

TEST_CASE("prompt digest is stable and order-sensitive") {
    auto a = prompt_digest(simple_prompt("one"));
    auto b = prompt_digest(simple_prompt("one"));
    auto c = prompt_digest(simple_prompt("two"));
    CHECK(a == b);
    CHECK(a != c);
    std::vector<Message> swapped = {{Role::System, "one"}, {Role::User, "You are a test."}};
    CHECK(prompt_digest(swapped) != a);
}

TEST_CASE("record then replay round-trips by digest") {
    auto cassette = std::filesystem::temp_directory_path() / "webscout_test_cassette.jsonl";
    {
        QueueBackend inner({"first", "second"});
        RecordingBackend rec(inner, cassette.string());
        complete(simple_prompt("q1"), {}, rec);
        complete(simple_prompt("q2"), {}, rec);
    }
    auto replay = ReplayBackend::from_file(cassette.string());
    auto r2 = complete(simple_prompt("q2"), {}, replay);
    auto r1 = complete(simple_prompt("q1"), {}, replay);
    CHECK(r1.text == "first");
    CHECK(r2.text == "second");
    // every occurrence serves exactly one call
    CHECK_THROWS_WITH(complete(simple_prompt("q1"), {}, replay),
                      Catch::Matchers::ContainsSubstring("replay miss"));
    std::filesystem::remove(cassette);
}

TEST_CASE("replay on an empty cassette errors on every call") {
    ReplayBackend replay(std::vector<CassetteRecord>{});
    CHECK_THROWS_AS(complete(simple_prompt("anything"), {}, replay), CompletionError);
}

TEST_CASE("replay miss names the nearest recorded digest") {
    CassetteRecord rec;
    rec.digest = prompt_digest(simple_prompt("known"));
    rec.response = "ok";
    ReplayBackend replay({rec});
    try {
        complete(simple_prompt("unknown"), {}, replay);
        FAIL("expected a replay miss");
    } catch (const CompletionError& e) {
        CHECK(std::string(e.what()).find(rec.digest) != std::string::npos);
    }
}

TEST_CASE("identical calls against a doubled cassette give identical outputs") {
    CassetteRecord rec;
    rec.digest = prompt_digest(simple_prompt("q"));
    rec.response = "same";
    ReplayBackend replay({rec, rec});
    auto a = complete(simple_prompt("q"), {}, replay);
    auto b = complete(simple_prompt("q"), {}, replay);
    CHECK(a.text == b.text);
}

TEST_CASE("policy backend is a pure function of the messages") {
    PolicyBackend backend([](const std::vector<Message>& messages) {
        return "echo: " + messages.back().content;
    });
    CHECK(complete(simple_prompt("alpha"), {}, backend).text == "echo: alpha");
    CHECK(complete(simple_prompt("alpha"), {}, backend).text == "echo: alpha");
}

TEST_CASE("cassette lines round-trip") {
    CassetteRecord rec{"deadbeef", "multi\nline \"response\"", {12, 34}};
    auto parsed = parse_cassette_line(cassette_line(rec));
    CHECK(parsed.digest == rec.digest);
    CHECK(parsed.response == rec.response);
    CHECK(parsed.usage.prompt_tokens == 12);
    CHECK(parsed.usage.completion_tokens == 34);
}
