#include <catch2/catch_amalgamated.hpp>

#include "webscout/trace.hpp"

#include <filesystem>
#include <fstream>

using namespace webscout::trace;

TEST_CASE("trace events serialize to a single deterministic line") {
    TraceEvent ev;
    ev.run_id = "run-007";
    ev.timestamp = 3;
    ev.actor = Actor::Executor;
    ev.kind = EventKind::ScriptRun;
    ev.payload = {{"index", 1}, {"stdout_bytes", 42}};
    ev.tokens = webscout::llm::TokenUsage{10, 20};

    std::string line = to_json_line(ev);
    CHECK(line.find('\n') == std::string::npos);
    CHECK(line == to_json_line(ev));

    auto parsed = parse_trace_line(line);
    REQUIRE(parsed.has_value());
    CHECK(parsed->run_id == "run-007");
    CHECK(parsed->timestamp == 3);
    CHECK(parsed->actor == Actor::Executor);
    CHECK(parsed->kind == EventKind::ScriptRun);
    CHECK(parsed->payload["index"] == 1);
    REQUIRE(parsed->tokens.has_value());
    CHECK(parsed->tokens->prompt_tokens == 10);
}

TEST_CASE("malformed lines parse to nothing") {
    CHECK_FALSE(parse_trace_line("not json").has_value());
    CHECK_FALSE(parse_trace_line("{}").has_value());
    CHECK_FALSE(parse_trace_line(R"({"run":"r","t":"zero","actor":"tool","kind":"turn"})")
                    .has_value());
    CHECK_FALSE(parse_trace_line(R"({"run":"r","t":0,"actor":"ghost","kind":"turn"})")
                    .has_value());
}

TEST_CASE("writer hands out monotone timestamps") {
    MemorySink sink;
    TraceWriter writer(sink, "run-1");
    writer.emit(Actor::Planner, EventKind::Turn);
    writer.emit(Actor::Planner, EventKind::Delegate, {{"sub_task_id", 1}});
    writer.emit(Actor::Executor, EventKind::Turn);
    auto events = sink.events();
    REQUIRE(events.size() == 3);
    for (size_t i = 0; i < events.size(); ++i)
        CHECK(events[i].timestamp == static_cast<long long>(i));
}

TEST_CASE("directory sink keeps one append-only file per run") {
    auto dir = std::filesystem::temp_directory_path() / "webscout_trace_test";
    std::filesystem::remove_all(dir);
    {
        DirectorySink sink(dir);
        TraceWriter a(sink, "run-a");
        TraceWriter b(sink, "run-b");
        a.emit(Actor::Planner, EventKind::Turn);
        b.emit(Actor::Planner, EventKind::Turn);
        a.emit(Actor::Planner, EventKind::Final, {{"answer", "x"}});
    }
    auto a_file = read_trace_file(dir / "run-a.trace.jsonl");
    auto b_file = read_trace_file(dir / "run-b.trace.jsonl");
    CHECK(a_file.events.size() == 2);
    CHECK(b_file.events.size() == 1);
    CHECK(a_file.skipped_lines == 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("reader skips malformed lines and counts them") {
    auto dir = std::filesystem::temp_directory_path() / "webscout_trace_bad";
    std::filesystem::create_directories(dir);
    auto path = dir / "bad.trace.jsonl";
    {
        std::ofstream out(path);
        TraceEvent ev;
        ev.run_id = "r";
        out << to_json_line(ev) << "\n";
        out << "garbage line\n";
        out << to_json_line(ev) << "\n";
    }
    auto file = read_trace_file(path);
    CHECK(file.events.size() == 2);
    CHECK(file.skipped_lines == 1);
    std::filesystem::remove_all(dir);
}
