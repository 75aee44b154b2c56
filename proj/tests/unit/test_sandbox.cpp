#include <catch2/catch_amalgamated.hpp>

#include "webscout/sandbox.hpp"

#include <thread>

using namespace webscout::sandbox;

namespace {

ResourceLimits default_limits() { return ResourceLimits{}; }

Sandbox& shared_box() {
    static Sandbox box;
    return box;
}

std::string run_one(const std::string& script) {
    auto& box = shared_box();
    auto id = box.create_session(default_limits(), BuiltinRegistry::core());
    auto out = box.execute(id, script);
    box.destroy_session(id);
    if (out.error) return "ERROR: " + *out.error;
    return out.stdout_text;
}

}  // namespace

TEST_CASE("arithmetic and printing") {
    CHECK(run_one("x = 2\nprint(x + 3)") == "5\n");
    CHECK(run_one("print(7 / 2)") == "3\n");
    CHECK(run_one("print(7.0 / 2)") == "3.5\n");
    CHECK(run_one("print(7 % 3)") == "1\n");
    CHECK(run_one("print(\"a\" + \"b\")") == "ab\n");
    CHECK(run_one("print(2 < 3, \"x\" == \"x\", 1 != 1)") == "true true false\n");
    CHECK(run_one("print(-4 * 2)") == "-8\n");
    CHECK(run_one("print(1 == 1.0)") == "true\n");
}

TEST_CASE("literals, lists, maps, indexing") {
    CHECK(run_one("xs = [1, 2, 3]\nprint(xs[0], xs[-1])") == "1 3\n");
    CHECK(run_one("m = {\"k\": 10}\nprint(m[\"k\"])") == "10\n");
    CHECK(run_one("print([1, \"two\", true])") == "[1, \"two\", true]\n");
    CHECK(run_one("print({\"a\": 1, \"b\": [2]})") == "{\"a\": 1, \"b\": [2]}\n");
    CHECK(run_one("s = \"abc\"\nprint(s[1])") == "b\n");
    CHECK(run_one("print(len(\"abcd\"), len([1,2]), len(range(5)))") == "4 2 5\n");
}

TEST_CASE("control flow") {
    CHECK(run_one("if 2 > 1 { print(\"yes\") } else { print(\"no\") }") == "yes\n");
    CHECK(run_one("if 1 > 2 { print(\"yes\") } else if 2 > 1 { print(\"mid\") }") == "mid\n");
    CHECK(run_one("total = 0\nfor x in [1,2,3] { total = total + x }\nprint(total)") == "6\n");
    CHECK(run_one("n = 0\nwhile n < 4 { n = n + 1 }\nprint(n)") == "4\n");
    CHECK(run_one("out = \"\"\nfor c in \"ab\" { out = out + c + \".\" }\nprint(out)") ==
          "a.b.\n");
    CHECK(run_one("s = 0\nfor i in range(2, 5) { s = s + i }\nprint(s)") == "9\n");
    CHECK(run_one("print(true and not false or false)") == "true\n");
}

TEST_CASE("functions") {
    CHECK(run_one("def add(a, b) { return a + b }\nprint(add(2, 3))") == "5\n");
    CHECK(run_one("def f() { return }\nprint(f())") == "null\n");
    CHECK(run_one("def twice(x) { return x * 2 }\ndef quad(x) { return twice(twice(x)) }\n"
                  "print(quad(3))") == "12\n");
    // locals do not leak
    CHECK(run_one("def f(a) { b = a + 1\nreturn b }\nprint(f(1))\nprint(contains([], 0))") ==
          "2\nfalse\n");
    // user definitions shadow builtins
    CHECK(run_one("def len(x) { return 99 }\nprint(len(\"abc\"))") == "99\n");
}

TEST_CASE("string builtins") {
    CHECK(run_one("print(lower(\"AbC\"), upper(\"aBc\"))") == "abc ABC\n");
    CHECK(run_one("print(split(\"a,b,,c\", \",\"))") == "[\"a\", \"b\", \"\", \"c\"]\n");
    CHECK(run_one("print(join([\"x\", \"y\"], \"-\"))") == "x-y\n");
    CHECK(run_one("print(replace(\"aaa\", \"a\", \"b\"))") == "bbb\n");
    CHECK(run_one("print(strip(\"  hi \"))") == "hi\n");
    CHECK(run_one("print(contains(\"hello\", \"ell\"), contains([1,2], 3))") == "true false\n");
    CHECK(run_one("print(keys({\"b\": 1, \"a\": 2}))") == "[\"a\", \"b\"]\n");
    CHECK(run_one("print(sorted([3, 1, 2]), sorted([\"b\", \"a\"]))") ==
          "[1, 2, 3] [\"a\", \"b\"]\n");
    CHECK(run_one("print(str(12) + \"!\")") == "12!\n");
    CHECK(run_one("print(int(\"42\") + 1)") == "43\n");
    CHECK(run_one("xs = append([1], 2)\nprint(xs)") == "[1, 2]\n");
}

TEST_CASE("error diagnostics carry a class label and a line number") {
    CHECK(run_one("x = (").starts_with("ERROR: parse error"));
    CHECK(run_one("print(y)") == "ERROR: undefined name (line 1): 'y'");
    CHECK(run_one("x = 1\nprint(x + \"s\")").starts_with("ERROR: type error (line 2)"));
    CHECK(run_one("print(1 / 0)") == "ERROR: runtime error (line 1): division by zero");
    CHECK(run_one("if 1 { print(1) }").starts_with("ERROR: type error"));
    CHECK(run_one("nope(1)").starts_with("ERROR: undefined name"));
    CHECK(run_one("xs = [1]\nprint(xs[5])").starts_with("ERROR: runtime error (line 2)"));
    CHECK(run_one("m = {}\nprint(m[\"k\"])").starts_with("ERROR: runtime error"));
    CHECK(run_one("len(1, 2)").starts_with("ERROR: type error"));
    CHECK(run_one("return 1").starts_with("ERROR: parse error"));
}

TEST_CASE("stdout before a failure is preserved") {
    auto& box = shared_box();
    auto id = box.create_session(default_limits(), BuiltinRegistry::core());
    auto out = box.execute(id, "print(\"kept\")\nboom()");
    CHECK(out.stdout_text == "kept\n");
    REQUIRE(out.error.has_value());
    CHECK(out.error->starts_with("undefined name (line 2)"));
    box.destroy_session(id);
}

TEST_CASE("bindings and functions persist across executions") {
    auto& box = shared_box();
    auto id = box.create_session(default_limits(), BuiltinRegistry::core());
    auto first = box.execute(id, "x = 2\ndef bump(v) { return v + 1 }");
    CHECK_FALSE(first.error.has_value());
    auto second = box.execute(id, "print(x)");
    CHECK(second.stdout_text == "2\n");
    auto third = box.execute(id, "print(bump(x))");
    CHECK(third.stdout_text == "3\n");
    auto session = box.find(id);
    REQUIRE(session);
    CHECK(session->execution_count() == 3);
    CHECK(session->binding_count() == 1);
    box.destroy_session(id);
}

TEST_CASE("sessions are created empty with distinct ids") {
    auto& box = shared_box();
    auto a = box.create_session(default_limits(), BuiltinRegistry::core());
    auto b = box.create_session(default_limits(), BuiltinRegistry::core());
    CHECK(a != b);
    CHECK(box.find(a)->binding_count() == 0);
    auto session = box.find(a);
    box.execute(a, "x = 1");
    CHECK(session->binding_count() == 1);
    box.destroy_session(a);
    box.destroy_session(b);
}

TEST_CASE("session isolation and destroy semantics") {
    auto& box = shared_box();
    auto a = box.create_session(default_limits(), BuiltinRegistry::core());
    auto b = box.create_session(default_limits(), BuiltinRegistry::core());
    box.execute(a, "secret = 41");
    auto peek = box.execute(b, "print(secret)");
    REQUIRE(peek.error.has_value());
    CHECK(peek.error->starts_with("undefined name"));

    box.execute(b, "mine = 7");
    box.destroy_session(a);
    CHECK(box.execute(b, "print(mine)").stdout_text == "7\n");

    auto after = box.execute(a, "print(1)");
    REQUIRE(after.error.has_value());
    CHECK(after.error->starts_with("session closed"));

    box.destroy_session(a);  // idempotent
    box.destroy_session(b);
}

TEST_CASE("interleaved sessions match solo runs") {
    std::vector<std::string> scripts_a = {"x = 1", "x = x + 1", "print(x)"};
    std::vector<std::string> scripts_b = {"x = 100", "x = x * 2", "print(x)"};

    auto solo = [&](const std::vector<std::string>& scripts) {
        Sandbox box;
        auto id = box.create_session(default_limits(), BuiltinRegistry::core());
        std::string all;
        for (const auto& s : scripts) all += box.execute(id, s).stdout_text;
        return all;
    };

    Sandbox box;
    auto a = box.create_session(default_limits(), BuiltinRegistry::core());
    auto b = box.create_session(default_limits(), BuiltinRegistry::core());
    std::string got_a, got_b;
    for (size_t i = 0; i < scripts_a.size(); ++i) {
        got_a += box.execute(a, scripts_a[i]).stdout_text;
        got_b += box.execute(b, scripts_b[i]).stdout_text;
    }
    CHECK(got_a == solo(scripts_a));
    CHECK(got_b == solo(scripts_b));
}

TEST_CASE("statefulness: concatenation equivalence on hand-picked pairs") {
    std::vector<std::pair<std::string, std::string>> pairs = {
        {"x = 1", "print(x + 1)"},
        {"def f(a) { return a * 3 }", "print(f(4))"},
        {"xs = [1, 2]", "xs = append(xs, 3)\nprint(xs)"},
        {"total = 0\nfor i in range(10) { total = total + i }", "print(total)"},
    };
    for (const auto& [s1, s2] : pairs) {
        Sandbox box;
        auto split_id = box.create_session(default_limits(), BuiltinRegistry::core());
        auto o1 = box.execute(split_id, s1);
        REQUIRE_FALSE(o1.error.has_value());
        auto o2 = box.execute(split_id, s2);

        auto joined_id = box.create_session(default_limits(), BuiltinRegistry::core());
        auto oj = box.execute(joined_id, s1 + "\n" + s2);

        CHECK(o1.stdout_text + o2.stdout_text == oj.stdout_text);
        CHECK(o2.error.has_value() == oj.error.has_value());
        CHECK(box.find(split_id)->bindings_snapshot() ==
              box.find(joined_id)->bindings_snapshot());
    }
}

TEST_CASE("limits: loop iterations") {
    ResourceLimits limits;
    limits.max_loop_iterations = 50;
    Sandbox box;
    auto id = box.create_session(limits, BuiltinRegistry::core());
    auto out = box.execute(id, "n = 0\nwhile n < 1000 { n = n + 1 }");
    REQUIRE(out.error.has_value());
    CHECK(out.error->starts_with("limit exceeded"));
}

TEST_CASE("limits: an unbounded loop hits the wall-time ceiling") {
    ResourceLimits limits;
    limits.max_wall_time = std::chrono::milliseconds(150);
    limits.max_loop_iterations = std::numeric_limits<long long>::max();
    Sandbox box;
    auto id = box.create_session(limits, BuiltinRegistry::core());
    auto started = std::chrono::steady_clock::now();
    auto out = box.execute(id, "n = 0\nwhile true { n = n + 1 }");
    auto elapsed = std::chrono::steady_clock::now() - started;
    REQUIRE(out.error.has_value());
    CHECK(out.error->starts_with("limit exceeded"));
    CHECK(elapsed < std::chrono::seconds(2));
}

TEST_CASE("limits: stdout is cut at the cap with a truncation marker") {
    ResourceLimits limits;
    limits.max_stdout_bytes = 64;
    Sandbox box;
    auto id = box.create_session(limits, BuiltinRegistry::core());
    auto out = box.execute(id, "for i in range(100) { print(\"0123456789\") }");
    CHECK_FALSE(out.error.has_value());  // truncation is a flag, not a failure
    CHECK(out.truncated);
    CHECK(out.stdout_text.size() == 64);
    CHECK(out.stdout_text.find("[truncated]") != std::string::npos);
}

TEST_CASE("limits: recursion depth is capped") {
    auto out = run_one("def f(n) { return f(n + 1) }\nprint(f(0))");
    CHECK(out.starts_with("ERROR: limit exceeded"));
}

TEST_CASE("distinct sessions can execute in parallel") {
    Sandbox box;
    auto a = box.create_session(default_limits(), BuiltinRegistry::core());
    auto b = box.create_session(default_limits(), BuiltinRegistry::core());
    std::string out_a, out_b;
    std::thread ta([&] {
        out_a = box.execute(a, "t = 0\nfor i in range(5000) { t = t + i }\nprint(t)")
                    .stdout_text;
    });
    std::thread tb([&] {
        out_b = box.execute(b, "t = 1\nfor i in range(5000) { t = t + 1 }\nprint(t)")
                    .stdout_text;
    });
    ta.join();
    tb.join();
    CHECK(out_a == "12497500\n");
    CHECK(out_b == "5001\n");
}

TEST_CASE("parser robustness on hostile nesting") {
    std::string deep(100000, '(');
    auto out = run_one("x = " + deep);
    CHECK(out.starts_with("ERROR: parse error"));
    CHECK(run_one(std::string(5000, '[')).starts_with("ERROR: parse error"));
}

TEST_CASE("multi-line lists and maps parse") {
    CHECK(run_one("xs = [\n  1,\n  2,\n  3\n]\nprint(len(xs))") == "3\n");
    CHECK(run_one("m = {\n  \"a\": 1,\n  \"b\": 2,\n}\nprint(len(m))") == "2\n");
    CHECK(run_one("y = (1 +\n 2)\nprint(y)") == "3\n");
}

TEST_CASE("integer overflow is an error, not UB") {
    CHECK(run_one("print(9223372036854775807 + 1)")
              .starts_with("ERROR: runtime error"));
    CHECK(run_one("print(99999999999999999999)").starts_with("ERROR: parse error"));
}
