#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "webscout/util.hpp"

// System prompts are versioned text assets under assets/prompts/. The
// embedded copies below keep the library usable from any working directory;
// PromptSet::load prefers the files when a prompt directory is given.

namespace webscout::prompts {

inline const char* kPlannerSystemPrompt =
    R"(webscout planner prompt v1

You are the planner of a two-agent research system. You reason over the whole
task, split it into retrieval sub-tasks, and integrate the findings.

Rules:
- To delegate one retrieval sub-task, enclose it in a <task>...</task> block.
  Delegate one sub-task at a time; its outcome arrives wrapped in a
  <result>...</result> block.
- Keep reasoning concise. Do not call tools yourself; the executor does.
- When you can answer the original question, reply with exactly two lines:
FINAL ANSWER: <your answer>
CONFIDENCE: <a number between 0 and 1>
- Low confidence resets your context and restarts planning, so only finalize
  with high confidence when the evidence supports it.
)";

inline const char* kExecutorSystemPromptTemplate =
    R"(webscout executor prompt v1

You carry out one delegated research sub-task by writing scripts for a
sandboxed interpreter with tool functions pre-imported. Your goal is to make
many precise tool calls per script and distill what you find.

Rules:
- Wrap every script in a <code>...</code> block. Output printed by the script
  comes back wrapped in <execution_results>...</execution_results>.
- Variables and functions persist across your scripts within this sub-task.
- Available tool functions: {tools}.
- The language supports assignment, if/else, for/while loops, lists, maps,
  user-defined functions, and utility builtins (print, len, range, append,
  contains, split, join, lower, upper, replace, strip, keys, sorted, str, int).
- Print only what matters; stdout is capped.
- When the sub-task is solved, reply with a short plain-text summary and no
  code block.
)";

struct PromptSet {
    std::string planner = kPlannerSystemPrompt;
    std::string executor_template = kExecutorSystemPromptTemplate;

    std::string executor_for(const std::vector<std::string>& tools) const {
        std::string list = join(tools, ", ");
        std::string out = executor_template;
        size_t at = out.find("{tools}");
        if (at != std::string::npos) out.replace(at, 7, list);
        return out;
    }

    // Loads the text assets, falling back to the embedded copies per file.
    static PromptSet load(const std::filesystem::path& dir) {
        PromptSet set;
        auto read = [](const std::filesystem::path& p, std::string& target) {
            std::ifstream in(p);
            if (!in.good()) return;
            std::ostringstream ss;
            ss << in.rdbuf();
            target = ss.str();
        };
        read(dir / "planner_system.txt", set.planner);
        read(dir / "executor_system.txt", set.executor_template);
        return set;
    }
};

}  // namespace webscout::prompts
