#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "webscout/llm.hpp"
#include "webscout/protocol.hpp"
#include "webscout/sandbox.hpp"
#include "webscout/trace.hpp"

// The planner/executor interaction cycle: the planner delegates sub-tasks in
// <task> blocks, the executor drives the sandbox through <code> blocks, and
// distilled results come back inside <result> blocks. A low-confidence final
// answer resets the planner's context and restarts the attempt.

namespace webscout::orchestrator {

struct RunConfig {
    double confidence_threshold = 0.7;
    int max_replans = 3;
    int max_planner_turns = 12;
    int max_executor_turns = 12;
    int max_script_runs_per_subtask = 6;
    long long token_budget = 2000000;

    void validate() const {
        if (confidence_threshold < 0.0 || confidence_threshold > 1.0)
            throw std::invalid_argument("confidence_threshold must be in [0,1]");
        if (max_replans < 0 || max_planner_turns < 1 || max_executor_turns < 1 ||
            max_script_runs_per_subtask < 1 || token_budget < 1)
            throw std::invalid_argument("run limits must be positive");
    }
};

// Replan while the answer is weak and attempts remain. `attempts` counts
// completed attempts, so the loop runs at most max_replans + 1 times.
inline bool should_replan(double confidence, int attempts, const RunConfig& cfg) {
    return confidence < cfg.confidence_threshold && attempts < cfg.max_replans + 1;
}

struct SubTask {
    int id = 0;
    std::string description;
    int issued_at_turn = 0;
};

struct ExecResult {
    int sub_task_id = 0;
    std::string summary;
    std::vector<std::pair<std::string, std::string>> evidence;  // (url, snippet)
    bool degraded = false;
};

struct PlannerEpisode {
    std::string question;
    std::vector<llm::Message> context;
    int attempts = 0;
    std::optional<std::pair<std::string, double>> answer;
};

struct PlannerOutcome {
    std::string answer;
    double confidence = 0.0;
    PlannerEpisode episode;
};

class Orchestrator {
public:
    struct Deps {
        llm::CompletionBackend* planner_llm = nullptr;
        llm::CompletionBackend* executor_llm = nullptr;
        sandbox::Sandbox* sandbox = nullptr;
        std::function<sandbox::BuiltinRegistry()> make_registry;
        sandbox::ResourceLimits limits;
        std::string planner_prompt;
        std::string executor_prompt;
        llm::CompletionParams params;
    };

    Orchestrator(Deps deps, RunConfig cfg, trace::TraceWriter& trace)
        : deps_(std::move(deps)), cfg_(cfg), trace_(&trace) {
        cfg_.validate();
    }

    PlannerOutcome run_planner(const std::string& question) {
        PlannerOutcome best;
        PlannerEpisode episode;
        episode.question = question;
        tokens_used_ = 0;
        next_subtask_id_ = 1;

        std::string carryover;
        bool have_best = false;
        for (int attempt = 1; attempt <= cfg_.max_replans + 1; ++attempt) {
            episode.attempts = attempt;
            episode.context.clear();
            episode.context.push_back({llm::Role::System, deps_.planner_prompt});
            std::string user = question;
            if (!carryover.empty())
                user += "\n\nNotes from the previous attempt:\n" + carryover;
            episode.context.push_back({llm::Role::User, user});
            int delegations_this_attempt = 0;

            for (int turn = 1; turn <= cfg_.max_planner_turns; ++turn) {
                std::string text;
                try {
                    text = complete_with(*deps_.planner_llm, episode.context,
                                         trace::Actor::Planner, attempt);
                } catch (const llm::CompletionError& e) {
                    trace_->emit(trace::Actor::Backend, trace::EventKind::Final,
                                 {{"error", e.what()}, {"phase", "planner"}});
                    best.episode = std::move(episode);
                    return best;
                }

                auto action = protocol::parse_planner_turn(text);
                if (std::holds_alternative<protocol::Delegate>(action)) {
                    episode.context.push_back({llm::Role::Assistant, text});
                    SubTask sub;
                    sub.id = next_subtask_id_++;
                    sub.description = std::get<protocol::Delegate>(action).sub_task;
                    sub.issued_at_turn = turn;
                    ++delegations_this_attempt;
                    trace_->emit(trace::Actor::Planner, trace::EventKind::Delegate,
                                 {{"sub_task_id", sub.id}, {"description", sub.description}});
                    ExecResult result = run_executor(sub);
                    trace_->emit(trace::Actor::Executor, trace::EventKind::Result,
                                 {{"sub_task_id", result.sub_task_id},
                                  {"summary", result.summary},
                                  {"degraded", result.degraded}});
                    episode.context.push_back(
                        {llm::Role::User,
                         protocol::wrap_block(protocol::Tag::Result, result.summary)});
                } else if (std::holds_alternative<protocol::Finalize>(action)) {
                    episode.context.push_back({llm::Role::Assistant, text});
                    const auto& fin = std::get<protocol::Finalize>(action);
                    episode.answer = {fin.answer, fin.confidence};
                    if (!have_best || fin.confidence > best.confidence) {
                        best.answer = fin.answer;
                        best.confidence = fin.confidence;
                        have_best = true;
                    }
                    if (should_replan(fin.confidence, attempt, cfg_)) {
                        trace_->emit(trace::Actor::Planner, trace::EventKind::Replan,
                                     {{"attempt", attempt}, {"confidence", fin.confidence}});
                        carryover = attempt_summary(fin, delegations_this_attempt);
                        break;  // context resets; next attempt starts fresh
                    }
                    trace_->emit(trace::Actor::Planner, trace::EventKind::Final,
                                 {{"answer", fin.answer}, {"confidence", fin.confidence}});
                    best.answer = fin.answer;
                    best.confidence = fin.confidence;
                    best.episode = std::move(episode);
                    return best;
                } else {
                    episode.context.push_back({llm::Role::Assistant, text});
                }

                if (tokens_used_ > cfg_.token_budget) {
                    trace_->emit(trace::Actor::Planner, trace::EventKind::Final,
                                 {{"answer", best.answer},
                                  {"confidence", 0.0},
                                  {"exhausted", "token_budget"}});
                    best.confidence = 0.0;
                    best.episode = std::move(episode);
                    return best;
                }
                if (turn == cfg_.max_planner_turns) {
                    trace_->emit(trace::Actor::Planner, trace::EventKind::Final,
                                 {{"answer", best.answer},
                                  {"confidence", 0.0},
                                  {"exhausted", "planner_turns"}});
                    best.confidence = 0.0;
                    best.episode = std::move(episode);
                    return best;
                }
            }
        }
        // attempts exhausted right after a replan decision on the last attempt
        // cannot happen (should_replan guards it); keep the best seen anyway
        trace_->emit(trace::Actor::Planner, trace::EventKind::Final,
                     {{"answer", best.answer}, {"confidence", best.confidence}});
        best.episode = std::move(episode);
        return best;
    }

    // One executor episode over a fresh sandbox session. Sandbox errors are
    // injected back into the context so the model can recover; hitting the
    // script-run or turn limit degrades to a summary of the last outputs.
    ExecResult run_executor(const SubTask& sub_task) {
        ExecResult result;
        result.sub_task_id = sub_task.id;

        std::string session = deps_.sandbox->create_session(deps_.limits, deps_.make_registry());
        std::vector<llm::Message> context;
        context.push_back({llm::Role::System, deps_.executor_prompt});
        context.push_back({llm::Role::User, sub_task.description});

        std::vector<std::pair<std::string, std::string>> evidence;
        auto note_url = [&](const std::string& url, const std::string& snippet) {
            for (const auto& [u, s] : evidence)
                if (u == url) return;
            evidence.emplace_back(url, snippet);
        };

        int script_runs = 0;
        std::string last_output;
        std::string exhausted_reason;

        for (int turn = 1; turn <= cfg_.max_executor_turns; ++turn) {
            std::string text;
            try {
                text = complete_with(*deps_.executor_llm, context, trace::Actor::Executor,
                                     sub_task.id);
            } catch (const llm::CompletionError& e) {
                trace_->emit(trace::Actor::Backend, trace::EventKind::Final,
                             {{"error", e.what()}, {"phase", "executor"}});
                result.summary = std::string("[degraded] executor backend error: ") + e.what();
                result.degraded = true;
                result.evidence = std::move(evidence);
                deps_.sandbox->destroy_session(session);
                return result;
            }

            auto action = protocol::parse_executor_turn(text);
            if (std::holds_alternative<protocol::RunScript>(action)) {
                context.push_back({llm::Role::Assistant, text});
                if (script_runs >= cfg_.max_script_runs_per_subtask) {
                    exhausted_reason = "script_runs";
                    break;
                }
                const std::string& script = std::get<protocol::RunScript>(action).script;
                auto out = deps_.sandbox->execute(session, script);
                ++script_runs;
                nlohmann::json run_payload = {{"index", script_runs},
                                              {"sub_task_id", sub_task.id},
                                              {"stdout_bytes", out.stdout_text.size()},
                                              {"truncated", out.truncated},
                                              {"tool_calls", out.tool_calls.size()}};
                if (out.error) run_payload["error"] = *out.error;
                trace_->emit(trace::Actor::Sandbox, trace::EventKind::ScriptRun, run_payload);
                for (const auto& call : out.tool_calls) {
                    nlohmann::json urls = nlohmann::json::array();
                    for (const auto& ref : call.urls) {
                        urls.push_back(ref.url);
                        note_url(ref.url, ref.snippet);
                    }
                    trace_->emit(trace::Actor::Tool, trace::EventKind::ToolCall,
                                 {{"name", call.builtin}, {"digest", call.digest},
                                  {"urls", urls}});
                }
                std::string payload = out.stdout_text;
                if (out.error) {
                    if (!payload.empty() && payload.back() != '\n') payload += '\n';
                    payload += "error: " + *out.error;
                }
                if (payload.empty()) payload = "(no output)";
                context.push_back(
                    {llm::Role::User,
                     protocol::wrap_block(protocol::Tag::ExecutionResults, payload)});
                last_output = payload;
            } else {
                std::string summary = std::get<protocol::FinalResult>(action).summary;
                if (trim(summary).empty()) {
                    summary = "[degraded] empty executor result";
                    result.degraded = true;
                }
                result.summary = summary;
                result.evidence = std::move(evidence);
                deps_.sandbox->destroy_session(session);
                return result;
            }
            if (tokens_used_ > cfg_.token_budget) {
                exhausted_reason = "token_budget";
                break;
            }
            if (turn == cfg_.max_executor_turns) exhausted_reason = "executor_turns";
        }

        // limit exhaustion: degrade to the last outputs instead of failing
        result.degraded = true;
        result.summary = "[degraded:" + exhausted_reason + "] " +
                         (last_output.empty() ? "no executor output"
                                              : last_output.substr(0, 2000));
        result.evidence = std::move(evidence);
        deps_.sandbox->destroy_session(session);
        return result;
    }

    long long tokens_used() const { return tokens_used_; }

private:
    std::string complete_with(llm::CompletionBackend& backend,
                              const std::vector<llm::Message>& context, trace::Actor actor,
                              int scope_id) {
        auto completion = llm::complete(context, deps_.params, backend);
        tokens_used_ += completion.usage.total();
        trace_->emit(actor, trace::EventKind::Turn,
                     {{"scope", scope_id}, {"chars", completion.text.size()}},
                     completion.usage);
        return completion.text;
    }

    // Bounded carryover: the replanned attempt keeps a one-paragraph summary
    // of what failed instead of the full context.
    std::string attempt_summary(const protocol::Finalize& fin, int delegations) {
        std::string s = "The previous attempt ended with the answer \"" + fin.answer +
                        "\" at confidence " + script::detail::format_double(fin.confidence) +
                        " after " + std::to_string(delegations) +
                        " delegation(s). That answer was judged unreliable; try a different "
                        "decomposition or search angle.";
        const size_t cap = 2000;  // ~500 tokens at 4 chars per token
        if (s.size() > cap) s.resize(cap);
        return s;
    }

    Deps deps_;
    RunConfig cfg_;
    trace::TraceWriter* trace_;
    long long tokens_used_ = 0;
    int next_subtask_id_ = 1;
};

}  // namespace webscout::orchestrator
