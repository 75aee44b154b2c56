#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "webscout/corpus.hpp"
#include "webscout/orchestrator.hpp"
#include "webscout/prompts.hpp"
#include "webscout/tool_builtins.hpp"
#include "webscout/trace.hpp"

// Benchmark runner, metrics pipeline and report formatting: run agents over a
// task set per ablation mode, judge outcomes, and aggregate the trace-derived
// analysis quantities.

namespace webscout::harness {

struct SearchConfig {
    int top_k = 10;
    int max_variants = 8;
    int batch_concurrency = 4;
    double rate_limit_per_s = 8.0;
};

struct Config {
    orchestrator::RunConfig run;
    sandbox::ResourceLimits limits;
    SearchConfig search;

    static Config from_json(const nlohmann::json& j) {
        Config cfg;
        if (j.contains("run")) {
            const auto& r = j["run"];
            cfg.run.confidence_threshold =
                r.value("confidence_threshold", cfg.run.confidence_threshold);
            cfg.run.max_replans = r.value("max_replans", cfg.run.max_replans);
            cfg.run.max_planner_turns = r.value("max_planner_turns", cfg.run.max_planner_turns);
            cfg.run.max_executor_turns =
                r.value("max_executor_turns", cfg.run.max_executor_turns);
            cfg.run.max_script_runs_per_subtask =
                r.value("max_script_runs_per_subtask", cfg.run.max_script_runs_per_subtask);
            cfg.run.token_budget = r.value("token_budget", cfg.run.token_budget);
        }
        if (j.contains("sandbox")) {
            const auto& s = j["sandbox"];
            cfg.limits.max_wall_time = std::chrono::milliseconds(
                s.value("max_wall_time_ms", cfg.limits.max_wall_time.count()));
            cfg.limits.max_stdout_bytes =
                s.value("max_stdout_bytes", cfg.limits.max_stdout_bytes);
            cfg.limits.max_loop_iterations =
                s.value("max_loop_iterations", cfg.limits.max_loop_iterations);
            cfg.limits.max_tool_calls_per_execution = s.value(
                "max_tool_calls_per_execution", cfg.limits.max_tool_calls_per_execution);
        }
        if (j.contains("search")) {
            const auto& s = j["search"];
            cfg.search.top_k = s.value("top_k", cfg.search.top_k);
            cfg.search.max_variants = s.value("max_variants", cfg.search.max_variants);
            cfg.search.batch_concurrency =
                s.value("batch_concurrency", cfg.search.batch_concurrency);
            cfg.search.rate_limit_per_s =
                s.value("rate_limit_per_s", cfg.search.rate_limit_per_s);
        }
        cfg.run.validate();
        return cfg;
    }

    static Config load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in.good()) throw std::runtime_error("config file not found: " + path.string());
        return from_json(nlohmann::json::parse(in));
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["run"] = {{"confidence_threshold", run.confidence_threshold},
                    {"max_replans", run.max_replans},
                    {"max_planner_turns", run.max_planner_turns},
                    {"max_executor_turns", run.max_executor_turns},
                    {"max_script_runs_per_subtask", run.max_script_runs_per_subtask},
                    {"token_budget", run.token_budget}};
        j["sandbox"] = {{"max_wall_time_ms", limits.max_wall_time.count()},
                        {"max_stdout_bytes", limits.max_stdout_bytes},
                        {"max_loop_iterations", limits.max_loop_iterations},
                        {"max_tool_calls_per_execution", limits.max_tool_calls_per_execution}};
        j["search"] = {{"top_k", search.top_k},
                       {"max_variants", search.max_variants},
                       {"batch_concurrency", search.batch_concurrency},
                       {"rate_limit_per_s", search.rate_limit_per_s}};
        return j;
    }
};

// The executor is always on; the planner and the primitives toggle, mirroring
// the four-row component ablation.
struct AblationMode {
    bool executor_enabled = true;
    bool primitives_enabled = true;
    bool planner_enabled = true;

    std::string name() const {
        if (!primitives_enabled && !planner_enabled) return "executor";
        if (!primitives_enabled) return "executor+planner";
        if (!planner_enabled) return "executor+primitives";
        return "full";
    }

    static std::vector<AblationMode> table_rows() {
        return {{true, false, false}, {true, false, true}, {true, true, false},
                {true, true, true}};
    }

    static AblationMode parse(const std::string& name) {
        if (name == "full") return {true, true, true};
        if (name == "executor" || name == "executor-only") return {true, false, false};
        if (name == "executor+planner" || name == "no-primitives") return {true, false, true};
        if (name == "executor+primitives" || name == "no-planner") return {true, true, false};
        throw std::invalid_argument("unknown mode: " + name +
                                    " (expected full, executor, no-planner, no-primitives)");
    }
};

struct RunMetrics {
    double accuracy = 0.0;
    double mean_search_calls = 0.0;
    double mean_tokens = 0.0;
    double mean_interactions = 0.0;
    double mean_tool_calls_per_invocation = 0.0;
    double max_tool_calls_per_invocation = 0.0;
    long long unique_pages = 0;
};

struct MetricsReport {
    RunMetrics metrics;
    int runs = 0;
    int skipped_lines = 0;
};

// Single pass over trace files: tool calls attribute to the script run they
// follow; interactions are delegations plus replans; accuracy comes from the
// judged verdict events.
inline MetricsReport compute_metrics(const std::vector<std::filesystem::path>& files) {
    if (files.empty()) throw std::invalid_argument("compute_metrics: no trace files");
    MetricsReport report;
    long long total_search_calls = 0;
    long long total_tokens = 0;
    long long total_interactions = 0;
    std::vector<long long> per_script_tool_calls;
    std::set<std::string> pages;
    int correct_runs = 0;

    for (const auto& file : files) {
        auto tf = trace::read_trace_file(file);
        report.skipped_lines += tf.skipped_lines;
        ++report.runs;
        bool run_correct = false;
        bool script_open = false;
        for (const auto& ev : tf.events) {
            if (ev.tokens) total_tokens += ev.tokens->total();
            switch (ev.kind) {
                case trace::EventKind::Delegate:
                case trace::EventKind::Replan:
                    ++total_interactions;
                    break;
                case trace::EventKind::ScriptRun:
                    per_script_tool_calls.push_back(0);
                    script_open = true;
                    break;
                case trace::EventKind::ToolCall: {
                    if (script_open) ++per_script_tool_calls.back();
                    if (ev.payload.contains("name") && ev.payload["name"] == "web_search")
                        ++total_search_calls;
                    if (ev.payload.contains("urls"))
                        for (const auto& u : ev.payload["urls"])
                            if (u.is_string()) pages.insert(u.get<std::string>());
                    break;
                }
                case trace::EventKind::Final:
                    if (ev.payload.contains("correct") && ev.payload["correct"].is_boolean() &&
                        ev.payload["correct"].get<bool>())
                        run_correct = true;
                    break;
                default:
                    break;
            }
        }
        if (run_correct) ++correct_runs;
    }

    double runs = static_cast<double>(report.runs);
    report.metrics.accuracy = correct_runs / runs;
    report.metrics.mean_search_calls = static_cast<double>(total_search_calls) / runs;
    report.metrics.mean_tokens = static_cast<double>(total_tokens) / runs;
    report.metrics.mean_interactions = static_cast<double>(total_interactions) / runs;
    if (!per_script_tool_calls.empty()) {
        long long sum = 0, mx = 0;
        for (long long c : per_script_tool_calls) {
            sum += c;
            mx = std::max(mx, c);
        }
        report.metrics.mean_tool_calls_per_invocation =
            static_cast<double>(sum) / static_cast<double>(per_script_tool_calls.size());
        report.metrics.max_tool_calls_per_invocation = static_cast<double>(mx);
    }
    report.metrics.unique_pages = static_cast<long long>(pages.size());
    return report;
}

inline std::vector<std::filesystem::path> trace_files_in(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    if (!std::filesystem::exists(dir)) return files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().string().ends_with(".trace.jsonl"))
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    return files;
}

// --- benchmark runner ------------------------------------------------------------

struct BenchEnv {
    const corpus::Corpus* corpus = nullptr;
    llm::CompletionBackend* planner_llm = nullptr;
    llm::CompletionBackend* executor_llm = nullptr;
    prompts::PromptSet prompts;
};

struct BenchResult {
    RunMetrics metrics;
    int correct = 0;
    int total = 0;
    int failures = 0;  // tasks that threw; counted incorrect
    std::vector<std::filesystem::path> trace_files;
};

inline std::string run_label(size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "run-%03zu", index);
    return buf;
}

// Runs every task under one ablation mode. Per-task failures never abort the
// batch; they are judged incorrect. With jobs > 1 tasks run concurrently and
// each still writes its own trace file.
inline BenchResult run_benchmark(const std::vector<corpus::SyntheticTask>& tasks,
                                 const AblationMode& mode, const Config& cfg, BenchEnv& env,
                                 const std::filesystem::path& trace_dir, int jobs = 1) {
    if (tasks.empty()) throw std::invalid_argument("run_benchmark: zero tasks");
    if (!env.corpus || !env.planner_llm || !env.executor_llm)
        throw std::invalid_argument("run_benchmark: incomplete environment");

    trace::DirectorySink sink(trace_dir);
    tools::SimSearchBackend search(*env.corpus);
    auto fetcher = tools::FixtureFetcher::from_corpus(*env.corpus);
    primitives::RuleExpansion expander;
    primitives::PredicateEvaluator evaluator;

    toolkit::ToolEnv tool_env;
    tool_env.search = &search;
    tool_env.fetcher = &fetcher;
    tool_env.expander = &expander;
    tool_env.evaluator = &evaluator;
    tool_env.default_top_k = cfg.search.top_k;
    tool_env.max_variants = cfg.search.max_variants;
    tool_env.batch_concurrency = cfg.search.batch_concurrency;

    auto make_registry = [tool_env, mode] {
        return toolkit::make_tool_registry(tool_env, mode.primitives_enabled);
    };
    std::string executor_prompt =
        env.prompts.executor_for(toolkit::tool_names(make_registry()));

    BenchResult result;
    result.total = static_cast<int>(tasks.size());
    std::vector<char> correct(tasks.size(), 0);
    std::atomic<int> failures{0};
    std::atomic<size_t> next{0};

    auto worker = [&] {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            const auto& task = tasks[i];
            trace::TraceWriter writer(sink, run_label(i));
            sandbox::Sandbox box;  // per-task host keeps session ids reproducible
            orchestrator::Orchestrator::Deps deps;
            deps.planner_llm = env.planner_llm;
            deps.executor_llm = env.executor_llm;
            deps.sandbox = &box;
            deps.make_registry = make_registry;
            deps.limits = cfg.limits;
            deps.planner_prompt = env.prompts.planner;
            deps.executor_prompt = executor_prompt;
            orchestrator::Orchestrator orch(deps, cfg.run, writer);

            std::string predicted;
            bool ok = false;
            try {
                if (mode.planner_enabled) {
                    predicted = orch.run_planner(task.question).answer;
                } else {
                    auto r = orch.run_executor({1, task.question, 0});
                    predicted = r.summary;
                    writer.emit(trace::Actor::Executor, trace::EventKind::Final,
                                {{"answer", predicted}});
                }
                ok = corpus::judge_answer(predicted, task.gold_answer);
            } catch (const std::exception& e) {
                predicted = std::string("(task failed: ") + e.what() + ")";
                failures.fetch_add(1);
                ok = false;
            }
            writer.emit(trace::Actor::Backend, trace::EventKind::Final,
                        {{"gold", task.gold_answer},
                         {"predicted", predicted},
                         {"correct", ok},
                         {"task_seed", task.seed}});
            correct[i] = ok ? 1 : 0;
        }
    };

    int worker_count = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
    if (worker_count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < worker_count; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (size_t i = 0; i < tasks.size(); ++i) {
        result.trace_files.push_back(sink.file_for(run_label(i)));
        if (correct[i]) ++result.correct;
    }
    result.failures = failures.load();
    result.metrics = compute_metrics(result.trace_files).metrics;
    return result;
}

// --- report formatting -------------------------------------------------------------

struct ReportRow {
    std::string mode;
    RunMetrics metrics;
};

enum class ReportFormat { Table, Csv };

inline const std::vector<std::string>& report_columns() {
    static const std::vector<std::string> cols = {
        "mode",
        "accuracy",
        "mean_search_calls",
        "mean_tokens",
        "mean_interactions",
        "mean_tool_calls_per_invocation",
        "max_tool_calls_per_invocation",
        "unique_pages"};
    return cols;
}

inline std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

inline std::vector<std::string> row_cells(const ReportRow& row) {
    return {row.mode,
            format_real(row.metrics.accuracy),
            format_real(row.metrics.mean_search_calls),
            format_real(row.metrics.mean_tokens),
            format_real(row.metrics.mean_interactions),
            format_real(row.metrics.mean_tool_calls_per_invocation),
            format_real(row.metrics.max_tool_calls_per_invocation),
            std::to_string(row.metrics.unique_pages)};
}

inline std::string report(const std::vector<ReportRow>& rows, ReportFormat format) {
    if (rows.empty()) throw std::invalid_argument("report: no rows");
    const auto& cols = report_columns();
    if (format == ReportFormat::Csv) {
        std::string out = join(cols, ",") + "\n";
        for (const auto& row : rows) out += join(row_cells(row), ",") + "\n";
        return out;
    }
    std::vector<size_t> widths;
    for (const auto& c : cols) widths.push_back(c.size());
    std::vector<std::vector<std::string>> table;
    for (const auto& row : rows) {
        table.push_back(row_cells(row));
        for (size_t i = 0; i < widths.size(); ++i)
            widths[i] = std::max(widths[i], table.back()[i].size());
    }
    auto pad = [&](const std::string& s, size_t w) {
        return s + std::string(w - s.size(), ' ');
    };
    std::string out;
    for (size_t i = 0; i < cols.size(); ++i)
        out += pad(cols[i], widths[i]) + (i + 1 < cols.size() ? "  " : "");
    out += "\n";
    for (const auto& cells : table) {
        for (size_t i = 0; i < cells.size(); ++i)
            out += pad(cells[i], widths[i]) + (i + 1 < cells.size() ? "  " : "");
        out += "\n";
    }
    return out;
}

inline std::vector<ReportRow> parse_report_csv(const std::string& csv) {
    auto lines = split_lines(csv);
    if (lines.empty() || trim(lines[0]) != join(report_columns(), ","))
        throw std::invalid_argument("parse_report_csv: unexpected header");
    std::vector<ReportRow> rows;
    for (size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        auto cells = split(lines[i], ',');
        if (cells.size() != report_columns().size())
            throw std::invalid_argument("parse_report_csv: bad row: " + lines[i]);
        ReportRow row;
        row.mode = cells[0];
        row.metrics.accuracy = std::stod(cells[1]);
        row.metrics.mean_search_calls = std::stod(cells[2]);
        row.metrics.mean_tokens = std::stod(cells[3]);
        row.metrics.mean_interactions = std::stod(cells[4]);
        row.metrics.mean_tool_calls_per_invocation = std::stod(cells[5]);
        row.metrics.max_tool_calls_per_invocation = std::stod(cells[6]);
        row.metrics.unique_pages = std::stoll(cells[7]);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace webscout::harness
