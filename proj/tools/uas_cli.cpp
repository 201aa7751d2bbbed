// Command-line front end over the uas C API.
//
// Exit codes:
//   0  success (mission completed)
//   1  internal or numerical error
//   2  usage error
//   3  scenario or log validation error
//   4  mission incomplete or planning failure
//   5  I/O error

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "uas/uas.h"

namespace {

enum Exit { kOk = 0, kInternal = 1, kUsage = 2, kValidation = 3, kIncomplete = 4, kIo = 5 };

int exit_for(uas_status s) {
    switch (s) {
        case UAS_OK: return kOk;
        case UAS_ERR_INVALID_ARGUMENT: return kUsage;
        case UAS_ERR_VALIDATION: return kValidation;
        case UAS_ERR_IO: return kIo;
        case UAS_ERR_PLANNING: return kIncomplete;
        case UAS_ERR_NUMERICAL:
        case UAS_ERR_INTERNAL: return kInternal;
    }
    return kInternal;
}

int fail(uas_status s, const char* what) {
    std::cerr << "uas " << what << ": " << uas_last_error() << "\n";
    return exit_for(s);
}

const char* status_name(int s) {
    switch (s) {
        case UAS_MISSION_COMPLETED: return "completed";
        case UAS_MISSION_TIME_LIMIT: return "time_limit";
        case UAS_MISSION_PLANNING_FAILED: return "planning_failed";
    }
    return "unknown";
}

struct Options {
    std::string scenario;
    std::string log;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    int seeds = 10;
    bool quiet = false;
};

int workers_from_env() {
    if (const char* env = std::getenv("UAS_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

struct ScenarioHandle {
    uas_scenario* p = nullptr;
    ~ScenarioHandle() { uas_scenario_free(p); }
};
struct LogHandle {
    uas_mission_log* p = nullptr;
    ~LogHandle() { uas_log_free(p); }
};
struct PlanHandle {
    uas_plan* p = nullptr;
    ~PlanHandle() { uas_plan_free(p); }
};

uas_status load(const Options& o, ScenarioHandle& h) {
    const uas_status s = uas_scenario_load(o.scenario.c_str(), &h.p);
    if (s == UAS_OK && o.seed) uas_scenario_set_seed(h.p, *o.seed);
    return s;
}

void print_summary(const uas_summary& m) {
    std::printf("status: %s\n", status_name(m.mission_status));
    std::printf("end time: %.2f s\n", m.end_time_s);
    if (m.completion_time_s >= 0.0) std::printf("completion time: %.2f s\n", m.completion_time_s);
    std::printf("replans: %ld of %ld checks\n", m.replans, m.replan_checks);
    std::printf("filter steps: %ld, dynamics steps: %ld\n", m.filter_steps, m.dynamics_steps);
    std::printf("final OSPA: %.3f m (window mean %.3f m)\n", m.last_ospa_m, m.final_window_ospa_m);
}

int cmd_run(const Options& o) {
    ScenarioHandle sc;
    if (auto s = load(o, sc); s != UAS_OK) return fail(s, "run");
    LogHandle log;
    if (auto s = uas_mission_run(sc.p, &log.p); s != UAS_OK) return fail(s, "run");
    if (auto s = uas_log_emit(log.p, o.out.c_str()); s != UAS_OK) return fail(s, "run");
    uas_summary m{};
    if (auto s = uas_log_summary(log.p, &m); s != UAS_OK) return fail(s, "run");
    if (!o.quiet) print_summary(m);
    return m.mission_status == UAS_MISSION_COMPLETED ? kOk : kIncomplete;
}

int cmd_plan_only(const Options& o) {
    ScenarioHandle sc;
    if (auto s = load(o, sc); s != UAS_OK) return fail(s, "plan-only");
    PlanHandle plan;
    if (auto s = uas_plan_run(sc.p, &plan.p); s != UAS_OK) return fail(s, "plan-only");
    if (auto s = uas_plan_write(plan.p, o.out.c_str()); s != UAS_OK) return fail(s, "plan-only");
    size_t pairs = 0;
    uas_plan_pair_count(plan.p, &pairs);
    if (!o.quiet) std::printf("planned %zu routes into %s\n", pairs, o.out.c_str());
    return kOk;
}

int cmd_track_only(const Options& o) {
    LogHandle log;
    if (auto s = uas_log_load(o.log.c_str(), &log.p); s != UAS_OK) return fail(s, "track-only");
    size_t matched = 0, total = 0;
    if (auto s = uas_log_replay_tracks(log.p, o.out.c_str(), &matched, &total); s != UAS_OK)
        return fail(s, "track-only");
    if (!o.quiet) std::printf("replayed %zu scans, %zu match the logged estimates\n", total, matched);
    return matched == total ? kOk : kInternal;
}

int cmd_metrics(const Options& o) {
    LogHandle log;
    if (auto s = uas_log_load(o.log.c_str(), &log.p); s != UAS_OK) return fail(s, "metrics");
    if (auto s = uas_log_write_metrics(log.p, o.out.c_str()); s != UAS_OK) return fail(s, "metrics");
    uas_summary m{};
    uas_log_summary(log.p, &m);
    if (!o.quiet) print_summary(m);
    return kOk;
}

int cmd_sweep(const Options& o) {
    if (o.seeds <= 0) {
        std::cerr << "uas sweep: --seeds must be at least 1\n";
        return kUsage;
    }
    ScenarioHandle sc;
    if (auto s = load(o, sc); s != UAS_OK) return fail(s, "sweep");
    std::uint64_t first = 1;
    if (o.seed) first = *o.seed;
    uas_sweep_summary sum{};
    if (auto s = uas_sweep(sc.p, first, o.seeds, workers_from_env(), o.out.c_str(), &sum); s != UAS_OK)
        return fail(s, "sweep");
    if (!o.quiet)
        std::printf("runs: %d, completed: %d, completion rate: %.3f, mean final OSPA: %.3f m\n", sum.runs,
                    sum.completed, sum.completion_rate, sum.mean_final_ospa_m);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"UAS swarm mission simulator"};
    app.require_subcommand(1, 1);
    Options o;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub, bool scenario) {
        if (scenario) sub->add_option("--scenario", o.scenario, "Scenario JSON file")->required();
        sub->add_option("--out", o.out, "Output directory")->capture_default_str();
        sub->add_option("--seed", seed, "Seed override");
        sub->add_flag("--quiet", o.quiet, "Suppress the summary");
    };
    CLI::App* run = app.add_subcommand("run", "Run a mission and emit logs, tables and plots");
    add_common(run, true);
    CLI::App* plan = app.add_subcommand("plan-only", "Grid, A* and assignment only");
    add_common(plan, true);
    CLI::App* track = app.add_subcommand("track-only", "Replay logged measurements through the filters");
    add_common(track, false);
    track->add_option("--log", o.log, "run_log.json from a previous run")->required();
    CLI::App* metrics = app.add_subcommand("metrics", "Recompute metrics from a run log");
    add_common(metrics, false);
    metrics->add_option("--log", o.log, "run_log.json from a previous run")->required();
    CLI::App* sweep = app.add_subcommand("sweep", "Run consecutive seeds and aggregate");
    add_common(sweep, true);
    sweep->add_option("--seeds", o.seeds, "Number of seeds")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }
    for (CLI::App* sub : {run, plan, track, metrics, sweep})
        if (sub->parsed() && sub->count("--seed") > 0) o.seed = seed;

    if (run->parsed()) return cmd_run(o);
    if (plan->parsed()) return cmd_plan_only(o);
    if (track->parsed()) return cmd_track_only(o);
    if (metrics->parsed()) return cmd_metrics(o);
    return cmd_sweep(o);
}
