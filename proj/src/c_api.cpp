#include "uas/uas.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <new>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "uas/error.hpp"
#include "uas/metrics.hpp"
#include "uas/mission.hpp"
#include "uas/mission_log.hpp"
#include "uas/outputs.hpp"
#include "uas/scenario.hpp"

struct uas_scenario {
    uas::Scenario value;
};

struct uas_mission_log {
    uas::MissionLog value;
};

struct uas_plan {
    uas::PlanOnlyResult value;
};

namespace {

thread_local std::string g_last_error;

uas_status code_for(uas::ErrorKind kind) {
    using uas::ErrorKind;
    switch (kind) {
        case ErrorKind::Validation: return UAS_ERR_VALIDATION;
        case ErrorKind::Io: return UAS_ERR_IO;
        case ErrorKind::Planning:
        case ErrorKind::NoPath: return UAS_ERR_PLANNING;
        case ErrorKind::Numerical:
        case ErrorKind::Propagation:
        case ErrorKind::Synthesis:
        case ErrorKind::InvalidModel: return UAS_ERR_NUMERICAL;
        case ErrorKind::Contract:
        case ErrorKind::UndefinedHeading: return UAS_ERR_INTERNAL;
    }
    return UAS_ERR_INTERNAL;
}

template <class F>
uas_status guarded(F&& f) {
    try {
        f();
        g_last_error.clear();
        return UAS_OK;
    } catch (const uas::Error& e) {
        g_last_error = e.what();
        return code_for(e.kind());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return UAS_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return UAS_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return UAS_ERR_INTERNAL;
    }
}

uas_status invalid(const char* what) {
    g_last_error = what;
    return UAS_ERR_INVALID_ARGUMENT;
}

void fill_summary(const uas::MissionLog& log, uas_summary* out) {
    const uas::MetricsReport m = uas::compute_metrics(log);
    out->mission_status = static_cast<int>(log.status);
    out->end_time_s = static_cast<double>(log.end_tick) * uas::MissionClock::kDt;
    out->completion_time_s = log.completion_time ? *log.completion_time : -1.0;
    out->replans = log.counters.replans;
    out->replan_checks = log.counters.replan_checks;
    out->filter_steps = log.counters.filter_steps;
    out->dynamics_steps = log.counters.dynamics_steps;
    out->final_window_ospa_m = m.final_window_ospa;
    out->last_ospa_m = m.rows.empty() ? 0.0 : m.rows.back().target_ospa;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

extern "C" {

const char* uas_last_error(void) { return g_last_error.c_str(); }

const char* uas_version(void) { return "1.0.0"; }

uas_status uas_scenario_load(const char* path, uas_scenario** out) {
    if (!path || !out) return invalid("uas_scenario_load: null argument");
    *out = nullptr;
    return guarded([&] { *out = new uas_scenario{uas::load_scenario(path)}; });
}

uas_status uas_scenario_parse(const char* json_text, uas_scenario** out) {
    if (!json_text || !out) return invalid("uas_scenario_parse: null argument");
    *out = nullptr;
    return guarded([&] { *out = new uas_scenario{uas::parse_scenario(json_text)}; });
}

uas_status uas_scenario_set_seed(uas_scenario* scenario, uint64_t seed) {
    if (!scenario) return invalid("uas_scenario_set_seed: null scenario");
    scenario->value.seed = seed;
    return UAS_OK;
}

void uas_scenario_free(uas_scenario* scenario) { delete scenario; }

uas_status uas_mission_run(const uas_scenario* scenario, uas_mission_log** out) {
    if (!scenario || !out) return invalid("uas_mission_run: null argument");
    *out = nullptr;
    return guarded([&] { *out = new uas_mission_log{uas::run_mission(scenario->value)}; });
}

uas_status uas_log_load(const char* path, uas_mission_log** out) {
    if (!path || !out) return invalid("uas_log_load: null argument");
    *out = nullptr;
    return guarded([&] { *out = new uas_mission_log{uas::load_log(path)}; });
}

uas_status uas_log_summary(const uas_mission_log* log, uas_summary* out) {
    if (!log || !out) return invalid("uas_log_summary: null argument");
    return guarded([&] { fill_summary(log->value, out); });
}

uas_status uas_log_emit(const uas_mission_log* log, const char* out_dir) {
    if (!log || !out_dir) return invalid("uas_log_emit: null argument");
    return guarded([&] { uas::emit_outputs(log->value, out_dir); });
}

uas_status uas_log_write_metrics(const uas_mission_log* log, const char* out_dir) {
    if (!log || !out_dir) return invalid("uas_log_write_metrics: null argument");
    return guarded([&] { uas::emit_metrics(log->value, out_dir); });
}

uas_status uas_log_replay_tracks(const uas_mission_log* log, const char* out_dir, size_t* matching_steps,
                                 size_t* total_steps) {
    if (!log || !out_dir) return invalid("uas_log_replay_tracks: null argument");
    return guarded([&] {
        const uas::ReplayResult r = uas::replay_tracks(log->value);
        uas::emit_replay(r, log->value, out_dir);
        if (matching_steps) *matching_steps = r.matching_steps;
        if (total_steps) *total_steps = log->value.scans.size();
    });
}

void uas_log_free(uas_mission_log* log) { delete log; }

uas_status uas_plan_run(const uas_scenario* scenario, uas_plan** out) {
    if (!scenario || !out) return invalid("uas_plan_run: null argument");
    *out = nullptr;
    return guarded([&] { *out = new uas_plan{uas::plan_only(scenario->value)}; });
}

uas_status uas_plan_pair_count(const uas_plan* plan, size_t* out) {
    if (!plan || !out) return invalid("uas_plan_pair_count: null argument");
    *out = plan->value.plan.plan.pairs.size();
    return UAS_OK;
}

uas_status uas_plan_write(const uas_plan* plan, const char* out_dir) {
    if (!plan || !out_dir) return invalid("uas_plan_write: null argument");
    return guarded([&] { uas::emit_plan(plan->value, out_dir); });
}

void uas_plan_free(uas_plan* plan) { delete plan; }

uas_status uas_sweep(const uas_scenario* scenario, uint64_t first_seed, int count, int workers, const char* out_dir,
                     uas_sweep_summary* out) {
    if (!scenario || !out_dir) return invalid("uas_sweep: null argument");
    if (count <= 0) return invalid("uas_sweep: at least one seed is required");
    if (workers <= 0) workers = 1;
    return guarded([&] {
        std::vector<uas_summary> results(static_cast<std::size_t>(count));
        std::vector<std::string> errors(static_cast<std::size_t>(count));
        std::atomic<int> next{0};
        auto work = [&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    uas::Scenario s = scenario->value;
                    s.seed = first_seed + static_cast<uint64_t>(i);
                    fill_summary(uas::run_mission(s), &results[i]);
                } catch (const std::exception& e) {
                    errors[i] = e.what();
                }
            }
        };
        const int n = std::min(workers, count);
        std::vector<std::thread> pool;
        for (int w = 1; w < n; ++w) pool.emplace_back(work);
        work();
        for (auto& t : pool) t.join();
        for (int i = 0; i < count; ++i)
            if (!errors[i].empty())
                throw uas::Error(uas::ErrorKind::Numerical,
                                 "seed " + std::to_string(first_seed + i) + ": " + errors[i]);

        std::ostringstream rows;
        rows << "seed,status,completed,completion_time_s,replans_count,final_window_ospa_m\n";
        int completed = 0;
        double ospa_sum = 0.0;
        for (int i = 0; i < count; ++i) {
            const uas_summary& r = results[i];
            const bool done = r.mission_status == UAS_MISSION_COMPLETED;
            completed += done ? 1 : 0;
            ospa_sum += r.final_window_ospa_m;
            rows << first_seed + static_cast<uint64_t>(i) << ','
                 << uas::to_string(static_cast<uas::MissionStatus>(r.mission_status)) << ',' << (done ? 1 : 0) << ','
                 << fixed(done ? r.completion_time_s : r.end_time_s, 2) << ',' << r.replans << ','
                 << fixed(r.final_window_ospa_m, 6) << '\n';
        }
        uas_sweep_summary sum;
        sum.runs = count;
        sum.completed = completed;
        sum.completion_rate = static_cast<double>(completed) / count;
        sum.mean_final_ospa_m = ospa_sum / count;
        std::ostringstream agg;
        agg << "runs_count,completed_count,completion_rate_ratio,mean_final_window_ospa_m\n"
            << sum.runs << ',' << sum.completed << ',' << fixed(sum.completion_rate, 6) << ','
            << fixed(sum.mean_final_ospa_m, 6) << '\n';
        uas::write_text_file(out_dir, "sweep.csv", rows.str());
        uas::write_text_file(out_dir, "sweep_summary.csv", agg.str());
        if (out) *out = sum;
    });
}

}  // extern "C"
