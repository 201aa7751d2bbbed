#ifndef UAS_UAS_H
#define UAS_UAS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(UAS_BUILDING_LIBRARY)
#    define UAS_API __declspec(dllexport)
#  else
#    define UAS_API __declspec(dllimport)
#  endif
#else
#  define UAS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum uas_status {
    UAS_OK = 0,
    UAS_ERR_INVALID_ARGUMENT = 1,
    UAS_ERR_VALIDATION = 2,
    UAS_ERR_IO = 3,
    UAS_ERR_PLANNING = 4,
    UAS_ERR_NUMERICAL = 5,
    UAS_ERR_INTERNAL = 6
} uas_status;

typedef enum uas_mission_status {
    UAS_MISSION_COMPLETED = 0,
    UAS_MISSION_TIME_LIMIT = 1,
    UAS_MISSION_PLANNING_FAILED = 2
} uas_mission_status;

typedef struct uas_scenario uas_scenario;
typedef struct uas_mission_log uas_mission_log;
typedef struct uas_plan uas_plan;

typedef struct uas_summary {
    int mission_status;       /* uas_mission_status */
    double end_time_s;
    double completion_time_s; /* negative when the mission did not complete */
    long replans;
    long replan_checks;
    long filter_steps;
    long dynamics_steps;
    double final_window_ospa_m;
    double last_ospa_m;
} uas_summary;

typedef struct uas_sweep_summary {
    int runs;
    int completed;
    double completion_rate;
    double mean_final_ospa_m;
} uas_sweep_summary;

/* Message for the last failing call on this thread; never NULL. For
 * validation errors it starts with the offending field path. */
UAS_API const char* uas_last_error(void);
UAS_API const char* uas_version(void);

UAS_API uas_status uas_scenario_load(const char* path, uas_scenario** out);
UAS_API uas_status uas_scenario_parse(const char* json_text, uas_scenario** out);
UAS_API uas_status uas_scenario_set_seed(uas_scenario* scenario, uint64_t seed);
UAS_API void uas_scenario_free(uas_scenario* scenario);

/* Runs the closed-loop mission. An incomplete mission is reported through
 * the summary, not the return code. */
UAS_API uas_status uas_mission_run(const uas_scenario* scenario, uas_mission_log** out);
UAS_API uas_status uas_log_load(const char* path, uas_mission_log** out);
UAS_API uas_status uas_log_summary(const uas_mission_log* log, uas_summary* out);
/* Run log, CSV tables and plots. */
UAS_API uas_status uas_log_emit(const uas_mission_log* log, const char* out_dir);
UAS_API uas_status uas_log_write_metrics(const uas_mission_log* log, const char* out_dir);
/* Replays logged measurements through fresh filters and writes
 * estimates.csv; `matching_steps` receives the number of scans whose
 * estimates equal the logged ones (may be NULL). */
UAS_API uas_status uas_log_replay_tracks(const uas_mission_log* log, const char* out_dir, size_t* matching_steps,
                                         size_t* total_steps);
UAS_API void uas_log_free(uas_mission_log* log);

UAS_API uas_status uas_plan_run(const uas_scenario* scenario, uas_plan** out);
UAS_API uas_status uas_plan_pair_count(const uas_plan* plan, size_t* out);
UAS_API uas_status uas_plan_write(const uas_plan* plan, const char* out_dir);
UAS_API void uas_plan_free(uas_plan* plan);

/* Runs seeds first_seed .. first_seed + count - 1 on `workers` threads and
 * writes sweep.csv and sweep_summary.csv. */
UAS_API uas_status uas_sweep(const uas_scenario* scenario, uint64_t first_seed, int count, int workers,
                             const char* out_dir, uas_sweep_summary* out);

#ifdef __cplusplus
}
#endif

#endif
