/* Exercises the shared library through its C header from a C translation unit. */

#include <stdio.h>
#include <string.h>

#include "uas/uas.h"

static int failures = 0;

#define CHECK(cond)                                                        \
    do {                                                                   \
        if (!(cond)) {                                                     \
            fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, #cond); \
            ++failures;                                                    \
        }                                                                  \
    } while (0)

static const char* trivial =
    "{\"schema_version\": 1, \"obstacles\": {\"mode\": \"none\"},"
    " \"agents\": [{\"position\": [200, 200]}], \"targets\": [{\"position\": [1200, 900]}],"
    " \"sensor\": {\"p_detect\": 1.0, \"clutter_rate\": 0, \"noise_sigma\": [0, 0]}, \"time_limit\": 300}";

int main(int argc, char** argv) {
    const char* dir = argc > 1 ? argv[1] : "c_api_out";
    uas_scenario* sc = NULL;
    uas_mission_log* log = NULL;
    uas_plan* plan = NULL;
    uas_summary sum;
    size_t n = 0, matched = 0, total = 0;
    char path[4096];

    CHECK(strcmp(uas_version(), "1.0.0") == 0);
    CHECK(uas_scenario_parse("{\"schema_version\": 1}", &sc) == UAS_ERR_VALIDATION);
    CHECK(sc == NULL);
    CHECK(strstr(uas_last_error(), "agents") != NULL);
    CHECK(uas_scenario_parse(NULL, &sc) == UAS_ERR_INVALID_ARGUMENT);
    CHECK(uas_scenario_load("/nonexistent.json", &sc) == UAS_ERR_IO);

    CHECK(uas_scenario_parse(trivial, &sc) == UAS_OK);
    CHECK(uas_scenario_set_seed(sc, 3) == UAS_OK);
    CHECK(uas_mission_run(sc, &log) == UAS_OK);
    CHECK(uas_log_summary(log, &sum) == UAS_OK);
    CHECK(sum.mission_status == UAS_MISSION_COMPLETED);
    CHECK(sum.completion_time_s > 0.0);
    CHECK(sum.dynamics_steps == (long)(sum.end_time_s * 100.0 + 0.5));
    CHECK(sum.final_window_ospa_m >= 0.0 && sum.final_window_ospa_m <= 100.0);

    CHECK(uas_log_emit(log, dir) == UAS_OK);
    CHECK(uas_log_replay_tracks(log, dir, &matched, &total) == UAS_OK);
    CHECK(total > 0 && matched == total);
    uas_log_free(log);
    log = NULL;

    snprintf(path, sizeof path, "%s/run_log.json", dir);
    CHECK(uas_log_load(path, &log) == UAS_OK);
    CHECK(uas_log_summary(log, &sum) == UAS_OK);
    CHECK(sum.mission_status == UAS_MISSION_COMPLETED);
    uas_log_free(log);

    CHECK(uas_plan_run(sc, &plan) == UAS_OK);
    CHECK(uas_plan_pair_count(plan, &n) == UAS_OK && n == 1);
    CHECK(uas_plan_write(plan, dir) == UAS_OK);
    uas_plan_free(plan);

    {
        uas_sweep_summary sw;
        CHECK(uas_sweep(sc, 1, 0, 1, dir, &sw) == UAS_ERR_INVALID_ARGUMENT);
        CHECK(uas_sweep(sc, 1, 3, 2, dir, &sw) == UAS_OK);
        CHECK(sw.runs == 3 && sw.completed == 3 && sw.completion_rate == 1.0);
    }
    CHECK(uas_mission_run(NULL, &log) == UAS_ERR_INVALID_ARGUMENT);
    uas_scenario_free(sc);
    uas_scenario_free(NULL);
    uas_log_free(NULL);
    uas_plan_free(NULL);

    if (failures == 0) printf("c api: ok\n");
    return failures == 0 ? 0 : 1;
}
