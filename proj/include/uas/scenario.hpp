#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uas/planner.hpp"
#include "uas/tracking.hpp"
#include "uas/types.hpp"

namespace uas {

inline constexpr int kScenarioSchemaVersion = 1;

struct AgentSpec {
    Vec2 position = Vec2::Zero();
    double heading = 0.0;  // rad
    double u_fwd = 20.0;   // m/s
    std::optional<double> death_time;  // s
};

/// Scripted velocity change applied at `time` seconds.
struct VelocityEvent {
    double time = 0.0;
    Vec2 velocity = Vec2::Zero();
};

struct TargetSpec {
    Vec2 position = Vec2::Zero();
    Vec2 velocity = Vec2::Zero();
    std::vector<VelocityEvent> script;  // sorted by time
};

struct ObstacleSpec {
    enum class Mode { None, Random, Explicit };
    Mode mode = Mode::None;
    double threshold = 0.0;
    std::vector<Cell> cells;
};

struct SensorModel {
    double p_detect = 0.98;
    double clutter_rate = 5.0;
    Vec2 noise_sigma = Vec2(5.0, 5.0);  // per-axis std, m
};

struct BirthSpec {
    double r = 0.05;
    Vec4 mean = Vec4::Zero();
    Vec4 sigma = Vec4(50.0, 50.0, 10.0, 10.0);
};

/// Scenario-level tuning for one filter instance. Sensor-derived fields are
/// resolved at load time.
struct FilterSpec {
    double p_survival = 0.99;
    double p_detect = 0.98;
    double clutter_rate = 5.0;
    Vec2 noise_sigma = Vec2(5.0, 5.0);
    double process_noise_psd = 1.0;  // m^2/s^3
    /// Empty: one birth component per start location of the tracked entities.
    std::vector<BirthSpec> birth;
    double birth_r = 0.05;
    double birth_pos_sigma = 50.0;
    double birth_vel_sigma = 10.0;
    int birth_steps = 3;
    double prune_threshold = 1e-5;
    int max_hypotheses = 100;
    int top_k = 50;
    double gate = 30.0;
    double component_floor = 1e-5;
    double merge_gate = 1.0;
};

struct OspaSpec {
    double cutoff = 100.0;
    double order = 1.0;
    double window = 30.0;  // s, trailing window for the summary mean
};

struct Scenario {
    int schema_version = kScenarioSchemaVersion;
    std::string name;
    std::uint64_t seed = 1;
    Vec2 area_origin = Vec2::Zero();
    Vec2 area_extent = Vec2(2000.0, 2000.0);
    int grid_rows = 40;
    int grid_cols = 40;
    ObstacleSpec obstacles;
    std::vector<AgentSpec> agents;
    std::vector<TargetSpec> targets;
    SensorModel sensor;
    FilterSpec agent_filter;
    FilterSpec target_filter;
    double capture_radius = 50.0;
    double replan_threshold = 50.0;
    double association_gate = 100.0;
    double time_limit = 600.0;
    int truth_decimation = 20;  // ticks between truth snapshots; divides 100
    OspaSpec ospa;
};

enum class FilterRole { Agents, Targets };

/// Parses and validates scenario JSON text. Unknown keys are rejected.
/// Throws ValidationError naming the offending field.
Scenario parse_scenario(const std::string& text);

/// Reads a scenario file. Throws ErrorKind::Io if it cannot be read.
Scenario load_scenario(const std::string& path);

/// Fully expanded scenario JSON; parse_scenario(write_scenario(s)) == s.
std::string write_scenario(const Scenario& scenario);

FilterConfig make_filter_config(const Scenario& scenario, FilterRole role);

}  // namespace uas
