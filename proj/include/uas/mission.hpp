#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uas/assignment.hpp"
#include "uas/control.hpp"
#include "uas/dynamics.hpp"
#include "uas/planner.hpp"
#include "uas/rng.hpp"
#include "uas/scenario.hpp"
#include "uas/tracking.hpp"

namespace uas {

enum class OriginKind { Agent, Target, Clutter };

/// Diagnostic ground truth for one measurement point. Never reaches a filter.
struct MeasurementOrigin {
    OriginKind kind = OriginKind::Clutter;
    int id = -1;  // agent or target index, -1 for clutter
    bool operator==(const MeasurementOrigin&) const = default;
};

struct MeasurementScan {
    int step = 0;
    std::vector<Vec2> points;
    std::vector<MeasurementOrigin> truth_tags;  // parallel to points
};

/// One scan of agents and targets. Each live agent, then each target, draws
/// one uniform for detection and two normals for noise when detected; then
/// the clutter count, two uniforms per clutter point, and a Fisher-Yates
/// shuffle. `agent_alive` may be empty (all alive).
MeasurementScan generate_measurements(std::span<const Vec2> agents, std::span<const Vec2> targets,
                                      const SensorModel& sensor, const Vec2& area_origin,
                                      const Vec2& area_extent, Rng& rng, int step = 0,
                                      std::span<const std::uint8_t> agent_alive = {});

/// 100 Hz base clock with 1 Hz filter and 0.2 Hz replan phases.
struct MissionClock {
    static constexpr int kTicksPerSecond = 100;
    static constexpr int kTicksPerScan = 100;
    static constexpr int kTicksPerReplan = 500;
    static constexpr double kDt = 0.01;

    long tick = 0;

    double time() const { return static_cast<double>(tick) * kDt; }
    bool scan_due() const { return tick > 0 && tick % kTicksPerScan == 0; }
    bool replan_due() const { return tick > 0 && tick % kTicksPerReplan == 0; }
    int scan_step() const { return static_cast<int>(tick / kTicksPerScan); }
};

struct Association {
    std::vector<int> estimate_for_entity;  // -1 when unmatched
    std::vector<int> unmatched_estimates;  // candidates for new entity records
};

/// Greedy nearest neighbour: repeatedly takes the globally closest free
/// (entity, estimate) pair whose distance is within `gate`.
Association associate_tracks(std::span<const Vec2> estimates, std::span<const Vec2> known, double gate);

/// Label-aware variant: an entity whose last associated label is still
/// present keeps that estimate; the rest fall back to the greedy rule
/// against `predicted` positions.
Association associate_tracks(const EstimateSet& estimates, std::span<const Vec2> predicted,
                             std::span<const std::optional<TrackLabel>> labels, double gate);

/// True iff some target moved at least `threshold` metres since it was last
/// planned against. Entries with `associated` false are skipped; an empty
/// mask means all associated.
bool replan_check(std::span<const Vec2> current, std::span<const Vec2> planned_against, double threshold,
                  std::span<const std::uint8_t> associated = {});

struct TruthSnapshot {
    long tick = 0;
    std::vector<AgentState> agents;
    std::vector<std::uint8_t> agent_alive;
    std::vector<TargetState> targets;
};

struct ScanRecord {
    MeasurementScan scan;
    long tick = 0;
    std::vector<Vec2> agent_truth;  // live agents only
    std::vector<Vec2> target_truth;
};

struct EstimateRecord {
    int step = 0;
    EstimateSet estimates;
};

struct PlanRecord {
    long tick = 0;
    bool initial = true;
    std::vector<int> agent_ids;   // rows of plan.costs
    std::vector<int> target_ids;  // columns of plan.costs
    std::vector<Vec2> agent_positions;
    std::vector<Vec2> target_positions;
    /// Pair and dropped ids are global agent/target indices.
    AssignmentPlan plan;
};

struct MissionEvent {
    long tick = 0;
    std::string type;  // capture, replan, replan_failed, agent_death, new_entity, planning_failed
    int agent = -1;
    int target = -1;
    std::string detail;
};

struct MissionCounters {
    long dynamics_steps = 0;
    long filter_steps = 0;
    long replan_checks = 0;
    long replans = 0;
};

enum class MissionStatus { Completed = 0, TimeLimit = 1, PlanningFailed = 2 };

const char* to_string(MissionStatus status);

struct MissionLog {
    Scenario scenario;
    GridMap grid;
    Mat25 gain = Mat25::Zero();
    MissionStatus status = MissionStatus::TimeLimit;
    long end_tick = 0;
    std::optional<double> completion_time;
    MissionCounters counters;
    std::vector<TruthSnapshot> truth;
    std::vector<ScanRecord> scans;
    std::vector<EstimateRecord> agent_estimates;
    std::vector<EstimateRecord> target_estimates;
    std::vector<PlanRecord> plans;
    std::vector<MissionEvent> events;
};

/// Builds the obstacle grid for a scenario, drawing from `rng` when the
/// obstacle mode is random. Start cells of agents and targets stay free.
GridMap build_grid(const Scenario& scenario, Rng& rng);

/// Runs the closed loop until completion or the time limit.
MissionLog run_mission(const Scenario& scenario);

struct PlanOnlyResult {
    Scenario scenario;
    GridMap grid;
    PlanRecord plan;
};

/// Initial grid and assignment only. Throws ErrorKind::Planning on failure.
PlanOnlyResult plan_only(const Scenario& scenario);

struct ReplayResult {
    std::vector<EstimateRecord> agent_estimates;
    std::vector<EstimateRecord> target_estimates;
    std::size_t matching_steps = 0;  // steps whose estimates equal the logged ones
};

/// Feeds the logged measurement points through fresh filters.
ReplayResult replay_tracks(const MissionLog& log);

}  // namespace uas
