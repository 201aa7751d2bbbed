#include "uas/mission.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "uas/error.hpp"

namespace uas {

const char* to_string(MissionStatus status) {
    switch (status) {
        case MissionStatus::Completed: return "completed";
        case MissionStatus::TimeLimit: return "time_limit";
        case MissionStatus::PlanningFailed: return "planning_failed";
    }
    return "unknown";
}

MeasurementScan generate_measurements(std::span<const Vec2> agents, std::span<const Vec2> targets,
                                      const SensorModel& sensor, const Vec2& area_origin,
                                      const Vec2& area_extent, Rng& rng, int step,
                                      std::span<const std::uint8_t> agent_alive) {
    MeasurementScan scan;
    scan.step = step;
    auto sense = [&](const Vec2& truth, MeasurementOrigin origin) {
        if (!(rng.uniform() < sensor.p_detect)) return;
        const double nx = rng.normal();
        const double ny = rng.normal();
        scan.points.emplace_back(truth.x() + sensor.noise_sigma.x() * nx, truth.y() + sensor.noise_sigma.y() * ny);
        scan.truth_tags.push_back(origin);
    };
    for (std::size_t i = 0; i < agents.size(); ++i) {
        if (!agent_alive.empty() && !agent_alive[i]) continue;
        sense(agents[i], {OriginKind::Agent, static_cast<int>(i)});
    }
    for (std::size_t j = 0; j < targets.size(); ++j) sense(targets[j], {OriginKind::Target, static_cast<int>(j)});

    const std::uint64_t clutter = sensor.clutter_rate > 0.0 ? rng.poisson(sensor.clutter_rate) : 0;
    for (std::uint64_t c = 0; c < clutter; ++c) {
        const double x = area_origin.x() + area_extent.x() * rng.uniform();
        const double y = area_origin.y() + area_extent.y() * rng.uniform();
        scan.points.emplace_back(x, y);
        scan.truth_tags.push_back({OriginKind::Clutter, -1});
    }
    for (std::size_t i = scan.points.size(); i > 1; --i) {
        const std::size_t j = rng.index(i);
        std::swap(scan.points[i - 1], scan.points[j]);
        std::swap(scan.truth_tags[i - 1], scan.truth_tags[j]);
    }
    return scan;
}

Association associate_tracks(std::span<const Vec2> estimates, std::span<const Vec2> known, double gate) {
    Association out;
    out.estimate_for_entity.assign(known.size(), -1);
    std::vector<std::tuple<double, int, int>> pairs;
    for (std::size_t e = 0; e < known.size(); ++e)
        for (std::size_t k = 0; k < estimates.size(); ++k) {
            const double d = (known[e] - estimates[k]).norm();
            if (d <= gate) pairs.emplace_back(d, static_cast<int>(e), static_cast<int>(k));
        }
    std::sort(pairs.begin(), pairs.end());
    std::vector<char> used(estimates.size(), 0);
    for (const auto& [d, e, k] : pairs) {
        if (out.estimate_for_entity[e] >= 0 || used[k]) continue;
        out.estimate_for_entity[e] = k;
        used[k] = 1;
    }
    for (std::size_t k = 0; k < estimates.size(); ++k)
        if (!used[k]) out.unmatched_estimates.push_back(static_cast<int>(k));
    return out;
}

Association associate_tracks(const EstimateSet& set, std::span<const Vec2> predicted,
                             std::span<const std::optional<TrackLabel>> labels, double gate) {
    Association out;
    out.estimate_for_entity.assign(predicted.size(), -1);
    std::vector<char> used(set.estimates.size(), 0);
    for (std::size_t e = 0; e < predicted.size(); ++e) {
        if (e >= labels.size() || !labels[e]) continue;
        for (std::size_t k = 0; k < set.estimates.size(); ++k)
            if (!used[k] && set.estimates[k].label == *labels[e]) {
                out.estimate_for_entity[e] = static_cast<int>(k);
                used[k] = 1;
                break;
            }
    }
    std::vector<Vec2> free_known;
    std::vector<int> free_entity;
    for (std::size_t e = 0; e < predicted.size(); ++e)
        if (out.estimate_for_entity[e] < 0) {
            free_known.push_back(predicted[e]);
            free_entity.push_back(static_cast<int>(e));
        }
    std::vector<Vec2> free_est;
    std::vector<int> free_index;
    for (std::size_t k = 0; k < set.estimates.size(); ++k)
        if (!used[k]) {
            free_est.push_back(set.estimates[k].position());
            free_index.push_back(static_cast<int>(k));
        }
    const Association rest = associate_tracks(free_est, free_known, gate);
    for (std::size_t f = 0; f < free_entity.size(); ++f)
        if (rest.estimate_for_entity[f] >= 0) out.estimate_for_entity[free_entity[f]] = free_index[rest.estimate_for_entity[f]];
    for (int k : rest.unmatched_estimates) out.unmatched_estimates.push_back(free_index[k]);
    std::sort(out.unmatched_estimates.begin(), out.unmatched_estimates.end());
    return out;
}

bool replan_check(std::span<const Vec2> current, std::span<const Vec2> planned_against, double threshold,
                  std::span<const std::uint8_t> associated) {
    const std::size_t n = std::min(current.size(), planned_against.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (!associated.empty() && !associated[i]) continue;
        if ((current[i] - planned_against[i]).norm() >= threshold) return true;
    }
    return false;
}

GridMap build_grid(const Scenario& s, Rng& rng) {
    GridMap grid = make_grid(s.grid_rows, s.grid_cols, s.area_origin, s.area_extent);
    std::vector<Cell> keep;
    for (const auto& a : s.agents) keep.push_back(world_to_cell(grid, a.position));
    for (const auto& t : s.targets) keep.push_back(world_to_cell(grid, t.position));
    switch (s.obstacles.mode) {
        case ObstacleSpec::Mode::None: break;
        case ObstacleSpec::Mode::Random: grid = generate_obstacles(std::move(grid), s.obstacles.threshold, rng, keep); break;
        case ObstacleSpec::Mode::Explicit:
            for (const Cell& c : s.obstacles.cells) grid.obstacle[grid.index(c)] = 1;
            break;
    }
    return grid;
}

namespace {

const GainMatrix& mission_gain() {
    static const GainMatrix gain = default_lqr_gain();
    return gain;
}

/// Plans for the given agent and target subsets and relabels the result
/// with global ids.
PlanRecord plan_subset(const GridMap& grid, long tick, bool initial, std::vector<int> agent_ids,
                       std::vector<Vec2> agent_pos, std::vector<int> target_ids, std::vector<Vec2> target_pos) {
    PlanRecord rec;
    rec.tick = tick;
    rec.initial = initial;
    rec.plan = stat_plan(agent_pos, target_pos, grid);
    for (auto& pair : rec.plan.pairs) {
        pair.agent = agent_ids[pair.agent];
        pair.target = target_ids[pair.target];
    }
    for (int& t : rec.plan.dropped_targets) t = target_ids[t];
    rec.agent_ids = std::move(agent_ids);
    rec.target_ids = std::move(target_ids);
    rec.agent_positions = std::move(agent_pos);
    rec.target_positions = std::move(target_pos);
    return rec;
}

/// Route flown by an agent: the planned cell centres followed by a homing
/// point on the planned target position.
std::vector<Vec2> flight_route(const PlanRecord& rec, const AssignedPair& pair, const GridMap& grid) {
    std::vector<Vec2> route = pair.route.waypoints;
    for (std::size_t k = 0; k < rec.target_ids.size(); ++k)
        if (rec.target_ids[k] == pair.target) {
            const Vec2 goal = rec.target_positions[k].cwiseMax(grid.area_origin).cwiseMin(grid.area_origin + grid.area_extent);
            if (route.empty() || (route.back() - goal).norm() > 1e-9) route.push_back(goal);
        }
    return route;
}

/// Index of the waypoint to fly after joining a route at `pos`: the one
/// after the nearest, unless the nearest is the last.
std::size_t join_index(const std::vector<Vec2>& route, const Vec2& pos) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < route.size(); ++i) {
        const double d = (route[i] - pos).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best + 1 < route.size() ? best + 1 : best;
}

std::vector<Vec2> estimate_positions(const EstimateSet& set) {
    std::vector<Vec2> out;
    out.reserve(set.estimates.size());
    for (const auto& e : set.estimates) out.push_back(e.position());
    return out;
}

/// Last associated positions carried forward at their estimated velocity.
std::vector<Vec2> extrapolate(const std::vector<Vec2>& pos, const std::vector<Vec2>& vel,
                              const std::vector<double>& since, double now) {
    std::vector<Vec2> out(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) out[i] = pos[i] + vel[i] * (now - since[i]);
    return out;
}

}  // namespace

MissionLog run_mission(const Scenario& s) {
    MissionLog log;
    log.scenario = s;
    Rng rng(s.seed);

    const std::size_t na = s.agents.size();
    const std::size_t nt = s.targets.size();

    log.gain = mission_gain().k;
    const ClosedLoop loop = discretize_zoh(default_lateral_model(), log.gain);

    std::vector<AgentState> agents(na);
    std::vector<std::uint8_t> alive(na, 1);
    std::vector<double> psi_cmd(na);
    for (std::size_t i = 0; i < na; ++i) {
        agents[i].psi = wrap_angle(s.agents[i].heading);
        agents[i].pos_x = s.agents[i].position.x();
        agents[i].pos_y = s.agents[i].position.y();
        agents[i].u_fwd = s.agents[i].u_fwd;
        psi_cmd[i] = agents[i].psi;
    }
    std::vector<TargetState> targets(nt);
    std::vector<std::size_t> script_pos(nt, 0);
    for (std::size_t j = 0; j < nt; ++j) {
        targets[j].pos_x = s.targets[j].position.x();
        targets[j].pos_y = s.targets[j].position.y();
        targets[j].vel_x = s.targets[j].velocity.x();
        targets[j].vel_y = s.targets[j].velocity.y();
    }

    std::vector<WaypointSequencer> seq(na);
    std::vector<int> assigned(na, -1);
    std::vector<std::uint8_t> agent_done(na, 0), target_done(nt, 0);
    std::vector<Vec2> known_agent(na), known_target(nt), planned_against(nt);
    for (std::size_t i = 0; i < na; ++i) known_agent[i] = s.agents[i].position;
    for (std::size_t j = 0; j < nt; ++j) known_target[j] = s.targets[j].position;
    std::vector<Vec2> known_agent_vel(na, Vec2::Zero()), known_target_vel(nt, Vec2::Zero());
    std::vector<double> known_agent_time(na, 0.0), known_target_time(nt, 0.0);
    std::vector<std::optional<TrackLabel>> agent_label(na), target_label(nt);
    for (std::size_t i = 0; i < na; ++i)
        known_agent_vel[i] = Vec2(std::cos(agents[i].psi), -std::sin(agents[i].psi)) * agents[i].u_fwd;
    for (std::size_t j = 0; j < nt; ++j) known_target_vel[j] = s.targets[j].velocity;
    std::size_t captures = 0;

    auto snapshot = [&](long tick) {
        TruthSnapshot snap;
        snap.tick = tick;
        snap.agents = agents;
        snap.agent_alive = alive;
        snap.targets = targets;
        log.truth.push_back(std::move(snap));
    };

    // Installs a plan. Agents whose target and path are unchanged keep their
    // sequencer state.
    auto apply_plan = [&](const PlanRecord& rec) {
        for (const auto& pair : rec.plan.pairs) {
            const auto a = static_cast<std::size_t>(pair.agent);
            std::vector<Vec2> route = flight_route(rec, pair, log.grid);
            if (assigned[a] == pair.target && seq[a].route == route) continue;
            assigned[a] = pair.target;
            seq[a].route = std::move(route);
            seq[a].capture_radius = s.capture_radius;
            seq[a].terminal_reached = false;
            seq[a].active_index = join_index(seq[a].route, agents[a].position());
        }
        for (std::size_t k = 0; k < rec.target_ids.size(); ++k)
            planned_against[rec.target_ids[k]] = rec.target_positions[k];
    };

    // Steps 1-4: grid, obstacles, initial assignment from known start states.
    log.grid = build_grid(s, rng);
    {
        std::vector<int> aid(na), tid(nt);
        for (std::size_t i = 0; i < na; ++i) aid[i] = static_cast<int>(i);
        for (std::size_t j = 0; j < nt; ++j) tid[j] = static_cast<int>(j);
        try {
            PlanRecord rec = plan_subset(log.grid, 0, true, aid, known_agent, tid, known_target);
            apply_plan(rec);
            log.plans.push_back(std::move(rec));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Planning && e.kind() != ErrorKind::NoPath) throw;
            log.status = MissionStatus::PlanningFailed;
            log.events.push_back({0, "planning_failed", -1, -1, e.what()});
            snapshot(0);
            return log;
        }
    }

    // Step 5: both filters.
    GlmbFilter agent_filter(make_filter_config(s, FilterRole::Agents));
    GlmbFilter target_filter(make_filter_config(s, FilterRole::Targets));

    snapshot(0);
    const long last_tick = std::lround(s.time_limit * MissionClock::kTicksPerSecond);
    MissionClock clock;
    bool complete = false;
    while (clock.tick < last_tick && !complete) {
        ++clock.tick;
        const double t_start = static_cast<double>(clock.tick - 1) * MissionClock::kDt;

        // Dynamics.
        for (std::size_t j = 0; j < nt; ++j) {
            const auto& script = s.targets[j].script;
            while (script_pos[j] < script.size() && script[script_pos[j]].time <= t_start + 1e-9) {
                targets[j].vel_x = script[script_pos[j]].velocity.x();
                targets[j].vel_y = script[script_pos[j]].velocity.y();
                ++script_pos[j];
            }
        }
        for (std::size_t i = 0; i < na; ++i) {
            if (!alive[i]) continue;
            if (s.agents[i].death_time && t_start >= *s.agents[i].death_time) {
                alive[i] = 0;
                log.events.push_back({clock.tick, "agent_death", static_cast<int>(i), -1, ""});
                continue;
            }
            if (!seq[i].route.empty()) {
                try {
                    psi_cmd[i] = heading_command(agents[i].position(), seq[i].active());
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::UndefinedHeading) throw;
                }
            }
            agents[i] = step_agent(agents[i], psi_cmd[i], loop);
        }
        for (auto& tg : targets) tg = step_target(tg, MissionClock::kDt);
        ++log.counters.dynamics_steps;

        for (std::size_t i = 0; i < na; ++i)
            if (alive[i] && !seq[i].route.empty()) seq[i] = advance_waypoint(seq[i], agents[i].position());

        // Capture is scored against truth and latched.
        for (std::size_t i = 0; i < na; ++i) {
            if (!alive[i] || agent_done[i] || assigned[i] < 0) continue;
            const auto j = static_cast<std::size_t>(assigned[i]);
            if (target_done[j]) continue;
            if ((agents[i].position() - targets[j].position()).norm() <= s.capture_radius) {
                agent_done[i] = 1;
                target_done[j] = 1;
                ++captures;
                log.events.push_back({clock.tick, "capture", static_cast<int>(i), static_cast<int>(j), ""});
            }
        }
        const bool all_targets = std::all_of(target_done.begin(), target_done.end(), [](auto d) { return d != 0; });
        complete = all_targets || captures == na;

        if (clock.tick % s.truth_decimation == 0 || complete) snapshot(clock.tick);

        // Measurement and filtering at 1 Hz.
        if (clock.scan_due()) {
            std::vector<Vec2> apos(na), tpos(nt);
            for (std::size_t i = 0; i < na; ++i) apos[i] = agents[i].position();
            for (std::size_t j = 0; j < nt; ++j) tpos[j] = targets[j].position();
            ScanRecord rec;
            rec.tick = clock.tick;
            rec.scan = generate_measurements(apos, tpos, s.sensor, s.area_origin, s.area_extent, rng,
                                             clock.scan_step(), alive);
            for (std::size_t i = 0; i < na; ++i)
                if (alive[i]) rec.agent_truth.push_back(apos[i]);
            rec.target_truth = tpos;

            const std::span<const Vec2> points(rec.scan.points);
            log.agent_estimates.push_back({clock.scan_step(), agent_filter.step(points)});
            log.target_estimates.push_back({clock.scan_step(), target_filter.step(points)});
            ++log.counters.filter_steps;
            log.scans.push_back(std::move(rec));
        }

        // Association and replanning at 0.2 Hz.
        if (clock.replan_due() && !complete) {
            ++log.counters.replan_checks;
            const EstimateSet& a_set = log.agent_estimates.back().estimates;
            const EstimateSet& t_set = log.target_estimates.back().estimates;
            const auto a_est = estimate_positions(a_set);
            const auto t_est = estimate_positions(t_set);
            const double now = clock.time();
            const Association a_assoc = associate_tracks(
                a_set, extrapolate(known_agent, known_agent_vel, known_agent_time, now), agent_label, s.association_gate);
            const Association t_assoc = associate_tracks(
                t_set, extrapolate(known_target, known_target_vel, known_target_time, now), target_label,
                s.association_gate);
            for (std::size_t i = 0; i < na; ++i)
                if (const int k = a_assoc.estimate_for_entity[i]; k >= 0) {
                    known_agent[i] = a_est[k];
                    known_agent_vel[i] = a_set.estimates[k].state.tail<2>();
                    known_agent_time[i] = now;
                    agent_label[i] = a_set.estimates[k].label;
                }
            std::vector<std::uint8_t> t_matched(nt, 0);
            for (std::size_t j = 0; j < nt; ++j)
                if (const int k = t_assoc.estimate_for_entity[j]; k >= 0) {
                    known_target[j] = t_est[k];
                    known_target_vel[j] = t_set.estimates[k].state.tail<2>();
                    known_target_time[j] = now;
                    target_label[j] = t_set.estimates[k].label;
                    t_matched[j] = target_done[j] ? 0 : 1;
                }
            for (int k : a_assoc.unmatched_estimates)
                log.events.push_back({clock.tick, "new_entity", -1, -1, "agent filter estimate " + std::to_string(k)});
            for (int k : t_assoc.unmatched_estimates)
                log.events.push_back({clock.tick, "new_entity", -1, -1, "target filter estimate " + std::to_string(k)});

            // A free agent whose target was taken by another agent needs a new one.
            bool stranded = false;
            for (std::size_t i = 0; i < na; ++i)
                if (alive[i] && !agent_done[i] && assigned[i] >= 0 && target_done[assigned[i]]) stranded = true;
            if (stranded || replan_check(known_target, planned_against, s.replan_threshold, t_matched)) {
                std::vector<int> aid, tid;
                std::vector<Vec2> apos, tpos;
                for (std::size_t i = 0; i < na; ++i)
                    if (alive[i] && !agent_done[i] && a_assoc.estimate_for_entity[i] >= 0) {
                        aid.push_back(static_cast<int>(i));
                        apos.push_back(known_agent[i]);
                    }
                for (std::size_t j = 0; j < nt; ++j)
                    if (!target_done[j]) {
                        tid.push_back(static_cast<int>(j));
                        tpos.push_back(known_target[j]);
                    }
                if (aid.empty() || tid.empty()) {
                    log.events.push_back({clock.tick, "replan_failed", -1, -1, "no tracked free agent"});
                } else {
                    try {
                        PlanRecord rec = plan_subset(log.grid, clock.tick, false, aid, apos, tid, tpos);
                        apply_plan(rec);
                        log.plans.push_back(std::move(rec));
                        ++log.counters.replans;
                        log.events.push_back({clock.tick, "replan", -1, -1, ""});
                    } catch (const Error& e) {
                        if (e.kind() != ErrorKind::Planning && e.kind() != ErrorKind::NoPath) throw;
                        log.events.push_back({clock.tick, "replan_failed", -1, -1, e.what()});
                    }
                }
            }
        }
    }

    log.end_tick = clock.tick;
    if (complete) {
        log.status = MissionStatus::Completed;
        log.completion_time = clock.time();
    } else {
        log.status = MissionStatus::TimeLimit;
    }
    return log;
}

PlanOnlyResult plan_only(const Scenario& s) {
    PlanOnlyResult out;
    out.scenario = s;
    Rng rng(s.seed);
    out.grid = build_grid(s, rng);
    std::vector<int> aid, tid;
    std::vector<Vec2> apos, tpos;
    for (std::size_t i = 0; i < s.agents.size(); ++i) {
        aid.push_back(static_cast<int>(i));
        apos.push_back(s.agents[i].position);
    }
    for (std::size_t j = 0; j < s.targets.size(); ++j) {
        tid.push_back(static_cast<int>(j));
        tpos.push_back(s.targets[j].position);
    }
    try {
        out.plan = plan_subset(out.grid, 0, true, aid, apos, tid, tpos);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::NoPath) throw Error(ErrorKind::Planning, e.what());
        throw;
    }
    return out;
}

namespace {

bool same_estimates(const EstimateSet& a, const EstimateSet& b) {
    if (a.cardinality != b.cardinality || a.estimates.size() != b.estimates.size()) return false;
    for (std::size_t i = 0; i < a.estimates.size(); ++i)
        if (a.estimates[i].label != b.estimates[i].label || a.estimates[i].state != b.estimates[i].state) return false;
    return true;
}

}  // namespace

ReplayResult replay_tracks(const MissionLog& log) {
    ReplayResult out;
    GlmbFilter agent_filter(make_filter_config(log.scenario, FilterRole::Agents));
    GlmbFilter target_filter(make_filter_config(log.scenario, FilterRole::Targets));
    for (std::size_t k = 0; k < log.scans.size(); ++k) {
        const std::span<const Vec2> points(log.scans[k].scan.points);
        const int step = log.scans[k].scan.step;
        out.agent_estimates.push_back({step, agent_filter.step(points)});
        out.target_estimates.push_back({step, target_filter.step(points)});
        if (k < log.agent_estimates.size() && k < log.target_estimates.size() &&
            same_estimates(out.agent_estimates.back().estimates, log.agent_estimates[k].estimates) &&
            same_estimates(out.target_estimates.back().estimates, log.target_estimates[k].estimates))
            ++out.matching_steps;
    }
    return out;
}

}  // namespace uas
