#include "uas/mission_log.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "uas/error.hpp"
#include "uas/metrics.hpp"

namespace uas {

using nlohmann::json;

namespace {

json vec(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

template <int N>
Eigen::Matrix<double, N, 1> to_vec(const json& j) {
    if (!j.is_array() || j.size() != N) throw ValidationError("log", "bad vector");
    Eigen::Matrix<double, N, 1> v;
    for (int i = 0; i < N; ++i) v(i) = j.at(i).get<double>();
    return v;
}

json points(const std::vector<Vec2>& pts) {
    json a = json::array();
    for (const auto& p : pts) a.push_back({p.x(), p.y()});
    return a;
}

std::vector<Vec2> to_points(const json& j) {
    std::vector<Vec2> out;
    for (const auto& p : j) out.push_back(to_vec<2>(p));
    return out;
}

const char* origin_name(OriginKind k) {
    switch (k) {
        case OriginKind::Agent: return "agent";
        case OriginKind::Target: return "target";
        case OriginKind::Clutter: return "clutter";
    }
    return "clutter";
}

OriginKind origin_kind(const std::string& s) {
    if (s == "agent") return OriginKind::Agent;
    if (s == "target") return OriginKind::Target;
    if (s == "clutter") return OriginKind::Clutter;
    throw ValidationError("scans.tags", "unknown origin '" + s + "'");
}

json estimates_json(const std::vector<EstimateRecord>& recs) {
    json a = json::array();
    for (const auto& r : recs) {
        json est = json::array();
        for (const auto& e : r.estimates.estimates)
            est.push_back({{"label", {e.label.birth_step, e.label.birth_index}}, {"state", vec(e.state)}});
        a.push_back({{"step", r.step}, {"cardinality", r.estimates.cardinality}, {"estimates", est}});
    }
    return a;
}

std::vector<EstimateRecord> parse_estimates(const json& a) {
    std::vector<EstimateRecord> out;
    for (const auto& r : a) {
        EstimateRecord rec;
        rec.step = r.at("step").get<int>();
        rec.estimates.cardinality = r.at("cardinality").get<std::vector<double>>();
        for (const auto& e : r.at("estimates")) {
            Estimate est;
            est.label = {e.at("label").at(0).get<int>(), e.at("label").at(1).get<int>()};
            est.state = to_vec<4>(e.at("state"));
            rec.estimates.estimates.push_back(est);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

MissionStatus parse_status(const std::string& s) {
    if (s == "completed") return MissionStatus::Completed;
    if (s == "time_limit") return MissionStatus::TimeLimit;
    if (s == "planning_failed") return MissionStatus::PlanningFailed;
    throw ValidationError("status", "unknown status '" + s + "'");
}

}  // namespace

std::string write_log(const MissionLog& log) {
    json j;
    j["schema_version"] = kLogSchemaVersion;
    j["scenario"] = json::parse(write_scenario(log.scenario));
    j["seed"] = log.scenario.seed;

    json obstacles = json::array();
    for (int r = 0; r < log.grid.rows; ++r)
        for (int c = 0; c < log.grid.cols; ++c)
            if (log.grid.blocked({r, c})) obstacles.push_back({r, c});
    j["grid"] = {{"rows", log.grid.rows},
                 {"cols", log.grid.cols},
                 {"origin", vec(log.grid.area_origin)},
                 {"extent", vec(log.grid.area_extent)},
                 {"obstacles", obstacles}};

    json gain = json::array();
    for (int r = 0; r < 2; ++r) gain.push_back(vec(log.gain.row(r).transpose()));
    j["gain"] = gain;

    j["status"] = to_string(log.status);
    j["end_tick"] = log.end_tick;
    j["completion_time"] = log.completion_time ? json(*log.completion_time) : json(nullptr);
    j["counters"] = {{"dynamics_steps", log.counters.dynamics_steps},
                     {"filter_steps", log.counters.filter_steps},
                     {"replan_checks", log.counters.replan_checks},
                     {"replans", log.counters.replans}};

    json truth = json::array();
    for (const auto& t : log.truth) {
        json agents = json::array();
        for (std::size_t i = 0; i < t.agents.size(); ++i) {
            const auto& a = t.agents[i];
            agents.push_back({a.v, a.p, a.r, a.phi, a.psi, a.pos_x, a.pos_y, a.u_fwd, t.agent_alive[i] != 0});
        }
        json targets = json::array();
        for (const auto& g : t.targets) targets.push_back({g.pos_x, g.pos_y, g.vel_x, g.vel_y});
        truth.push_back({{"tick", t.tick}, {"agents", agents}, {"targets", targets}});
    }
    j["truth"] = truth;

    json scans = json::array();
    for (const auto& s : log.scans) {
        json tags = json::array();
        for (const auto& tag : s.scan.truth_tags) tags.push_back({origin_name(tag.kind), tag.id});
        scans.push_back({{"step", s.scan.step},
                         {"tick", s.tick},
                         {"points", points(s.scan.points)},
                         {"tags", tags},
                         {"agent_truth", points(s.agent_truth)},
                         {"target_truth", points(s.target_truth)}});
    }
    j["scans"] = scans;
    j["agent_estimates"] = estimates_json(log.agent_estimates);
    j["target_estimates"] = estimates_json(log.target_estimates);

    json plans = json::array();
    for (const auto& p : log.plans) {
        json costs = json::array();
        for (Eigen::Index r = 0; r < p.plan.costs.rows(); ++r) costs.push_back(vec(p.plan.costs.row(r).transpose()));
        json pairs = json::array();
        for (const auto& pr : p.plan.pairs) {
            json cells = json::array();
            for (const Cell& c : pr.path.cells) cells.push_back({c.row, c.col});
            pairs.push_back({{"agent", pr.agent},
                             {"target", pr.target},
                             {"cost", pr.cost},
                             {"core", pr.core},
                             {"cells", cells},
                             {"waypoints", points(pr.route.waypoints)}});
        }
        plans.push_back({{"tick", p.tick},
                         {"initial", p.initial},
                         {"agent_ids", p.agent_ids},
                         {"target_ids", p.target_ids},
                         {"agent_positions", points(p.agent_positions)},
                         {"target_positions", points(p.target_positions)},
                         {"costs", costs},
                         {"dropped_targets", p.plan.dropped_targets},
                         {"pairs", pairs}});
    }
    j["plans"] = plans;

    json events = json::array();
    for (const auto& e : log.events)
        events.push_back({{"tick", e.tick}, {"type", e.type}, {"agent", e.agent}, {"target", e.target}, {"detail", e.detail}});
    j["events"] = events;

    const MetricsReport m = compute_metrics(log);
    j["metrics"] = {{"final_window_ospa", m.final_window_ospa},
                    {"replans", m.replans},
                    {"completion_time", m.completion_time ? json(*m.completion_time) : json(nullptr)},
                    {"status", to_string(m.status)}};
    return j.dump(1) + "\n";
}

MissionLog parse_log(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError("<root>", std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("schema_version")) throw ValidationError("schema_version", "missing required field");
    const int version = j.at("schema_version").get<int>();
    if (version != kLogSchemaVersion)
        throw ValidationError("schema_version", "unsupported log version " + std::to_string(version));

    MissionLog log;
    try {
        log.scenario = parse_scenario(j.at("scenario").dump());
        const json& g = j.at("grid");
        log.grid = make_grid(g.at("rows").get<int>(), g.at("cols").get<int>(), to_vec<2>(g.at("origin")),
                             to_vec<2>(g.at("extent")));
        for (const auto& c : g.at("obstacles")) {
            const Cell cell{c.at(0).get<int>(), c.at(1).get<int>()};
            if (!log.grid.contains(cell)) throw ValidationError("grid.obstacles", "cell outside grid");
            log.grid.obstacle[log.grid.index(cell)] = 1;
        }
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 5; ++c) log.gain(r, c) = j.at("gain").at(r).at(c).get<double>();
        log.status = parse_status(j.at("status").get<std::string>());
        log.end_tick = j.at("end_tick").get<long>();
        if (!j.at("completion_time").is_null()) log.completion_time = j.at("completion_time").get<double>();
        const json& ct = j.at("counters");
        log.counters.dynamics_steps = ct.at("dynamics_steps").get<long>();
        log.counters.filter_steps = ct.at("filter_steps").get<long>();
        log.counters.replan_checks = ct.at("replan_checks").get<long>();
        log.counters.replans = ct.at("replans").get<long>();

        for (const auto& t : j.at("truth")) {
            TruthSnapshot snap;
            snap.tick = t.at("tick").get<long>();
            for (const auto& a : t.at("agents")) {
                AgentState s;
                s.v = a.at(0).get<double>();
                s.p = a.at(1).get<double>();
                s.r = a.at(2).get<double>();
                s.phi = a.at(3).get<double>();
                s.psi = a.at(4).get<double>();
                s.pos_x = a.at(5).get<double>();
                s.pos_y = a.at(6).get<double>();
                s.u_fwd = a.at(7).get<double>();
                snap.agents.push_back(s);
                snap.agent_alive.push_back(a.at(8).get<bool>() ? 1 : 0);
            }
            for (const auto& g2 : t.at("targets"))
                snap.targets.push_back({g2.at(0).get<double>(), g2.at(1).get<double>(), g2.at(2).get<double>(),
                                        g2.at(3).get<double>()});
            log.truth.push_back(std::move(snap));
        }
        for (const auto& s : j.at("scans")) {
            ScanRecord rec;
            rec.scan.step = s.at("step").get<int>();
            rec.tick = s.at("tick").get<long>();
            rec.scan.points = to_points(s.at("points"));
            for (const auto& tag : s.at("tags"))
                rec.scan.truth_tags.push_back({origin_kind(tag.at(0).get<std::string>()), tag.at(1).get<int>()});
            if (rec.scan.truth_tags.size() != rec.scan.points.size())
                throw ValidationError("scans.tags", "tag count differs from point count");
            rec.agent_truth = to_points(s.at("agent_truth"));
            rec.target_truth = to_points(s.at("target_truth"));
            log.scans.push_back(std::move(rec));
        }
        log.agent_estimates = parse_estimates(j.at("agent_estimates"));
        log.target_estimates = parse_estimates(j.at("target_estimates"));

        for (const auto& p : j.at("plans")) {
            PlanRecord rec;
            rec.tick = p.at("tick").get<long>();
            rec.initial = p.at("initial").get<bool>();
            rec.agent_ids = p.at("agent_ids").get<std::vector<int>>();
            rec.target_ids = p.at("target_ids").get<std::vector<int>>();
            rec.agent_positions = to_points(p.at("agent_positions"));
            rec.target_positions = to_points(p.at("target_positions"));
            const json& costs = p.at("costs");
            const auto rows = static_cast<Eigen::Index>(costs.size());
            const auto cols = rows > 0 ? static_cast<Eigen::Index>(costs.at(0).size()) : 0;
            rec.plan.costs.resize(rows, cols);
            for (Eigen::Index r = 0; r < rows; ++r)
                for (Eigen::Index c = 0; c < cols; ++c) rec.plan.costs(r, c) = costs.at(r).at(c).get<double>();
            rec.plan.dropped_targets = p.at("dropped_targets").get<std::vector<int>>();
            for (const auto& pr : p.at("pairs")) {
                AssignedPair a;
                a.agent = pr.at("agent").get<int>();
                a.target = pr.at("target").get<int>();
                a.cost = pr.at("cost").get<double>();
                a.core = pr.at("core").get<bool>();
                for (const auto& c : pr.at("cells")) a.path.cells.push_back({c.at(0).get<int>(), c.at(1).get<int>()});
                a.route.waypoints = to_points(pr.at("waypoints"));
                rec.plan.pairs.push_back(std::move(a));
            }
            log.plans.push_back(std::move(rec));
        }
        for (const auto& e : j.at("events"))
            log.events.push_back({e.at("tick").get<long>(), e.at("type").get<std::string>(), e.at("agent").get<int>(),
                                  e.at("target").get<int>(), e.at("detail").get<std::string>()});
    } catch (const json::exception& e) {
        throw ValidationError("log", std::string("malformed run log: ") + e.what());
    }
    return log;
}

MissionLog load_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read run log '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_log(ss.str());
}

}  // namespace uas
