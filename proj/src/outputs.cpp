#include "uas/outputs.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "uas/error.hpp"
#include "uas/metrics.hpp"
#include "uas/mission_log.hpp"

namespace uas {

namespace fs = std::filesystem;

namespace {

std::string num(double v, int digits = 6) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Numerical, "non-finite value in output table");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    std::string s(buf);
    if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

std::string time_of(long tick) { return num(static_cast<double>(tick) * MissionClock::kDt, 2); }

const char* origin_name(OriginKind k) {
    switch (k) {
        case OriginKind::Agent: return "agent";
        case OriginKind::Target: return "target";
        case OriginKind::Clutter: return "clutter";
    }
    return "clutter";
}

/// World-to-pixel map with y up.
struct Canvas {
    Vec2 origin;
    Vec2 extent;
    double size = 800.0;
    double margin = 20.0;
    std::ostringstream out;

    Canvas(const Vec2& o, const Vec2& e) : origin(o), extent(e) {
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(size, 0) << "\" height=\"" << num(size, 0)
            << "\" viewBox=\"0 0 " << num(size, 0) << ' ' << num(size, 0) << "\">\n";
        out << "<rect x=\"0\" y=\"0\" width=\"" << num(size, 0) << "\" height=\"" << num(size, 0)
            << "\" fill=\"white\"/>\n";
        const Vec2 a = px(origin), b = px(origin + extent);
        out << "<rect class=\"area\" x=\"" << num(a.x(), 2) << "\" y=\"" << num(b.y(), 2) << "\" width=\""
            << num(b.x() - a.x(), 2) << "\" height=\"" << num(a.y() - b.y(), 2)
            << "\" fill=\"none\" stroke=\"#999999\"/>\n";
    }

    double scale() const { return (size - 2.0 * margin) / std::max(extent.x(), extent.y()); }

    Vec2 px(const Vec2& w) const {
        return Vec2(margin + (w.x() - origin.x()) * scale(), margin + (origin.y() + extent.y() - w.y()) * scale());
    }

    void circle(const Vec2& w, double r, const std::string& cls, const std::string& style) {
        const Vec2 p = px(w);
        out << "<circle class=\"" << cls << "\" cx=\"" << num(p.x(), 2) << "\" cy=\"" << num(p.y(), 2) << "\" r=\""
            << num(r, 1) << "\" " << style << "/>\n";
    }

    void triangle(const Vec2& w, double r, const std::string& cls, const std::string& style) {
        const Vec2 p = px(w);
        out << "<polygon class=\"" << cls << "\" points=\"" << num(p.x(), 2) << ',' << num(p.y() - r, 2) << ' '
            << num(p.x() - r, 2) << ',' << num(p.y() + r, 2) << ' ' << num(p.x() + r, 2) << ','
            << num(p.y() + r, 2) << "\" " << style << "/>\n";
    }

    void cross(const Vec2& w, double r, const std::string& cls, const std::string& color) {
        const Vec2 p = px(w);
        out << "<path class=\"" << cls << "\" d=\"M" << num(p.x() - r, 2) << ' ' << num(p.y() - r, 2) << " L"
            << num(p.x() + r, 2) << ' ' << num(p.y() + r, 2) << " M" << num(p.x() - r, 2) << ' '
            << num(p.y() + r, 2) << " L" << num(p.x() + r, 2) << ' ' << num(p.y() - r, 2) << "\" stroke=\""
            << color << "\" stroke-width=\"2\" fill=\"none\"/>\n";
    }

    void polyline(const std::vector<Vec2>& pts, const std::string& cls, const std::string& color) {
        if (pts.empty()) return;
        out << "<polyline class=\"" << cls << "\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const Vec2 p = px(pts[i]);
            out << (i ? " " : "") << num(p.x(), 2) << ',' << num(p.y(), 2);
        }
        out << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    }

    void text(const Vec2& w, const std::string& s) {
        const Vec2 p = px(w);
        out << "<text x=\"" << num(p.x() + 6, 2) << "\" y=\"" << num(p.y() - 6, 2)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << s << "</text>\n";
    }

    void obstacles(const GridMap& grid) {
        for (int r = 0; r < grid.rows; ++r)
            for (int c = 0; c < grid.cols; ++c)
                if (grid.blocked({r, c})) circle(cell_center(grid, {r, c}), 3.0, "obstacle", "fill=\"black\"");
    }

    std::string finish() {
        out << "</svg>\n";
        return out.str();
    }
};

Vec2 agent_velocity(const AgentState& a) {
    return Vec2(a.u_fwd * std::cos(a.psi) - a.v * std::sin(a.psi), -(a.u_fwd * std::sin(a.psi) + a.v * std::cos(a.psi)));
}

void plan_rows(std::ostringstream& out, const PlanRecord& p, std::size_t index) {
    for (const auto& pair : p.plan.pairs)
        for (std::size_t w = 0; w < pair.route.waypoints.size(); ++w) {
            const Vec2& wp = pair.route.waypoints[w];
            out << index << ',' << p.tick << ',' << time_of(p.tick) << ',' << pair.agent << ',' << pair.target << ','
                << (pair.core ? 1 : 0) << ',' << num(pair.cost, 3) << ',' << w << ',' << num(wp.x(), 3) << ','
                << num(wp.y(), 3) << '\n';
        }
}

}  // namespace

const std::vector<std::string>& run_output_files() {
    static const std::vector<std::string> files = {"run_log.json", "truth.csv",   "measurements.csv", "estimates.csv",
                                                   "plans.csv",    "metrics.csv", "overlay.svg",      "truth.svg"};
    return files;
}

void write_text_file(const std::string& dir, const std::string& name, const std::string& content) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + dir + "': " + ec.message());
    const fs::path path = fs::path(dir) / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    out << content;
    out.close();
    if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

std::string truth_csv(const MissionLog& log) {
    std::ostringstream out;
    out << "tick,time_s,entity,id,alive,x_m,y_m,vx_mps,vy_mps,heading_rad\n";
    for (const auto& t : log.truth) {
        for (std::size_t i = 0; i < t.agents.size(); ++i) {
            const AgentState& a = t.agents[i];
            const Vec2 v = agent_velocity(a);
            out << t.tick << ',' << time_of(t.tick) << ",agent," << i << ',' << int(t.agent_alive[i]) << ','
                << num(a.pos_x, 3) << ',' << num(a.pos_y, 3) << ',' << num(v.x(), 4) << ',' << num(v.y(), 4) << ','
                << num(a.psi, 6) << '\n';
        }
        for (std::size_t j = 0; j < t.targets.size(); ++j) {
            const TargetState& g = t.targets[j];
            const double heading = g.vel_x == 0.0 && g.vel_y == 0.0 ? 0.0 : -std::atan2(g.vel_y, g.vel_x);
            out << t.tick << ',' << time_of(t.tick) << ",target," << j << ",1," << num(g.pos_x, 3) << ','
                << num(g.pos_y, 3) << ',' << num(g.vel_x, 4) << ',' << num(g.vel_y, 4) << ',' << num(heading, 6)
                << '\n';
        }
    }
    return out.str();
}

std::string measurements_csv(const MissionLog& log) {
    std::ostringstream out;
    out << "step,time_s,index,x_m,y_m,origin,origin_id\n";
    for (const auto& s : log.scans)
        for (std::size_t k = 0; k < s.scan.points.size(); ++k) {
            const auto& p = s.scan.points[k];
            const auto& tag = s.scan.truth_tags[k];
            out << s.scan.step << ',' << time_of(s.tick) << ',' << k << ',' << num(p.x(), 3) << ',' << num(p.y(), 3)
                << ',' << origin_name(tag.kind) << ',' << tag.id << '\n';
        }
    return out.str();
}

std::string estimates_csv(const std::vector<EstimateRecord>& agents, const std::vector<EstimateRecord>& targets) {
    std::ostringstream out;
    out << "step,time_s,filter,label_birth_step,label_index,x_m,y_m,vx_mps,vy_mps\n";
    auto rows = [&out](const std::vector<EstimateRecord>& recs, const char* filter) {
        for (const auto& r : recs)
            for (const auto& e : r.estimates.estimates)
                out << r.step << ',' << num(static_cast<double>(r.step), 2) << ',' << filter << ','
                    << e.label.birth_step << ',' << e.label.birth_index << ',' << num(e.state(0), 3) << ','
                    << num(e.state(1), 3) << ',' << num(e.state(2), 4) << ',' << num(e.state(3), 4) << '\n';
    };
    rows(agents, "agent");
    rows(targets, "target");
    return out.str();
}

std::string plans_csv(const std::vector<PlanRecord>& plans) {
    std::ostringstream out;
    out << "plan,tick,time_s,agent,target,core,cost_m,waypoint,x_m,y_m\n";
    for (std::size_t i = 0; i < plans.size(); ++i) plan_rows(out, plans[i], i);
    return out.str();
}

std::string metrics_csv(const MissionLog& log) {
    const MetricsReport m = compute_metrics(log);
    std::ostringstream out;
    out << "step,time_s,target_ospa_m,agent_ospa_m,target_estimates_count,target_truth_count,cardinality_error_count\n";
    for (const auto& r : m.rows)
        out << r.step << ',' << num(r.time, 2) << ',' << num(r.target_ospa, 6) << ',' << num(r.agent_ospa, 6) << ','
            << r.target_estimates << ',' << r.target_truth << ',' << r.cardinality_error << '\n';
    return out.str();
}

std::string overlay_svg(const MissionLog& log) {
    Canvas cv(log.scenario.area_origin, log.scenario.area_extent);
    for (const auto& s : log.scans)
        for (std::size_t k = 0; k < s.scan.points.size(); ++k)
            if (s.scan.truth_tags[k].kind == OriginKind::Clutter)
                cv.triangle(s.scan.points[k], 3.0, "clutter", "fill=\"#808080\" fill-opacity=\"0.35\"");
    for (const auto& r : log.agent_estimates)
        for (const auto& e : r.estimates.estimates)
            cv.circle(e.position(), 3.5, "agent-estimate", "fill=\"none\" stroke=\"#1f4fbf\" stroke-width=\"1\"");
    for (const auto& r : log.target_estimates)
        for (const auto& e : r.estimates.estimates)
            cv.circle(e.position(), 3.5, "target-estimate", "fill=\"none\" stroke=\"black\" stroke-width=\"1\"");
    return cv.finish();
}

std::string truth_svg(const MissionLog& log) {
    Canvas cv(log.scenario.area_origin, log.scenario.area_extent);
    cv.obstacles(log.grid);
    if (log.truth.empty()) return cv.finish();
    const std::size_t na = log.truth.front().agents.size();
    const std::size_t nt = log.truth.front().targets.size();
    for (std::size_t i = 0; i < na; ++i) {
        std::vector<Vec2> pts;
        for (const auto& t : log.truth) pts.push_back(t.agents[i].position());
        cv.polyline(pts, "agent-trajectory", "#1f4fbf");
        cv.text(pts.front(), "A" + std::to_string(i));
    }
    for (std::size_t j = 0; j < nt; ++j) {
        std::vector<Vec2> pts;
        for (const auto& t : log.truth) pts.push_back(t.targets[j].position());
        cv.polyline(pts, "target-trajectory", "#2a9d3a");
        cv.text(pts.front(), "T" + std::to_string(j));
    }
    const auto& first = log.truth.front();
    const auto& last = log.truth.back();
    const std::string ring = "fill=\"none\" stroke=\"red\" stroke-width=\"2\"";
    for (std::size_t i = 0; i < na; ++i) {
        cv.circle(first.agents[i].position(), 6.0, "initial", ring);
        cv.cross(last.agents[i].position(), 6.0, "final", "red");
    }
    for (std::size_t j = 0; j < nt; ++j) {
        cv.circle(first.targets[j].position(), 6.0, "initial", ring);
        cv.cross(last.targets[j].position(), 6.0, "final", "red");
    }
    return cv.finish();
}

std::string route_svg(const PlanOnlyResult& plan) {
    Canvas cv(plan.scenario.area_origin, plan.scenario.area_extent);
    cv.obstacles(plan.grid);
    for (const auto& pair : plan.plan.plan.pairs) cv.polyline(pair.route.waypoints, "route", pair.core ? "#1f4fbf" : "#7f9fdf");
    for (std::size_t i = 0; i < plan.scenario.agents.size(); ++i) {
        cv.circle(plan.scenario.agents[i].position, 6.0, "agent", "fill=\"none\" stroke=\"red\" stroke-width=\"2\"");
        cv.text(plan.scenario.agents[i].position, "A" + std::to_string(i));
    }
    for (std::size_t j = 0; j < plan.scenario.targets.size(); ++j) {
        cv.cross(plan.scenario.targets[j].position, 6.0, "target", "red");
        cv.text(plan.scenario.targets[j].position, "T" + std::to_string(j));
    }
    return cv.finish();
}

void emit_outputs(const MissionLog& log, const std::string& dir) {
    write_text_file(dir, "run_log.json", write_log(log));
    write_text_file(dir, "truth.csv", truth_csv(log));
    write_text_file(dir, "measurements.csv", measurements_csv(log));
    write_text_file(dir, "estimates.csv", estimates_csv(log.agent_estimates, log.target_estimates));
    write_text_file(dir, "plans.csv", plans_csv(log.plans));
    write_text_file(dir, "metrics.csv", metrics_csv(log));
    write_text_file(dir, "overlay.svg", overlay_svg(log));
    write_text_file(dir, "truth.svg", truth_svg(log));
}

void emit_plan(const PlanOnlyResult& plan, const std::string& dir) {
    using nlohmann::json;
    const PlanRecord& p = plan.plan;
    json pairs = json::array();
    for (const auto& pr : p.plan.pairs) {
        json cells = json::array(), wps = json::array();
        for (const Cell& c : pr.path.cells) cells.push_back({c.row, c.col});
        for (const Vec2& w : pr.route.waypoints) wps.push_back({w.x(), w.y()});
        pairs.push_back({{"agent", pr.agent}, {"target", pr.target}, {"cost", pr.cost}, {"core", pr.core},
                         {"cells", cells}, {"waypoints", wps}});
    }
    json costs = json::array();
    for (Eigen::Index r = 0; r < p.plan.costs.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < p.plan.costs.cols(); ++c) row.push_back(p.plan.costs(r, c));
        costs.push_back(row);
    }
    json obstacles = json::array();
    for (int r = 0; r < plan.grid.rows; ++r)
        for (int c = 0; c < plan.grid.cols; ++c)
            if (plan.grid.blocked({r, c})) obstacles.push_back({r, c});
    json j{{"schema_version", kLogSchemaVersion},
           {"scenario", plan.scenario.name},
           {"seed", plan.scenario.seed},
           {"grid", {{"rows", plan.grid.rows}, {"cols", plan.grid.cols}, {"obstacles", obstacles}}},
           {"costs", costs},
           {"dropped_targets", p.plan.dropped_targets},
           {"pairs", pairs}};
    write_text_file(dir, "plan.json", j.dump(1) + "\n");
    std::ostringstream csv;
    csv << "plan,tick,time_s,agent,target,core,cost_m,waypoint,x_m,y_m\n";
    plan_rows(csv, p, 0);
    write_text_file(dir, "plan.csv", csv.str());
    write_text_file(dir, "route.svg", route_svg(plan));
}

void emit_replay(const ReplayResult& replay, const MissionLog&, const std::string& dir) {
    write_text_file(dir, "estimates.csv", estimates_csv(replay.agent_estimates, replay.target_estimates));
}

void emit_metrics(const MissionLog& log, const std::string& dir) { write_text_file(dir, "metrics.csv", metrics_csv(log)); }

}  // namespace uas
