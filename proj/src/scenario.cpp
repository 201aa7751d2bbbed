#include "uas/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "uas/error.hpp"

namespace uas {

using nlohmann::json;

namespace {

// Reads one JSON object, tracking which keys were consumed so that any
// leftover key can be rejected.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) throw ValidationError(field(key), "missing required field");
        return j_.at(key);
    }

    double number(const std::string& key, std::optional<double> def = std::nullopt) {
        if (!has(key)) {
            if (def) return *def;
            throw ValidationError(field(key), "missing required field");
        }
        const json& v = raw(key);
        if (!v.is_number()) throw ValidationError(field(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ValidationError(field(key), "must be finite");
        return d;
    }

    int integer(const std::string& key, std::optional<int> def = std::nullopt) {
        if (!has(key)) {
            if (def) return *def;
            throw ValidationError(field(key), "missing required field");
        }
        const json& v = raw(key);
        if (!v.is_number_integer()) throw ValidationError(field(key), "expected an integer");
        return v.get<int>();
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t def) {
        if (!has(key)) return def;
        const json& v = raw(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw ValidationError(field(key), "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

    std::string string(const std::string& key, std::optional<std::string> def = std::nullopt) {
        if (!has(key)) {
            if (def) return *def;
            throw ValidationError(field(key), "missing required field");
        }
        const json& v = raw(key);
        if (!v.is_string()) throw ValidationError(field(key), "expected a string");
        return v.get<std::string>();
    }

    template <int N>
    Eigen::Matrix<double, N, 1> vector(const std::string& key, std::optional<Eigen::Matrix<double, N, 1>> def = std::nullopt) {
        if (!has(key)) {
            if (def) return *def;
            throw ValidationError(field(key), "missing required field");
        }
        return parse_vector<N>(raw(key), field(key));
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ValidationError(field(it.key()), "unknown key");
    }

    template <int N>
    static Eigen::Matrix<double, N, 1> parse_vector(const json& v, const std::string& where) {
        if (!v.is_array() || v.size() != N)
            throw ValidationError(where, "expected an array of " + std::to_string(N) + " numbers");
        Eigen::Matrix<double, N, 1> out;
        for (int i = 0; i < N; ++i) {
            if (!v[i].is_number()) throw ValidationError(where, "expected numbers");
            out(i) = v[i].get<double>();
            if (!std::isfinite(out(i))) throw ValidationError(where, "must be finite");
        }
        return out;
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void check_probability(double p, const std::string& field, bool allow_zero = true) {
    if (!(p <= 1.0) || !(allow_zero ? p >= 0.0 : p > 0.0))
        throw ValidationError(field, allow_zero ? "must be in [0, 1]" : "must be in (0, 1]");
}

void check_positive(double v, const std::string& field) {
    if (!(v > 0.0)) throw ValidationError(field, "must be positive");
}

void check_non_negative(double v, const std::string& field) {
    if (!(v >= 0.0)) throw ValidationError(field, "must be non-negative");
}

bool inside_area(const Scenario& s, const Vec2& p) {
    const Vec2 lo = s.area_origin;
    const Vec2 hi = s.area_origin + s.area_extent;
    return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
}

// Default clutter rate: sensor clutter plus expected detections of the other
// entity class.
FilterSpec default_filter_spec(FilterRole role, const SensorModel& sensor, std::size_t other_count) {
    FilterSpec f;
    f.p_detect = std::clamp(sensor.p_detect, 1e-3, 1.0);
    f.clutter_rate = sensor.clutter_rate + sensor.p_detect * static_cast<double>(other_count);
    f.noise_sigma = sensor.noise_sigma.cwiseMax(1.0);
    if (role == FilterRole::Agents) {
        f.process_noise_psd = 25.0;
        f.birth_vel_sigma = 20.0;
    } else {
        f.process_noise_psd = 1.0;
        f.birth_vel_sigma = 10.0;
    }
    return f;
}

FilterSpec parse_filter(const json& j, const std::string& path, FilterRole role, const SensorModel& sensor,
                        std::size_t other_count) {
    FilterSpec f = default_filter_spec(role, sensor, other_count);
    ObjectReader r(j, path);
    f.p_survival = r.number("p_survival", f.p_survival);
    check_probability(f.p_survival, r.field("p_survival"), false);
    f.p_detect = r.number("p_detect", f.p_detect);
    check_probability(f.p_detect, r.field("p_detect"), false);
    f.clutter_rate = r.number("clutter_rate", f.clutter_rate);
    check_non_negative(f.clutter_rate, r.field("clutter_rate"));
    f.noise_sigma = r.vector<2>("noise_sigma", f.noise_sigma);
    if (!(f.noise_sigma.minCoeff() > 0.0)) throw ValidationError(r.field("noise_sigma"), "filter noise must be positive");
    f.process_noise_psd = r.number("process_noise_psd", f.process_noise_psd);
    check_non_negative(f.process_noise_psd, r.field("process_noise_psd"));
    f.birth_r = r.number("birth_r", f.birth_r);
    check_probability(f.birth_r, r.field("birth_r"));
    f.birth_pos_sigma = r.number("birth_pos_sigma", f.birth_pos_sigma);
    check_positive(f.birth_pos_sigma, r.field("birth_pos_sigma"));
    f.birth_vel_sigma = r.number("birth_vel_sigma", f.birth_vel_sigma);
    check_positive(f.birth_vel_sigma, r.field("birth_vel_sigma"));
    f.birth_steps = r.integer("birth_steps", f.birth_steps);
    if (f.birth_steps < 0) throw ValidationError(r.field("birth_steps"), "must be >= 0");
    f.prune_threshold = r.number("prune_threshold", f.prune_threshold);
    if (!(f.prune_threshold >= 0.0 && f.prune_threshold < 1.0))
        throw ValidationError(r.field("prune_threshold"), "must be in [0, 1)");
    f.max_hypotheses = r.integer("max_hypotheses", f.max_hypotheses);
    if (f.max_hypotheses < 1) throw ValidationError(r.field("max_hypotheses"), "must be >= 1");
    f.top_k = r.integer("top_k", f.top_k);
    if (f.top_k < 1) throw ValidationError(r.field("top_k"), "must be >= 1");
    f.gate = r.number("gate", f.gate);
    check_positive(f.gate, r.field("gate"));
    f.component_floor = r.number("component_floor", f.component_floor);
    check_probability(f.component_floor, r.field("component_floor"));
    f.merge_gate = r.number("merge_gate", f.merge_gate);
    check_non_negative(f.merge_gate, r.field("merge_gate"));
    if (r.has("birth")) {
        const json& arr = r.raw("birth");
        if (!arr.is_array()) throw ValidationError(r.field("birth"), "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string p = r.field("birth") + "[" + std::to_string(i) + "]";
            ObjectReader br(arr[i], p);
            BirthSpec b;
            b.r = br.number("r");
            check_probability(b.r, br.field("r"));
            b.mean = br.vector<4>("mean");
            b.sigma = br.vector<4>("sigma");
            if (!(b.sigma.minCoeff() > 0.0)) throw ValidationError(br.field("sigma"), "must be positive");
            br.finish();
            f.birth.push_back(b);
        }
    }
    r.finish();
    return f;
}

json vec_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json filter_json(const FilterSpec& f) {
    json j;
    j["p_survival"] = f.p_survival;
    j["p_detect"] = f.p_detect;
    j["clutter_rate"] = f.clutter_rate;
    j["noise_sigma"] = vec_json(f.noise_sigma);
    j["process_noise_psd"] = f.process_noise_psd;
    j["birth_r"] = f.birth_r;
    j["birth_pos_sigma"] = f.birth_pos_sigma;
    j["birth_vel_sigma"] = f.birth_vel_sigma;
    j["birth_steps"] = f.birth_steps;
    j["prune_threshold"] = f.prune_threshold;
    j["max_hypotheses"] = f.max_hypotheses;
    j["top_k"] = f.top_k;
    j["gate"] = f.gate;
    j["component_floor"] = f.component_floor;
    j["merge_gate"] = f.merge_gate;
    if (!f.birth.empty()) {
        json arr = json::array();
        for (const auto& b : f.birth) arr.push_back({{"r", b.r}, {"mean", vec_json(b.mean)}, {"sigma", vec_json(b.sigma)}});
        j["birth"] = arr;
    }
    return j;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError("<root>", std::string("malformed JSON: ") + e.what());
    }
    ObjectReader r(root, "");
    Scenario s;

    s.schema_version = r.integer("schema_version");
    if (s.schema_version != kScenarioSchemaVersion)
        throw ValidationError("schema_version", "unsupported version " + std::to_string(s.schema_version) +
                                                    " (expected " + std::to_string(kScenarioSchemaVersion) + ")");
    s.name = r.string("name", std::string{});
    s.seed = r.unsigned_integer("seed", s.seed);

    if (r.has("area")) {
        ObjectReader a(r.raw("area"), "area");
        s.area_origin = a.vector<2>("origin", s.area_origin);
        s.area_extent = a.vector<2>("extent", s.area_extent);
        if (!(s.area_extent.minCoeff() > 0.0)) throw ValidationError("area.extent", "must be positive");
        a.finish();
    }
    if (r.has("grid")) {
        ObjectReader g(r.raw("grid"), "grid");
        s.grid_rows = g.integer("rows", s.grid_rows);
        s.grid_cols = g.integer("cols", s.grid_cols);
        g.finish();
    }
    if (s.grid_rows < 2) throw ValidationError("grid.rows", "must be >= 2");
    if (s.grid_cols < 2) throw ValidationError("grid.cols", "must be >= 2");

    if (r.has("obstacles")) {
        ObjectReader o(r.raw("obstacles"), "obstacles");
        const std::string mode = o.string("mode");
        if (mode == "none") {
            s.obstacles.mode = ObstacleSpec::Mode::None;
        } else if (mode == "random") {
            s.obstacles.mode = ObstacleSpec::Mode::Random;
            s.obstacles.threshold = o.number("threshold");
            if (!(s.obstacles.threshold >= 0.0 && s.obstacles.threshold < 1.0))
                throw ValidationError("obstacles.threshold", "must be in [0, 1)");
        } else if (mode == "explicit") {
            s.obstacles.mode = ObstacleSpec::Mode::Explicit;
            const json& cells = o.raw("cells");
            if (!cells.is_array()) throw ValidationError("obstacles.cells", "expected an array");
            for (std::size_t i = 0; i < cells.size(); ++i) {
                const std::string p = "obstacles.cells[" + std::to_string(i) + "]";
                const json& c = cells[i];
                if (!c.is_array() || c.size() != 2 || !c[0].is_number_integer() || !c[1].is_number_integer())
                    throw ValidationError(p, "expected [row, col]");
                const Cell cell{c[0].get<int>(), c[1].get<int>()};
                if (cell.row < 0 || cell.row >= s.grid_rows || cell.col < 0 || cell.col >= s.grid_cols)
                    throw ValidationError(p, "cell outside grid");
                s.obstacles.cells.push_back(cell);
            }
        } else {
            throw ValidationError("obstacles.mode", "expected none, random or explicit");
        }
        o.finish();
    }

    {
        const json& arr = r.raw("agents");
        if (!arr.is_array() || arr.empty()) throw ValidationError("agents", "expected a non-empty array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string p = "agents[" + std::to_string(i) + "]";
            ObjectReader a(arr[i], p);
            AgentSpec ag;
            ag.position = a.vector<2>("position");
            ag.heading = a.number("heading", 0.0);
            ag.u_fwd = a.number("u_fwd", ag.u_fwd);
            check_positive(ag.u_fwd, a.field("u_fwd"));
            if (a.has("death_time")) {
                ag.death_time = a.number("death_time");
                check_non_negative(*ag.death_time, a.field("death_time"));
            }
            a.finish();
            if (!inside_area(s, ag.position)) throw ValidationError(p + ".position", "agent " + std::to_string(i) + " is outside the mission area");
            s.agents.push_back(ag);
        }
    }
    {
        const json& arr = r.raw("targets");
        if (!arr.is_array() || arr.empty()) throw ValidationError("targets", "expected a non-empty array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string p = "targets[" + std::to_string(i) + "]";
            ObjectReader t(arr[i], p);
            TargetSpec tg;
            tg.position = t.vector<2>("position");
            tg.velocity = t.vector<2>("velocity", Vec2::Zero().eval());
            if (t.has("script")) {
                const json& sc = t.raw("script");
                if (!sc.is_array()) throw ValidationError(p + ".script", "expected an array");
                double last = -1.0;
                for (std::size_t k = 0; k < sc.size(); ++k) {
                    const std::string sp = p + ".script[" + std::to_string(k) + "]";
                    ObjectReader e(sc[k], sp);
                    VelocityEvent ev;
                    ev.time = e.number("time");
                    check_non_negative(ev.time, e.field("time"));
                    if (ev.time <= last) throw ValidationError(e.field("time"), "script times must increase");
                    last = ev.time;
                    ev.velocity = e.vector<2>("velocity");
                    e.finish();
                    tg.script.push_back(ev);
                }
            }
            t.finish();
            if (!inside_area(s, tg.position)) throw ValidationError(p + ".position", "target " + std::to_string(i) + " is outside the mission area");
            s.targets.push_back(tg);
        }
    }

    if (r.has("sensor")) {
        ObjectReader se(r.raw("sensor"), "sensor");
        s.sensor.p_detect = se.number("p_detect", s.sensor.p_detect);
        check_probability(s.sensor.p_detect, "sensor.p_detect");
        s.sensor.clutter_rate = se.number("clutter_rate", s.sensor.clutter_rate);
        check_non_negative(s.sensor.clutter_rate, "sensor.clutter_rate");
        s.sensor.noise_sigma = se.vector<2>("noise_sigma", s.sensor.noise_sigma);
        if (!(s.sensor.noise_sigma.minCoeff() >= 0.0)) throw ValidationError("sensor.noise_sigma", "must be non-negative");
        se.finish();
    }

    // Filter defaults follow the sensor unless overridden.
    const json empty = json::object();
    s.agent_filter = parse_filter(r.has("agent_filter") ? r.raw("agent_filter") : empty, "agent_filter",
                                  FilterRole::Agents, s.sensor, s.targets.size());
    s.target_filter = parse_filter(r.has("target_filter") ? r.raw("target_filter") : empty, "target_filter",
                                   FilterRole::Targets, s.sensor, s.agents.size());

    s.capture_radius = r.number("capture_radius", s.capture_radius);
    check_positive(s.capture_radius, "capture_radius");
    s.replan_threshold = r.number("replan_threshold", s.replan_threshold);
    check_positive(s.replan_threshold, "replan_threshold");
    s.association_gate = r.number("association_gate", s.association_gate);
    check_positive(s.association_gate, "association_gate");
    s.time_limit = r.number("time_limit", s.time_limit);
    check_positive(s.time_limit, "time_limit");
    s.truth_decimation = r.integer("truth_decimation", s.truth_decimation);
    if (s.truth_decimation < 1 || 100 % s.truth_decimation != 0)
        throw ValidationError("truth_decimation", "must be a positive divisor of 100");
    if (r.has("ospa")) {
        ObjectReader o(r.raw("ospa"), "ospa");
        s.ospa.cutoff = o.number("cutoff", s.ospa.cutoff);
        check_positive(s.ospa.cutoff, "ospa.cutoff");
        s.ospa.order = o.number("order", s.ospa.order);
        if (!(s.ospa.order >= 1.0)) throw ValidationError("ospa.order", "must be >= 1");
        s.ospa.window = o.number("window", s.ospa.window);
        check_positive(s.ospa.window, "ospa.window");
        o.finish();
    }
    r.finish();
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read scenario file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string write_scenario(const Scenario& s) {
    json j;
    j["schema_version"] = s.schema_version;
    j["name"] = s.name;
    j["seed"] = s.seed;
    j["area"] = {{"origin", vec_json(s.area_origin)}, {"extent", vec_json(s.area_extent)}};
    j["grid"] = {{"rows", s.grid_rows}, {"cols", s.grid_cols}};
    json obs;
    switch (s.obstacles.mode) {
        case ObstacleSpec::Mode::None: obs["mode"] = "none"; break;
        case ObstacleSpec::Mode::Random:
            obs["mode"] = "random";
            obs["threshold"] = s.obstacles.threshold;
            break;
        case ObstacleSpec::Mode::Explicit: {
            obs["mode"] = "explicit";
            json cells = json::array();
            for (const Cell& c : s.obstacles.cells) cells.push_back({c.row, c.col});
            obs["cells"] = cells;
            break;
        }
    }
    j["obstacles"] = obs;
    json agents = json::array();
    for (const auto& a : s.agents) {
        json ja{{"position", vec_json(a.position)}, {"heading", a.heading}, {"u_fwd", a.u_fwd}};
        if (a.death_time) ja["death_time"] = *a.death_time;
        agents.push_back(ja);
    }
    j["agents"] = agents;
    json targets = json::array();
    for (const auto& t : s.targets) {
        json jt{{"position", vec_json(t.position)}, {"velocity", vec_json(t.velocity)}};
        if (!t.script.empty()) {
            json sc = json::array();
            for (const auto& e : t.script) sc.push_back({{"time", e.time}, {"velocity", vec_json(e.velocity)}});
            jt["script"] = sc;
        }
        targets.push_back(jt);
    }
    j["targets"] = targets;
    j["sensor"] = {{"p_detect", s.sensor.p_detect},
                   {"clutter_rate", s.sensor.clutter_rate},
                   {"noise_sigma", vec_json(s.sensor.noise_sigma)}};
    j["agent_filter"] = filter_json(s.agent_filter);
    j["target_filter"] = filter_json(s.target_filter);
    j["capture_radius"] = s.capture_radius;
    j["replan_threshold"] = s.replan_threshold;
    j["association_gate"] = s.association_gate;
    j["time_limit"] = s.time_limit;
    j["truth_decimation"] = s.truth_decimation;
    j["ospa"] = {{"cutoff", s.ospa.cutoff}, {"order", s.ospa.order}, {"window", s.ospa.window}};
    return j.dump(2) + "\n";
}

FilterConfig make_filter_config(const Scenario& s, FilterRole role) {
    const FilterSpec& f = role == FilterRole::Agents ? s.agent_filter : s.target_filter;
    FilterConfig c;
    c.p_survival = f.p_survival;
    c.p_detect = f.p_detect;
    c.clutter_rate = f.clutter_rate;
    c.clutter_origin = s.area_origin;
    c.clutter_extent = s.area_extent;
    c.birth_steps = f.birth_steps;
    c.prune_threshold = f.prune_threshold;
    c.max_hypotheses = static_cast<std::size_t>(f.max_hypotheses);
    c.top_k = static_cast<std::size_t>(f.top_k);
    c.measurement_noise = f.noise_sigma.cwiseProduct(f.noise_sigma).asDiagonal();
    c.dt = 1.0;
    c.process_noise = cv_process_noise(f.process_noise_psd, c.dt);
    c.gate = f.gate;
    c.component_floor = f.component_floor;
    c.merge_gate = f.merge_gate;

    auto add_birth = [&c](double r, const Vec4& mean, const Vec4& sigma) {
        BirthComponent b;
        b.r = r;
        b.mean = mean;
        b.cov = sigma.cwiseProduct(sigma).asDiagonal();
        c.birth.push_back(b);
    };
    if (!f.birth.empty()) {
        for (const auto& b : f.birth) add_birth(b.r, b.mean, b.sigma);
    } else {
        const Vec4 sigma(f.birth_pos_sigma, f.birth_pos_sigma, f.birth_vel_sigma, f.birth_vel_sigma);
        if (role == FilterRole::Agents)
            for (const auto& a : s.agents) add_birth(f.birth_r, Vec4(a.position.x(), a.position.y(), 0.0, 0.0), sigma);
        else
            for (const auto& t : s.targets) add_birth(f.birth_r, Vec4(t.position.x(), t.position.y(), 0.0, 0.0), sigma);
    }
    return c;
}

}  // namespace uas
