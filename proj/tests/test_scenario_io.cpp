#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "uas/error.hpp"
#include "uas/metrics.hpp"
#include "uas/mission.hpp"
#include "uas/mission_log.hpp"
#include "uas/outputs.hpp"
#include "uas/rng.hpp"

using namespace uas;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "schema_version": 1,
  "agents": [{"position": [100, 100]}],
  "targets": [{"position": [900, 900]}]
})";

std::string with(const std::string& key_value) {
    return std::string(R"({"schema_version": 1, "agents": [{"position": [100, 100]}],
        "targets": [{"position": [900, 900]}], )") +
           key_value + "}";
}

std::string validation_field(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const ValidationError& e) {
        return e.field();
    }
    return "<accepted>";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("uas_test_" + name);
    fs::remove_all(p);
    return p;
}

Scenario cluttered() {
    Scenario s = parse_scenario(R"({
      "schema_version": 1, "name": "cluttered", "seed": 12,
      "obstacles": {"mode": "random", "threshold": 0.2},
      "agents": [{"position": [100, 300]}, {"position": [100, 1700]}],
      "targets": [{"position": [1700, 500], "velocity": [-5, 0]}, {"position": [1700, 1500]}],
      "sensor": {"p_detect": 0.95, "clutter_rate": 4, "noise_sigma": [5, 5]},
      "time_limit": 40})");
    return s;
}

}  // namespace

TEST(Scenario, MinimalFileGetsDefaults) {
    const Scenario s = parse_scenario(kMinimal);
    EXPECT_EQ(s.grid_rows, 40);
    EXPECT_EQ(s.area_extent, Vec2(2000, 2000));
    EXPECT_EQ(s.capture_radius, 50.0);
    EXPECT_EQ(s.replan_threshold, 50.0);
    EXPECT_EQ(s.time_limit, 600.0);
    EXPECT_EQ(s.agents[0].u_fwd, 20.0);
    EXPECT_EQ(s.ospa.cutoff, 100.0);
    EXPECT_EQ(s.ospa.order, 1.0);
    EXPECT_EQ(s.sensor.p_detect, 0.98);
    EXPECT_EQ(s.target_filter.p_survival, 0.99);
    EXPECT_EQ(s.obstacles.mode, ObstacleSpec::Mode::None);
}

TEST(Scenario, ValidationNamesTheField) {
    EXPECT_EQ(validation_field(R"({"schema_version": 1, "agents": [{"position": [100, 100]}, {"position": [2500, 10]}],
        "targets": [{"position": [900, 900]}]})"),
              "agents[1].position");
    EXPECT_EQ(validation_field(with(R"("obstacles": {"mode": "random", "threshold": 1.5})")), "obstacles.threshold");
    EXPECT_EQ(validation_field(with(R"("sensor": {"p_detect": 1.2})")), "sensor.p_detect");
    EXPECT_EQ(validation_field(with(R"("colour": "red")")), "colour");
    EXPECT_EQ(validation_field(with(R"("capture_radius": 0)")), "capture_radius");
    EXPECT_EQ(validation_field(with(R"("grid": {"rows": 1, "cols": 4})")), "grid.rows");
    EXPECT_EQ(validation_field(R"({"agents": [{"position": [1, 1]}], "targets": [{"position": [2, 2]}]})"),
              "schema_version");
    EXPECT_EQ(validation_field("{not json"), "<root>");
}

TEST(Scenario, VersionMismatchIsExplicit) {
    try {
        parse_scenario(R"({"schema_version": 7, "agents": [{"position": [1, 1]}], "targets": [{"position": [2, 2]}]})");
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.field(), "schema_version");
        EXPECT_NE(std::string(e.what()).find("7"), std::string::npos);
    }
}

TEST(Scenario, MissingFileIsIo) {
    try {
        load_scenario("/nonexistent/scenario.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Io);
    }
}

TEST(Scenario, RoundTrip) {
    for (const std::string& text : {std::string(kMinimal), write_scenario(cluttered())}) {
        const Scenario a = parse_scenario(text);
        const std::string once = write_scenario(a);
        const Scenario b = parse_scenario(once);
        EXPECT_EQ(write_scenario(b), once);
        EXPECT_EQ(b.seed, a.seed);
        EXPECT_EQ(b.targets[0].velocity, a.targets[0].velocity);
        EXPECT_EQ(b.target_filter.clutter_rate, a.target_filter.clutter_rate);
    }
}

TEST(Scenario, FilterConfigFollowsSpec) {
    const Scenario s = cluttered();
    const FilterConfig t = make_filter_config(s, FilterRole::Targets);
    ASSERT_EQ(t.birth.size(), 2u);
    EXPECT_EQ(t.birth[0].mean.head<2>(), Vec2(1700, 500));
    EXPECT_EQ(t.dt, 1.0);
    EXPECT_EQ(t.clutter_extent, s.area_extent);
    const FilterConfig a = make_filter_config(s, FilterRole::Agents);
    EXPECT_EQ(a.birth[1].mean.head<2>(), Vec2(100, 1700));
}

TEST(Ospa, Examples) {
    const std::vector<Vec2> x{{0, 0}, {10, 10}};
    EXPECT_EQ(ospa(x, x, 100, 1), 0.0);
    EXPECT_EQ(ospa({}, x, 100, 1), 100.0);
    EXPECT_EQ(ospa({}, {}, 100, 1), 0.0);
    EXPECT_DOUBLE_EQ(ospa(std::vector<Vec2>{{0, 0}}, std::vector<Vec2>{{3, 4}}, 10, 1), 5.0);
    EXPECT_DOUBLE_EQ(ospa(std::vector<Vec2>{{0, 0}}, std::vector<Vec2>{{300, 400}}, 10, 1), 10.0);
    // One matched pair at 5 m and one unmatched point: (5 + 10) / 2.
    EXPECT_DOUBLE_EQ(ospa(std::vector<Vec2>{{0, 0}}, std::vector<Vec2>{{3, 4}, {50, 50}}, 10, 1), 7.5);
    EXPECT_THROW(ospa(x, x, 0, 1), Error);
    EXPECT_THROW(ospa(x, x, 10, 0.5), Error);
}

TEST(Ospa, SymmetryBoundsAndTriangle) {
    Rng rng(6);
    auto random_set = [&] {
        std::vector<Vec2> s(rng.index(5));
        for (auto& p : s) p = Vec2(rng.uniform(0, 300), rng.uniform(0, 300));
        return s;
    };
    for (int trial = 0; trial < 300; ++trial) {
        const auto a = random_set(), b = random_set(), c = random_set();
        for (double p : {1.0, 2.0}) {
            const double ab = ospa(a, b, 100, p), ba = ospa(b, a, 100, p);
            EXPECT_NEAR(ab, ba, 1e-12);
            EXPECT_GE(ab, 0.0);
            EXPECT_LE(ab, 100.0);
            EXPECT_LE(ab, ospa(a, c, 100, p) + ospa(c, b, 100, p) + 1e-9);
        }
    }
}

TEST(MissionLog, RoundTripIsExact) {
    const MissionLog log = run_mission(cluttered());
    const std::string text = write_log(log);
    const MissionLog back = parse_log(text);
    EXPECT_EQ(write_log(back), text);
    EXPECT_EQ(back.scans.size(), log.scans.size());
    EXPECT_EQ(back.scans[3].scan.points, log.scans[3].scan.points);
    EXPECT_EQ(back.gain, log.gain);
    EXPECT_THROW(parse_log("[]"), ValidationError);
}

TEST(Metrics, ReportIsConsistent) {
    const MissionLog log = run_mission(cluttered());
    const MetricsReport m = compute_metrics(log);
    ASSERT_EQ(m.rows.size(), log.scans.size());
    for (std::size_t k = 0; k < m.rows.size(); ++k) {
        const auto& row = m.rows[k];
        EXPECT_GE(row.target_ospa, 0.0);
        EXPECT_LE(row.target_ospa, log.scenario.ospa.cutoff);
        EXPECT_EQ(row.cardinality_error, row.target_estimates - row.target_truth);
        EXPECT_EQ(row.target_truth, static_cast<int>(log.scans[k].target_truth.size()));
    }
    EXPECT_EQ(m.replans, log.counters.replans);
    double sum = 0.0;
    int n = 0;
    const long window_ticks = std::lround(log.scenario.ospa.window * 100.0);
    for (std::size_t k = 0; k < m.rows.size(); ++k)
        if (log.scans[k].tick > log.end_tick - window_ticks) {
            sum += m.rows[k].target_ospa;
            ++n;
        }
    EXPECT_NEAR(m.final_window_ospa, sum / n, 1e-12);
}

TEST(Outputs, TrivialRunFilesAndRowCounts) {
    const Scenario s = parse_scenario(R"({"schema_version": 1, "agents": [{"position": [200, 200]}],
        "targets": [{"position": [1200, 900]}], "obstacles": {"mode": "none"},
        "sensor": {"p_detect": 1.0, "clutter_rate": 0, "noise_sigma": [0, 0]}, "time_limit": 300})");
    const MissionLog log = run_mission(s);
    const fs::path dir = scratch("trivial");
    emit_outputs(log, dir.string());
    for (const auto& f : run_output_files()) EXPECT_TRUE(fs::exists(dir / f)) << f;

    std::size_t points = 0, estimates = 0;
    for (const auto& scan : log.scans) points += scan.scan.points.size();
    for (const auto& e : log.agent_estimates) estimates += e.estimates.estimates.size();
    for (const auto& e : log.target_estimates) estimates += e.estimates.estimates.size();
    EXPECT_EQ(lines(slurp(dir / "truth.csv")), 1 + 2 * log.truth.size());
    EXPECT_EQ(lines(slurp(dir / "measurements.csv")), 1 + points);
    EXPECT_EQ(lines(slurp(dir / "estimates.csv")), 1 + estimates);
    EXPECT_EQ(lines(slurp(dir / "metrics.csv")), 1 + log.scans.size());
    EXPECT_EQ(slurp(dir / "overlay.svg").find("class=\"clutter\""), std::string::npos);
    EXPECT_EQ(load_log((dir / "run_log.json").string()).end_tick, log.end_tick);
}

TEST(Outputs, ClutterGlyphsAppearWithClutter) {
    const MissionLog log = run_mission(cluttered());
    EXPECT_NE(overlay_svg(log).find("class=\"clutter\""), std::string::npos);
    const std::string truth = truth_svg(log);
    EXPECT_NE(truth.find("<svg"), std::string::npos);
}

TEST(Outputs, ReEmitIsByteIdentical) {
    const MissionLog log = run_mission(cluttered());
    const fs::path a = scratch("emit_a"), b = scratch("emit_b");
    emit_outputs(log, a.string());
    emit_outputs(parse_log(write_log(log)), b.string());
    for (const auto& f : run_output_files()) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Outputs, CsvNumbersAreFiniteAndHeadersCarryUnits) {
    const MissionLog log = run_mission(cluttered());
    for (const std::string& csv : {truth_csv(log), measurements_csv(log), metrics_csv(log),
                                   estimates_csv(log.agent_estimates, log.target_estimates), plans_csv(log.plans)}) {
        EXPECT_EQ(csv.find("nan"), std::string::npos);
        EXPECT_EQ(csv.find("inf"), std::string::npos);
        const std::string header = csv.substr(0, csv.find('\n'));
        EXPECT_TRUE(header.find("_m") != std::string::npos || header.find("_s") != std::string::npos) << header;
    }
}

TEST(Outputs, UnwritableDirectoryIsIo) {
    const MissionLog log = run_mission(cluttered());
    const fs::path blocker = scratch("blocker");
    { std::ofstream(blocker.string()) << "x"; }
    try {
        emit_outputs(log, (blocker / "sub").string());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Io);
    }
}
