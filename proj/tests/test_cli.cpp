#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("uas_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// Runs the CLI with `args` from inside `cwd`.
Result uas(const std::string& args, const fs::path& cwd) {
    const fs::path out = cwd / ".stdout", err = cwd / ".stderr";
    const std::string cmd = "cd '" + cwd.string() + "' && UAS_WORKERS=2 '" UAS_CLI "' " + args + " >'" + out.string() +
                            "' 2>'" + err.string() + "'";
    const int raw = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    fs::remove(out);
    fs::remove(err);
    return r;
}

std::string scenario(const std::string& name) { return std::string("'") + UAS_SCENARIOS + "/" + name + "'"; }

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Cli, RunTrivialSucceeds) {
    const fs::path d = fresh("run");
    const Result r = uas("run --scenario " + scenario("trivial.json") + " --out out", d);
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("status: completed"), std::string::npos);
    EXPECT_NE(r.out.find("replans:"), std::string::npos);
    EXPECT_NE(r.out.find("final OSPA:"), std::string::npos);
    EXPECT_TRUE(fs::exists(d / "out" / "run_log.json"));
    std::set<std::string> top;
    for (const auto& e : fs::directory_iterator(d)) top.insert(e.path().filename().string());
    EXPECT_EQ(top, std::set<std::string>{"out"});
}

TEST(Cli, QuietSuppressesSummary) {
    const fs::path d = fresh("quiet");
    const Result r = uas("run --quiet --scenario " + scenario("trivial.json") + " --out out", d);
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
}

TEST(Cli, UnreachableTargetIsIncomplete) {
    const fs::path d = fresh("unreachable");
    const Result r = uas("run --scenario " + scenario("unreachable.json") + " --out out", d);
    EXPECT_EQ(r.code, 4);
    EXPECT_NE(r.out.find("planning_failed"), std::string::npos);
    EXPECT_EQ(uas("plan-only --scenario " + scenario("unreachable.json") + " --out p", d).code, 4);
}

TEST(Cli, BadScenarioNamesTheField) {
    const fs::path d = fresh("bad");
    std::ofstream(d / "bad.json") << R"({"schema_version": 1, "agents": [{"position": [-5, 10]}],
        "targets": [{"position": [900, 900]}]})";
    const Result r = uas("run --scenario bad.json --out out", d);
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("agents[0].position"), std::string::npos) << r.err;
}

TEST(Cli, MissingFileIsIo) {
    const fs::path d = fresh("missing");
    EXPECT_EQ(uas("run --scenario nope.json --out out", d).code, 5);
    EXPECT_EQ(uas("metrics --log nope.json --out out", d).code, 5);
}

TEST(Cli, UsageErrors) {
    const fs::path d = fresh("usage");
    EXPECT_EQ(uas("", d).code, 2);
    EXPECT_EQ(uas("fly --scenario x", d).code, 2);
    EXPECT_EQ(uas("run", d).code, 2);
    EXPECT_EQ(uas("run --scenario a.json --bogus", d).code, 2);
    EXPECT_EQ(uas("sweep --scenario " + scenario("trivial.json") + " --seeds 0", d).code, 2);
    EXPECT_EQ(uas("--help", d).code, 0);
}

TEST(Cli, PlanOnlyObstacleDense) {
    const fs::path d = fresh("dense");
    const Result r = uas("plan-only --scenario " + scenario("obstacle_dense.json") + " --out p", d);
    ASSERT_EQ(r.code, 0) << r.err;
    const json plan = json::parse(slurp(d / "p" / "plan.json"));
    ASSERT_EQ(plan["pairs"].size(), 1u);
    std::set<std::pair<int, int>> blocked;
    for (const auto& c : plan["grid"]["obstacles"]) blocked.insert({c[0].get<int>(), c[1].get<int>()});
    EXPECT_GT(blocked.size(), 300u);
    for (const auto& c : plan["pairs"][0]["cells"]) EXPECT_FALSE(blocked.count({c[0].get<int>(), c[1].get<int>()}));
    EXPECT_TRUE(fs::exists(d / "p" / "route.svg"));
    EXPECT_TRUE(fs::exists(d / "p" / "plan.csv"));
}

TEST(Cli, PlanOnlyFourPairs) {
    const fs::path d = fresh("pairs");
    ASSERT_EQ(uas("plan-only --scenario " + scenario("four_pairs.json") + " --out p", d).code, 0);
    const json plan = json::parse(slurp(d / "p" / "plan.json"));
    ASSERT_EQ(plan["pairs"].size(), 4u);
    std::set<int> targets, agents;
    for (const auto& p : plan["pairs"]) {
        targets.insert(p["target"].get<int>());
        agents.insert(p["agent"].get<int>());
    }
    EXPECT_EQ(targets.size(), 4u);
    EXPECT_EQ(agents.size(), 4u);
}

TEST(Cli, PlanOnlyEmptyMapIsMinimal) {
    const fs::path d = fresh("empty");
    ASSERT_EQ(uas("plan-only --scenario " + scenario("trivial.json") + " --out p", d).code, 0);
    const json plan = json::parse(slurp(d / "p" / "plan.json"));
    const auto& cells = plan["pairs"][0]["cells"];
    const auto& a = cells.front();
    const auto& b = cells.back();
    const int chebyshev = std::max(std::abs(a[0].get<int>() - b[0].get<int>()), std::abs(a[1].get<int>() - b[1].get<int>()));
    EXPECT_EQ(static_cast<int>(cells.size()) - 1, chebyshev);
}

TEST(Cli, TrackOnlyAndMetricsFromLog) {
    const fs::path d = fresh("replay");
    ASSERT_EQ(uas("run --quiet --scenario " + scenario("horizontal_motion.json") + " --out run", d).code, 0);
    const Result t = uas("track-only --log run/run_log.json --out replay", d);
    EXPECT_EQ(t.code, 0) << t.err;
    EXPECT_TRUE(fs::exists(d / "replay" / "estimates.csv"));
    EXPECT_EQ(slurp(d / "replay" / "estimates.csv"), slurp(d / "run" / "estimates.csv"));
    const Result m = uas("metrics --log run/run_log.json --out metrics", d);
    EXPECT_EQ(m.code, 0);
    EXPECT_EQ(slurp(d / "metrics" / "metrics.csv"), slurp(d / "run" / "metrics.csv"));
}

TEST(Cli, SeedOverride) {
    const fs::path d = fresh("seed");
    ASSERT_EQ(uas("run --quiet --seed 9 --scenario " + scenario("trivial.json") + " --out out", d).code, 0);
    EXPECT_EQ(json::parse(slurp(d / "out" / "run_log.json"))["scenario"]["seed"].get<int>(), 9);
}

TEST(Cli, SweepTrivial) {
    const fs::path d = fresh("sweep");
    const Result r = uas("sweep --scenario " + scenario("trivial.json") + " --seeds 10 --out a", d);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(slurp(d / "a" / "sweep.csv")), 11u);
    const std::string summary = slurp(d / "a" / "sweep_summary.csv");
    EXPECT_NE(summary.find("\n10,10,1"), std::string::npos) << summary;
    ASSERT_EQ(uas("sweep --quiet --scenario " + scenario("trivial.json") + " --seeds 10 --out b", d).code, 0);
    EXPECT_EQ(slurp(d / "b" / "sweep_summary.csv"), summary);
    EXPECT_EQ(slurp(d / "b" / "sweep.csv"), slurp(d / "a" / "sweep.csv"));
}
