#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "uas/error.hpp"
#include "uas/planner.hpp"
#include "uas/rng.hpp"

using namespace uas;

namespace {

GridMap random_grid(std::uint64_t seed, int n = 20, double threshold = 0.25) {
    Rng rng(seed);
    const std::vector<Cell> keep{{0, 0}, {n - 1, n - 1}};
    return generate_obstacles(make_grid(n, n, {0, 0}, {n * 10.0, n * 10.0}), threshold, rng, keep);
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no exception";
    return ErrorKind::Contract;
}

}  // namespace

TEST(Grid, RejectsDegenerateShapes) {
    EXPECT_EQ(kind_of([] { make_grid(1, 5, {0, 0}, {10, 10}); }), ErrorKind::Validation);
    EXPECT_EQ(kind_of([] { make_grid(5, 5, {0, 0}, {0, 10}); }), ErrorKind::Validation);
}

TEST(Obstacles, ZeroThresholdIsEmpty) {
    Rng rng(3);
    EXPECT_EQ(generate_obstacles(make_grid(40, 40, {0, 0}, {100, 100}), 0.0, rng).obstacle_count(), 0u);
}

TEST(Obstacles, FractionConcentrates) {
    Rng rng(2024);
    const GridMap g = generate_obstacles(make_grid(40, 40, {0, 0}, {2000, 2000}), 0.25, rng);
    const double frac = static_cast<double>(g.obstacle_count()) / 1600.0;
    EXPECT_GE(frac, 0.20);
    EXPECT_LE(frac, 0.30);
}

TEST(Obstacles, SameSeedSameMask) {
    EXPECT_EQ(random_grid(77, 40).obstacle, random_grid(77, 40).obstacle);
    EXPECT_NE(random_grid(77, 40).obstacle, random_grid(78, 40).obstacle);
}

TEST(Obstacles, ProtectedCellsStayFree) {
    Rng rng(5);
    const std::vector<Cell> keep{{1, 1}, {2, 3}};
    const GridMap g = generate_obstacles(make_grid(4, 4, {0, 0}, {4, 4}), 0.999, rng, keep);
    EXPECT_FALSE(g.blocked({1, 1}));
    EXPECT_FALSE(g.blocked({2, 3}));
    EXPECT_EQ(g.obstacle_count(), 14u);
}

TEST(Astar, EmptyDiagonal) {
    const GridMap g = make_grid(3, 3, {0, 0}, {3, 3});
    const GridPath p = astar(g, {0, 0}, {2, 2});
    ASSERT_EQ(p.cells.size(), 3u);
    EXPECT_EQ(p.cells[1], (Cell{1, 1}));
    EXPECT_EQ(p.cost(), *oracle::dijkstra_cost(g, {0, 0}, {2, 2}));
}

TEST(Astar, StartEqualsGoal) {
    const GridMap g = make_grid(3, 3, {0, 0}, {3, 3});
    const GridPath p = astar(g, {1, 2}, {1, 2});
    ASSERT_EQ(p.cells.size(), 1u);
    EXPECT_EQ(p.cost(), 0);
}

TEST(Astar, ThreadsTheGap) {
    GridMap g = make_grid(3, 3, {0, 0}, {3, 3});
    g.obstacle[g.index({1, 0})] = 1;
    g.obstacle[g.index({1, 1})] = 1;
    const GridPath p = astar(g, {0, 0}, {2, 0});
    EXPECT_TRUE(std::find(p.cells.begin(), p.cells.end(), Cell{1, 2}) != p.cells.end());
    EXPECT_EQ(p.cost(), *oracle::dijkstra_cost(g, {0, 0}, {2, 0}));
    EXPECT_TRUE(is_valid_path(g, p));
}

TEST(Astar, UnreachableAndBlockedEndpoints) {
    GridMap g = make_grid(3, 3, {0, 0}, {3, 3});
    for (int c = 0; c < 3; ++c) g.obstacle[g.index({1, c})] = 1;
    EXPECT_EQ(kind_of([&] { astar(g, {0, 0}, {2, 2}); }), ErrorKind::NoPath);
    EXPECT_EQ(kind_of([&] { astar(g, {1, 1}, {2, 2}); }), ErrorKind::Contract);
}

TEST(Astar, OptimalAdmissibleAndValidOnRandomGrids) {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        const GridMap g = random_grid(seed);
        Rng pick(seed * 31);
        for (int trial = 0; trial < 3; ++trial) {
            const Cell a{static_cast<int>(pick.index(20)), static_cast<int>(pick.index(20))};
            const Cell b{static_cast<int>(pick.index(20)), static_cast<int>(pick.index(20))};
            if (g.blocked(a) || g.blocked(b)) continue;
            const auto expect = oracle::dijkstra_cost(g, a, b);
            std::vector<ExpandedNode> trace;
            try {
                const GridPath p = astar(g, a, b, &trace);
                ASSERT_TRUE(expect.has_value());
                EXPECT_EQ(p.cost(), *expect);
                EXPECT_TRUE(is_valid_path(g, p));
                std::set<Cell> unique(p.cells.begin(), p.cells.end());
                EXPECT_EQ(unique.size(), p.cells.size());
            } catch (const Error& e) {
                EXPECT_EQ(e.kind(), ErrorKind::NoPath);
                EXPECT_FALSE(expect.has_value());
            }
            const std::vector<int> to_goal = oracle::dijkstra_field(g, b);
            for (const ExpandedNode& n : trace) {
                const int d = to_goal[g.index(n.cell)];
                if (d >= 0) EXPECT_LE(n.h, d + 1e-12);
            }
        }
    }
}

TEST(Astar, HeuristicNeverExceedsMoves) {
    for (int r = 0; r < 10; ++r)
        for (int c = 0; c < 10; ++c) EXPECT_LE(astar_heuristic({0, 0}, {r, c}), std::max(r, c) + 1e-12);
}

TEST(Mapping, CellCentres) {
    const GridMap g = make_grid(2, 2, {0, 0}, {100, 100});
    EXPECT_EQ(cell_center(g, {0, 0}), Vec2(25, 25));
    EXPECT_EQ(cell_center(g, {1, 1}), Vec2(75, 75));
    GridPath p{{{0, 0}, {1, 1}}};
    const Route r = grid_to_world(g, p);
    ASSERT_EQ(r.waypoints.size(), 2u);
    EXPECT_EQ(r.waypoints[1], Vec2(75, 75));
    EXPECT_NEAR(path_length(g, p), std::sqrt(2.0) * 50.0, 1e-12);
}

TEST(Mapping, RoundTripAndContainment) {
    const GridMap g = make_grid(40, 40, {-500, 250}, {2000, 1600});
    for (int r = 0; r < 40; ++r)
        for (int c = 0; c < 40; ++c) {
            const Vec2 w = cell_center(g, {r, c});
            EXPECT_EQ(world_to_cell(g, w), (Cell{r, c}));
            EXPECT_GT(w.x(), -500.0);
            EXPECT_LT(w.x(), 1500.0);
            EXPECT_GT(w.y(), 250.0);
            EXPECT_LT(w.y(), 1850.0);
        }
    EXPECT_EQ(world_to_cell(g, {-1e6, 1e6}), (Cell{39, 0}));
}

TEST(Mapping, NearestFreeCell) {
    GridMap g = make_grid(3, 3, {0, 0}, {3, 3});
    EXPECT_EQ(nearest_free_cell(g, {1, 1}), (Cell{1, 1}));
    g.obstacle[g.index({1, 1})] = 1;
    EXPECT_EQ(nearest_free_cell(g, {1, 1}), (Cell{0, 1}));
    std::fill(g.obstacle.begin(), g.obstacle.end(), 1);
    EXPECT_EQ(kind_of([&] { nearest_free_cell(g, {1, 1}); }), ErrorKind::NoPath);
}

TEST(PathValidity, DetectsBrokenPaths) {
    GridMap g = make_grid(3, 3, {0, 0}, {3, 3});
    EXPECT_FALSE(is_valid_path(g, GridPath{{{0, 0}, {2, 2}}}));
    EXPECT_FALSE(is_valid_path(g, GridPath{{{0, 0}, {1, 1}, {0, 0}}}));
    g.obstacle[g.index({1, 1})] = 1;
    EXPECT_FALSE(is_valid_path(g, GridPath{{{0, 0}, {1, 1}}}));
    EXPECT_TRUE(is_valid_path(g, GridPath{{{0, 0}, {0, 1}, {1, 2}}}));
}
