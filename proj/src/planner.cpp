#include "uas/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

#include "uas/error.hpp"

namespace uas {

std::size_t GridMap::obstacle_count() const {
    return static_cast<std::size_t>(std::count(obstacle.begin(), obstacle.end(), std::uint8_t{1}));
}

GridMap make_grid(int rows, int cols, const Vec2& origin, const Vec2& extent) {
    if (rows < 2) throw ValidationError("grid.rows", "must be >= 2");
    if (cols < 2) throw ValidationError("grid.cols", "must be >= 2");
    if (!(extent.x() > 0.0) || !(extent.y() > 0.0))
        throw ValidationError("area.extent", "must be positive");
    GridMap g;
    g.rows = rows;
    g.cols = cols;
    g.obstacle.assign(static_cast<std::size_t>(rows) * cols, 0);
    g.area_origin = origin;
    g.area_extent = extent;
    return g;
}

GridMap generate_obstacles(GridMap grid, double threshold, Rng& rng, std::span<const Cell> protected_cells) {
    if (!(threshold >= 0.0 && threshold < 1.0))
        throw ValidationError("obstacles.threshold", "must be in [0, 1)");
    for (auto& o : grid.obstacle) o = rng.uniform() < threshold ? 1 : 0;
    for (const Cell& c : protected_cells)
        if (grid.contains(c)) grid.obstacle[grid.index(c)] = 0;
    return grid;
}

double astar_heuristic(Cell a, Cell b) {
    const double dr = a.row - b.row;
    const double dc = a.col - b.col;
    return std::sqrt(dr * dr + dc * dc) / std::sqrt(2.0);
}

GridPath astar(const GridMap& grid, Cell start, Cell goal, std::vector<ExpandedNode>* trace) {
    if (!grid.contains(start) || !grid.contains(goal))
        throw Error(ErrorKind::Contract, "astar: endpoint outside grid");
    if (grid.blocked(start) || grid.blocked(goal))
        throw Error(ErrorKind::Contract, "astar: endpoint is an obstacle");
    if (start == goal) return GridPath{{start}};

    struct Entry {
        double f;
        double h;
        std::uint64_t order;
        std::size_t node;
        bool operator>(const Entry& o) const {
            if (f != o.f) return f > o.f;
            if (h != o.h) return h > o.h;
            return order > o.order;
        }
    };

    const std::size_t n = grid.obstacle.size();
    constexpr int kUnseen = std::numeric_limits<int>::max();
    std::vector<int> g(n, kUnseen);
    std::vector<std::size_t> parent(n, n);
    std::vector<std::uint8_t> closed(n, 0);
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    std::uint64_t order = 0;

    const std::size_t s = grid.index(start);
    const std::size_t t = grid.index(goal);
    g[s] = 0;
    {
        const double h = astar_heuristic(start, goal);
        open.push({h, h, order++, s});
    }

    static constexpr int kDr[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
    static constexpr int kDc[8] = {-1, 0, 1, -1, 1, -1, 0, 1};

    while (!open.empty()) {
        const Entry top = open.top();
        open.pop();
        if (closed[top.node]) continue;
        closed[top.node] = 1;
        const Cell cur{static_cast<int>(top.node / grid.cols), static_cast<int>(top.node % grid.cols)};
        if (trace) trace->push_back({cur, g[top.node], top.h});
        if (top.node == t) break;

        for (int k = 0; k < 8; ++k) {
            const Cell nb{cur.row + kDr[k], cur.col + kDc[k]};
            if (!grid.contains(nb) || grid.blocked(nb)) continue;
            const std::size_t ni = grid.index(nb);
            if (closed[ni]) continue;
            const int ng = g[top.node] + 1;
            if (ng < g[ni]) {
                g[ni] = ng;
                parent[ni] = top.node;
                const double h = astar_heuristic(nb, goal);
                open.push({ng + h, h, order++, ni});
            }
        }
    }

    if (!closed[t]) throw Error(ErrorKind::NoPath, "astar: goal unreachable");
    GridPath path;
    for (std::size_t i = t; i != n; i = parent[i])
        path.cells.push_back({static_cast<int>(i / grid.cols), static_cast<int>(i % grid.cols)});
    std::reverse(path.cells.begin(), path.cells.end());
    return path;
}

Vec2 cell_center(const GridMap& grid, Cell c) {
    return {grid.area_origin.x() + (c.col + 0.5) * grid.pitch_x(),
            grid.area_origin.y() + (c.row + 0.5) * grid.pitch_y()};
}

Cell world_to_cell(const GridMap& grid, const Vec2& p) {
    const double fx = (p.x() - grid.area_origin.x()) / grid.pitch_x();
    const double fy = (p.y() - grid.area_origin.y()) / grid.pitch_y();
    const int col = std::clamp(static_cast<int>(std::floor(fx)), 0, grid.cols - 1);
    const int row = std::clamp(static_cast<int>(std::floor(fy)), 0, grid.rows - 1);
    return {row, col};
}

Cell nearest_free_cell(const GridMap& grid, Cell c) {
    c.row = std::clamp(c.row, 0, grid.rows - 1);
    c.col = std::clamp(c.col, 0, grid.cols - 1);
    if (!grid.blocked(c)) return c;
    bool found = false;
    Cell best{};
    long best_d2 = 0;
    for (int r = 0; r < grid.rows; ++r)
        for (int q = 0; q < grid.cols; ++q) {
            if (grid.blocked({r, q})) continue;
            const long d2 = long(r - c.row) * (r - c.row) + long(q - c.col) * (q - c.col);
            if (!found || d2 < best_d2) {
                found = true;
                best = {r, q};
                best_d2 = d2;
            }
        }
    if (!found) throw Error(ErrorKind::NoPath, "nearest_free_cell: grid fully blocked");
    return best;
}

Route grid_to_world(const GridMap& grid, const GridPath& path) {
    Route route;
    route.waypoints.reserve(path.cells.size());
    for (const Cell& c : path.cells) route.waypoints.push_back(cell_center(grid, c));
    return route;
}

double path_length(const GridMap& grid, const GridPath& path) {
    double len = 0.0;
    for (std::size_t i = 1; i < path.cells.size(); ++i)
        len += (cell_center(grid, path.cells[i]) - cell_center(grid, path.cells[i - 1])).norm();
    return len;
}

bool is_valid_path(const GridMap& grid, const GridPath& path) {
    if (path.cells.empty()) return false;
    std::set<Cell> seen;
    for (std::size_t i = 0; i < path.cells.size(); ++i) {
        const Cell& c = path.cells[i];
        if (!grid.contains(c) || grid.blocked(c)) return false;
        if (!seen.insert(c).second) return false;
        if (i > 0) {
            const Cell& p = path.cells[i - 1];
            if (std::abs(p.row - c.row) > 1 || std::abs(p.col - c.col) > 1) return false;
        }
    }
    return true;
}

}  // namespace uas
