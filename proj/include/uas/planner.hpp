#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "uas/rng.hpp"
#include "uas/types.hpp"

namespace uas {

struct Cell {
    int row = 0;
    int col = 0;
    auto operator<=>(const Cell&) const = default;
};

/// Uniform mesh over [origin, origin + extent]; rows run along y, columns
/// along x. Row-major obstacle mask.
struct GridMap {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> obstacle;
    Vec2 area_origin = Vec2::Zero();
    Vec2 area_extent = Vec2::Zero();

    bool contains(Cell c) const { return c.row >= 0 && c.row < rows && c.col >= 0 && c.col < cols; }
    bool blocked(Cell c) const { return obstacle[index(c)] != 0; }
    std::size_t index(Cell c) const { return static_cast<std::size_t>(c.row) * cols + c.col; }
    double pitch_x() const { return area_extent.x() / cols; }
    double pitch_y() const { return area_extent.y() / rows; }
    std::size_t obstacle_count() const;
};

/// Throws ValidationError for rows/cols < 2 or a non-positive extent.
GridMap make_grid(int rows, int cols, const Vec2& origin, const Vec2& extent);

/// Marks each cell an obstacle when its uniform draw falls below `threshold`
/// (one draw per cell, row-major), then clears the protected cells.
GridMap generate_obstacles(GridMap grid, double threshold, Rng& rng,
                           std::span<const Cell> protected_cells = {});

struct GridPath {
    std::vector<Cell> cells;

    /// Number of moves, the unit-step path cost.
    int cost() const { return cells.empty() ? 0 : static_cast<int>(cells.size()) - 1; }
};

struct Route {
    std::vector<Vec2> waypoints;
};

/// A node popped from the open list, for admissibility checks in tests.
struct ExpandedNode {
    Cell cell;
    int g = 0;
    double h = 0.0;
};

/// Unit-cost 8-connected A*. The heuristic is Euclidean cell distance over
/// sqrt(2), which never exceeds the remaining move count. Open list ties are
/// broken by (f, h, insertion order). Throws ErrorKind::NoPath if `goal`
/// cannot be reached and ErrorKind::Contract for blocked endpoints.
GridPath astar(const GridMap& grid, Cell start, Cell goal,
               std::vector<ExpandedNode>* trace = nullptr);

double astar_heuristic(Cell a, Cell b);

Vec2 cell_center(const GridMap& grid, Cell c);

/// Cell containing `p`, clamped into the grid.
Cell world_to_cell(const GridMap& grid, const Vec2& p);

/// Closest free cell to `c` by Euclidean cell distance, ties to lower
/// (row, col). Throws ErrorKind::NoPath when the whole grid is blocked.
Cell nearest_free_cell(const GridMap& grid, Cell c);

Route grid_to_world(const GridMap& grid, const GridPath& path);

/// Polyline length of the mapped path in metres.
double path_length(const GridMap& grid, const GridPath& path);

bool is_valid_path(const GridMap& grid, const GridPath& path);

}  // namespace uas
