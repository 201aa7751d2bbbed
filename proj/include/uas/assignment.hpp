#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "uas/planner.hpp"
#include "uas/types.hpp"

namespace uas {

/// Agents are rows, targets columns. Entries are route lengths in metres;
/// unreachable pairs hold a large finite sentinel.
using CostMatrix = Eigen::MatrixXd;

/// Minimum-cost perfect matching of a square matrix. Returns the column
/// assigned to each row. Throws ErrorKind::Contract for non-square or
/// non-finite input.
std::vector<int> hungarian(const CostMatrix& costs);

/// Sum of costs(i, assignment[i]) in row order.
double assignment_cost(const CostMatrix& costs, const std::vector<int>& assignment);

struct PairSelection {
    int agent = 0;
    int target = 0;
    double cost = 0.0;
    bool core = true;  // false for surplus agents sent to their closest target
};

struct Selection {
    std::vector<PairSelection> pairs;  // ordered by agent
    std::vector<int> dropped_targets;  // in drop order
};

/// Applies the unbalanced-case rules around the Hungarian core:
///  - more targets than agents: repeatedly drop the target whose cheapest
///    agent is most expensive (ties drop the higher target id);
///  - more agents than targets: match targets optimally, then send each
///    remaining agent to its cheapest target (ties to the lower id).
Selection select_assignment(const CostMatrix& costs);

struct AssignedPair {
    int agent = 0;
    int target = 0;
    double cost = 0.0;
    bool core = true;
    GridPath path;
    Route route;
};

struct AssignmentPlan {
    std::vector<AssignedPair> pairs;
    std::vector<int> dropped_targets;
    CostMatrix costs;
};

/// Sentinel cost for unreachable pairs on this grid.
double unreachable_cost(const GridMap& grid);

/// A* for every agent/target pair, then assignment on route length. Endpoints
/// are snapped to the nearest free cell. Throws ErrorKind::Planning when all
/// pairs are unreachable or the selection cannot avoid an unreachable pair.
AssignmentPlan stat_plan(std::span<const Vec2> agents, std::span<const Vec2> targets, const GridMap& grid);

}  // namespace uas
