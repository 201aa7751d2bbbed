#include "uas/assignment.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "uas/error.hpp"

namespace uas {

std::vector<int> hungarian(const CostMatrix& costs) {
    if (costs.rows() != costs.cols())
        throw Error(ErrorKind::Contract, "hungarian: cost matrix must be square");
    if (!costs.allFinite()) throw Error(ErrorKind::Contract, "hungarian: non-finite cost");
    const int n = static_cast<int>(costs.rows());
    if (n == 0) return {};

    // Shortest augmenting path with row/column potentials, 1-based with a
    // virtual column 0.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = costs(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> assignment(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] != 0) assignment[p[j] - 1] = j - 1;
    return assignment;
}

double assignment_cost(const CostMatrix& costs, const std::vector<int>& assignment) {
    double total = 0.0;
    for (std::size_t i = 0; i < assignment.size(); ++i) total += costs(static_cast<Eigen::Index>(i), assignment[i]);
    return total;
}

Selection select_assignment(const CostMatrix& costs) {
    const int n_agents = static_cast<int>(costs.rows());
    const int n_targets = static_cast<int>(costs.cols());
    if (n_agents == 0 || n_targets == 0)
        throw Error(ErrorKind::Contract, "select_assignment: need at least one agent and one target");

    Selection sel;
    std::vector<int> kept(n_targets);
    std::iota(kept.begin(), kept.end(), 0);
    while (static_cast<int>(kept.size()) > n_agents) {
        std::size_t worst = 0;
        double worst_cost = -1.0;
        for (std::size_t k = 0; k < kept.size(); ++k) {
            const double best = costs.col(kept[k]).minCoeff();
            if (best >= worst_cost) {
                worst_cost = best;
                worst = k;
            }
        }
        sel.dropped_targets.push_back(kept[worst]);
        kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(worst));
    }

    // Square core; surplus agents enter as zero-cost dummy columns.
    const int m = static_cast<int>(kept.size());
    CostMatrix core = CostMatrix::Zero(n_agents, n_agents);
    for (int i = 0; i < n_agents; ++i)
        for (int k = 0; k < m; ++k) core(i, k) = costs(i, kept[k]);
    const std::vector<int> match = hungarian(core);

    for (int i = 0; i < n_agents; ++i) {
        PairSelection ps;
        ps.agent = i;
        if (match[i] < m) {
            ps.target = kept[match[i]];
            ps.core = true;
        } else {
            Eigen::Index best = 0;
            costs.row(i).minCoeff(&best);  // first minimum, i.e. lowest id
            ps.target = static_cast<int>(best);
            ps.core = false;
        }
        ps.cost = costs(i, ps.target);
        sel.pairs.push_back(ps);
    }
    return sel;
}

double unreachable_cost(const GridMap& grid) {
    return 1e9 * 0.5 * (grid.pitch_x() + grid.pitch_y());
}

AssignmentPlan stat_plan(std::span<const Vec2> agents, std::span<const Vec2> targets, const GridMap& grid) {
    if (agents.empty() || targets.empty())
        throw Error(ErrorKind::Planning, "stat_plan: need at least one agent and one target");

    std::vector<Cell> agent_cells, target_cells;
    for (const Vec2& a : agents) agent_cells.push_back(nearest_free_cell(grid, world_to_cell(grid, a)));
    for (const Vec2& t : targets) target_cells.push_back(nearest_free_cell(grid, world_to_cell(grid, t)));

    const double sentinel = unreachable_cost(grid);
    const auto na = static_cast<Eigen::Index>(agents.size());
    const auto nt = static_cast<Eigen::Index>(targets.size());
    AssignmentPlan plan;
    plan.costs = CostMatrix::Constant(na, nt, sentinel);
    std::vector<std::vector<GridPath>> paths(agents.size(), std::vector<GridPath>(targets.size()));
    bool any = false;
    for (Eigen::Index i = 0; i < na; ++i)
        for (Eigen::Index j = 0; j < nt; ++j) {
            try {
                paths[i][j] = astar(grid, agent_cells[i], target_cells[j]);
                plan.costs(i, j) = path_length(grid, paths[i][j]);
                any = true;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::NoPath) throw;
            }
        }
    if (!any) throw Error(ErrorKind::Planning, "stat_plan: no agent can reach any target");

    const Selection sel = select_assignment(plan.costs);
    plan.dropped_targets = sel.dropped_targets;
    for (const PairSelection& ps : sel.pairs) {
        if (ps.cost >= sentinel)
            throw Error(ErrorKind::Planning, "stat_plan: agent " + std::to_string(ps.agent) +
                                                 " cannot reach any assignable target");
        AssignedPair pair;
        pair.agent = ps.agent;
        pair.target = ps.target;
        pair.cost = ps.cost;
        pair.core = ps.core;
        pair.path = paths[ps.agent][ps.target];
        pair.route = grid_to_world(grid, pair.path);
        plan.pairs.push_back(std::move(pair));
    }
    return plan;
}

}  // namespace uas
