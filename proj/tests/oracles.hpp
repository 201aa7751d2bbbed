#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. None of these call into the code under test.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <vector>

#include "uas/planner.hpp"

namespace oracle {

// Pinned LQR gain for the lateral model with Q = I5, R = I2, computed once
// with an external Riccati solver (scipy.linalg.solve_continuous_are).
inline Eigen::Matrix<double, 2, 5> golden_gain() {
    Eigen::Matrix<double, 2, 5> k;
    k << -0.15228039287700496, -0.1169058058156012, 0.5864990606216849, 1.8520618046076658, 0.9294721981308848,
        -0.7718667757561962, -1.1792355829513304, 1.6769623641242708, -5.657741742794512, -0.3688921697485128;
    return k;
}

inline Eigen::Matrix<double, 5, 5> lateral_a() {
    Eigen::Matrix<double, 5, 5> a;
    a << -2.382, 0, -30.1, 65.49, 0, -0.702, -16.06, 0.872, 0, 0, 0.817, -16.65, -3.54, 0, 0, 0, 1, 0, 0, 0, 0, 0,
        1, 0, 0;
    return a;
}

inline Eigen::Matrix<double, 5, 2> lateral_b() {
    Eigen::Matrix<double, 5, 2> b;
    b << 0, -7.41, -36.3, -688, -0.673, -68.0, 0, 0, 0, 0;
    return b;
}

// Unit-cost 8-connected shortest path lengths from `source` to every cell;
// -1 marks unreachable or blocked cells.
inline std::vector<int> dijkstra_field(const uas::GridMap& g, uas::Cell source) {
    std::vector<int> dist(static_cast<std::size_t>(g.rows * g.cols), -1);
    if (g.blocked(source)) return dist;
    using Item = std::pair<int, int>;  // (cost, flat index)
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    std::vector<int> best(dist.size(), std::numeric_limits<int>::max());
    const int s = source.row * g.cols + source.col;
    best[s] = 0;
    open.push({0, s});
    while (!open.empty()) {
        auto [d, i] = open.top();
        open.pop();
        if (d > best[i]) continue;
        dist[i] = d;
        const int r = i / g.cols, c = i % g.cols;
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                if (dr == 0 && dc == 0) continue;
                const uas::Cell n{r + dr, c + dc};
                if (!g.contains(n) || g.blocked(n)) continue;
                const int j = n.row * g.cols + n.col;
                if (d + 1 < best[j]) {
                    best[j] = d + 1;
                    open.push({d + 1, j});
                }
            }
    }
    return dist;
}

inline std::optional<int> dijkstra_cost(const uas::GridMap& g, uas::Cell start, uas::Cell goal) {
    const int d = dijkstra_field(g, start)[static_cast<std::size_t>(goal.row * g.cols + goal.col)];
    if (d < 0) return std::nullopt;
    return d;
}

// Minimum over all permutations of sum_i costs(i, perm[i]), summed in row order.
inline double brute_force_assignment(const Eigen::MatrixXd& costs) {
    std::vector<int> perm(static_cast<std::size_t>(costs.rows()));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i) s += costs(static_cast<Eigen::Index>(i), perm[i]);
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Classical RK4 on xdot = f(x) for a fixed number of steps.
template <class F>
Eigen::VectorXd rk4(F&& f, Eigen::VectorXd x, double dt, long steps) {
    for (long k = 0; k < steps; ++k) {
        const Eigen::VectorXd k1 = f(x);
        const Eigen::VectorXd k2 = f(x + 0.5 * dt * k1);
        const Eigen::VectorXd k3 = f(x + 0.5 * dt * k2);
        const Eigen::VectorXd k4 = f(x + dt * k3);
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return x;
}

// Textbook linear Kalman filter with a position measurement.
struct Kalman {
    Eigen::Vector4d x;
    Eigen::Matrix4d p;

    void predict(const Eigen::Matrix4d& f, const Eigen::Matrix4d& q) {
        x = f * x;
        p = f * p * f.transpose() + q;
    }
    void update(const Eigen::Vector2d& z, const Eigen::Matrix2d& r) {
        Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
        h(0, 0) = h(1, 1) = 1.0;
        const Eigen::Matrix2d s = h * p * h.transpose() + r;
        const Eigen::Matrix<double, 4, 2> k = p * h.transpose() * s.inverse();
        x += k * (z - h * x);
        p = (Eigen::Matrix4d::Identity() - k * h) * p;
        p = 0.5 * (p + p.transpose()).eval();
    }
};

inline double gauss2(const Eigen::Vector2d& z, const Eigen::Vector2d& mean, const Eigen::Matrix2d& s) {
    const Eigen::Vector2d d = z - mean;
    return std::exp(-0.5 * d.dot(s.inverse() * d)) / (2.0 * M_PI * std::sqrt(s.determinant()));
}

}  // namespace oracle
