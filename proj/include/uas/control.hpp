#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "uas/dynamics.hpp"
#include "uas/types.hpp"

namespace uas {

struct GainMatrix {
    Mat25 k = Mat25::Zero();
};

struct LqrSolution {
    Eigen::MatrixXd k;  // R^-1 B' P
    Eigen::MatrixXd p;  // stabilizing CARE solution
    double residual = 0.0;  // inf-norm of A'P + PA - PBR^-1B'P + Q
    int newton_iterations = 0;
};

/// Continuous-time LQR for arbitrary dimensions. The stable invariant subspace
/// of the Hamiltonian seeds Newton-Kleinman refinement. Throws
/// ErrorKind::Synthesis when no stabilizing solution is found.
LqrSolution solve_lqr(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                      const Eigen::MatrixXd& q, const Eigen::MatrixXd& r);

GainMatrix lqr_gain(const LateralModel& model, const Mat5& q_weight,
                    const Eigen::Matrix2d& r_weight);

/// Gain for the lateral model with Q = I5, R = I2.
GainMatrix default_lqr_gain();

/// Heading toward `waypoint`: -atan2(dy, dx) wrapped into (-pi, pi].
/// Throws ErrorKind::UndefinedHeading for coincident points.
double heading_command(const Vec2& agent_pos, const Vec2& waypoint);

struct WaypointSequencer {
    std::vector<Vec2> route;
    std::size_t active_index = 0;
    double capture_radius = 50.0;
    bool terminal_reached = false;

    const Vec2& active() const { return route[active_index]; }
    bool on_last() const { return active_index + 1 >= route.size(); }
};

/// Moves to the next waypoint (at most one per call) once the active one is
/// inside the capture radius. The final waypoint is never released; reaching
/// it sets `terminal_reached`.
WaypointSequencer advance_waypoint(WaypointSequencer seq, const Vec2& agent_pos);

}  // namespace uas
