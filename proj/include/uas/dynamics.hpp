#pragma once

#include <Eigen/Dense>

#include "uas/types.hpp"

namespace uas {

/// Physical truth of one agent: lateral dynamic state plus planar position.
/// `u_fwd` is held by an outer longitudinal loop and never changes.
struct AgentState {
    double v = 0.0;    // lateral body velocity, m/s
    double p = 0.0;    // roll rate, rad/s
    double r = 0.0;    // yaw rate, rad/s
    double phi = 0.0;  // roll angle, rad
    double psi = 0.0;  // heading, rad
    double pos_x = 0.0;
    double pos_y = 0.0;
    double u_fwd = 20.0;

    Vec5 lateral() const { return Vec5(v, p, r, phi, psi); }
    Vec2 position() const { return Vec2(pos_x, pos_y); }
    bool finite() const;
};

struct ControlInput {
    double delta_a = 0.0;  // aileron, rad
    double delta_r = 0.0;  // rudder, rad
};

/// Planar double integrator. Accelerations are zero; velocity only changes
/// through scripted events applied by the mission loop.
struct TargetState {
    double pos_x = 0.0;
    double pos_y = 0.0;
    double vel_x = 0.0;
    double vel_y = 0.0;

    Vec2 position() const { return Vec2(pos_x, pos_y); }
    Vec2 velocity() const { return Vec2(vel_x, vel_y); }
};

/// Continuous lateral model xdot = A x + B u over state (v, p, r, phi, psi)
/// and input (delta_a, delta_r).
struct LateralModel {
    Mat5 a_mat = Mat5::Zero();
    Mat52 b_mat = Mat52::Zero();
    double dt = 0.01;
};

/// Discrete closed loop x[k+1] = ad x[k] + bd x_des.
struct ClosedLoop {
    Mat5 ad = Mat5::Identity();
    Mat5 bd = Mat5::Zero();
    double dt = 0.01;
};

/// Small fixed-wing lateral model sampled at 100 Hz.
LateralModel default_lateral_model();

/// Exact zero-order-hold discretization of xdot = a x + b u over dt.
/// Returns (Ad, Bd) from the exponential of the augmented block matrix.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd>
zoh_discretize(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double dt);

/// Discretizes the regulated loop (A - BK, BK) with input x_des.
ClosedLoop discretize_zoh(const LateralModel& model, const Mat25& k_gain);

/// u = -K (x - x_des) with the heading error wrapped into (-pi, pi].
ControlInput control_input(const Mat25& k_gain, const AgentState& state, double psi_des);

/// Advances one agent by one loop period toward heading `psi_des`.
AgentState step_agent(const AgentState& state, double psi_des, const ClosedLoop& loop);

TargetState step_target(const TargetState& state, double dt);

}  // namespace uas
