#include "uas/dynamics.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "uas/error.hpp"

namespace uas {

bool AgentState::finite() const {
    return std::isfinite(v) && std::isfinite(p) && std::isfinite(r) && std::isfinite(phi) &&
           std::isfinite(psi) && std::isfinite(pos_x) && std::isfinite(pos_y) &&
           std::isfinite(u_fwd);
}

LateralModel default_lateral_model() {
    LateralModel m;
    // clang-format off
    m.a_mat << -2.382,   0.0,    -30.1,  65.49, 0.0,
               -0.702, -16.06,    0.872,  0.0,  0.0,
                0.817, -16.65,   -3.54,   0.0,  0.0,
                0.0,     1.0,     0.0,    0.0,  0.0,
                0.0,     0.0,     1.0,    0.0,  0.0;
    m.b_mat <<  0.0,    -7.41,
              -36.3,  -688.0,
               -0.673, -68.0,
                0.0,     0.0,
                0.0,     0.0;
    // clang-format on
    m.dt = 0.01;
    return m;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd>
zoh_discretize(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double dt) {
    if (!(dt > 0.0)) throw Error(ErrorKind::InvalidModel, "zoh: dt must be positive");
    if (a.rows() != a.cols() || b.rows() != a.rows())
        throw Error(ErrorKind::InvalidModel, "zoh: dimension mismatch");
    if (!a.allFinite() || !b.allFinite())
        throw Error(ErrorKind::InvalidModel, "zoh: non-finite model entries");

    const Eigen::Index n = a.rows();
    const Eigen::Index m = b.cols();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = a * dt;
    aug.topRightCorner(n, m) = b * dt;
    const Eigen::MatrixXd e = aug.exp();
    Eigen::MatrixXd ad = e.topLeftCorner(n, n);
    Eigen::MatrixXd bd = e.topRightCorner(n, m);
    if (!ad.allFinite() || !bd.allFinite())
        throw Error(ErrorKind::InvalidModel, "zoh: non-finite discretization");
    return {std::move(ad), std::move(bd)};
}

ClosedLoop discretize_zoh(const LateralModel& model, const Mat25& k_gain) {
    if (!k_gain.allFinite()) throw Error(ErrorKind::InvalidModel, "zoh: non-finite gain");
    const Mat5 bk = model.b_mat * k_gain;
    const Mat5 acl = model.a_mat - bk;
    auto [ad, bd] = zoh_discretize(acl, bk, model.dt);
    ClosedLoop loop;
    loop.ad = ad;
    loop.bd = bd;
    loop.dt = model.dt;
    return loop;
}

namespace {

// Lateral state with psi shifted to within pi of psi_des.
Vec5 regulated_state(const AgentState& s, double psi_des) {
    Vec5 x = s.lateral();
    x(4) = psi_des + wrap_angle(s.psi - psi_des);
    return x;
}

}  // namespace

ControlInput control_input(const Mat25& k_gain, const AgentState& state, double psi_des) {
    Vec5 err = regulated_state(state, psi_des);
    err(4) -= psi_des;
    const Eigen::Vector2d u = -k_gain * err;
    return {u(0), u(1)};
}

AgentState step_agent(const AgentState& state, double psi_des, const ClosedLoop& loop) {
    if (!state.finite() || !std::isfinite(psi_des))
        throw Error(ErrorKind::Propagation, "step_agent: non-finite input");

    const Vec5 x = regulated_state(state, psi_des);
    Vec5 x_des = Vec5::Zero();
    x_des(4) = psi_des;
    const Vec5 next = loop.ad * x + loop.bd * x_des;

    AgentState out = state;
    const double c = std::cos(state.psi);
    const double s = std::sin(state.psi);
    out.pos_x = state.pos_x + loop.dt * (state.u_fwd * c - state.v * s);
    out.pos_y = state.pos_y - loop.dt * (state.u_fwd * s + state.v * c);
    out.v = next(0);
    out.p = next(1);
    out.r = next(2);
    out.phi = next(3);
    out.psi = wrap_angle(next(4));

    if (!out.finite()) throw Error(ErrorKind::Propagation, "step_agent: state diverged");
    return out;
}

TargetState step_target(const TargetState& state, double dt) {
    TargetState out = state;
    out.pos_x += state.vel_x * dt;
    out.pos_y += state.vel_y * dt;
    if (!std::isfinite(out.pos_x) || !std::isfinite(out.pos_y))
        throw Error(ErrorKind::Propagation, "step_target: non-finite position");
    return out;
}

}  // namespace uas
