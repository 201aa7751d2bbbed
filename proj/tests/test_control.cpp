#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "uas/control.hpp"
#include "uas/dynamics.hpp"
#include "uas/error.hpp"

using namespace uas;

namespace {

Eigen::MatrixXd m1(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

double care_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& q,
                     const Eigen::MatrixXd& r, const Eigen::MatrixXd& p) {
    const Eigen::MatrixXd res = a.transpose() * p + p * a - p * b * r.inverse() * b.transpose() * p + q;
    return res.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace

TEST(Lqr, ZeroStateCostOnStableSystem) {
    const LqrSolution s = solve_lqr(m1(-1), m1(1), m1(0), m1(1));
    EXPECT_NEAR(s.p(0, 0), 0.0, 1e-12);
    EXPECT_NEAR(s.k(0, 0), 0.0, 1e-12);
}

TEST(Lqr, ScalarIntegrator) {
    const LqrSolution s = solve_lqr(m1(0), m1(1), m1(1), m1(1));
    EXPECT_NEAR(s.p(0, 0), 1.0, 1e-12);
    EXPECT_NEAR(s.k(0, 0), 1.0, 1e-12);
}

TEST(Lqr, UnstabilizablePairFails) {
    Eigen::MatrixXd a(2, 2), b(2, 1);
    a << 1, 0, 0, -1;
    b << 0, 1;
    try {
        solve_lqr(a, b, Eigen::MatrixXd::Identity(2, 2), m1(1));
        FAIL() << "expected synthesis error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Synthesis);
    }
}

TEST(Lqr, DefaultGainIsStabilizingWithSmallResidual) {
    const LateralModel m = default_lateral_model();
    const LqrSolution s = solve_lqr(m.a_mat, m.b_mat, Mat5::Identity(), Eigen::Matrix2d::Identity());
    const Eigen::MatrixXd acl = m.a_mat - m.b_mat * s.k;
    EXPECT_LT(Eigen::EigenSolver<Eigen::MatrixXd>(acl).eigenvalues().real().maxCoeff(), 0.0);
    const double res = care_residual(m.a_mat, m.b_mat, Mat5::Identity(), Eigen::Matrix2d::Identity(), s.p);
    EXPECT_LE(res, 1e-6 * s.p.cwiseAbs().rowwise().sum().maxCoeff());
}

TEST(Lqr, DefaultGainMatchesGolden) {
    const GainMatrix g = default_lqr_gain();
    EXPECT_LT((g.k - oracle::golden_gain()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(HeadingCommand, Examples) {
    EXPECT_DOUBLE_EQ(heading_command({0, 0}, {1, 0}), 0.0);
    EXPECT_DOUBLE_EQ(heading_command({0, 0}, {1, 1}), -kPi / 4);
    EXPECT_DOUBLE_EQ(heading_command({0, 0}, {0, 1}), -kPi / 2);
    EXPECT_DOUBLE_EQ(heading_command({0, 0}, {-1, 0}), kPi);
}

TEST(HeadingCommand, CoincidentPointsThrow) {
    try {
        heading_command({3, 4}, {3, 4});
        FAIL() << "expected undefined heading";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UndefinedHeading);
    }
}

TEST(HeadingCommand, RangeAndAntisymmetry) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-1000, 1000);
    for (int i = 0; i < 1000; ++i) {
        const Vec2 a(u(gen), u(gen)), b(u(gen), u(gen));
        const double h = heading_command(a, b);
        EXPECT_GT(h, -kPi);
        EXPECT_LE(h, kPi);
        const double back = wrap_angle(heading_command(b, a) + kPi);
        EXPECT_NEAR(wrap_angle(h - back), 0.0, 1e-12);
    }
}

TEST(HeadingCommand, SteersAgentOntoWaypoint) {
    const ClosedLoop loop = discretize_zoh(default_lateral_model(), oracle::golden_gain());
    AgentState s;
    const Vec2 goal(300, 400);
    double best = 1e9;
    for (int k = 0; k < 6000; ++k) {
        s = step_agent(s, heading_command(s.position(), goal), loop);
        best = std::min(best, (s.position() - goal).norm());
    }
    EXPECT_LT(best, 20.0);
}

TEST(Sequencer, OutsideRadiusHolds) {
    WaypointSequencer seq{{{60, 0}, {200, 0}}, 0, 50.0};
    EXPECT_EQ(advance_waypoint(seq, {0, 0}).active_index, 0u);
}

TEST(Sequencer, InsideRadiusAdvancesByOne) {
    WaypointSequencer seq{{{10, 0}, {12, 0}, {14, 0}}, 0, 50.0};
    const WaypointSequencer n = advance_waypoint(seq, {0, 0});
    EXPECT_EQ(n.active_index, 1u);
    EXPECT_FALSE(n.terminal_reached);
}

TEST(Sequencer, TerminalNeverReleased) {
    WaypointSequencer seq{{{0, 0}, {10, 0}}, 1, 50.0};
    const WaypointSequencer n = advance_waypoint(seq, {0, 0});
    EXPECT_EQ(n.active_index, 1u);
    EXPECT_TRUE(n.terminal_reached);
}

TEST(Sequencer, BoundaryIsExclusive) {
    WaypointSequencer seq{{{50, 0}, {100, 0}}, 0, 50.0};
    EXPECT_EQ(advance_waypoint(seq, {0, 0}).active_index, 0u);
}

TEST(Sequencer, IndexIsMonotoneAlongFlight) {
    const ClosedLoop loop = discretize_zoh(default_lateral_model(), oracle::golden_gain());
    WaypointSequencer seq{{{200, 0}, {400, -100}, {600, -100}, {800, 0}}, 0, 50.0};
    AgentState s;
    std::size_t last = 0;
    for (int k = 0; k < 8000; ++k) {
        s = step_agent(s, heading_command(s.position(), seq.active()), loop);
        seq = advance_waypoint(seq, s.position());
        EXPECT_GE(seq.active_index, last);
        last = seq.active_index;
    }
    EXPECT_TRUE(seq.terminal_reached);
}
