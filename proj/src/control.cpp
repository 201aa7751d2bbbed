#include "uas/control.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "uas/error.hpp"

namespace uas {

namespace {

using Eigen::MatrixXd;

double care_residual(const MatrixXd& a, const MatrixXd& s, const MatrixXd& q, const MatrixXd& p) {
    const MatrixXd res = a.transpose() * p + p * a - p * s * p + q;
    return res.cwiseAbs().rowwise().sum().maxCoeff();
}

double inf_norm(const MatrixXd& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

bool hurwitz(const MatrixXd& m) {
    Eigen::EigenSolver<MatrixXd> es(m, false);
    return (es.eigenvalues().real().array() < 0.0).all();
}

// Solves acl' X + X acl = -c through the Kronecker-vectorized system.
MatrixXd solve_lyapunov(const MatrixXd& acl, const MatrixXd& c) {
    const Eigen::Index n = acl.rows();
    MatrixXd big = MatrixXd::Zero(n * n, n * n);
    const MatrixXd at = acl.transpose();
    const MatrixXd eye = MatrixXd::Identity(n, n);
    // vec(A' X) = (I kron A') vec(X); vec(X A) = (A' kron I) vec(X)
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            big.block(i * n, j * n, n, n) += eye(i, j) * at;
            big.block(i * n, j * n, n, n) += at(i, j) * eye;
        }
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(c.data(), n * n);
    Eigen::VectorXd x = big.fullPivLu().solve(-rhs);
    MatrixXd out = Eigen::Map<MatrixXd>(x.data(), n, n);
    return 0.5 * (out + out.transpose());
}

MatrixXd hamiltonian_seed(const MatrixXd& a, const MatrixXd& s, const MatrixXd& q) {
    const Eigen::Index n = a.rows();
    MatrixXd h(2 * n, 2 * n);
    h << a, -s, -q, -a.transpose();
    Eigen::ComplexEigenSolver<MatrixXd> ces(h);
    if (ces.info() != Eigen::Success)
        throw Error(ErrorKind::Synthesis, "lqr: Hamiltonian eigen-decomposition failed");

    Eigen::MatrixXcd basis(2 * n, n);
    Eigen::Index found = 0;
    for (Eigen::Index i = 0; i < 2 * n; ++i) {
        if (ces.eigenvalues()(i).real() < 0.0) {
            if (found == n) throw Error(ErrorKind::Synthesis, "lqr: malformed Hamiltonian spectrum");
            basis.col(found++) = ces.eigenvectors().col(i);
        }
    }
    if (found != n)
        throw Error(ErrorKind::Synthesis, "lqr: eigenvalues on the imaginary axis (not stabilizable/detectable)");

    const Eigen::MatrixXcd x1 = basis.topRows(n);
    const Eigen::MatrixXcd x2 = basis.bottomRows(n);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(x1);
    if (!lu.isInvertible()) throw Error(ErrorKind::Synthesis, "lqr: singular stable subspace");
    MatrixXd p = (x2 * lu.inverse()).real();
    return 0.5 * (p + p.transpose());
}

}  // namespace

LqrSolution solve_lqr(const MatrixXd& a, const MatrixXd& b, const MatrixXd& q, const MatrixXd& r) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n ||
        r.rows() != b.cols() || r.cols() != b.cols())
        throw Error(ErrorKind::Synthesis, "lqr: dimension mismatch");
    if (!a.allFinite() || !b.allFinite() || !q.allFinite() || !r.allFinite())
        throw Error(ErrorKind::Synthesis, "lqr: non-finite weights or model");

    Eigen::LLT<MatrixXd> r_llt(r);
    if (r_llt.info() != Eigen::Success)
        throw Error(ErrorKind::Synthesis, "lqr: R must be positive definite");
    const MatrixXd r_inv_bt = r_llt.solve(b.transpose());
    const MatrixXd s = b * r_inv_bt;

    LqrSolution sol;
    MatrixXd p = hamiltonian_seed(a, s, q);

    // Newton-Kleinman: each step solves a Lyapunov equation for the cost of
    // the current stabilizing gain.
    for (int it = 0; it < 50; ++it) {
        const MatrixXd k = r_inv_bt * p;
        const MatrixXd acl = a - b * k;
        if (!hurwitz(acl)) break;
        const MatrixXd next = solve_lyapunov(acl, q + k.transpose() * r * k);
        const double change = inf_norm(next - p);
        p = next;
        sol.newton_iterations = it + 1;
        if (change <= 1e-14 * std::max(1.0, inf_norm(p))) break;
    }

    sol.p = p;
    sol.k = r_inv_bt * p;
    sol.residual = care_residual(a, s, q, p);
    if (!hurwitz(a - b * sol.k))
        throw Error(ErrorKind::Synthesis, "lqr: closed loop not Hurwitz");
    const double tol = 1e-6 * inf_norm(p);
    if (!(sol.residual <= std::max(tol, 1e-12)))
        throw Error(ErrorKind::Synthesis, "lqr: Riccati residual above tolerance");
    return sol;
}

GainMatrix lqr_gain(const LateralModel& model, const Mat5& q_weight, const Eigen::Matrix2d& r_weight) {
    const LqrSolution sol = solve_lqr(model.a_mat, model.b_mat, q_weight, r_weight);
    GainMatrix g;
    g.k = sol.k;
    return g;
}

GainMatrix default_lqr_gain() {
    return lqr_gain(default_lateral_model(), Mat5::Identity(), Eigen::Matrix2d::Identity());
}

double heading_command(const Vec2& agent_pos, const Vec2& waypoint) {
    const Vec2 d = waypoint - agent_pos;
    if (d.x() == 0.0 && d.y() == 0.0)
        throw Error(ErrorKind::UndefinedHeading, "heading_command: agent is on the waypoint");
    return wrap_angle(-std::atan2(d.y(), d.x()));
}

WaypointSequencer advance_waypoint(WaypointSequencer seq, const Vec2& agent_pos) {
    if (seq.route.empty()) return seq;
    if ((seq.active() - agent_pos).norm() < seq.capture_radius) {
        if (seq.on_last())
            seq.terminal_reached = true;
        else
            ++seq.active_index;
    }
    return seq;
}

}  // namespace uas
