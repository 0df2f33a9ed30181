#include "morsebif/dynamics.hpp"

#include <cmath>

namespace morsebif {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double fd_step(double x) { return std::cbrt(kEps) * std::max(1.0, std::abs(x)); }

// First-order system state (q; v) as one vector of length 2n.
Vec rhs(const LagrangianFamily& fam, double lambda, double t, const Vec& y, double t_fd) {
    const int n = fam.dim();
    Vec out(2 * n);
    out.head(n) = y.tail(n);
    out.tail(n) = accel(fam, lambda, t, y.head(n), y.tail(n), t_fd);
    return out;
}

// Jacobian of the first-order vector field in (q, v), by central differences
// of accel.  Top blocks are exact: d qdot / d(q,v) = [0 I].
Mat rhs_jacobian(const LagrangianFamily& fam, double lambda, double t, const Vec& y, double t_fd) {
    const int n = fam.dim();
    Mat j = Mat::Zero(2 * n, 2 * n);
    j.block(0, n, n, n) = Mat::Identity(n, n);
    Vec q = y.head(n), v = y.tail(n);
    for (int k = 0; k < n; ++k) {
        const double hq = fd_step(q[k]);
        Vec qp = q, qm = q;
        qp[k] += hq;
        qm[k] -= hq;
        j.block(n, k, n, 1) =
            (accel(fam, lambda, t, qp, v, t_fd) - accel(fam, lambda, t, qm, v, t_fd)) / (2.0 * hq);
        const double hv = fd_step(v[k]);
        Vec vp = v, vm = v;
        vp[k] += hv;
        vm[k] -= hv;
        j.block(n, n + k, n, 1) =
            (accel(fam, lambda, t, q, vp, t_fd) - accel(fam, lambda, t, q, vm, t_fd)) / (2.0 * hv);
    }
    return j;
}

struct FlowResult {
    Trajectory traj;
    Mat psi;  // d(state at tau)/d(state at 0), 2n x 2n; empty unless requested
};

FlowResult integrate_flow(const LagrangianFamily& fam, double lambda, const Vec& q0,
                          const Vec& v0, double tau, int steps, double blowup, double t_fd,
                          bool with_variational) {
    const int n = fam.dim();
    if (q0.size() != n || v0.size() != n)
        throw DimensionMismatch("integrate: initial state size mismatch");
    if (!(tau > 0.0)) throw std::invalid_argument("integrate: tau must be positive");

    FlowResult out;
    Trajectory& tr = out.traj;
    tr.lambda = lambda;
    tr.grid = Vec::LinSpaced(steps + 1, 0.0, tau);
    tr.q.reserve(steps + 1);
    tr.v.reserve(steps + 1);

    const double h = tau / steps;
    Vec y(2 * n);
    y << q0, v0;
    Mat psi;
    if (with_variational) psi = Mat::Identity(2 * n, 2 * n);

    tr.q.push_back(q0);
    tr.v.push_back(v0);
    for (int i = 0; i < steps; ++i) {
        const double t = tr.grid(i);
        const Vec k1 = rhs(fam, lambda, t, y, t_fd);
        const Vec k2 = rhs(fam, lambda, t + 0.5 * h, y + 0.5 * h * k1, t_fd);
        const Vec k3 = rhs(fam, lambda, t + 0.5 * h, y + 0.5 * h * k2, t_fd);
        const Vec k4 = rhs(fam, lambda, t + h, y + h * k3, t_fd);
        if (with_variational) {
            const Mat j1 = rhs_jacobian(fam, lambda, t, y, t_fd) * psi;
            const Mat j2 = rhs_jacobian(fam, lambda, t + 0.5 * h, y + 0.5 * h * k1, t_fd) *
                           (psi + 0.5 * h * j1);
            const Mat j3 = rhs_jacobian(fam, lambda, t + 0.5 * h, y + 0.5 * h * k2, t_fd) *
                           (psi + 0.5 * h * j2);
            const Mat j4 = rhs_jacobian(fam, lambda, t + h, y + h * k3, t_fd) * (psi + h * j3);
            psi += (h / 6.0) * (j1 + 2.0 * j2 + 2.0 * j3 + j4);
        }
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (y.cwiseAbs().maxCoeff() > blowup)
            throw BlowUp("integrate: state norm exceeded the configured bound");
        tr.q.push_back(y.head(n));
        tr.v.push_back(y.tail(n));
    }
    if (with_variational) out.psi = std::move(psi);

    // A-posteriori motion-equation estimate: second-order difference of the
    // momentum against dL/dq on interior nodes.
    double res = 0.0;
    if (steps >= 2) {
        Vec p_prev = momentum(fam, lambda, tr.grid(0), tr.q[0], tr.v[0]);
        Vec p_cur = momentum(fam, lambda, tr.grid(1), tr.q[1], tr.v[1]);
        for (int i = 1; i < steps; ++i) {
            Vec p_next = momentum(fam, lambda, tr.grid(i + 1), tr.q[i + 1], tr.v[i + 1]);
            Vec r = (p_next - p_prev) / (2.0 * h) -
                    grad_q(fam, lambda, tr.grid(i), tr.q[i], tr.v[i]);
            res = std::max(res, r.cwiseAbs().maxCoeff());
            p_prev = std::move(p_cur);
            p_cur = std::move(p_next);
        }
    }
    tr.el_residual = res;
    return out;
}

// Combined essential + natural boundary residual for a shot trajectory.
Vec bvp_residual(const LagrangianFamily& fam, double lambda, const BoundaryCondition& bc,
                 const Trajectory& tr) {
    const int n = fam.dim();
    const Vec& q0 = tr.q.front();
    const Vec& qT = tr.q.back();
    const double t0 = tr.grid(0), tT = tr.tau();

    if (const auto* p = std::get_if<ProductSubspaces>(&bc)) {
        const Mat comp0 = orthogonal_complement(p->v0_basis, n);
        const Mat comp1 = orthogonal_complement(p->v1_basis, n);
        const Vec a0 = p->offset0.size() ? p->offset0 : Vec::Zero(n);
        const Vec a1 = p->offset1.size() ? p->offset1 : Vec::Zero(n);
        const Vec nat = natural_residual(bc, momentum(fam, lambda, t0, q0, tr.v.front()),
                                         momentum(fam, lambda, tT, qT, tr.v.back()));
        Vec f(2 * n);
        f.head(comp0.cols()) = comp0.transpose() * (q0 - a0);
        f.segment(comp0.cols(), comp1.cols()) = comp1.transpose() * (qT - a1);
        f.tail(nat.size()) = nat;
        return f;
    }
    if (const auto* t = std::get_if<OrthogonalTwist>(&bc)) {
        Vec f(2 * n);
        f.head(n) = qT - t->E * q0;
        f.tail(n) = natural_residual(bc, momentum(fam, lambda, t0, q0, tr.v.front()),
                                     momentum(fam, lambda, tT, qT, tr.v.back()));
        return f;
    }
    // even-periodic: turning-time velocities must vanish
    Vec f(2 * n);
    f.head(n) = tr.v.front();
    f.tail(n) = tr.v.back();
    return f;
}

Mat bvp_jacobian(const LagrangianFamily& fam, double lambda, const BoundaryCondition& bc,
                 const Trajectory& tr, const Mat& psi) {
    const int n = fam.dim();
    const double t0 = tr.grid(0), tT = tr.tau();
    const Mat psi_q = psi.topRows(n);
    const Mat psi_v = psi.bottomRows(n);

    // d p(0) / d s0 and d p(tau) / d s0 via the second partials at the ends
    const PartialBundle b0 = partials(fam, lambda, t0, tr.q.front(), tr.v.front());
    const PartialBundle bT = partials(fam, lambda, tT, tr.q.back(), tr.v.back());
    Mat dp0(n, 2 * n), dpT(n, 2 * n);
    dp0 << b0.dqv, b0.dvv;
    dpT << bT.dqv * psi_q + bT.dvv * psi_v;

    if (const auto* p = std::get_if<ProductSubspaces>(&bc)) {
        const Mat comp0 = orthogonal_complement(p->v0_basis, n);
        const Mat comp1 = orthogonal_complement(p->v1_basis, n);
        const int d0 = p->v0_basis.size() ? static_cast<int>(p->v0_basis.cols()) : 0;
        const int d1 = p->v1_basis.size() ? static_cast<int>(p->v1_basis.cols()) : 0;
        Mat j(2 * n, 2 * n);
        int row = 0;
        j.middleRows(row, comp0.cols()) << comp0.transpose(), Mat::Zero(comp0.cols(), n);
        row += comp0.cols();
        j.middleRows(row, comp1.cols()) = comp1.transpose() * psi_q;
        row += comp1.cols();
        if (d0 > 0) j.middleRows(row, d0) = p->v0_basis.transpose() * dp0;
        row += d0;
        if (d1 > 0) j.middleRows(row, d1) = p->v1_basis.transpose() * dpT;
        return j;
    }
    if (const auto* t = std::get_if<OrthogonalTwist>(&bc)) {
        Mat j(2 * n, 2 * n);
        Mat dq0(n, 2 * n);
        dq0 << t->E, Mat::Zero(n, n);
        j.topRows(n) = psi_q - dq0;
        j.bottomRows(n) = t->E.transpose().partialPivLu().solve(dp0) - dpT;
        return j;
    }
    Mat j(2 * n, 2 * n);
    j.topRows(n) << Mat::Zero(n, n), Mat::Identity(n, n);
    j.bottomRows(n) = psi_v;
    return j;
}

}  // namespace

Vec momentum(const LagrangianFamily& fam, double lambda, double t, const Vec& q, const Vec& v) {
    if (const auto* a = fam.analytic(); a && a->dv) return a->dv(lambda, t, q, v);
    return partials(fam, lambda, t, q, v).dv;
}

Vec grad_q(const LagrangianFamily& fam, double lambda, double t, const Vec& q, const Vec& v) {
    if (const auto* a = fam.analytic(); a && a->dq) return a->dq(lambda, t, q, v);
    return partials(fam, lambda, t, q, v).dq;
}

double energy(const LagrangianFamily& fam, double lambda, double t, const Vec& q, const Vec& v) {
    return momentum(fam, lambda, t, q, v).dot(v) - fam.eval(lambda, t, q, v);
}

Vec accel(const LagrangianFamily& fam, double lambda, double t, const Vec& q, const Vec& v,
          double t_fd_step) {
    const PartialBundle b = partials(fam, lambda, t, q, v);  // validates SPD dvv
    const double h = t_fd_step > 0.0 ? t_fd_step : 1e-5 * std::max(1.0, std::abs(t));
    const Vec dtv =
        (momentum(fam, lambda, t + h, q, v) - momentum(fam, lambda, t - h, q, v)) / (2.0 * h);
    return b.dvv.llt().solve(Vec(b.dq - dtv - b.dqv * v));
}

Trajectory integrate_ivp(const LagrangianFamily& fam, double lambda, const Vec& q0, const Vec& v0,
                         double tau, int steps, const IvpOptions& opt) {
    if (steps < 16) throw std::invalid_argument("integrate_ivp: steps must be >= 16");
    const double t_fd = opt.t_fd_step > 0.0 ? opt.t_fd_step : 1e-5 * std::max(1.0, tau);
    return integrate_flow(fam, lambda, q0, v0, tau, steps, opt.blowup, t_fd, false).traj;
}

Trajectory solve_bvp(const LagrangianFamily& fam, double lambda, const BoundaryCondition& bc,
                     std::pair<Vec, Vec> guess, double tau, const BvpOptions& opt) {
    const int n = fam.dim();
    validate_boundary(bc, n);
    const bool brake = std::holds_alternative<EvenPeriodic>(bc);
    const double span = brake ? 0.5 * tau : tau;
    const double t_fd = 1e-5 * std::max(1.0, tau);

    Vec s(2 * n);
    s << guess.first, guess.second;

    auto shoot = [&](const Vec& s0, bool with_var) {
        return integrate_flow(fam, lambda, s0.head(n), s0.tail(n), span, opt.steps, opt.blowup,
                              t_fd, with_var);
    };

    FlowResult cur = shoot(s, true);
    Vec f = bvp_residual(fam, lambda, bc, cur.traj);
    double fnorm = f.cwiseAbs().maxCoeff();

    int iter = 0;
    for (; iter < opt.max_iter && fnorm > opt.tol; ++iter) {
        const Mat j = bvp_jacobian(fam, lambda, bc, cur.traj, cur.psi);
        Eigen::JacobiSVD<Mat> svd(j, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        // threshold sits above the integrator noise floor so genuine nullity
        // points are flagged instead of silently pseudo-inverted
        if (sv(0) <= 0.0 || sv(sv.size() - 1) / sv(0) < 1e-10)
            throw SingularShooting("solve_bvp: shooting matrix is rank-deficient");
        const Vec delta = svd.solve(-f);

        // Armijo backtracking on the residual norm, factor 1/2
        double alpha = 1.0;
        bool accepted = false;
        for (int k = 0; k <= 30; ++k) {
            const Vec s_try = s + alpha * delta;
            FlowResult trial;
            try {
                trial = shoot(s_try, false);
            } catch (const BlowUp&) {
                alpha *= 0.5;
                continue;
            }
            const Vec f_try = bvp_residual(fam, lambda, bc, trial.traj);
            const double fn_try = f_try.cwiseAbs().maxCoeff();
            if (fn_try <= (1.0 - 1e-4 * alpha) * fnorm) {
                s = s_try;
                f = f_try;
                fnorm = fn_try;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted)
            throw NoConvergence("solve_bvp: line search could not reduce the residual");
        cur = shoot(s, true);
        f = bvp_residual(fam, lambda, bc, cur.traj);
        fnorm = f.cwiseAbs().maxCoeff();
    }
    if (fnorm > opt.tol)
        throw NoConvergence("solve_bvp: iteration cap reached before meeting tol");

    Trajectory tr = std::move(cur.traj);
    tr.bc_residual = fnorm;
    tr.newton_iterations = iter;
    if (tr.el_residual > opt.el_tol)
        throw NoConvergence(
            "solve_bvp: a-posteriori motion-equation estimate exceeds el_tol; increase steps");
    return tr;
}

}  // namespace morsebif
