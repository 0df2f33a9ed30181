#pragma once

#include <utility>
#include <vector>

#include "morsebif/boundary.hpp"
#include "morsebif/lagrangian.hpp"

namespace morsebif {

/// Sampled solution of the motion equation at a fixed parameter value.
///
/// el_residual is an a-posteriori estimate: the momentum dL/dv is second-order
/// differenced along the stored samples and compared with dL/dq, so it scales
/// like h^2 even for an exact solution.  bc_residual is the max-norm of the
/// combined boundary residual (0 for plain IVP output).
struct Trajectory {
    double lambda = 0.0;
    Vec grid;             ///< N+1 strictly increasing times, grid[0] = 0
    std::vector<Vec> q;   ///< N+1 positions
    std::vector<Vec> v;   ///< N+1 velocities
    double el_residual = 0.0;
    double bc_residual = 0.0;
    int newton_iterations = 0;

    int steps() const { return static_cast<int>(grid.size()) - 1; }
    double tau() const { return grid(grid.size() - 1); }
};

/// Momentum dL/dv at a point (analytic when available).
Vec momentum(const LagrangianFamily& fam, double lambda, double t, const Vec& q, const Vec& v);

/// Configuration gradient dL/dq at a point.
Vec grad_q(const LagrangianFamily& fam, double lambda, double t, const Vec& q, const Vec& v);

/// Energy <dL/dv, v> - L; constant along solutions of autonomous families.
double energy(const LagrangianFamily& fam, double lambda, double t, const Vec& q, const Vec& v);

/// Explicit second-order form of the motion equation,
///   qddot = (dvv L)^{-1} [ dL/dq - d(dL/dv)/dt - dqv L * v ],
/// with the time derivative of the momentum map obtained by central
/// differencing in t (step t_fd_step; <= 0 selects 1e-5 * max(1, |t|)).
/// Throws NonConvexPoint when dvv L is not SPD.
Vec accel(const LagrangianFamily& fam, double lambda, double t, const Vec& q, const Vec& v,
          double t_fd_step = 0.0);

struct IvpOptions {
    double blowup = 1e6;      ///< throw BlowUp when max(|q|_inf, |v|_inf) exceeds this
    double t_fd_step = 0.0;   ///< forwarded to accel; <= 0 means 1e-5 * max(1, tau)
};

/// Classical fixed-step 4th-order integration of (qdot, vdot) = (v, accel).
/// Requires steps >= 16.
Trajectory integrate_ivp(const LagrangianFamily& fam, double lambda, const Vec& q0,
                         const Vec& v0, double tau, int steps, const IvpOptions& opt = {});

struct BvpOptions {
    int steps = 1024;
    double tol = 1e-10;     ///< Newton / boundary residual target (max-norm)
    double el_tol = 1e-4;   ///< gate on the a-posteriori motion-equation estimate
    int max_iter = 50;
    double blowup = 1e6;
};

/// Damped-Newton shooting for the boundary value problem.  The residual
/// stacks the essential endpoint conditions with the natural (transversality)
/// residual of the boundary class; the Newton matrix comes from the
/// variational equations integrated alongside the state.
///
/// For the even-periodic class the problem lives on [0, tau/2]: the returned
/// trajectory covers the half interval and the residual pins v(0) and
/// v(tau/2) (the turning-time velocities).
///
/// Throws NoConvergence at the iteration cap and SingularShooting when the
/// shooting matrix is rank-deficient (typically at a degenerate branch
/// point; scanning callers should record and continue).
Trajectory solve_bvp(const LagrangianFamily& fam, double lambda, const BoundaryCondition& bc,
                     std::pair<Vec, Vec> guess, double tau, const BvpOptions& opt = {});

}  // namespace morsebif
