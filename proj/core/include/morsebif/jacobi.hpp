#pragma once

#include <functional>
#include <vector>

#include "morsebif/boundary.hpp"
#include "morsebif/dynamics.hpp"

namespace morsebif {

/// Second-variation coefficients sampled along a trajectory:
///   P(t) = dvv L   (SPD),  Q(t) = dqv L,  R(t) = dqq L (symmetric).
///
/// The samples are the contract; `eval`, when set, is a dense evaluator used
/// instead of interpolation (exact coefficients for closed-form paths).
/// Off-sample queries otherwise use 4-point Lagrange interpolation on the
/// uniform grid, which keeps 4th-order integrators 4th order.
struct CoefficientPath {
    Vec grid;  ///< N+1 uniform times
    std::vector<Mat> P, Q, R;
    std::function<void(double t, Mat& p, Mat& q, Mat& r)> eval;

    int dim() const { return P.empty() ? 0 : static_cast<int>(P.front().rows()); }
    double t_begin() const { return grid(0); }
    double t_end() const { return grid(grid.size() - 1); }
    double spacing() const { return (t_end() - t_begin()) / (grid.size() - 1); }

    /// Coefficients at an arbitrary time inside the span.
    void at(double t, Mat& p, Mat& q, Mat& r) const;

    /// Resampled copy on [a, b] with `samples` cells (samples+1 nodes).
    CoefficientPath restricted(double a, double b, int samples) const;
};

/// Samples the family's second partials along a verified trajectory.
CoefficientPath coefficients_along(const LagrangianFamily& fam, double lambda,
                                   const Trajectory& traj);

/// Coefficient path from a closed-form evaluator (dense; also sampled).
CoefficientPath make_coefficient_path(
    std::function<void(double, Mat&, Mat&, Mat&)> eval, double t0, double t1, int samples);

/// Candidate kernel element of the second variation.
struct JacobiField {
    Vec grid;
    std::vector<Vec> y;
    std::vector<Vec> ydot;
    std::vector<Vec> momentum;  ///< P ydot + Q y
};

/// Max-norm defect of the linearized motion equation
///   d/dt (P ydot + Q y) - (Q^T ydot + R y)
/// evaluated by second-order differences on the field's grid (must coincide
/// with the coefficient grid).
double jacobi_residual(const CoefficientPath& coeffs, const JacobiField& field);

/// First-order system matrix of the linearized equation in (y, momentum)
/// variables, with momentum = P ydot + Q y:
///   A = [ -P^{-1} Q          P^{-1}     ]
///       [ R - Q^T P^{-1} Q   Q^T P^{-1} ]
/// J A is symmetric, so the flow of A is symplectic.
/// Throws NonConvexPoint when P is not SPD.
Mat linearized_system_matrix(const Mat& P, const Mat& Q, const Mat& R);

struct KernelOptions {
    double sv_ratio_tol = 1e-7;  ///< kernel cut: sigma <= tol * sigma_max
    double warn_band = 1e-5;     ///< (tol, band]: indeterminate, refine the grid
};

/// Kernel of the second variation by shooting the linear Hamiltonian system
/// from a basis of admissible initial conditions:
///   product:       y(0) in V0, momentum(0) in V0-perp (an n-parameter family);
///                  endpoint rows pin y(tau) to V1 and momentum(tau) to V1-perp
///   twist:         all 2n initial conditions; endpoint rows are
///                  (y, p)(tau) - (E y, E p)(0)
///   even-periodic: y(0) free with momentum(0) = 0 on [0, tau/2];
///                  endpoint rows pin momentum(tau/2)
/// The kernel of the endpoint-condition matrix is cut by singular values.
struct KernelBasis {
    std::vector<JacobiField> fields;
    int indeterminate = 0;  ///< singular values in the warning band
    Vec singular_values;    ///< of the endpoint-condition matrix, descending
};

KernelBasis kernel_basis(const CoefficientPath& coeffs, const BoundaryCondition& bc,
                         const KernelOptions& opt = {});

}  // namespace morsebif
