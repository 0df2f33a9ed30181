#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace morsebif {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Base class for all solver-level failures.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The velocity Hessian of the Lagrangian has an eigenvalue <= 0 at a
/// sampled point, so the strict-convexity assumption is violated there.
struct NonConvexPoint : SolverError {
    using SolverError::SolverError;
};

/// A query point lies outside the declared domain of a family.
struct DomainError : SolverError {
    using SolverError::SolverError;
};

struct DimensionMismatch : SolverError {
    using SolverError::SolverError;
};

/// Trajectory norm exceeded the configured bound during integration.
struct BlowUp : SolverError {
    using SolverError::SolverError;
};

/// Newton shooting hit its iteration cap without meeting the tolerance.
struct NoConvergence : SolverError {
    using SolverError::SolverError;
};

/// Shooting Jacobian is rank-deficient.  This typically happens exactly at
/// a degenerate (nonzero-nullity) parameter value; callers scanning a branch
/// should treat it as "degenerate branch point", not as a hard failure.
struct SingularShooting : SolverError {
    using SolverError::SolverError;
};

/// Operation requested for a boundary class it does not support.
struct UnsupportedBoundary : SolverError {
    using SolverError::SolverError;
};

/// Gram matrix condition estimate exceeds the trusted range.
struct IllConditioned : SolverError {
    using SolverError::SolverError;
};

/// The restriction of the perturbation form to the kernel is singular, so
/// the index-jump formula does not apply.
struct DegenerateQ : SolverError {
    using SolverError::SolverError;
};

/// The perturbation form has both signs on the kernel; the sign-definite
/// predictor is inapplicable.
struct IndefiniteRestriction : SolverError {
    using SolverError::SolverError;
};

/// Bisection on an index jump lost the jump after refinement (grid artifact).
struct LostJump : SolverError {
    using SolverError::SolverError;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Max absolute entry of a matrix.
inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

/// Standard symplectic matrix J = [[0, I], [-I, 0]] of order 2n.
inline Mat symplectic_j(int n) {
    Mat j = Mat::Zero(2 * n, 2 * n);
    j.topRightCorner(n, n) = Mat::Identity(n, n);
    j.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
    return j;
}

}  // namespace morsebif
