#pragma once

#include <variant>

#include "morsebif/common.hpp"

namespace morsebif {

/// Endpoint data (x(0), x(tau)) constrained to the product V0 x V1 of two
/// linear subspaces (given by orthonormal column bases), optionally shifted
/// by affine anchors.  The anchors only matter to the nonlinear BVP solver;
/// linearized machinery (forms, kernels, focal data) sees the subspaces.
struct ProductSubspaces {
    Mat v0_basis;  ///< n x d0, orthonormal columns (d0 may be 0)
    Mat v1_basis;  ///< n x d1
    Vec offset0;   ///< anchor of the start set, default 0
    Vec offset1;   ///< anchor of the end set, default 0
};

/// Twist class x(tau) = E x(0) with E orthogonal.  E = I is the periodic case.
struct OrthogonalTwist {
    Mat E;  ///< n x n, E^T E = I within 1e-12
};

/// Even tau-periodic (brake) class.  Represented on the half interval
/// [0, tau/2]; an even periodic C^1 field is determined by its restriction
/// there, and the action over a full period is twice the half-interval
/// integral.
struct EvenPeriodic {};

using BoundaryCondition = std::variant<ProductSubspaces, OrthogonalTwist, EvenPeriodic>;

/// Checks basis orthonormality / orthogonality invariants (1e-12) and shape
/// against the configuration dimension n.  Throws DimensionMismatch or
/// std::invalid_argument.
void validate_boundary(const BoundaryCondition& bc, int n);

/// Replaces the columns with an orthonormal basis of their span (QR).
Mat orthonormalize_columns(const Mat& m);

/// Orthonormal basis of the orthogonal complement of span(basis) in R^n;
/// basis must have orthonormal columns.
Mat orthogonal_complement(const Mat& basis, int n);

/// Basis of the admissible endpoint set R in R^{2n}, as (x(0); x(tau)) stacked.
/// The even-periodic class has no endpoint subspace; it is flagged instead.
struct EndpointSubspace {
    bool even_periodic = false;
    Mat basis;  ///< 2n x d, orthonormal columns; empty when even_periodic
};
EndpointSubspace endpoint_subspace(const BoundaryCondition& bc, int n);

/// Natural (transversality) residual built from the endpoint momenta.
///   product:  v0_basis^T a  stacked over  v1_basis^T b
///   twist:    (E^T)^{-1} a - b
///   brake:    (a; b) stacked; callers supply the turning-time velocities
///             v(0), v(tau/2) in place of momenta (equivalent at a turning
///             point since dL/dv vanishes with v there).
/// Linear in (a, b).
Vec natural_residual(const BoundaryCondition& bc, const Vec& dvl_at_0, const Vec& dvl_at_tau);

/// Lagrangian-plane pair for the focal engine, in (x; y) phase coordinates:
/// U spans {(v,0) : v in V0} + {(0,w) : w in V0-perp},  V = {0} x R^n.
struct ConormalPair {
    Mat U_basis;  ///< 2n x n
    Mat V_basis;  ///< 2n x n
};

/// Only the product class carries the focal-theorem data; other classes
/// throw UnsupportedBoundary.
ConormalPair conormal_pair(const BoundaryCondition& bc, int n);

}  // namespace morsebif
