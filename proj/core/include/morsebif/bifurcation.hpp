#pragma once

#include <functional>
#include <string>
#include <vector>

#include "morsebif/index.hpp"

namespace morsebif {

/// Supplies the verified trajectory of the solution branch at a parameter
/// value (closed-form branch or warm-started BVP continuation).
using BranchProvider = std::function<Trajectory(double lambda)>;

/// Branch provider for a trivial branch x == 0 (valid whenever the zero
/// curve is a critical point of the family for the boundary class).  For the
/// even-periodic class the trajectory covers [0, tau/2].
BranchProvider zero_branch(const LagrangianFamily& fam, const BoundaryCondition& bc,
                           double tau, int steps);

/// Warm-started continuation: each query solves the BVP seeded with the
/// previous solution (plumbing, not part of the scan's contract).
BranchProvider continuation_branch(const LagrangianFamily& fam, const BoundaryCondition& bc,
                                   double tau, std::pair<Vec, Vec> seed_guess,
                                   const BvpOptions& opt = {});

struct ScanOptions {
    int fem_cells = 512;
    double tol_scale = 1.0;     ///< scales the h^2 nullity threshold
    double locate_tol = 1e-8;   ///< bisection width for candidate instants
    int max_refine = 2;         ///< grid doublings on indeterminate nullity
    int threads = 0;            ///< 0: hardware concurrency
    GramKind gram = GramKind::W12;
};

struct Candidate {
    double mu = 0.0;
    int left_index = 0;   ///< m^- on the deleted left half-neighborhood
    int right_index = 0;
    int left_null = 0;
    int right_null = 0;
    int nullity_at_mu = 0;
    bool necessary_ok = false;
    bool sufficient_ii3_ok = false;
    std::string note;
};

struct BifurcationReport {
    Vec lambdas;
    std::vector<int> m_minus;
    std::vector<int> m_null;
    std::vector<std::string> errors;  ///< per-lambda failures; empty string = ok
    std::vector<Candidate> candidates;
};

/// (m^-, m^0) of the branch at one parameter value by the discretized form,
/// refining the grid while the nullity is indeterminate.
IndexReport branch_index_at(const LagrangianFamily& fam, const BranchProvider& branch,
                            const BoundaryCondition& bc, double lambda,
                            const ScanOptions& opt = {});

/// Scans the branch over the parameter grid, locates index jumps between
/// adjacent grid points, refines each by bisection and attaches certificates.
/// Per-lambda solver failures are recorded and the scan continues.
BifurcationReport branch_scan(const LagrangianFamily& fam, const BranchProvider& branch,
                              const BoundaryCondition& bc, const Vec& lambda_grid,
                              const ScanOptions& opt = {});

/// Bisection on the integer index jump between lambda_lo and lambda_hi
/// (both must be nondegenerate with distinct indices).  Returns the located
/// instant; its nullity is verified positive within the guard band.
/// Throws LostJump when the jump disappears under refinement.
double locate_mu(const LagrangianFamily& fam, const BranchProvider& branch,
                 const BoundaryCondition& bc, double lambda_lo, double lambda_hi,
                 double tol, const ScanOptions& opt = {});

struct CertFlags {
    bool necessary_ok = false;
    bool sufficient_ii3_ok = false;
    std::string note;
};

/// Certificates from the index data on the two deleted half-neighborhoods
/// and at the candidate itself:
///   necessary:   m^0(mu) > 0
///   sufficient:  the intervals [m^-, m^- + m^0] of the two sides are
///                disjoint and at least one side is nondegenerate
/// The note records when the one-sided data matches the alternatives-type
/// statement (both sides nondegenerate with indices m^-(mu) and
/// m^-(mu) + m^0(mu)).
CertFlags certify(const IndexReport& left, const IndexReport& right, const IndexReport& at_mu);

/// Effective q-Hessian field of the parameter derivative of the perturbation
/// along the branch (for a perturbation lambda * W(t, q) this is Hess_q W).
using HessField = std::function<Mat(double t, const Vec& q)>;

struct PerturbPrediction {
    int index_for_positive = 0;  ///< m^- for small lambda > 0
    int index_for_negative = 0;  ///< m^- for small lambda < 0
    bool restricted_form_positive = false;
};

/// Sign-definite perturbation predictor at a degenerate branch point: the
/// form int <HessW(t, x(t)) xi, xi> dt is assembled on the kernel basis; if
/// it is positive definite the one-sided indices are (m^-, m^- + m^0) for
/// (lambda > 0, lambda < 0), and swapped when negative definite.
/// Throws IndefiniteRestriction when the restricted form has mixed signs
/// (use the general finite-dimensional jump formula instead).
PerturbPrediction hessian_perturbation_predict(const LagrangianFamily& fam0,
                                               const HessField& hess_w,
                                               const Trajectory& branch_point,
                                               const BoundaryCondition& bc,
                                               const std::vector<JacobiField>& kernel,
                                               const ScanOptions& opt = {});

}  // namespace morsebif
