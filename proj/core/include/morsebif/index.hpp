#pragma once

#include <string>
#include <vector>

#include "morsebif/jacobi.hpp"

namespace morsebif {

/// Integer index/nullity of the second variation with method provenance.
struct IndexReport {
    int m_minus = 0;
    int m_null = 0;
    std::vector<double> near_zero_eigs;  ///< pencil eigenvalues counted as zero
    std::string method;                  ///< "fem" | "focal"
    int grid_size = 0;
    double tolerance = 0.0;
    int indeterminate = 0;  ///< eigenvalues in the warning band; refine if > 0
};

enum class GramKind { W12, L2 };

struct AssembledForms {
    Mat K;  ///< symmetric stiffness of the second variation
    Mat M;  ///< SPD Gram of the ambient inner product
    int cells = 0;
    double h = 0.0;
};

/// Piecewise-linear nodal discretization of the second variation restricted
/// to the admissible subspace of the boundary class:
///   product:       endpoint nodal values constrained to V0 / V1
///   twist:         the last node identified with E times the first
///   even-periodic: free half-interval nodes with the mirror factor 2
/// K integrates P ydot zdot + Q y zdot + Q^T ydot z + R y z; M is the
/// W^{1,2} Gram (or L^2 when requested).  Element integrals use Simpson
/// quadrature of the coefficient samples.
AssembledForms assemble_forms(const CoefficientPath& coeffs, const BoundaryCondition& bc,
                              int cells, GramKind gram = GramKind::W12);

/// Nullity threshold for the discretized pencil: a true zero eigenvalue is
/// shifted O(h^2) by the discretization.  The constant is calibrated so the
/// degenerate harmonic oscillator (omega tau = pi) reports m0 = 1 at grids
/// >= 128 under either Gram.
double nullity_tolerance(double h);

/// Inertia counts of the symmetric generalized eigenproblem K x = mu M x:
/// m_minus = #{mu < -tol}, m_null = #{|mu| <= tol}.  By Sylvester inertia the
/// counts agree for any SPD Gram.  Eigenvalues in (tol, 10 tol] are flagged
/// indeterminate.  Throws IllConditioned when cond(M) exceeds 1e12.
IndexReport morse_index_fem(const Mat& K, const Mat& M, double tol);

/// Fundamental solution of the linear Hamiltonian system on the coefficient
/// grid, Phi(0) = I.  The system matrix is infinitesimally symplectic, so
/// every sample satisfies Phi^T J Phi = J up to integration error; the max
/// defect is recorded.  The coefficient path is kept for refinement queries.
struct FundamentalMatrixPath {
    Vec grid;
    std::vector<Mat> phi;  ///< 2n x 2n samples
    double symplectic_defect = 0.0;
    CoefficientPath coeffs;

    int dim() const { return phi.empty() ? 0 : static_cast<int>(phi.front().rows()) / 2; }
    /// Phi(0, s) at an arbitrary s, re-integrating from the nearest earlier node.
    Mat at(double s) const;
};

FundamentalMatrixPath fundamental_matrix(const CoefficientPath& coeffs);

struct FocalInstant {
    double s = 0.0;
    int multiplicity = 0;
};

/// Focal instants with multiplicities; cumulative(lambda) is the step
/// function summing multiplicities strictly inside (0, lambda).
struct FocalReport {
    std::vector<FocalInstant> instants;
    int cumulative_at(double lambda) const;
};

/// Instants s where U meets Phi(0,s)^{-1} V, i.e. where the n x n matrix
/// Pi_x Phi(0,s) U_basis drops rank (Pi_x = projection to the configuration
/// block).  Detection runs on the grid by determinant sign changes and dips
/// of the smallest singular value; each hit is refined inside its cell by
/// interval halving on that singular value.  s = 0 is excluded.
FocalReport focal_points(const FundamentalMatrixPath& phi, const ConormalPair& pair,
                         double tol = 1e-7);

/// Morse index on [0, lambda] by the focal route: the sum of multiplicities
/// over instants strictly inside (0, lambda).
int index_via_focal(const FocalReport& report, double lambda);

}  // namespace morsebif
