#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "morsebif/common.hpp"

namespace morsebif {

/// Differentiable family of symmetric matrices B(t) around t = 0.
struct OperatorFamily {
    int dim = 0;
    std::function<Mat(double)> B;
    std::optional<Mat> Bdot0;  ///< derivative at 0; finite differences otherwise

    /// Analytic derivative when given, else central difference with h = 1e-6.
    Mat bdot0() const;
};

/// Orthonormal basis of the near-kernel of a symmetric matrix: eigenvectors
/// with |eigenvalue| <= tol * ||B0||_2.  Columns ordered by eigenvalue.
Mat kernel_of(const Mat& b0, double tol);

/// Outcome of the index-jump prediction at a degenerate matrix B(0).
///
/// With N = dim ker B0, i0 = m^-(B0) and q the Morse index of the form
/// Q(x,y) = (x, Bdot0 y) on ker B0 (Q nondegenerate required), the index of
/// B(t) equals q + i0 for small t > 0 and (N - q) + i0 for small t < 0.
/// `observed` counts are direct eigenvalue counts at +-t_probe, with t_probe
/// halved until the Weyl bound separates the nonzero spectrum from the
/// perturbation scale and the kernel descendants have resolved signs.
struct PerturbationCheck {
    Mat ker0_basis;  ///< m x N orthonormal
    Mat Qmat;        ///< N x N symmetric
    int mQ_minus = 0;
    int i0 = 0;
    int N = 0;
    int predicted_pos = 0;  ///< index for small t > 0
    int predicted_neg = 0;  ///< index for small t < 0
    int observed_pos = 0;
    int observed_neg = 0;
    double t_probe = 0.0;

    bool agrees() const {
        return predicted_pos == observed_pos && predicted_neg == observed_neg;
    }
};

/// Throws DegenerateQ when the restricted form is singular (the formula's
/// nondegeneracy hypothesis fails).
PerturbationCheck predict_jump(const OperatorFamily& family, double tol = 1e-8);

/// Max over samples and eigenvalue indices of
///   |lambda_i(B_t) - lambda_i(B_0)| - ||B_t - B_0||_2,
/// which is <= 0 in exact arithmetic (Weyl perturbation bound).
double weyl_check(const OperatorFamily& family, const std::vector<double>& t_samples);

struct InertiaTriple {
    int neg = 0, zero = 0, pos = 0;
    bool operator==(const InertiaTriple&) const = default;
};

/// Inertia of the pencil K x = mu M x under two SPD Grams.  The triples are
/// equal by Sylvester inertia; both are returned for checking.
std::pair<InertiaTriple, InertiaTriple> gram_swap_inertia(const Mat& K, const Mat& M1,
                                                          const Mat& M2, double tol = 1e-10);

/// Seeded random family B(t) = V diag(d + t e) V^T + t^2 S with controlled
/// kernel dimension in {1, 2, 3}, dim in [3, max_dim], nonzero d-entries in
/// +-[0.3, 2], e-entries in +-[0.3, 1.5] (so Q is nondegenerate by
/// construction), V a random orthogonal matrix and S symmetric with
/// ||S||_2 <= 1.  Reproducible from the seed.
OperatorFamily random_operator_family(std::uint64_t seed, int max_dim = 8);

}  // namespace morsebif
