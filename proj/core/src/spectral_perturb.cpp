#include "morsebif/spectral_perturb.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace morsebif {

namespace {

Vec sym_eigenvalues(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double spectral_norm(const Mat& m) {
    const Vec ev = sym_eigenvalues(0.5 * (m + m.transpose()));
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

void check_symmetric(const Mat& m, const char* what) {
    const double scale = std::max(1.0, max_abs(m));
    if (max_abs(Mat(m - m.transpose())) > 1e-12 * scale)
        throw std::invalid_argument(std::string(what) + ": matrix is not symmetric");
}

}  // namespace

Mat OperatorFamily::bdot0() const {
    if (Bdot0) return *Bdot0;
    const double h = 1e-6;
    return Mat((B(h) - B(-h)) / (2.0 * h));
}

Mat kernel_of(const Mat& b0, double tol) {
    check_symmetric(b0, "kernel_of");
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (b0 + b0.transpose()));
    const Vec& ev = es.eigenvalues();
    const double norm = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    std::vector<int> cols;
    for (int i = 0; i < ev.size(); ++i)
        if (std::abs(ev(i)) <= tol * std::max(norm, 1e-300)) cols.push_back(i);
    Mat out(b0.rows(), static_cast<int>(cols.size()));
    for (size_t i = 0; i < cols.size(); ++i) out.col(i) = es.eigenvectors().col(cols[i]);
    return out;
}

PerturbationCheck predict_jump(const OperatorFamily& family, double tol) {
    if (!family.B) throw std::invalid_argument("predict_jump: family.B is required");
    const Mat b0 = family.B(0.0);
    check_symmetric(b0, "predict_jump");
    const int m = static_cast<int>(b0.rows());

    PerturbationCheck chk;
    chk.ker0_basis = kernel_of(b0, tol);
    chk.N = static_cast<int>(chk.ker0_basis.cols());
    if (chk.N == 0) throw DegenerateQ("predict_jump: B(0) has no kernel to perturb");

    const Vec ev0 = sym_eigenvalues(b0);
    const double norm0 = std::max(std::abs(ev0(0)), std::abs(ev0(ev0.size() - 1)));
    double gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < ev0.size(); ++i) {
        const double a = std::abs(ev0(i));
        if (a > tol * norm0) {
            gap = std::min(gap, a);
            if (ev0(i) < 0.0) ++chk.i0;
        }
    }

    chk.Qmat = chk.ker0_basis.transpose() * family.bdot0() * chk.ker0_basis;
    chk.Qmat = 0.5 * (chk.Qmat + chk.Qmat.transpose()).eval();
    const Vec qev = sym_eigenvalues(chk.Qmat);
    const double qmin = qev.cwiseAbs().minCoeff();
    const double qnorm = qev.cwiseAbs().maxCoeff();
    if (qmin <= tol * std::max(qnorm, 1.0))
        throw DegenerateQ("predict_jump: restricted form Q is singular");
    for (int i = 0; i < qev.size(); ++i)
        if (qev(i) < 0.0) ++chk.mQ_minus;

    chk.predicted_pos = chk.mQ_minus + chk.i0;
    chk.predicted_neg = (chk.N - chk.mQ_minus) + chk.i0;

    // Adaptive probe: halve until the perturbation is well inside the gap of
    // the nonzero spectrum (so Weyl forbids crossings from it) and the kernel
    // descendants are resolved away from zero at first order.
    double t = 1e-2;
    int observed_pos = 0, observed_neg = 0;
    bool settled = false;
    for (int halvings = 0; halvings < 50; ++halvings, t *= 0.5) {
        const Mat bp = family.B(t), bm = family.B(-t);
        const double shift = std::max(spectral_norm(Mat(bp - b0)), spectral_norm(Mat(bm - b0)));
        if (std::isfinite(gap) && shift >= 0.5 * gap) continue;

        const Vec evp = sym_eigenvalues(bp), evm = sym_eigenvalues(bm);
        const double resolve = 0.1 * t * qmin;
        bool ok = true;
        auto count_neg = [&](const Vec& ev) {
            int neg = 0;
            for (int i = 0; i < ev.size(); ++i) {
                if (std::abs(ev(i)) <= shift && std::abs(ev(i)) < resolve) ok = false;
                if (ev(i) < 0.0) ++neg;
            }
            return neg;
        };
        observed_pos = count_neg(evp);
        observed_neg = count_neg(evm);
        if (ok) {
            settled = true;
            break;
        }
    }
    if (!settled)
        throw DegenerateQ("predict_jump: probe could not resolve the kernel eigenvalues");
    chk.t_probe = t;
    chk.observed_pos = observed_pos;
    chk.observed_neg = observed_neg;
    return chk;
}

double weyl_check(const OperatorFamily& family, const std::vector<double>& t_samples) {
    const Mat b0 = family.B(0.0);
    const Vec ev0 = sym_eigenvalues(b0);
    double defect = -std::numeric_limits<double>::infinity();
    for (double t : t_samples) {
        const Mat bt = family.B(t);
        const double shift = spectral_norm(Mat(bt - b0));
        const Vec evt = sym_eigenvalues(bt);
        for (int i = 0; i < ev0.size(); ++i)
            defect = std::max(defect, std::abs(evt(i) - ev0(i)) - shift);
    }
    return defect;
}

namespace {

InertiaTriple pencil_inertia(const Mat& k, const Mat& m, double tol) {
    Eigen::LLT<Mat> llt(m);
    if (llt.info() != Eigen::Success)
        throw IllConditioned("gram_swap_inertia: Gram is not positive definite");
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(k, m, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    const Vec& mu = ges.eigenvalues();
    InertiaTriple out;
    for (int i = 0; i < mu.size(); ++i) {
        if (mu(i) < -tol)
            ++out.neg;
        else if (mu(i) > tol)
            ++out.pos;
        else
            ++out.zero;
    }
    return out;
}

}  // namespace

std::pair<InertiaTriple, InertiaTriple> gram_swap_inertia(const Mat& k, const Mat& m1,
                                                          const Mat& m2, double tol) {
    check_symmetric(k, "gram_swap_inertia");
    return {pencil_inertia(k, m1, tol), pencil_inertia(k, m2, tol)};
}

OperatorFamily random_operator_family(std::uint64_t seed, int max_dim) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dim_dist(3, std::max(3, max_dim));
    const int m = dim_dist(rng);
    std::uniform_int_distribution<int> ker_dist(1, std::min(3, m - 1));
    const int kdim = ker_dist(rng);

    std::uniform_real_distribution<double> mag_d(0.3, 2.0);
    std::uniform_real_distribution<double> mag_e(0.3, 1.5);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto sign = [&]() { return rng() & 1u ? 1.0 : -1.0; };

    Vec d = Vec::Zero(m), e(m);
    for (int i = 0; i < m; ++i) {
        if (i >= kdim) d(i) = sign() * mag_d(rng);
        e(i) = sign() * mag_e(rng);
    }

    Mat g(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) g(i, j) = unit(rng);
    const Mat v = Eigen::HouseholderQR<Mat>(g).householderQ() * Mat::Identity(m, m);

    Mat s(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) s(i, j) = unit(rng);
    s = 0.5 * (s + s.transpose()).eval();
    const double snorm = spectral_norm(s);
    if (snorm > 1.0) s /= snorm;

    OperatorFamily fam;
    fam.dim = m;
    fam.B = [v, d, e, s](double t) {
        return Mat(v * (d + t * e).asDiagonal() * v.transpose() + t * t * s);
    };
    fam.Bdot0 = Mat(v * e.asDiagonal() * v.transpose());
    return fam;
}

}  // namespace morsebif
