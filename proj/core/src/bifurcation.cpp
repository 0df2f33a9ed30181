#include "morsebif/bifurcation.hpp"

#include <atomic>
#include <cmath>
#include <memory>
#include <mutex>
#include <thread>

namespace morsebif {

BranchProvider zero_branch(const LagrangianFamily& fam, const BoundaryCondition& bc,
                           double tau, int steps) {
    const int n = fam.dim();
    const bool brake = std::holds_alternative<EvenPeriodic>(bc);
    const double span = brake ? 0.5 * tau : tau;
    return [n, span, steps](double lambda) {
        Trajectory tr;
        tr.lambda = lambda;
        tr.grid = Vec::LinSpaced(steps + 1, 0.0, span);
        tr.q.assign(steps + 1, Vec::Zero(n));
        tr.v.assign(steps + 1, Vec::Zero(n));
        return tr;
    };
}

BranchProvider continuation_branch(const LagrangianFamily& fam, const BoundaryCondition& bc,
                                   double tau, std::pair<Vec, Vec> seed_guess,
                                   const BvpOptions& opt) {
    auto state = std::make_shared<std::pair<Vec, Vec>>(std::move(seed_guess));
    auto guard = std::make_shared<std::mutex>();
    return [&fam, bc, tau, opt, state, guard](double lambda) {
        std::pair<Vec, Vec> guess;
        {
            std::lock_guard<std::mutex> hold(*guard);
            guess = *state;
        }
        Trajectory tr = solve_bvp(fam, lambda, bc, guess, tau, opt);
        {
            std::lock_guard<std::mutex> hold(*guard);
            *state = {tr.q.front(), tr.v.front()};
        }
        return tr;
    };
}

IndexReport branch_index_at(const LagrangianFamily& fam, const BranchProvider& branch,
                            const BoundaryCondition& bc, double lambda, const ScanOptions& opt) {
    const Trajectory tr = branch(lambda);
    const CoefficientPath coeffs = coefficients_along(fam, lambda, tr);
    int cells = opt.fem_cells;
    for (int attempt = 0;; ++attempt) {
        const double h = (coeffs.t_end() - coeffs.t_begin()) / cells;
        const AssembledForms forms = assemble_forms(coeffs, bc, cells, opt.gram);
        IndexReport rep =
            morse_index_fem(forms.K, forms.M, opt.tol_scale * nullity_tolerance(h));
        rep.grid_size = cells;
        if (rep.indeterminate == 0 || attempt >= opt.max_refine) return rep;
        cells *= 2;  // indeterminate nullity: refine instead of answering silently
    }
}

namespace {

struct LocateResult {
    double mu = 0.0;
    IndexReport left, right, at_mu;
};

// Sign count of the pencil with a near-zero threshold: the discretization
// shifts a true zero eigenvalue by O(h^2), so near the crossing the h^2
// nullity band is an interval of parameters, useless for bisection.  The
// plain eigenvalue-sign count still jumps at a single (grid-dependent)
// parameter lambda*(h) = mu + C h^2, which two grids extrapolate away.
int fine_m_minus(const LagrangianFamily& fam, const BranchProvider& branch,
                 const BoundaryCondition& bc, double lambda, int cells, GramKind gram) {
    const Trajectory tr = branch(lambda);
    const CoefficientPath coeffs = coefficients_along(fam, lambda, tr);
    const AssembledForms forms = assemble_forms(coeffs, bc, cells, gram);
    return morse_index_fem(forms.K, forms.M, 1e-10).m_minus;
}

double fine_crossing(const LagrangianFamily& fam, const BranchProvider& branch,
                     const BoundaryCondition& bc, double lo, double hi, int cells, double width,
                     GramKind gram) {
    int flo = fine_m_minus(fam, branch, bc, lo, cells, gram);
    const int fhi = fine_m_minus(fam, branch, bc, hi, cells, gram);
    if (flo == fhi)
        throw LostJump("locate_mu: jump lost at the fine threshold (grid artifact)");
    while (hi - lo > width) {
        const double mid = 0.5 * (lo + hi);
        const int fmid = fine_m_minus(fam, branch, bc, mid, cells, gram);
        if (fmid == flo)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

LocateResult locate_mu_impl(const LagrangianFamily& fam, const BranchProvider& branch,
                            const BoundaryCondition& bc, double lo, double hi, double tol,
                            const ScanOptions& opt) {
    IndexReport rlo = branch_index_at(fam, branch, bc, lo, opt);
    IndexReport rhi = branch_index_at(fam, branch, bc, hi, opt);
    if (rlo.m_null != 0 || rhi.m_null != 0)
        throw LostJump("locate_mu: bracket endpoints must be nondegenerate");
    if (rlo.m_minus == rhi.m_minus)
        throw LostJump("locate_mu: no index jump across the bracket");

    const double lo0 = lo, hi0 = hi;

    // Phase 1: integer bisection at the production nullity threshold, keeping
    // the bracket endpoints nondegenerate.  Stop as soon as a probe enters
    // the guard band around the instant.
    const double width_floor = std::max(tol, 1e-3 * (hi - lo));
    while (hi - lo > width_floor) {
        const double mid = 0.5 * (lo + hi);
        const IndexReport rmid = branch_index_at(fam, branch, bc, mid, opt);
        if (rmid.m_null > 0 || rmid.indeterminate > 0) break;
        if (rmid.m_minus == rlo.m_minus) {
            lo = mid;
            rlo = rmid;
        } else {
            hi = mid;
            rhi = rmid;
        }
        if (rlo.m_minus == rhi.m_minus)
            throw LostJump("locate_mu: jump lost under refinement (grid artifact)");
    }

    // Phase 2: locate the sign-count crossing on two grids and extrapolate
    // the O(h^2) discretization shift away.
    const double width = std::max(0.02 * tol, 4.0 * std::numeric_limits<double>::epsilon() *
                                                  std::max({1.0, std::abs(lo), std::abs(hi)}));
    const int cells = std::max(64, opt.fem_cells);
    double star_coarse, star_fine;
    try {
        star_coarse = fine_crossing(fam, branch, bc, lo, hi, cells / 2, width, opt.gram);
        star_fine = fine_crossing(fam, branch, bc, lo, hi, cells, width, opt.gram);
    } catch (const LostJump&) {
        // The grid-shifted crossing can sit just outside a tight Phase-1
        // bracket; retry on the original one.
        star_coarse = fine_crossing(fam, branch, bc, lo0, hi0, cells / 2, width, opt.gram);
        star_fine = fine_crossing(fam, branch, bc, lo0, hi0, cells, width, opt.gram);
    }
    double mu = (4.0 * star_fine - star_coarse) / 3.0;
    mu = std::min(std::max(mu, lo0), hi0);

    LocateResult res;
    res.mu = mu;
    res.left = rlo;
    res.right = rhi;
    res.at_mu = branch_index_at(fam, branch, bc, mu, opt);
    // Necessary condition at the located instant, within the guard band.
    if (res.at_mu.m_null == 0 && res.at_mu.indeterminate == 0)
        throw LostJump("locate_mu: located instant has no nullity within the guard band");
    return res;
}

}  // namespace

double locate_mu(const LagrangianFamily& fam, const BranchProvider& branch,
                 const BoundaryCondition& bc, double lambda_lo, double lambda_hi, double tol,
                 const ScanOptions& opt) {
    return locate_mu_impl(fam, branch, bc, lambda_lo, lambda_hi, tol, opt).mu;
}

CertFlags certify(const IndexReport& left, const IndexReport& right, const IndexReport& at_mu) {
    CertFlags flags;
    flags.necessary_ok = at_mu.m_null > 0;

    const int l_lo = left.m_minus, l_hi = left.m_minus + left.m_null;
    const int r_lo = right.m_minus, r_hi = right.m_minus + right.m_null;
    const bool disjoint = (l_hi < r_lo) || (r_hi < l_lo);
    const bool one_side_clean = (left.m_null == 0) || (right.m_null == 0);
    flags.sufficient_ii3_ok = disjoint && one_side_clean;

    if (!disjoint) {
        flags.note = "index intervals overlap; no candidate";
    } else if (!one_side_clean) {
        flags.note = "criterion (ii)-type, not certified: both sides degenerate";
    } else if (left.m_null == 0 && right.m_null == 0 &&
               std::min(l_lo, r_lo) == at_mu.m_minus &&
               std::max(l_lo, r_lo) == at_mu.m_minus + at_mu.m_null) {
        flags.note = "Rabinowitz-type alternatives apply: one-sided indices are m-(mu) and "
                     "m-(mu)+m0(mu)";
    } else {
        flags.note = "index jump with one nondegenerate side";
    }
    return flags;
}

BifurcationReport branch_scan(const LagrangianFamily& fam, const BranchProvider& branch,
                              const BoundaryCondition& bc, const Vec& lambda_grid,
                              const ScanOptions& opt) {
    const int count = static_cast<int>(lambda_grid.size());
    BifurcationReport rep;
    rep.lambdas = lambda_grid;
    rep.m_minus.assign(count, 0);
    rep.m_null.assign(count, 0);
    rep.errors.assign(count, "");

    // Per-lambda work is independent; results are merged by index so the
    // report does not depend on completion order.
    std::atomic<int> next{0};
    const unsigned hw = std::thread::hardware_concurrency();
    const int workers =
        std::max(1, opt.threads > 0 ? opt.threads : static_cast<int>(hw ? hw : 1));
    auto work = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                const IndexReport r = branch_index_at(fam, branch, bc, lambda_grid(i), opt);
                rep.m_minus[i] = r.m_minus;
                rep.m_null[i] = r.m_null;
            } catch (const std::exception& err) {
                rep.errors[i] = err.what();
            }
        }
    };
    if (workers == 1 || count < 4) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    // Candidates between adjacent valid grid points where m^- jumps.  If an
    // endpoint is degenerate, widen the bracket to its nondegenerate
    // neighbor.
    for (int i = 0; i + 1 < count; ++i) {
        if (!rep.errors[i].empty() || !rep.errors[i + 1].empty()) continue;
        if (rep.m_minus[i] == rep.m_minus[i + 1] && rep.m_null[i] == 0 && rep.m_null[i + 1] == 0)
            continue;

        int li = i, ri = i + 1;
        while (li > 0 && (rep.m_null[li] > 0 || !rep.errors[li].empty())) --li;
        while (ri + 1 < count && (rep.m_null[ri] > 0 || !rep.errors[ri].empty())) ++ri;
        if (rep.m_null[li] > 0 || rep.m_null[ri] > 0) continue;
        if (rep.m_minus[li] == rep.m_minus[ri]) continue;
        if (!rep.candidates.empty() && rep.candidates.back().mu >= lambda_grid(li)) continue;

        try {
            const LocateResult loc =
                locate_mu_impl(fam, branch, bc, lambda_grid(li), lambda_grid(ri),
                               opt.locate_tol, opt);
            const CertFlags flags = certify(loc.left, loc.right, loc.at_mu);
            Candidate cand;
            cand.mu = loc.mu;
            cand.left_index = loc.left.m_minus;
            cand.right_index = loc.right.m_minus;
            cand.left_null = loc.left.m_null;
            cand.right_null = loc.right.m_null;
            cand.nullity_at_mu = std::max(loc.at_mu.m_null, loc.at_mu.indeterminate);
            cand.necessary_ok = flags.necessary_ok || loc.at_mu.indeterminate > 0;
            cand.sufficient_ii3_ok = flags.sufficient_ii3_ok;
            cand.note = flags.note;
            rep.candidates.push_back(std::move(cand));
        } catch (const LostJump&) {
            // grid artifact; nothing to certify
        }
        i = ri - 1;
    }
    return rep;
}

PerturbPrediction hessian_perturbation_predict(const LagrangianFamily& fam0,
                                               const HessField& hess_w,
                                               const Trajectory& branch_point,
                                               const BoundaryCondition& bc,
                                               const std::vector<JacobiField>& kernel,
                                               const ScanOptions& opt) {
    if (kernel.empty())
        throw std::invalid_argument("hessian_perturbation_predict: empty kernel");
    const int k = static_cast<int>(kernel.size());
    const int nodes = static_cast<int>(branch_point.grid.size());
    const double h = branch_point.grid(1) - branch_point.grid(0);

    // Restricted form G_ab = int <HessW(t, x(t)) xi_a, xi_b> dt (trapezoid).
    Mat g = Mat::Zero(k, k);
    for (int i = 0; i < nodes; ++i) {
        const double w = (i == 0 || i == nodes - 1) ? 0.5 * h : h;
        const Mat hw = hess_w(branch_point.grid(i), branch_point.q[i]);
        for (int a = 0; a < k; ++a)
            for (int b = a; b < k; ++b) {
                const double val = w * kernel[a].y[i].dot(hw * kernel[b].y[i]);
                g(a, b) += val;
                if (a != b) g(b, a) += val;
            }
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
    const Vec& ev = es.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    const bool positive = ev(0) > 1e-10 * scale;
    const bool negative = ev(ev.size() - 1) < -1e-10 * scale;
    if (!positive && !negative)
        throw IndefiniteRestriction(
            "hessian_perturbation_predict: restricted form is not sign-definite on the kernel");

    const CoefficientPath coeffs = coefficients_along(fam0, branch_point.lambda, branch_point);
    const double hh = (coeffs.t_end() - coeffs.t_begin()) / opt.fem_cells;
    const AssembledForms forms = assemble_forms(coeffs, bc, opt.fem_cells, opt.gram);
    const IndexReport at_mu =
        morse_index_fem(forms.K, forms.M, opt.tol_scale * nullity_tolerance(hh));

    PerturbPrediction pred;
    pred.restricted_form_positive = positive;
    if (positive) {
        pred.index_for_positive = at_mu.m_minus;
        pred.index_for_negative = at_mu.m_minus + at_mu.m_null;
    } else {
        pred.index_for_positive = at_mu.m_minus + at_mu.m_null;
        pred.index_for_negative = at_mu.m_minus;
    }
    return pred;
}

}  // namespace morsebif
