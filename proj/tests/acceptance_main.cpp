// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Tolerances and runtime budgets are pinned here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "morsebif/bifurcation.hpp"
#include "morsebif/spectral_perturb.hpp"
#include "testutil.hpp"

using namespace morsebif;
using testutil::dirichlet;
using testutil::harmonic_path;

namespace {

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void report(int criterion, bool ok, const std::string& details) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, details.c_str());
    if (!ok) ++g_failures;
}

struct OracleProblem {
    std::string name;
    CoefficientPath coeffs;
    ProductSubspaces bc;
};

std::vector<OracleProblem> oracle_suite() {
    std::vector<OracleProblem> suite;
    for (double omega : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0})
        suite.push_back({"harmonic omega=" + std::to_string(omega),
                         harmonic_path(omega, 1, 0.0, 10.0, 4096), dirichlet(1)});
    suite.push_back({"decoupled n=2", harmonic_path(1.0, 2, 0.0, 7.0, 4096), dirichlet(2)});
    for (int k = 0; k < 5; ++k) {
        ProductSubspaces bc = dirichlet(2);
        if (k >= 3) {
            bc.v0_basis = Mat::Identity(2, 2).leftCols(1);  // start on a line
        }
        suite.push_back({"random path " + std::to_string(k),
                         testutil::random_smooth_path(910 + k, 2, 0.0, 6.0, 4096), bc});
    }
    return suite;
}

IndexReport fem_on_subinterval(const CoefficientPath& coeffs, const ProductSubspaces& bc,
                               double lam, int cells) {
    const auto sub = coeffs.restricted(0.0, lam, 2 * cells);
    const auto forms = assemble_forms(sub, bc, cells);
    return morse_index_fem(forms.K, forms.M, nullity_tolerance(lam / cells));
}

// (m^-, m^0) on [0, lam], grid-doubled until two consecutive sizes agree
// with zero nullity.
IndexReport stable_fem(const CoefficientPath& coeffs, const ProductSubspaces& bc, double lam) {
    IndexReport rep = fem_on_subinterval(coeffs, bc, lam, 128);
    for (int cells = 256; cells <= 1024; cells *= 2) {
        const IndexReport next = fem_on_subinterval(coeffs, bc, lam, cells);
        if (next.m_minus == rep.m_minus && next.m_null == 0 && rep.m_null == 0) return next;
        rep = next;
    }
    return rep;
}

// ---------------------------------------------------------------------------

void criterion_1() {
    Timer timer;
    auto fam = build_pendulum(1.0, 1.0);
    const double period = 2.0 * M_PI;
    BoundaryCondition per = OrthogonalTwist{Mat::Identity(1, 1)};
    auto branch = zero_branch(fam, per, period, 512);
    const Trajectory tr = branch(0.0);
    const CoefficientPath coeffs = coefficients_along(fam, 0.0, tr);
    const auto forms = assemble_forms(coeffs, per, 512);
    const IndexReport fem =
        morse_index_fem(forms.K, forms.M, nullity_tolerance(period / 512));
    const KernelBasis kb = kernel_basis(coeffs, per);
    const double secs = timer.seconds();

    bool ok = fem.m_minus == 1 && fem.m_null == 2;
    for (double e : fem.near_zero_eigs) ok = ok && std::abs(e) <= fem.tolerance;
    ok = ok && static_cast<int>(kb.fields.size()) == 2;  // method-of-record agreement
    ok = ok && secs < 5.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "pendulum degeneracy: fem (m-, m0) = (%d, %d), kernel dim %d, %.2fs",
                  fem.m_minus, fem.m_null, static_cast<int>(kb.fields.size()), secs);
    report(1, ok, buf);
}

std::vector<Candidate> g_all_candidates;

void criterion_2() {
    Timer timer;
    auto fam = build_pendulum(1.0, 1.0);
    const double period = 2.0 * M_PI;
    BoundaryCondition per = OrthogonalTwist{Mat::Identity(1, 1)};
    ScanOptions opt;
    opt.fem_cells = 512;
    auto branch = zero_branch(fam, per, period, 512);
    const BifurcationReport rep =
        branch_scan(fam, branch, per, Vec::LinSpaced(101, -0.3, 0.3), opt);

    bool ok = rep.candidates.size() == 1;
    Candidate c;
    if (ok) {
        c = rep.candidates.front();
        g_all_candidates.push_back(c);
        ok = ok && c.left_index == 1 && c.left_null == 0;
        ok = ok && c.right_index == 3 && c.right_null == 0;
        ok = ok && std::abs(c.mu) <= 1e-6;
        ok = ok && c.necessary_ok && c.sufficient_ii3_ok;

        const Trajectory tr = branch(0.0);
        const CoefficientPath coeffs = coefficients_along(fam, 0.0, tr);
        const KernelBasis kb = kernel_basis(coeffs, per);
        const HessField hess = [](double t, const Vec& q) {
            Mat h(1, 1);
            h(0, 0) = -(1.0 + std::sin(t)) * std::cos(q[0]);
            return h;
        };
        const PerturbPrediction pred =
            hessian_perturbation_predict(fam, hess, tr, per, kb.fields, opt);
        ok = ok && pred.index_for_positive == c.right_index &&
             pred.index_for_negative == c.left_index;
    }
    const double secs = timer.seconds();
    ok = ok && secs < 30.0;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "pendulum index jump 1 -> 3, mu = %.2e, certificates + predictor, %.2fs",
                  rep.candidates.empty() ? 1e9 : c.mu, secs);
    report(2, ok, buf);
}

void criteria_3_4_5_7() {
    Timer timer;
    const auto suite = oracle_suite();
    bool ok3 = true, ok4 = true, ok5 = true, ok7 = true;
    std::string detail4;
    int checks = 0;

    for (const auto& pb : suite) {
        const auto phi = fundamental_matrix(pb.coeffs);
        ok5 = ok5 && phi.symplectic_defect <= 1e-8;
        const auto pair = conormal_pair(pb.bc, pb.coeffs.dim());
        const FocalReport focal = focal_points(phi, pair);

        const double span = pb.coeffs.t_end();
        for (double frac : {0.22, 0.41, 0.58, 0.74, 0.91}) {
            // keep the cut off the focal set
            double lam = frac * span;
            for (int nudge = 0; nudge < 4; ++nudge) {
                bool near = false;
                for (const auto& inst : focal.instants)
                    if (std::abs(lam - inst.s) < 0.04 * span) near = true;
                if (!near) break;
                lam = std::min(lam + 0.05 * span, 0.96 * span);
            }
            const IndexReport fem = stable_fem(pb.coeffs, pb.bc, lam);
            const int focal_index = index_via_focal(focal, lam);
            if (fem.m_minus != focal_index || fem.m_null != 0) ok3 = false;
            ++checks;

            // gram invariance on the same subproblem
            const int cells = 256;
            const auto sub = pb.coeffs.restricted(0.0, lam, 2 * cells);
            const auto w12 = assemble_forms(sub, pb.bc, cells, GramKind::W12);
            const auto l2 = assemble_forms(sub, pb.bc, cells, GramKind::L2);
            const double tol = nullity_tolerance(lam / cells);
            const auto r1 = morse_index_fem(w12.K, w12.M, tol);
            const auto r2 = morse_index_fem(l2.K, l2.M, tol);
            if (r1.m_minus != r2.m_minus || r1.m_null != r2.m_null) ok7 = false;
        }

        if (pb.name == "harmonic omega=" + std::to_string(1.0)) {
            ok4 = ok4 && focal.instants.size() == 3;
            for (size_t k = 0; k < focal.instants.size() && ok4; ++k) {
                ok4 = ok4 && std::abs(focal.instants[k].s - (k + 1) * M_PI) <= 1e-6;
                ok4 = ok4 && focal.instants[k].multiplicity == 1;
            }
        }
        if (pb.name == "decoupled n=2") {
            ok4 = ok4 && focal.instants.size() == 2;
            for (size_t k = 0; k < focal.instants.size() && ok4; ++k) {
                ok4 = ok4 && std::abs(focal.instants[k].s - (k + 1) * M_PI) <= 1e-6;
                ok4 = ok4 && focal.instants[k].multiplicity == 2;
            }
        }
    }
    const double secs = timer.seconds();
    ok3 = ok3 && secs < 60.0;

    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "index-theorem oracle equality on %zu problems x 5 cuts (%d checks), %.2fs",
                  suite.size(), checks, secs);
    report(3, ok3, buf);
    report(4, ok4, "conjugate points at k pi within 1e-6, multiplicities 1 and 2");
    report(5, ok5, "symplectic defect <= 1e-8 on every fundamental-matrix path");
    report(7, ok7, "inertia identical under the W12 and L2 grams on the suite");
}

void criterion_6() {
    Timer timer;
    bool ok = true;
    double worst_weyl = -1e300;
    for (int s = 0; s < 100; ++s) {
        const OperatorFamily fam = random_operator_family(20250807 + s);
        const PerturbationCheck chk = predict_jump(fam);
        if (!chk.agrees()) ok = false;
        worst_weyl = std::max(worst_weyl, weyl_check(fam, {-1.0, -0.4, 0.3, 0.8}));
    }
    const double secs = timer.seconds();
    ok = ok && worst_weyl <= 1e-10 && secs < 10.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "index-jump formula on 100 seeded families, weyl defect %.1e, %.2fs",
                  worst_weyl, secs);
    report(6, ok, buf);
}

void criterion_8() {
    struct Case {
        std::string name;
        CoefficientPath coeffs;
        BoundaryCondition bc;
        int expected_null;
    };
    const double period = 2.0 * M_PI;
    std::vector<Case> cases;
    cases.push_back({"pendulum periodic", harmonic_path(1.0, 1, 0.0, period, 2048),
                     OrthogonalTwist{Mat::Identity(1, 1)}, 2});
    cases.push_back({"free periodic n=2", testutil::free_path(2, 0.0, 1.0, 512),
                     OrthogonalTwist{Mat::Identity(2, 2)}, 2});
    cases.push_back({"free twist rot(pi/3)", testutil::free_path(2, 0.0, 1.0, 512),
                     OrthogonalTwist{testutil::rotation2(M_PI / 3.0)}, 0});
    cases.push_back({"free even-periodic n=2", testutil::free_path(2, 0.0, M_PI, 512),
                     EvenPeriodic{}, 2});
    cases.push_back({"brake harmonic omega=2pi/tau", harmonic_path(1.0, 1, 0.0, M_PI, 1024),
                     EvenPeriodic{}, 1});
    cases.push_back({"harmonic dirichlet tau=pi", harmonic_path(1.0, 1, 0.0, M_PI, 1024),
                     dirichlet(1), 1});
    cases.push_back({"free dirichlet", testutil::free_path(1, 0.0, 1.0, 256), dirichlet(1), 0});

    bool ok = true;
    std::string bad;
    for (const auto& cs : cases) {
        const int cells = 256;
        const double h = (cs.coeffs.t_end() - cs.coeffs.t_begin()) / cells;
        const auto forms = assemble_forms(cs.coeffs, cs.bc, cells);
        const auto fem = morse_index_fem(forms.K, forms.M, nullity_tolerance(h));
        const KernelBasis kb = kernel_basis(cs.coeffs, cs.bc);
        const bool match = fem.m_null == cs.expected_null &&
                           static_cast<int>(kb.fields.size()) == cs.expected_null;
        if (!match) {
            ok = false;
            bad += " " + cs.name;
        }
    }
    report(8, ok,
           ok ? "fem nullity == shooting kernel dimension on all boundary classes"
              : "mismatch at:" + bad);
}

void criterion_9() {
    // candidates from the scans of the suite: the pendulum one plus the
    // frequency ramp and shifted-frequency scans
    bool ok = true;
    {
        auto fam = build_harmonic(1.0, 1.0, 1);
        BoundaryCondition bc = dirichlet(1);
        ScanOptions opt;
        opt.fem_cells = 256;
        auto branch = zero_branch(fam, bc, M_PI, 256);
        const auto rep = branch_scan(fam, branch, bc, Vec::LinSpaced(41, -0.2, 0.2), opt);
        for (const auto& c : rep.candidates) g_all_candidates.push_back(c);
        ok = ok && !rep.candidates.empty();
    }
    {
        auto fam = build_harmonic(0.0, 1.0, 1);
        BoundaryCondition bc = dirichlet(1);
        ScanOptions opt;
        opt.fem_cells = 256;
        auto branch = zero_branch(fam, bc, M_PI, 256);
        const auto rep = branch_scan(fam, branch, bc, Vec::LinSpaced(41, 0.5, 1.5), opt);
        for (const auto& c : rep.candidates) g_all_candidates.push_back(c);
        ok = ok && !rep.candidates.empty();
    }
    int certified = 0;
    for (const auto& c : g_all_candidates) {
        if (c.sufficient_ii3_ok) {
            ++certified;
            ok = ok && c.necessary_ok && c.nullity_at_mu > 0;
        }
    }
    ok = ok && certified >= 3;
    char buf[120];
    std::snprintf(buf, sizeof(buf),
                  "all %d certified candidates carry m0(mu) > 0 in the guard band", certified);
    report(9, ok, buf);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criteria_3_4_5_7();
    criterion_6();
    criterion_8();
    criterion_9();
    if (g_failures == 0) {
        std::printf("acceptance: all criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) FAILED\n", g_failures);
    return 1;
}
