#include <doctest.h>

#include <cmath>

#include "morsebif/index.hpp"
#include "testutil.hpp"

using namespace morsebif;
using testutil::dirichlet;
using testutil::harmonic_path;

TEST_CASE("hand-assembled stiffness for the free particle") {
    // P = 1, Dirichlet ends, 3 cells on [0,1]: K = (1/h) tridiag(-1, 2, -1)
    const CoefficientPath c = testutil::free_path(1, 0.0, 1.0, 48);
    const auto forms = assemble_forms(c, dirichlet(1), 3);
    Mat expected(2, 2);
    expected << 6.0, -3.0, -3.0, 6.0;
    CHECK(max_abs(Mat(forms.K - expected)) < 1e-12);
}

TEST_CASE("assembled form is symmetric for arbitrary coefficients") {
    const CoefficientPath c = testutil::random_smooth_path(31, 2, 0.0, 3.0, 512);
    for (const BoundaryCondition bc :
         {BoundaryCondition(dirichlet(2)),
          BoundaryCondition(OrthogonalTwist{testutil::rotation2(0.7)}),
          BoundaryCondition(EvenPeriodic{})}) {
        const auto forms = assemble_forms(c, bc, 128);
        CHECK(max_abs(Mat(forms.K - forms.K.transpose())) < 1e-12 * std::max(1.0, max_abs(forms.K)));
        CHECK(max_abs(Mat(forms.M - forms.M.transpose())) < 1e-12);
    }
}

TEST_CASE("even-periodic class keeps constants flat") {
    const CoefficientPath c = testutil::free_path(1, 0.0, 1.5, 64);
    const auto forms = assemble_forms(c, EvenPeriodic{}, 64);
    const Vec ones = Vec::Ones(forms.K.rows());
    CHECK((forms.K * ones).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("discretized index and nullity on closed-form problems") {
    {
        const CoefficientPath c = testutil::free_path(1, 0.0, 1.0, 128);
        const auto f = assemble_forms(c, dirichlet(1), 128);
        const auto rep = morse_index_fem(f.K, f.M, nullity_tolerance(1.0 / 128));
        CHECK(rep.m_minus == 0);
        CHECK(rep.m_null == 0);
    }
    {
        const CoefficientPath c = harmonic_path(1.0, 1, 0.0, 4.0, 256);
        const auto f = assemble_forms(c, dirichlet(1), 256);
        const auto rep = morse_index_fem(f.K, f.M, nullity_tolerance(4.0 / 256));
        CHECK(rep.m_minus == 1);  // floor(4 / pi)
        CHECK(rep.m_null == 0);
    }
    {
        // trivial pendulum branch: one negative direction, two flat ones
        const CoefficientPath c = harmonic_path(1.0, 1, 0.0, 2.0 * M_PI, 512);
        BoundaryCondition per = OrthogonalTwist{Mat::Identity(1, 1)};
        const auto f = assemble_forms(c, per, 512);
        const auto rep = morse_index_fem(f.K, f.M, nullity_tolerance(2.0 * M_PI / 512));
        CHECK(rep.m_minus == 1);
        CHECK(rep.m_null == 2);
        CHECK(rep.near_zero_eigs.size() == 2);
        for (double e : rep.near_zero_eigs) CHECK(std::abs(e) <= rep.tolerance);
    }
}

TEST_CASE("gram choice does not move the inertia") {
    const CoefficientPath c = harmonic_path(1.0, 1, 0.0, 4.0, 256);
    const auto w12 = assemble_forms(c, dirichlet(1), 256, GramKind::W12);
    const auto l2 = assemble_forms(c, dirichlet(1), 256, GramKind::L2);
    const double tol = nullity_tolerance(4.0 / 256);
    const auto r1 = morse_index_fem(w12.K, w12.M, tol);
    const auto r2 = morse_index_fem(l2.K, l2.M, tol);
    CHECK(r1.m_minus == r2.m_minus);
    CHECK(r1.m_null == r2.m_null);
}

TEST_CASE("ill-conditioned gram is rejected") {
    Mat k = Mat::Identity(4, 4);
    Mat m = Mat::Identity(4, 4);
    m(0, 0) = 1e14;
    CHECK_THROWS_AS(morse_index_fem(k, m, 1e-10), IllConditioned);
}

TEST_CASE("fundamental matrix closed forms and symplectic defect") {
    {
        const CoefficientPath c = testutil::free_path(1, 0.0, 2.0, 256);
        const auto phi = fundamental_matrix(c);
        for (int i : {32, 128, 256}) {
            const double t = phi.grid(i);
            Mat expected(2, 2);
            expected << 1.0, t, 0.0, 1.0;
            CHECK(max_abs(Mat(phi.phi[i] - expected)) < 1e-10);
        }
    }
    {
        const CoefficientPath c = harmonic_path(1.0, 1, 0.0, 6.0, 1024);
        const auto phi = fundamental_matrix(c);
        CHECK(max_abs(Mat(phi.phi[0] - Mat::Identity(2, 2))) == 0.0);
        for (int i : {100, 700, 1024}) {
            const double t = phi.grid(i);
            Mat expected(2, 2);
            expected << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
            CHECK(max_abs(Mat(phi.phi[i] - expected)) < 1e-8);
        }
        CHECK(phi.symplectic_defect <= 1e-8);
    }
    {
        const CoefficientPath c = testutil::random_smooth_path(77, 2, 0.0, 5.0, 2048);
        CHECK(fundamental_matrix(c).symplectic_defect <= 1e-8);
    }
}

TEST_CASE("focal instants of the conjugate-point setting") {
    {
        const CoefficientPath c = harmonic_path(1.0, 1, 0.0, 10.0, 2048);
        const auto phi = fundamental_matrix(c);
        const auto pair = conormal_pair(dirichlet(1), 1);
        const auto rep = focal_points(phi, pair);
        REQUIRE(rep.instants.size() == 3);
        for (int k = 0; k < 3; ++k) {
            CHECK(std::abs(rep.instants[k].s - (k + 1) * M_PI) <= 1e-6);
            CHECK(rep.instants[k].multiplicity == 1);
        }
        CHECK(index_via_focal(rep, 4.0) == 1);
        CHECK(index_via_focal(rep, 0.5) == 0);
    }
    {
        const CoefficientPath c = testutil::free_path(1, 0.0, 5.0, 512);
        const auto phi = fundamental_matrix(c);
        const auto rep = focal_points(phi, conormal_pair(dirichlet(1), 1));
        CHECK(rep.instants.empty());
    }
    {
        // two decoupled oscillators: multiplicity-2 instants
        const CoefficientPath c = harmonic_path(1.0, 2, 0.0, 7.0, 2048);
        const auto phi = fundamental_matrix(c);
        const auto rep = focal_points(phi, conormal_pair(dirichlet(2), 2));
        REQUIRE(rep.instants.size() == 2);
        for (int k = 0; k < 2; ++k) {
            CHECK(std::abs(rep.instants[k].s - (k + 1) * M_PI) <= 1e-6);
            CHECK(rep.instants[k].multiplicity == 2);
        }
        CHECK(index_via_focal(rep, 7.0) == 4);
    }
}

TEST_CASE("index staircase matches the discretized form across an instant") {
    const CoefficientPath c = harmonic_path(1.0, 1, 0.0, 10.0, 2048);
    const auto phi = fundamental_matrix(c);
    const auto rep = focal_points(phi, conormal_pair(dirichlet(1), 1));
    // nondecreasing by construction; check the discrete jump equals the multiplicity
    int prev = 0;
    for (double lam = 0.5; lam < 10.0; lam += 0.5) {
        const int cur = index_via_focal(rep, lam);
        CHECK(cur >= prev);
        prev = cur;
    }
    auto fem_at = [&](double lam) {
        const int cells = 256;
        const auto sub = c.restricted(0.0, lam, 2 * cells);
        const auto f = assemble_forms(sub, dirichlet(1), cells);
        return morse_index_fem(f.K, f.M, nullity_tolerance(lam / cells));
    };
    const auto before = fem_at(M_PI - 0.2);
    const auto after = fem_at(M_PI + 0.2);
    CHECK(after.m_minus - before.m_minus == rep.instants.front().multiplicity);
}

TEST_CASE("oracle equality: discretized index equals summed multiplicities") {
    struct Problem {
        CoefficientPath coeffs;
        ProductSubspaces bc;
    };
    std::vector<Problem> problems;
    problems.push_back({harmonic_path(1.0, 1, 0.0, 10.0, 2048), dirichlet(1)});
    problems.push_back({testutil::random_smooth_path(123, 2, 0.0, 6.0, 2048), dirichlet(2)});
    {
        ProductSubspaces line;
        line.v0_basis = Mat::Identity(2, 2).leftCols(1);
        line.v1_basis = Mat(2, 0);
        problems.push_back({testutil::random_smooth_path(321, 2, 0.0, 6.0, 2048), line});
    }

    for (const auto& pb : problems) {
        const auto phi = fundamental_matrix(pb.coeffs);
        const auto rep = focal_points(phi, conormal_pair(pb.bc, pb.coeffs.dim()));
        const double span = pb.coeffs.t_end();
        for (double frac : {0.35, 0.55, 0.8}) {
            double lam = frac * span;
            // keep the cut off the focal set
            for (const auto& inst : rep.instants)
                if (std::abs(lam - inst.s) < 0.05) lam += 0.07;
            int cells = 128;
            IndexReport fem;
            for (;; cells *= 2) {
                const auto sub = pb.coeffs.restricted(0.0, lam, 2 * cells);
                const auto f = assemble_forms(sub, pb.bc, cells);
                fem = morse_index_fem(f.K, f.M, nullity_tolerance(lam / cells));
                const auto sub2 = pb.coeffs.restricted(0.0, lam, 4 * cells);
                const auto f2 = assemble_forms(sub2, pb.bc, 2 * cells);
                const auto fem2 = morse_index_fem(f2.K, f2.M, nullity_tolerance(lam / (2 * cells)));
                if (fem.m_minus == fem2.m_minus && fem.m_null == 0 && fem2.m_null == 0) break;
                if (cells >= 1024) break;
            }
            CHECK(fem.m_minus == index_via_focal(rep, lam));
        }
    }
}

TEST_CASE("grid doubling leaves the counts unchanged") {
    const CoefficientPath c = harmonic_path(1.0, 1, 0.0, 2.0 * M_PI, 1024);
    BoundaryCondition per = OrthogonalTwist{Mat::Identity(1, 1)};
    const auto f1 = assemble_forms(c, per, 256);
    const auto f2 = assemble_forms(c, per, 512);
    const auto r1 = morse_index_fem(f1.K, f1.M, nullity_tolerance(2.0 * M_PI / 256));
    const auto r2 = morse_index_fem(f2.K, f2.M, nullity_tolerance(2.0 * M_PI / 512));
    CHECK(r1.m_minus == r2.m_minus);
    CHECK(r1.m_null == r2.m_null);
}
