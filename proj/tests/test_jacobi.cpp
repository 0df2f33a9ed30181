#include <doctest.h>

#include <cmath>

#include "morsebif/index.hpp"
#include "testutil.hpp"

using namespace morsebif;
using testutil::dirichlet;
using testutil::harmonic_path;

namespace {

JacobiField sampled_field(const Vec& grid, double (*y)(double), double (*ydot)(double)) {
    JacobiField f;
    f.grid = grid;
    const int nodes = static_cast<int>(grid.size());
    f.y.resize(nodes);
    f.ydot.resize(nodes);
    for (int i = 0; i < nodes; ++i) {
        f.y[i] = Vec::Constant(1, y(grid(i)));
        f.ydot[i] = Vec::Constant(1, ydot(grid(i)));
    }
    return f;
}

}  // namespace

TEST_CASE("coefficients along built-in branches") {
    auto pend = build_pendulum(1.0, 1.0);
    Trajectory triv;
    triv.lambda = 0.3;
    triv.grid = Vec::LinSpaced(65, 0.0, 2.0 * M_PI);
    triv.q.assign(65, Vec::Zero(1));
    triv.v.assign(65, Vec::Zero(1));
    const CoefficientPath c = coefficients_along(pend, 0.3, triv);
    for (int i = 0; i < 65; ++i) {
        CHECK(c.P[i](0, 0) == doctest::Approx(1.0));
        CHECK(std::abs(c.Q[i](0, 0)) < 1e-12);
        const double wxx = -(1.0 + std::sin(c.grid(i))) * std::sin(0.3);
        CHECK(c.R[i](0, 0) == doctest::Approx(-1.0 + wxx).epsilon(1e-9));
    }

    auto harm = build_harmonic(1.3, 0.0, 2);
    Trajectory hz;
    hz.grid = Vec::LinSpaced(33, 0.0, 1.0);
    hz.q.assign(33, Vec::Zero(2));
    hz.v.assign(33, Vec::Zero(2));
    const CoefficientPath ch = coefficients_along(harm, 0.0, hz);
    CHECK(max_abs(Mat(ch.P[10] - Mat::Identity(2, 2))) < 1e-12);
    CHECK(max_abs(Mat(ch.R[10] + 1.3 * 1.3 * Mat::Identity(2, 2))) < 1e-12);
}

TEST_CASE("jacobi residual detects solutions and non-solutions") {
    const CoefficientPath free1 = testutil::free_path(1, 0.0, 1.0, 512);
    const auto linear = sampled_field(
        free1.grid, [](double t) { return 0.3 + 2.0 * t; }, [](double) { return 2.0; });
    CHECK(jacobi_residual(free1, linear) < 1e-12);

    const CoefficientPath harm = harmonic_path(1.0, 1, 0.0, 1.0, 512);
    const auto sine = sampled_field(
        harm.grid, [](double t) { return std::sin(t); }, [](double t) { return std::cos(t); });
    CHECK(jacobi_residual(harm, sine) <= 1e-6);

    const auto parabola = sampled_field(
        harm.grid, [](double t) { return t * t; }, [](double t) { return 2.0 * t; });
    CHECK(jacobi_residual(harm, parabola) > 1.0);
}

TEST_CASE("kernel by shooting: periodic pendulum plane") {
    const CoefficientPath c = harmonic_path(1.0, 1, 0.0, 2.0 * M_PI, 4096);
    BoundaryCondition per = OrthogonalTwist{Mat::Identity(1, 1)};
    const KernelBasis kb = kernel_basis(c, per);
    REQUIRE(kb.fields.size() == 2);
    CHECK(kb.indeterminate == 0);
    for (const auto& f : kb.fields) {
        CHECK(jacobi_residual(c, f) <= 1e-6);
        // admissibility is exact: field closes up periodically
        CHECK(std::abs(f.y.front()[0] - f.y.back()[0]) < 1e-8);
        CHECK(std::abs(f.momentum.front()[0] - f.momentum.back()[0]) < 1e-8);
        // solution plane is spanned by cos and sin
        double err = 0.0;
        const double a = f.y.front()[0];          // y(0) = a
        const double b = f.momentum.front()[0];   // ydot(0) = b (P = 1)
        for (int i = 0; i < c.grid.size(); ++i)
            err = std::max(err, std::abs(a * std::cos(c.grid(i)) + b * std::sin(c.grid(i)) -
                                         f.y[i][0]));
        CHECK(err < 1e-7);
    }
}

TEST_CASE("kernel by shooting: pinned ends") {
    const CoefficientPath fr = testutil::free_path(1, 0.0, 1.0, 256);
    CHECK(kernel_basis(fr, dirichlet(1)).fields.empty());

    const CoefficientPath harm = harmonic_path(1.0, 1, 0.0, M_PI, 2048);
    const KernelBasis kb = kernel_basis(harm, dirichlet(1));
    REQUIRE(kb.fields.size() == 1);
    const auto& f = kb.fields.front();
    double err = 0.0;
    for (int i = 0; i < harm.grid.size(); ++i)
        err = std::max(err, std::abs(f.y[i][0] - std::sin(harm.grid(i))));
    CHECK(err < 1e-6);  // fields are normalized to max |y| = 1
}

TEST_CASE("kernel dimension equals discretized-form nullity across classes") {
    struct Case {
        CoefficientPath coeffs;
        BoundaryCondition bc;
    };
    std::vector<Case> cases;
    cases.push_back({harmonic_path(1.0, 1, 0.0, 2.0 * M_PI, 2048),
                     OrthogonalTwist{Mat::Identity(1, 1)}});
    cases.push_back({harmonic_path(1.0, 1, 0.0, M_PI, 2048), dirichlet(1)});
    cases.push_back({testutil::free_path(2, 0.0, 1.0, 256),
                     OrthogonalTwist{testutil::rotation2(M_PI / 3.0)}});
    cases.push_back({testutil::free_path(2, 0.0, M_PI, 256), EvenPeriodic{}});
    cases.push_back({harmonic_path(1.0, 1, 0.0, M_PI, 1024), EvenPeriodic{}});
    cases.push_back({testutil::random_smooth_path(99, 2, 0.0, 4.0, 1024), dirichlet(2)});

    for (const auto& cs : cases) {
        const int cells = 256;
        const auto forms = assemble_forms(cs.coeffs, cs.bc, cells);
        const double h = (cs.coeffs.t_end() - cs.coeffs.t_begin()) / cells;
        const IndexReport rep = morse_index_fem(forms.K, forms.M, nullity_tolerance(h));
        const KernelBasis kb = kernel_basis(cs.coeffs, cs.bc);
        CHECK(rep.m_null == static_cast<int>(kb.fields.size()));
    }
}

TEST_CASE("linearized system matrix is infinitesimally symplectic") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const Mat j = symplectic_j(3);
    for (int k = 0; k < 25; ++k) {
        Mat g(3, 3), q(3, 3), r(3, 3);
        for (int i = 0; i < 9; ++i) {
            g(i / 3, i % 3) = unit(rng);
            q(i / 3, i % 3) = unit(rng);
            r(i / 3, i % 3) = unit(rng);
        }
        const Mat p = g * g.transpose() + 0.5 * Mat::Identity(3, 3);
        const Mat rs = 0.5 * (r + r.transpose());
        const Mat a = linearized_system_matrix(p, q, rs);
        CHECK(max_abs(Mat(j * a - (j * a).transpose())) < 1e-12);
    }
}
