#include <benchmark/benchmark.h>

#include <cmath>

#include "morsebif/bifurcation.hpp"

namespace {

using namespace morsebif;

CoefficientPath harmonic(int n, double span, int samples) {
    return make_coefficient_path(
        [n](double, Mat& p, Mat& q, Mat& r) {
            p = Mat::Identity(n, n);
            q = Mat::Zero(n, n);
            r = -Mat::Identity(n, n);
        },
        0.0, span, samples);
}

void BM_AssembleForms(benchmark::State& state) {
    const int cells = static_cast<int>(state.range(0));
    const auto coeffs = harmonic(1, 10.0, 2 * cells);
    const ProductSubspaces bc{Mat(1, 0), Mat(1, 0), Vec(), Vec()};
    for (auto _ : state) {
        auto forms = assemble_forms(coeffs, bc, cells);
        benchmark::DoNotOptimize(forms.K);
    }
}
BENCHMARK(BM_AssembleForms)->Arg(128)->Arg(512);

void BM_GeneralizedEig(benchmark::State& state) {
    const int cells = static_cast<int>(state.range(0));
    const auto coeffs = harmonic(1, 10.0, 2 * cells);
    const ProductSubspaces bc{Mat(1, 0), Mat(1, 0), Vec(), Vec()};
    const auto forms = assemble_forms(coeffs, bc, cells);
    const double tol = nullity_tolerance(10.0 / cells);
    for (auto _ : state) {
        auto rep = morse_index_fem(forms.K, forms.M, tol);
        benchmark::DoNotOptimize(rep.m_minus);
    }
}
BENCHMARK(BM_GeneralizedEig)->Arg(128)->Arg(256)->Arg(512);

void BM_FundamentalMatrix(benchmark::State& state) {
    const auto coeffs = harmonic(2, 10.0, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto phi = fundamental_matrix(coeffs);
        benchmark::DoNotOptimize(phi.symplectic_defect);
    }
}
BENCHMARK(BM_FundamentalMatrix)->Arg(1024)->Arg(4096);

void BM_FocalScan(benchmark::State& state) {
    const auto coeffs = harmonic(1, 10.0, 2048);
    const auto phi = fundamental_matrix(coeffs);
    const ProductSubspaces bc{Mat(1, 0), Mat(1, 0), Vec(), Vec()};
    const auto pair = conormal_pair(bc, 1);
    for (auto _ : state) {
        auto rep = focal_points(phi, pair);
        benchmark::DoNotOptimize(rep.instants.size());
    }
}
BENCHMARK(BM_FocalScan);

void BM_KernelShooting(benchmark::State& state) {
    const auto coeffs = harmonic(1, 2.0 * M_PI, 1024);
    const OrthogonalTwist per{Mat::Identity(1, 1)};
    for (auto _ : state) {
        auto kb = kernel_basis(coeffs, per);
        benchmark::DoNotOptimize(kb.fields.size());
    }
}
BENCHMARK(BM_KernelShooting);

}  // namespace

BENCHMARK_MAIN();
