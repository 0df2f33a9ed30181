#pragma once

#include <cmath>
#include <random>

#include "morsebif/jacobi.hpp"

namespace morsebif::testutil {

inline ProductSubspaces dirichlet(int n) { return {Mat(n, 0), Mat(n, 0), Vec(), Vec()}; }

inline Mat rotation2(double theta) {
    Mat r(2, 2);
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return r;
}

inline CoefficientPath harmonic_path(double omega, int n, double t0, double t1, int samples) {
    return make_coefficient_path(
        [omega, n](double, Mat& p, Mat& q, Mat& r) {
            p = Mat::Identity(n, n);
            q = Mat::Zero(n, n);
            r = -omega * omega * Mat::Identity(n, n);
        },
        t0, t1, samples);
}

inline CoefficientPath free_path(int n, double t0, double t1, int samples) {
    return harmonic_path(0.0, n, t0, t1, samples);
}

// Smooth random coefficient path with SPD P: low-order trigonometric
// polynomials with seeded coefficients.  R is shifted negative so the span
// contains focal instants.
inline CoefficientPath random_smooth_path(std::uint64_t seed, int n, double t0, double t1,
                                          int samples) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Mat a0(n, n), a1(n, n), b1(n, n), q0(n, n), q1(n, n), r1(n, n), r2(n, n);
    for (Mat* m : {&a0, &a1, &b1, &q0, &q1, &r1, &r2})
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) (*m)(i, j) = unit(rng);
    const double rbase = 1.0 + 0.8 * std::abs(unit(rng));

    auto eval = [=](double t, Mat& p, Mat& q, Mat& r) {
        Mat l = Mat::Identity(n, n) + 0.18 * (a0 + a1 * std::sin(0.9 * t) + b1 * std::cos(1.3 * t));
        p = l * l.transpose() + 0.35 * Mat::Identity(n, n);
        q = 0.3 * (q0 * std::cos(0.7 * t) + q1 * std::sin(1.1 * t));
        Mat rs = 0.35 * (r1 * std::sin(0.8 * t) + r2 * std::cos(0.5 * t));
        r = -rbase * rbase * Mat::Identity(n, n) + 0.5 * (rs + rs.transpose());
    };
    return make_coefficient_path(eval, t0, t1, samples);
}

}  // namespace morsebif::testutil
