#include "morsebif/jacobi.hpp"

#include <algorithm>
#include <cmath>

namespace morsebif {

Mat linearized_system_matrix(const Mat& p, const Mat& q, const Mat& r) {
    const int n = static_cast<int>(p.rows());
    Eigen::LLT<Mat> llt(p);
    if (llt.info() != Eigen::Success)
        throw NonConvexPoint("coefficient path: P sample is not SPD");
    const Mat pinv_q = llt.solve(q);
    const Mat pinv = llt.solve(Mat::Identity(n, n));
    Mat a(2 * n, 2 * n);
    a.topLeftCorner(n, n) = -pinv_q;
    a.topRightCorner(n, n) = pinv;
    a.bottomLeftCorner(n, n) = r - q.transpose() * pinv_q;
    a.bottomRightCorner(n, n) = q.transpose() * pinv;
    return a;
}

void CoefficientPath::at(double t, Mat& p, Mat& q, Mat& r) const {
    if (eval) {
        eval(t, p, q, r);
        return;
    }
    const int nodes = static_cast<int>(grid.size());
    const double h = spacing();
    const double x = (t - t_begin()) / h;
    int i0 = static_cast<int>(std::floor(x)) - 1;  // 4-point stencil start
    i0 = std::max(0, std::min(i0, nodes - 4));
    if (nodes < 4) i0 = 0;
    const int m = std::min(4, nodes);

    p.setZero(dim(), dim());
    q.setZero(dim(), dim());
    r.setZero(dim(), dim());
    for (int a = 0; a < m; ++a) {
        double w = 1.0;
        for (int b = 0; b < m; ++b) {
            if (a == b) continue;
            w *= (x - (i0 + b)) / static_cast<double>(a - b);
        }
        p += w * P[i0 + a];
        q += w * Q[i0 + a];
        r += w * R[i0 + a];
    }
}

CoefficientPath CoefficientPath::restricted(double a, double b, int samples) const {
    if (!(b > a)) throw std::invalid_argument("restricted: need b > a");
    CoefficientPath out;
    out.grid = Vec::LinSpaced(samples + 1, a, b);
    out.P.resize(samples + 1);
    out.Q.resize(samples + 1);
    out.R.resize(samples + 1);
    for (int i = 0; i <= samples; ++i) at(out.grid(i), out.P[i], out.Q[i], out.R[i]);
    if (eval) out.eval = eval;
    return out;
}

CoefficientPath coefficients_along(const LagrangianFamily& fam, double lambda,
                                   const Trajectory& traj) {
    CoefficientPath out;
    out.grid = traj.grid;
    const int nodes = static_cast<int>(traj.grid.size());
    out.P.resize(nodes);
    out.Q.resize(nodes);
    out.R.resize(nodes);
    for (int i = 0; i < nodes; ++i) {
        const PartialBundle b = partials(fam, lambda, traj.grid(i), traj.q[i], traj.v[i]);
        out.P[i] = b.dvv;
        out.Q[i] = b.dqv;
        out.R[i] = b.dqq;
    }
    return out;
}

CoefficientPath make_coefficient_path(std::function<void(double, Mat&, Mat&, Mat&)> eval,
                                      double t0, double t1, int samples) {
    if (!eval) throw std::invalid_argument("make_coefficient_path: evaluator required");
    CoefficientPath out;
    out.grid = Vec::LinSpaced(samples + 1, t0, t1);
    out.P.resize(samples + 1);
    out.Q.resize(samples + 1);
    out.R.resize(samples + 1);
    for (int i = 0; i <= samples; ++i) eval(out.grid(i), out.P[i], out.Q[i], out.R[i]);
    out.eval = std::move(eval);
    return out;
}

double jacobi_residual(const CoefficientPath& coeffs, const JacobiField& field) {
    const int nodes = static_cast<int>(coeffs.grid.size());
    if (static_cast<int>(field.grid.size()) != nodes ||
        (field.grid - coeffs.grid).cwiseAbs().maxCoeff() > 1e-12)
        throw DimensionMismatch("jacobi_residual: field grid differs from coefficient grid");

    const double h = coeffs.spacing();
    std::vector<Vec> mom(nodes);
    for (int i = 0; i < nodes; ++i) {
        mom[i] = field.momentum.empty() ? Vec(coeffs.P[i] * field.ydot[i] + coeffs.Q[i] * field.y[i])
                                        : field.momentum[i];
    }
    double res = 0.0;
    for (int i = 1; i + 1 < nodes; ++i) {
        const Vec r = (mom[i + 1] - mom[i - 1]) / (2.0 * h) -
                      (coeffs.Q[i].transpose() * field.ydot[i] + coeffs.R[i] * field.y[i]);
        res = std::max(res, r.cwiseAbs().maxCoeff());
    }
    return res;
}

KernelBasis kernel_basis(const CoefficientPath& coeffs, const BoundaryCondition& bc,
                         const KernelOptions& opt) {
    const int n = coeffs.dim();
    validate_boundary(bc, n);
    const int nodes = static_cast<int>(coeffs.grid.size());
    const double h = coeffs.spacing();

    // Admissible initial conditions, columns in (y; momentum) coordinates.
    Mat init;
    if (const auto* p = std::get_if<ProductSubspaces>(&bc)) {
        const int d0 = p->v0_basis.size() ? static_cast<int>(p->v0_basis.cols()) : 0;
        const Mat comp0 = orthogonal_complement(p->v0_basis, n);
        init = Mat::Zero(2 * n, n);
        if (d0 > 0) init.block(0, 0, n, d0) = p->v0_basis;
        init.block(n, d0, n, n - d0) = comp0;
    } else if (std::holds_alternative<OrthogonalTwist>(bc)) {
        init = Mat::Identity(2 * n, 2 * n);
    } else {
        init = Mat::Zero(2 * n, n);
        init.topRows(n) = Mat::Identity(n, n);
    }
    const int k = static_cast<int>(init.cols());

    // Propagate the whole block through the linear Hamiltonian system,
    // storing every node for field reconstruction.
    std::vector<Mat> z(nodes);
    z[0] = init;
    Mat p0, q0, r0, pm, qm, rm, p1, q1, r1;
    coeffs.at(coeffs.grid(0), p1, q1, r1);
    for (int i = 0; i + 1 < nodes; ++i) {
        p0 = p1;
        q0 = q1;
        r0 = r1;
        const double t = coeffs.grid(i);
        coeffs.at(t + 0.5 * h, pm, qm, rm);
        coeffs.at(coeffs.grid(i + 1), p1, q1, r1);
        const Mat a0 = linearized_system_matrix(p0, q0, r0);
        const Mat am = linearized_system_matrix(pm, qm, rm);
        const Mat a1 = linearized_system_matrix(p1, q1, r1);
        const Mat k1 = a0 * z[i];
        const Mat k2 = am * (z[i] + 0.5 * h * k1);
        const Mat k3 = am * (z[i] + 0.5 * h * k2);
        const Mat k4 = a1 * (z[i] + h * k3);
        z[i + 1] = z[i] + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    // Endpoint-condition matrix.
    Mat end;
    const Mat& zt = z[nodes - 1];
    if (const auto* p = std::get_if<ProductSubspaces>(&bc)) {
        const int d1 = p->v1_basis.size() ? static_cast<int>(p->v1_basis.cols()) : 0;
        const Mat comp1 = orthogonal_complement(p->v1_basis, n);
        end = Mat::Zero(n, k);
        end.topRows(n - d1) = comp1.transpose() * zt.topRows(n);
        if (d1 > 0) end.bottomRows(d1) = p->v1_basis.transpose() * zt.bottomRows(n);
    } else if (const auto* t = std::get_if<OrthogonalTwist>(&bc)) {
        Mat e2 = Mat::Zero(2 * n, 2 * n);
        e2.topLeftCorner(n, n) = t->E;
        e2.bottomRightCorner(n, n) = t->E;
        end = zt - e2 * init;
    } else {
        end = zt.bottomRows(n);
    }

    Eigen::JacobiSVD<Mat> svd(end, Eigen::ComputeFullV);
    const Vec sv = svd.singularValues();
    const double smax = sv.size() ? sv(0) : 0.0;

    KernelBasis out;
    out.singular_values = sv;
    // The endpoint matrix can degenerate as a whole (every admissible shot
    // satisfies the end conditions), so the cut is relative to the scale of
    // the propagated block, not just sigma_max.
    const double scale = std::max({smax, max_abs(zt), 1e-300});
    const double cut = opt.sv_ratio_tol * scale;
    const double band = opt.warn_band * scale;
    std::vector<int> kernel_cols;
    for (int i = 0; i < sv.size(); ++i) {
        if (sv(i) <= cut)
            kernel_cols.push_back(i);
        else if (sv(i) <= band)
            ++out.indeterminate;
    }

    for (int c : kernel_cols) {
        const Vec coeff = svd.matrixV().col(c);
        JacobiField f;
        f.grid = coeffs.grid;
        f.y.resize(nodes);
        f.ydot.resize(nodes);
        f.momentum.resize(nodes);
        double scale = 0.0;
        for (int i = 0; i < nodes; ++i) {
            const Vec zi = z[i] * coeff;
            f.y[i] = zi.head(n);
            f.momentum[i] = zi.tail(n);
            f.ydot[i] = coeffs.P[i].llt().solve(Vec(f.momentum[i] - coeffs.Q[i] * f.y[i]));
            scale = std::max(scale, f.y[i].cwiseAbs().maxCoeff());
        }
        if (scale > 1e-300) {
            for (int i = 0; i < nodes; ++i) {
                f.y[i] /= scale;
                f.ydot[i] /= scale;
                f.momentum[i] /= scale;
            }
        }
        out.fields.push_back(std::move(f));
    }
    return out;
}

}  // namespace morsebif
