#include "morsebif/boundary.hpp"

namespace morsebif {

namespace {

constexpr double kOrthoTol = 1e-12;

void check_orthonormal(const Mat& b, int n, const char* what) {
    if (b.size() == 0) return;
    if (b.rows() != n)
        throw DimensionMismatch(std::string(what) + ": basis has wrong row count");
    const Mat gram = b.transpose() * b;
    const double defect = max_abs(Mat(gram - Mat::Identity(b.cols(), b.cols())));
    if (defect > kOrthoTol)
        throw std::invalid_argument(std::string(what) + ": columns not orthonormal");
}

}  // namespace

void validate_boundary(const BoundaryCondition& bc, int n) {
    if (const auto* p = std::get_if<ProductSubspaces>(&bc)) {
        check_orthonormal(p->v0_basis, n, "v0_basis");
        check_orthonormal(p->v1_basis, n, "v1_basis");
        if (p->offset0.size() != 0 && p->offset0.size() != n)
            throw DimensionMismatch("offset0 has wrong size");
        if (p->offset1.size() != 0 && p->offset1.size() != n)
            throw DimensionMismatch("offset1 has wrong size");
    } else if (const auto* t = std::get_if<OrthogonalTwist>(&bc)) {
        if (t->E.rows() != n || t->E.cols() != n)
            throw DimensionMismatch("twist matrix E has wrong shape");
        const double defect = max_abs(Mat(t->E.transpose() * t->E - Mat::Identity(n, n)));
        if (defect > kOrthoTol)
            throw std::invalid_argument("twist matrix E is not orthogonal");
    }
}

Mat orthonormalize_columns(const Mat& m) {
    if (m.size() == 0 || m.cols() == 0) return Mat(m.rows(), 0);
    Eigen::HouseholderQR<Mat> qr(m);
    Mat q = qr.householderQ() * Mat::Identity(m.rows(), m.cols());
    // Drop columns beyond the numerical rank of m.
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& s = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > 1e-12 * s(0)) ++rank;
    return q.leftCols(rank);
}

Mat orthogonal_complement(const Mat& basis, int n) {
    const int d = basis.size() == 0 ? 0 : static_cast<int>(basis.cols());
    if (d == 0) return Mat::Identity(n, n);
    if (d >= n) return Mat(n, 0);
    Eigen::HouseholderQR<Mat> qr(basis);
    Mat q = qr.householderQ() * Mat::Identity(n, n);
    return q.rightCols(n - d);
}

EndpointSubspace endpoint_subspace(const BoundaryCondition& bc, int n) {
    validate_boundary(bc, n);
    EndpointSubspace out;
    if (const auto* p = std::get_if<ProductSubspaces>(&bc)) {
        const int d0 = p->v0_basis.size() == 0 ? 0 : static_cast<int>(p->v0_basis.cols());
        const int d1 = p->v1_basis.size() == 0 ? 0 : static_cast<int>(p->v1_basis.cols());
        out.basis = Mat::Zero(2 * n, d0 + d1);
        if (d0 > 0) out.basis.block(0, 0, n, d0) = p->v0_basis;
        if (d1 > 0) out.basis.block(n, d0, n, d1) = p->v1_basis;
    } else if (const auto* t = std::get_if<OrthogonalTwist>(&bc)) {
        out.basis = Mat::Zero(2 * n, n);
        out.basis.topRows(n) = Mat::Identity(n, n);
        out.basis.bottomRows(n) = t->E;
        out.basis *= 1.0 / std::sqrt(2.0);  // columns (x; Ex)/sqrt(2) are orthonormal
    } else {
        out.even_periodic = true;
        out.basis = Mat(2 * n, 0);
    }
    return out;
}

Vec natural_residual(const BoundaryCondition& bc, const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionMismatch("natural_residual: size mismatch");
    const int n = static_cast<int>(a.size());
    if (const auto* p = std::get_if<ProductSubspaces>(&bc)) {
        const int d0 = p->v0_basis.size() == 0 ? 0 : static_cast<int>(p->v0_basis.cols());
        const int d1 = p->v1_basis.size() == 0 ? 0 : static_cast<int>(p->v1_basis.cols());
        Vec r(d0 + d1);
        if (d0 > 0) r.head(d0) = p->v0_basis.transpose() * a;
        if (d1 > 0) r.tail(d1) = p->v1_basis.transpose() * b;
        return r;
    }
    if (const auto* t = std::get_if<OrthogonalTwist>(&bc)) {
        if (t->E.rows() != n) throw DimensionMismatch("natural_residual: E size mismatch");
        return Vec(t->E.transpose().partialPivLu().solve(a) - b);
    }
    Vec r(2 * n);
    r.head(n) = a;
    r.tail(n) = b;
    return r;
}

ConormalPair conormal_pair(const BoundaryCondition& bc, int n) {
    const auto* p = std::get_if<ProductSubspaces>(&bc);
    if (!p)
        throw UnsupportedBoundary(
            "conormal_pair: focal data is defined for the product class only");
    validate_boundary(bc, n);
    const int d0 = p->v0_basis.size() == 0 ? 0 : static_cast<int>(p->v0_basis.cols());
    const Mat comp = orthogonal_complement(d0 == 0 ? Mat(n, 0) : p->v0_basis, n);

    ConormalPair out;
    out.U_basis = Mat::Zero(2 * n, n);
    if (d0 > 0) out.U_basis.block(0, 0, n, d0) = p->v0_basis;
    out.U_basis.block(n, d0, n, n - d0) = comp;
    out.V_basis = Mat::Zero(2 * n, n);
    out.V_basis.bottomRows(n) = Mat::Identity(n, n);
    return out;
}

}  // namespace morsebif
