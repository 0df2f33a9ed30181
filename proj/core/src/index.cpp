#include "morsebif/index.hpp"

#include <algorithm>
#include <cmath>

namespace morsebif {

namespace {

// Node-to-DOF map: each node contributes through an n x d block T at a
// column offset in the reduced vector, y_node = T * y_reduced[off .. off+d).
struct NodeMap {
    int offset = 0;
    Mat T;  // n x d; d may be 0 for a fully pinned node
};

struct DofLayout {
    std::vector<NodeMap> nodes;
    int total = 0;
    double factor = 1.0;  // mirror factor for the even-periodic class
};

DofLayout make_layout(const BoundaryCondition& bc, int n, int cells) {
    DofLayout lay;
    lay.nodes.resize(cells + 1);
    if (const auto* p = std::get_if<ProductSubspaces>(&bc)) {
        const int d0 = p->v0_basis.size() ? static_cast<int>(p->v0_basis.cols()) : 0;
        const int d1 = p->v1_basis.size() ? static_cast<int>(p->v1_basis.cols()) : 0;
        lay.nodes[0] = {0, d0 ? p->v0_basis : Mat(n, 0)};
        for (int i = 1; i < cells; ++i)
            lay.nodes[i] = {d0 + (i - 1) * n, Mat::Identity(n, n)};
        lay.nodes[cells] = {d0 + (cells - 1) * n, d1 ? p->v1_basis : Mat(n, 0)};
        lay.total = d0 + (cells - 1) * n + d1;
    } else if (const auto* t = std::get_if<OrthogonalTwist>(&bc)) {
        for (int i = 0; i < cells; ++i) lay.nodes[i] = {i * n, Mat::Identity(n, n)};
        lay.nodes[cells] = {0, t->E};
        lay.total = cells * n;
    } else {
        for (int i = 0; i <= cells; ++i) lay.nodes[i] = {i * n, Mat::Identity(n, n)};
        lay.total = (cells + 1) * n;
        lay.factor = 2.0;
    }
    return lay;
}

// Condition estimate of an SPD matrix: power iteration for the largest
// eigenvalue, inverse iteration through the Cholesky factor for the smallest.
double spd_condition_estimate(const Mat& m) {
    Eigen::LLT<Mat> llt(m);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const int d = static_cast<int>(m.rows());
    Vec x = Vec::LinSpaced(d, 1.0, 2.0).normalized();
    double hi = 1.0;
    for (int it = 0; it < 12; ++it) {
        Vec y = m * x;
        hi = y.norm();
        if (hi == 0.0) return std::numeric_limits<double>::infinity();
        x = y / hi;
    }
    Vec z = Vec::LinSpaced(d, 2.0, 1.0).normalized();
    double inv = 1.0;
    for (int it = 0; it < 12; ++it) {
        Vec y = llt.solve(z);
        inv = y.norm();
        z = y / inv;
    }
    return hi * inv;
}

}  // namespace

AssembledForms assemble_forms(const CoefficientPath& coeffs, const BoundaryCondition& bc,
                              int cells, GramKind gram) {
    const int n = coeffs.dim();
    validate_boundary(bc, n);
    if (cells < 2) throw std::invalid_argument("assemble_forms: need at least 2 cells");

    const double a = coeffs.t_begin(), b = coeffs.t_end();
    const double h = (b - a) / cells;
    const DofLayout lay = make_layout(bc, n, cells);

    AssembledForms out;
    out.cells = cells;
    out.h = h;
    out.K = Mat::Zero(lay.total, lay.total);
    out.M = Mat::Zero(lay.total, lay.total);

    // Exact mass/stiffness integrals of the two hat functions on one cell.
    const double mass[2][2] = {{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}};
    const double stiff[2][2] = {{1.0 / h, -1.0 / h}, {-1.0 / h, 1.0 / h}};
    // Simpson points: values of (phi_L, phi_R) at left/mid/right.
    const double phi[2][3] = {{1.0, 0.5, 0.0}, {0.0, 0.5, 1.0}};
    const double w[3] = {h / 6.0, 4.0 * h / 6.0, h / 6.0};

    Mat P[3], Q[3], R[3];
    for (int c = 0; c < cells; ++c) {
        const double tl = a + c * h;
        coeffs.at(tl, P[0], Q[0], R[0]);
        coeffs.at(tl + 0.5 * h, P[1], Q[1], R[1]);
        coeffs.at(tl + h, P[2], Q[2], R[2]);

        const int nd[2] = {c, c + 1};
        const double dphi[2] = {-1.0 / h, 1.0 / h};
        for (int bb = 0; bb < 2; ++bb) {
            const NodeMap& rowmap = lay.nodes[nd[bb]];
            if (rowmap.T.cols() == 0) continue;
            for (int aa = 0; aa < 2; ++aa) {
                const NodeMap& colmap = lay.nodes[nd[aa]];
                if (colmap.T.cols() == 0) continue;
                Mat kblock = Mat::Zero(n, n);
                for (int pnt = 0; pnt < 3; ++pnt) {
                    kblock += w[pnt] * (dphi[bb] * dphi[aa] * P[pnt] +
                                        dphi[bb] * phi[aa][pnt] * Q[pnt] +
                                        phi[bb][pnt] * dphi[aa] * Q[pnt].transpose() +
                                        phi[bb][pnt] * phi[aa][pnt] * R[pnt]);
                }
                double mscalar = mass[bb][aa];
                if (gram == GramKind::W12) mscalar += stiff[bb][aa];
                out.K.block(rowmap.offset, colmap.offset, rowmap.T.cols(), colmap.T.cols()) +=
                    lay.factor * rowmap.T.transpose() * kblock * colmap.T;
                out.M.block(rowmap.offset, colmap.offset, rowmap.T.cols(), colmap.T.cols()) +=
                    lay.factor * mscalar * rowmap.T.transpose() * colmap.T;
            }
        }
    }
    return out;
}

double nullity_tolerance(double h) { return 1.0 * h * h; }

IndexReport morse_index_fem(const Mat& K, const Mat& M, double tol) {
    if (K.rows() != M.rows() || K.rows() != K.cols() || M.rows() != M.cols())
        throw DimensionMismatch("morse_index_fem: K/M shape mismatch");
    if (spd_condition_estimate(M) > 1e12)
        throw IllConditioned("morse_index_fem: Gram condition estimate exceeds 1e12");

    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(K, M, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (ges.info() != Eigen::Success)
        throw IllConditioned("morse_index_fem: generalized eigensolver failed");
    const Vec& mu = ges.eigenvalues();

    IndexReport rep;
    rep.method = "fem";
    rep.grid_size = static_cast<int>(K.rows());
    rep.tolerance = tol;
    for (int i = 0; i < mu.size(); ++i) {
        const double m = mu(i);
        if (m < -tol)
            ++rep.m_minus;
        else if (std::abs(m) <= tol) {
            ++rep.m_null;
            rep.near_zero_eigs.push_back(m);
        }
        if (std::abs(m) > tol && std::abs(m) <= 10.0 * tol) ++rep.indeterminate;
    }
    return rep;
}

Mat FundamentalMatrixPath::at(double s) const {
    const int nodes = static_cast<int>(grid.size());
    const double a = grid(0);
    const double h = (grid(nodes - 1) - a) / (nodes - 1);
    int i = static_cast<int>(std::floor((s - a) / h));
    i = std::max(0, std::min(i, nodes - 1));
    const double t0 = grid(i);
    if (std::abs(s - t0) < 1e-14 * std::max(1.0, std::abs(s))) return phi[i];

    // Short re-integration from the stored node.
    const int sub = 4;
    const double hs = (s - t0) / sub;
    Mat z = phi[i];
    Mat p, q, r;
    for (int k = 0; k < sub; ++k) {
        const double t = t0 + k * hs;
        coeffs.at(t, p, q, r);
        const Mat a0 = linearized_system_matrix(p, q, r);
        coeffs.at(t + 0.5 * hs, p, q, r);
        const Mat am = linearized_system_matrix(p, q, r);
        coeffs.at(t + hs, p, q, r);
        const Mat a1 = linearized_system_matrix(p, q, r);
        const Mat k1 = a0 * z;
        const Mat k2 = am * (z + 0.5 * hs * k1);
        const Mat k3 = am * (z + 0.5 * hs * k2);
        const Mat k4 = a1 * (z + hs * k3);
        z += (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return z;
}

FundamentalMatrixPath fundamental_matrix(const CoefficientPath& coeffs) {
    const int n = coeffs.dim();
    const int nodes = static_cast<int>(coeffs.grid.size());
    const double h = coeffs.spacing();
    const Mat jmat = symplectic_j(n);

    FundamentalMatrixPath out;
    out.grid = coeffs.grid;
    out.coeffs = coeffs;
    out.phi.resize(nodes);
    out.phi[0] = Mat::Identity(2 * n, 2 * n);

    Mat p, q, r;
    coeffs.at(coeffs.grid(0), p, q, r);
    Mat a1 = linearized_system_matrix(p, q, r);
    for (int i = 0; i + 1 < nodes; ++i) {
        const Mat a0 = a1;
        const double t = coeffs.grid(i);
        coeffs.at(t + 0.5 * h, p, q, r);
        const Mat am = linearized_system_matrix(p, q, r);
        coeffs.at(coeffs.grid(i + 1), p, q, r);
        a1 = linearized_system_matrix(p, q, r);

        const Mat& z = out.phi[i];
        const Mat k1 = a0 * z;
        const Mat k2 = am * (z + 0.5 * h * k1);
        const Mat k3 = am * (z + 0.5 * h * k2);
        const Mat k4 = a1 * (z + h * k3);
        out.phi[i + 1] = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        const double defect =
            max_abs(Mat(out.phi[i + 1].transpose() * jmat * out.phi[i + 1] - jmat));
        out.symplectic_defect = std::max(out.symplectic_defect, defect);
    }
    return out;
}

int FocalReport::cumulative_at(double lambda) const {
    int sum = 0;
    for (const auto& inst : instants)
        if (inst.s < lambda) sum += inst.multiplicity;
    return sum;
}

namespace {

struct DetectSample {
    double smin = 0.0;  // smallest singular value of the detection matrix
    double smax = 0.0;
    double det = 0.0;
};

DetectSample detect_at(const Mat& phi_s, const Mat& u_basis, int n) {
    const Mat d = phi_s.topRows(n) * u_basis;
    Eigen::JacobiSVD<Mat> svd(d);
    const Vec& sv = svd.singularValues();
    DetectSample s;
    s.det = d.determinant();
    s.smin = sv(sv.size() - 1);
    s.smax = sv(0);
    return s;
}

// Singular values under tol * scale count towards the rank drop; the scale
// is global because the whole detection matrix vanishes when every U
// direction becomes focal at once.
int multiplicity_at(const Mat& phi_s, const Mat& u_basis, int n, double tol, double scale) {
    const Mat d = phi_s.topRows(n) * u_basis;
    Eigen::JacobiSVD<Mat> svd(d);
    const Vec& sv = svd.singularValues();
    int mult = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) <= tol * scale) ++mult;
    return mult;
}

}  // namespace

FocalReport focal_points(const FundamentalMatrixPath& phi, const ConormalPair& pair, double tol) {
    const int n = phi.dim();
    if (pair.U_basis.rows() != 2 * n || pair.U_basis.cols() != n)
        throw UnsupportedBoundary("focal_points: conormal basis has unexpected shape");
    const int nodes = static_cast<int>(phi.grid.size());
    const double h = (phi.grid(nodes - 1) - phi.grid(0)) / (nodes - 1);

    std::vector<DetectSample> samp(nodes);
    double scale = 0.0;
    for (int i = 0; i < nodes; ++i) {
        samp[i] = detect_at(phi.phi[i], pair.U_basis, n);
        scale = std::max(scale, samp[i].smax);
    }
    if (scale <= 0.0) scale = 1.0;

    struct Hit {
        double s;
        double smin;
        int mult;
    };
    std::vector<Hit> hits;
    auto smin_of = [&](double s) { return detect_at(phi.at(s), pair.U_basis, n).smin; };
    auto det_of = [&](double s) { return detect_at(phi.at(s), pair.U_basis, n).det; };

    auto try_accept = [&](double s_star) {
        const Mat phis = phi.at(s_star);
        const int mult = multiplicity_at(phis, pair.U_basis, n, tol, scale);
        if (mult > 0 && s_star > phi.grid(0) + 1e-12 * std::max(1.0, h))
            hits.push_back({s_star, detect_at(phis, pair.U_basis, n).smin, mult});
    };

    // Odd-multiplicity instants: determinant sign changes across a cell,
    // refined by bisection.
    for (int i = 0; i + 1 < nodes; ++i) {
        if (!(samp[i].det * samp[i + 1].det < 0.0)) continue;
        double lo = phi.grid(i), hi = phi.grid(i + 1);
        double dlo = samp[i].det;
        for (int it = 0; it < 60 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            const double dm = det_of(mid);
            if (dlo * dm <= 0.0)
                hi = mid;
            else {
                lo = mid;
                dlo = dm;
            }
        }
        try_accept(0.5 * (lo + hi));
    }

    // Even multiplicities leave the determinant one-signed; those instants
    // show up as dips of the smallest singular value.  Refine every strict
    // local minimum (cheapest 64 if there are more) by interval halving on
    // sigma_min and keep the ones that actually reach the rank-drop cut.
    std::vector<int> dips;
    for (int i = 1; i + 1 < nodes; ++i)
        if (samp[i - 1].smin > samp[i].smin && samp[i].smin < samp[i + 1].smin)
            dips.push_back(i);
    if (dips.size() > 64) {
        std::sort(dips.begin(), dips.end(),
                  [&](int a, int b) { return samp[a].smin < samp[b].smin; });
        dips.resize(64);
        std::sort(dips.begin(), dips.end());
    }
    for (int i : dips) {
        double lo = phi.grid(i - 1), hi = phi.grid(i + 1);
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
        double fc = smin_of(c), fd = smin_of(d);
        for (int it = 0; it < 60 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
            if (fc < fd) {
                hi = d;
                d = c;
                fd = fc;
                c = hi - gr * (hi - lo);
                fc = smin_of(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + gr * (hi - lo);
                fd = smin_of(d);
            }
        }
        try_accept(0.5 * (lo + hi));
    }

    // Merge hits within one grid cell (the same instant found twice),
    // keeping the refinement with the smaller singular value.
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.s < b.s; });
    std::vector<Hit> merged;
    for (const Hit& hit : hits) {
        if (!merged.empty() && hit.s - merged.back().s <= h) {
            if (hit.smin < merged.back().smin) merged.back() = hit;
            continue;
        }
        merged.push_back(hit);
    }
    FocalReport rep;
    for (const Hit& hit : merged) rep.instants.push_back({hit.s, hit.mult});
    return rep;
}

int index_via_focal(const FocalReport& report, double lambda) {
    return report.cumulative_at(lambda);
}

}  // namespace morsebif
