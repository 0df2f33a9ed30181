#include "morsebif/lagrangian.hpp"

#include <cmath>
#include <memory>
#include <utility>

namespace morsebif {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Optimal central-difference steps: eps^(1/3) scaling for first partials,
// eps^(1/4) for second partials, both relative to the coordinate magnitude.
double step1(double x) { return std::cbrt(kEps) * std::max(1.0, std::abs(x)); }
double step2(double x) { return std::pow(kEps, 0.25) * std::max(1.0, std::abs(x)); }

struct PointEval {
    const LagrangianFamily& fam;
    double lambda, t;

    double operator()(const Vec& q, const Vec& v) const { return fam.eval(lambda, t, q, v); }
};

Vec fd_grad_q(const PointEval& f, const Vec& q, const Vec& v) {
    const int n = static_cast<int>(q.size());
    Vec g(n);
    Vec qp = q, qm = q;
    for (int j = 0; j < n; ++j) {
        const double h = step1(q[j]);
        qp[j] = q[j] + h;
        qm[j] = q[j] - h;
        g[j] = (f(qp, v) - f(qm, v)) / (2.0 * h);
        qp[j] = q[j];
        qm[j] = q[j];
    }
    return g;
}

Vec fd_grad_v(const PointEval& f, const Vec& q, const Vec& v) {
    const int n = static_cast<int>(v.size());
    Vec g(n);
    Vec vp = v, vm = v;
    for (int i = 0; i < n; ++i) {
        const double h = step1(v[i]);
        vp[i] = v[i] + h;
        vm[i] = v[i] - h;
        g[i] = (f(q, vp) - f(q, vm)) / (2.0 * h);
        vp[i] = v[i];
        vm[i] = v[i];
    }
    return g;
}

// Symmetric second derivative in one slot (q or v); computes the upper
// triangle and mirrors, so the result is exactly symmetric.
template <bool InQ>
Mat fd_hess(const PointEval& f, const Vec& q, const Vec& v) {
    const int n = static_cast<int>(q.size());
    const Vec& x0 = InQ ? q : v;
    Mat h(n, n);
    const double f0 = f(q, v);
    auto eval_shift = [&](int i, double hi, int j, double hj) {
        Vec x = x0;
        x[i] += hi;
        x[j] += hj;
        return InQ ? f(x, v) : f(q, x);
    };
    for (int i = 0; i < n; ++i) {
        const double hi = step2(x0[i]);
        h(i, i) = (eval_shift(i, hi, i, 0.0) - 2.0 * f0 + eval_shift(i, -hi, i, 0.0)) / (hi * hi);
        for (int j = i + 1; j < n; ++j) {
            const double hj = step2(x0[j]);
            const double cross = (eval_shift(i, hi, j, hj) - eval_shift(i, hi, j, -hj) -
                                  eval_shift(i, -hi, j, hj) + eval_shift(i, -hi, j, -hj)) /
                                 (4.0 * hi * hj);
            h(i, j) = cross;
            h(j, i) = cross;
        }
    }
    return h;
}

// Mixed block dqv(i,j) = d^2 L / (dv_i dq_j) by a 4-point cross difference.
Mat fd_mixed(const PointEval& f, const Vec& q, const Vec& v) {
    const int n = static_cast<int>(q.size());
    Mat m(n, n);
    for (int i = 0; i < n; ++i) {
        const double hv = step2(v[i]);
        Vec vp = v, vm = v;
        vp[i] += hv;
        vm[i] -= hv;
        for (int j = 0; j < n; ++j) {
            const double hq = step2(q[j]);
            Vec qp = q, qm = q;
            qp[j] += hq;
            qm[j] -= hq;
            m(i, j) = (f(qp, vp) - f(qp, vm) - f(qm, vp) + f(qm, vm)) / (4.0 * hq * hv);
        }
    }
    return m;
}

void check_second_order_blocks(PartialBundle& b) {
    const double tol_sym = 1e-10;
    auto rel_asym = [](const Mat& m) {
        const double scale = std::max(1.0, max_abs(m));
        return max_abs(Mat(m - m.transpose())) / scale;
    };
    if (rel_asym(b.dvv) > tol_sym)
        throw NonConvexPoint("dvv is not symmetric within tolerance");
    if (rel_asym(b.dqq) > tol_sym)
        throw NonConvexPoint("dqq is not symmetric within tolerance");
    b.dvv = 0.5 * (b.dvv + b.dvv.transpose()).eval();
    b.dqq = 0.5 * (b.dqq + b.dqq.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(b.dvv, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) <= 0.0)
        throw NonConvexPoint("dvv has an eigenvalue <= 0 at a sampled point");
}

}  // namespace

LagrangianFamily::LagrangianFamily(std::string name, int dim, EvalFn eval)
    : name_(std::move(name)), dim_(dim), eval_(std::move(eval)) {
    if (dim_ <= 0) throw std::invalid_argument("LagrangianFamily: dim must be positive");
    if (!eval_) throw std::invalid_argument("LagrangianFamily: eval is required");
}

LagrangianFamily::LagrangianFamily(std::string name, int dim, EvalFn eval, Partials analytic)
    : LagrangianFamily(std::move(name), dim, std::move(eval)) {
    analytic_ = std::move(analytic);
}

double LagrangianFamily::eval(double lambda, double t, const Vec& q, const Vec& v) const {
    return eval_(lambda, t, q, v);
}

PartialBundle partials(const LagrangianFamily& fam, double lambda, double t,
                       const Vec& q, const Vec& v) {
    if (q.size() != fam.dim() || v.size() != fam.dim())
        throw DimensionMismatch("partials: q/v size does not match family dim");
    const auto [lo, hi] = fam.lambda_range();
    if (lambda < lo || lambda > hi)
        throw DomainError("partials: lambda outside declared parameter range");

    const PointEval f{fam, lambda, t};
    const auto* a = fam.analytic();
    PartialBundle b;
    b.dq = (a && a->dq) ? a->dq(lambda, t, q, v) : fd_grad_q(f, q, v);
    b.dv = (a && a->dv) ? a->dv(lambda, t, q, v) : fd_grad_v(f, q, v);
    b.dqq = (a && a->dqq) ? a->dqq(lambda, t, q, v) : fd_hess<true>(f, q, v);
    b.dqv = (a && a->dqv) ? a->dqv(lambda, t, q, v) : fd_mixed(f, q, v);
    b.dvv = (a && a->dvv) ? a->dvv(lambda, t, q, v) : fd_hess<false>(f, q, v);
    check_second_order_blocks(b);
    return b;
}

LagrangianFamily build_pendulum(double l, double g,
                                std::optional<PendulumPerturbation> w) {
    if (!(l > 0.0) || !(g > 0.0))
        throw std::invalid_argument("build_pendulum: l and g must be positive");

    PendulumPerturbation pert;
    if (w) {
        pert = std::move(*w);
        if (!pert.value) throw std::invalid_argument("build_pendulum: W.value is required");
    } else {
        const double period = 2.0 * M_PI * std::sqrt(l / g);
        const double freq = 2.0 * M_PI / period;
        pert.value = [freq](double lam, double t, double x) {
            return (1.0 + std::sin(freq * t)) * std::sin(lam) * std::cos(x);
        };
        pert.dx = [freq](double lam, double t, double x) {
            return -(1.0 + std::sin(freq * t)) * std::sin(lam) * std::sin(x);
        };
        pert.dxx = [freq](double lam, double t, double x) {
            return -(1.0 + std::sin(freq * t)) * std::sin(lam) * std::cos(x);
        };
    }
    // x-derivatives of W fall back to scalar central differences.
    auto wx = pert.dx ? pert.dx
                      : [val = pert.value](double lam, double t, double x) {
                            const double h = step1(x);
                            return (val(lam, t, x + h) - val(lam, t, x - h)) / (2.0 * h);
                        };
    auto wxx = pert.dxx ? pert.dxx
                        : [val = pert.value](double lam, double t, double x) {
                              const double h = step2(x);
                              return (val(lam, t, x + h) - 2.0 * val(lam, t, x) +
                                      val(lam, t, x - h)) /
                                     (h * h);
                          };

    auto eval = [l, g, val = pert.value](double lam, double t, const Vec& q, const Vec& v) {
        return 0.5 * l * v[0] * v[0] + g * std::cos(q[0]) + val(lam, t, q[0]);
    };
    LagrangianFamily::Partials p;
    p.dq = [g, wx](double lam, double t, const Vec& q, const Vec&) {
        Vec r(1);
        r[0] = -g * std::sin(q[0]) + wx(lam, t, q[0]);
        return r;
    };
    p.dv = [l](double, double, const Vec&, const Vec& v) {
        Vec r(1);
        r[0] = l * v[0];
        return r;
    };
    p.dqq = [g, wxx](double lam, double t, const Vec& q, const Vec&) {
        Mat r(1, 1);
        r(0, 0) = -g * std::cos(q[0]) + wxx(lam, t, q[0]);
        return r;
    };
    p.dqv = [](double, double, const Vec&, const Vec&) { return Mat::Zero(1, 1).eval(); };
    p.dvv = [l](double, double, const Vec&, const Vec&) {
        Mat r(1, 1);
        r(0, 0) = l;
        return r;
    };
    LagrangianFamily fam("pendulum", 1, std::move(eval), std::move(p));
    fam.set_lambda_range(-1.0, 1.0);
    return fam;
}

LagrangianFamily build_physical(PhysicalFields fields, int dim, std::string name) {
    if (!fields.P) throw std::invalid_argument("build_physical: P field is required");

    auto shared = std::make_shared<PhysicalFields>(std::move(fields));
    auto eval = [shared, dim](double, double t, const Vec& q, const Vec& v) {
        const Mat P = shared->P(t, q);
        if (P.rows() != dim || P.cols() != dim)
            throw DimensionMismatch("physical family: P field has wrong shape");
        double r = 0.5 * v.dot(P * v);
        if (shared->alpha) r += shared->alpha(t, q).dot(v);
        if (shared->V) r -= shared->V(t, q);
        return r;
    };

    const bool analytic_ok = shared->p_time_only &&
                             (!shared->alpha || shared->alpha_jac) &&
                             (!shared->V || (shared->V_grad && shared->V_hess));
    if (!analytic_ok) return LagrangianFamily(std::move(name), dim, std::move(eval));

    LagrangianFamily::Partials p;
    p.dq = [shared, dim](double, double t, const Vec& q, const Vec& v) {
        Vec r = Vec::Zero(dim);
        if (shared->alpha_jac) r += shared->alpha_jac(t, q).transpose() * v;
        if (shared->V_grad) r -= shared->V_grad(t, q);
        return r;
    };
    p.dv = [shared](double, double t, const Vec& q, const Vec& v) {
        Vec r = shared->P(t, q) * v;
        if (shared->alpha) r += shared->alpha(t, q);
        return r;
    };
    p.dqq = [shared, dim](double, double t, const Vec& q, const Vec&) {
        Mat r = Mat::Zero(dim, dim);
        if (shared->V_hess) r -= shared->V_hess(t, q);
        return r;
    };
    p.dqv = [shared, dim](double, double t, const Vec& q, const Vec&) {
        return shared->alpha_jac ? shared->alpha_jac(t, q) : Mat::Zero(dim, dim).eval();
    };
    p.dvv = [shared](double, double t, const Vec& q, const Vec&) { return shared->P(t, q); };
    return LagrangianFamily(std::move(name), dim, std::move(eval), std::move(p));
}

LagrangianFamily build_quadratic(std::function<Mat(double, double)> P,
                                 std::function<Mat(double, double)> Q,
                                 std::function<Mat(double, double)> R,
                                 int dim, std::string name) {
    if (!P || !R) throw std::invalid_argument("build_quadratic: P and R are required");
    auto qfn = Q ? std::move(Q)
                 : [dim](double, double) { return Mat::Zero(dim, dim).eval(); };

    auto eval = [P, qfn, R](double lam, double t, const Vec& q, const Vec& v) {
        const Mat Rm = R(lam, t);
        return 0.5 * v.dot(P(lam, t) * v) + v.dot(qfn(lam, t) * q) +
               0.5 * q.dot(0.5 * (Rm + Rm.transpose()) * q);
    };
    LagrangianFamily::Partials p;
    p.dq = [qfn, R](double lam, double t, const Vec& q, const Vec& v) {
        const Mat Rm = R(lam, t);
        return Vec(qfn(lam, t).transpose() * v + 0.5 * (Rm + Rm.transpose()) * q);
    };
    p.dv = [P, qfn](double lam, double t, const Vec& q, const Vec& v) {
        return Vec(P(lam, t) * v + qfn(lam, t) * q);
    };
    p.dqq = [R](double lam, double t, const Vec&, const Vec&) {
        const Mat Rm = R(lam, t);
        return Mat(0.5 * (Rm + Rm.transpose()));
    };
    p.dqv = [qfn](double lam, double t, const Vec&, const Vec&) { return qfn(lam, t); };
    p.dvv = [P](double lam, double t, const Vec&, const Vec&) { return P(lam, t); };
    return LagrangianFamily(std::move(name), dim, std::move(eval), std::move(p));
}

LagrangianFamily build_free_particle(int dim) {
    PhysicalFields f;
    f.P = [dim](double, const Vec&) { return Mat::Identity(dim, dim).eval(); };
    f.p_time_only = true;
    return build_physical(std::move(f), dim, "free");
}

LagrangianFamily build_harmonic(double omega0, double slope, int dim) {
    auto id = [dim](double, double) { return Mat::Identity(dim, dim).eval(); };
    auto r = [omega0, slope, dim](double lam, double) {
        const double w = omega0 + slope * lam;
        return Mat(-w * w * Mat::Identity(dim, dim));
    };
    return build_quadratic(id, nullptr, r, dim, "harmonic");
}

}  // namespace morsebif
