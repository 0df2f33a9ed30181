#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "morsebif/common.hpp"

namespace morsebif {

/// First and second partial derivatives of an action density L(lambda,t,q,v)
/// at one point.
///
/// Index convention for the mixed block: dqv(i,j) = d^2 L / (dv_i dq_j),
/// i.e. the q-Jacobian of the momentum dL/dv.  With this convention the
/// linearized momentum of a field y is  dvv * ydot + dqv * y.
struct PartialBundle {
    Vec dq;   ///< dL/dq, length n
    Vec dv;   ///< dL/dv (momentum), length n
    Mat dqq;  ///< symmetric n x n
    Mat dqv;  ///< mixed n x n, rows = v index, cols = q index
    Mat dvv;  ///< symmetric SPD n x n
};

/// A parameterized Lagrangian family on R x [0,tau] x R^n x R^n.
///
/// Evaluators must be pure: the object is immutable after construction and
/// may be shared freely across threads.
class LagrangianFamily {
public:
    using EvalFn = std::function<double(double lambda, double t, const Vec& q, const Vec& v)>;

    /// Optional analytic partial derivatives.  Any subset may be provided;
    /// missing entries fall back to central finite differences.
    struct Partials {
        std::function<Vec(double, double, const Vec&, const Vec&)> dq;
        std::function<Vec(double, double, const Vec&, const Vec&)> dv;
        std::function<Mat(double, double, const Vec&, const Vec&)> dqq;
        std::function<Mat(double, double, const Vec&, const Vec&)> dqv;
        std::function<Mat(double, double, const Vec&, const Vec&)> dvv;
    };

    LagrangianFamily(std::string name, int dim, EvalFn eval);
    LagrangianFamily(std::string name, int dim, EvalFn eval, Partials analytic);

    int dim() const { return dim_; }
    const std::string& name() const { return name_; }
    bool has_analytic() const { return analytic_.has_value(); }
    const Partials* analytic() const { return analytic_ ? &*analytic_ : nullptr; }

    /// Declared parameter range; evaluations outside it are a DomainError.
    std::pair<double, double> lambda_range() const { return lambda_range_; }
    void set_lambda_range(double lo, double hi) { lambda_range_ = {lo, hi}; }

    double eval(double lambda, double t, const Vec& q, const Vec& v) const;

private:
    std::string name_;
    int dim_;
    EvalFn eval_;
    std::optional<Partials> analytic_;
    std::pair<double, double> lambda_range_{
        -std::numeric_limits<double>::infinity(),
        std::numeric_limits<double>::infinity()};
};

/// All first and second partials of the family at one point.  Uses analytic
/// callables where provided, central finite differences otherwise; validates
/// symmetry of the second-order blocks and strict convexity in v.
///
/// Throws NonConvexPoint if dvv has an eigenvalue <= 0, DomainError if
/// lambda is outside the declared range.
PartialBundle partials(const LagrangianFamily& fam, double lambda, double t,
                       const Vec& q, const Vec& v);

/// Scalar perturbation W(lambda, t, x) added to the pendulum density.
/// x-derivative callables are optional (finite differences otherwise).
struct PendulumPerturbation {
    std::function<double(double lambda, double t, double x)> value;
    std::function<double(double, double, double)> dx;
    std::function<double(double, double, double)> dxx;
};

/// Planar pendulum family  L(lambda,t,x,y) = l/2 y^2 + g cos x + W(lambda,t,x).
///
/// The default perturbation is
///   W(lambda,t,x) = (1 + sin(2 pi t / T)) sin(lambda) cos(x),  T = 2 pi sqrt(l/g),
/// which fixes the trivial branch x == 0 (W_x(lambda,t,0) == 0) while driving
/// the curvature at it.  Parameter range (-1, 1).
LagrangianFamily build_pendulum(double l, double g,
                                std::optional<PendulumPerturbation> w = std::nullopt);

/// Fields of a mechanical Lagrangian
///   L = 1/2 <P(t,q) v, v> + <alpha(t,q), v> - V(t,q).
///
/// Analytic partials are assembled when the derivative fields are supplied
/// and the structural flags hold (P independent of q, alpha affine in q);
/// otherwise the finite-difference fallback handles everything.
struct PhysicalFields {
    std::function<Mat(double t, const Vec& q)> P;       ///< SPD n x n, required
    std::function<Vec(double t, const Vec& q)> alpha;   ///< optional, default 0
    std::function<double(double t, const Vec& q)> V;    ///< optional, default 0
    std::function<Mat(double t, const Vec& q)> alpha_jac;  ///< (i,j) = d alpha_i / d q_j
    std::function<Vec(double t, const Vec& q)> V_grad;
    std::function<Mat(double t, const Vec& q)> V_hess;
    bool p_time_only = false;  ///< set when P does not depend on q
};

LagrangianFamily build_physical(PhysicalFields fields, int dim,
                                std::string name = "physical");

/// Quadratic family  L = 1/2 <P(lambda,t) v, v> + <Q(lambda,t) q, v> + 1/2 <R(lambda,t) q, q>
/// with analytic partials.  Q may be null (zero); R is used symmetrized.
/// The zero curve is a critical point for every linear boundary class.
LagrangianFamily build_quadratic(std::function<Mat(double, double)> P,
                                 std::function<Mat(double, double)> Q,
                                 std::function<Mat(double, double)> R,
                                 int dim, std::string name = "quadratic");

/// Free particle L = 1/2 |v|^2 (a PhysicalFields special case).
LagrangianFamily build_free_particle(int dim);

/// Harmonic oscillator with lambda-affine frequency omega(lambda) = omega0 + slope*lambda:
/// L = 1/2 |v|^2 - 1/2 omega(lambda)^2 |q|^2.
LagrangianFamily build_harmonic(double omega0, double slope, int dim);

}  // namespace morsebif
