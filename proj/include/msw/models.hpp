#ifndef MSW_MODELS_HPP_
#define MSW_MODELS_HPP_

// Embedded manifolds with the induced metric, scalar fields on them, and the
// classification of their critical structure.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "msw/errors.hpp"
#include "msw/jet.hpp"

namespace msw
{

inline constexpr double kOnManifoldTol = 1e-9;
inline constexpr double kCriticalGradTol = 1e-9;
inline constexpr double kDegeneracyTol = 1e-8;

using RealFn = std::function<double(const Point<double>&)>;
using JetFn = std::function<Jet(const Point<Jet>&)>;

/// Smooth function on ambient space, differentiated exactly through Jets.
struct ScalarField
{
    std::string name;
    RealFn value_fn;
    JetFn jet_fn;

    double value(const Vec& x) const { return value_fn(to_point(x)); }
    Jet jet(const Vec& x) const { return jet_fn(to_jet_point(x)); }
    Vec ambient_gradient(const Vec& x) const { return jet(x).g; }
    Mat ambient_hessian(const Vec& x) const
    {
        Mat h = jet(x).h;
        return 0.5 * (h + h.transpose());
    }
};

/// Build a ScalarField from a generic callable usable with both doubles and Jets.
template <typename F>
ScalarField make_field(std::string name, F f)
{
    ScalarField s;
    s.name = std::move(name);
    s.value_fn = [f](const Point<double>& p) { return f(p); };
    s.jet_fn = [f](const Point<Jet>& p) { return f(p); };
    return s;
}

/// Vector-valued counterpart of ScalarField (used for chart coordinates).
struct VectorField
{
    int components = 0;
    std::function<std::array<double, kMaxAmbient>(const Point<double>&)> value_fn;
    std::function<std::array<Jet, kMaxAmbient>(const Point<Jet>&)> jet_fn;

    Vec value(const Vec& x) const
    {
        auto a = value_fn(to_point(x));
        Vec v(components);
        for (int i = 0; i < components; ++i)
            v[i] = a[i];
        return v;
    }
};

template <typename F>
VectorField make_vector_field(int components, F f)
{
    VectorField v;
    v.components = components;
    v.value_fn = [f](const Point<double>& p) { return f(p); };
    v.jet_fn = [f](const Point<Jet>& p) { return f(p); };
    return v;
}

/// Compact manifold given as a regular level set c(x) = 0 in R^N, possibly
/// divided by a free linear involution (`deck`). Nonorientable surfaces are
/// represented as quotients of orientable covers, since a regular level set
/// of a map to R^(N-m) always has trivial normal bundle.
struct ManifoldModel
{
    std::string name;
    int ambient_dim = 0;
    int intrinsic_dim = 0;
    bool orientable = true;
    std::vector<ScalarField> constraints;
    std::optional<Mat> deck;

    // Parametrization of the cover by a box of parameters; used for sampling.
    std::function<Vec(const Vec&)> parametrization;
    Vec param_lo;
    Vec param_hi;

    int codim() const { return static_cast<int>(constraints.size()); }

    Vec residual(const Vec& x) const
    {
        Vec r(codim());
        for (int i = 0; i < codim(); ++i)
            r[i] = constraints[i].value(x);
        return r;
    }

    /// Rows are constraint gradients.
    Mat jacobian(const Vec& x) const
    {
        Mat j(codim(), ambient_dim);
        for (int i = 0; i < codim(); ++i)
            j.row(i) = constraints[i].ambient_gradient(x).transpose();
        return j;
    }

    bool on_manifold(const Vec& x, double tol = kOnManifoldTol) const
    {
        return residual(x).lpNorm<Eigen::Infinity>() < tol;
    }

    /// Newton retraction onto the constraint set along constraint normals.
    Vec project(Vec x) const
    {
        for (int it = 0; it < 50; ++it) {
            const Vec r = residual(x);
            if (r.lpNorm<Eigen::Infinity>() < 1e-14)
                break;
            const Mat j = jacobian(x);
            const Mat jjt = j * j.transpose();
            x -= j.transpose() * jjt.ldlt().solve(r);
        }
        return x;
    }

    /// All lifts of a point to the cover (x itself, and its deck image).
    std::vector<Vec> lifts(const Vec& x) const
    {
        std::vector<Vec> out{x};
        if (deck)
            out.push_back(*deck * x);
        return out;
    }

    Vec point_at(const Vec& params) const { return project(parametrization(params)); }

    Vec random_point(std::mt19937_64& rng) const
    {
        Vec u(param_lo.size());
        for (int i = 0; i < u.size(); ++i) {
            std::uniform_real_distribution<double> d(param_lo[i], param_hi[i]);
            u[i] = d(rng);
        }
        return point_at(u);
    }
};

/// Orthonormal basis (columns) of the tangent space at x.
inline Frame tangent_basis(const ManifoldModel& mfd, const Vec& x)
{
    const Mat jt = mfd.jacobian(x).transpose();
    Eigen::HouseholderQR<Mat> qr(jt);
    const Mat q = qr.householderQ() * Mat::Identity(mfd.ambient_dim, mfd.ambient_dim);
    return q.rightCols(mfd.intrinsic_dim);
}

inline void require_on_manifold(const ManifoldModel& mfd, const Vec& x)
{
    const double res = mfd.residual(x).lpNorm<Eigen::Infinity>();
    if (!(res < kOnManifoldTol))
        throw Error(ErrorKind::domain, mfd.name + ": point off manifold (residual " + std::to_string(res) + ")");
}

/// v minus its component in the span of the constraint gradients at x.
inline Vec project_to_tangent(const ManifoldModel& mfd, const Vec& x, const Vec& v)
{
    require_on_manifold(mfd, x);
    const Mat j = mfd.jacobian(x);
    const Mat jjt = j * j.transpose();
    return v - j.transpose() * jjt.ldlt().solve(j * v);
}

/// Gradient in the induced metric.
inline Vec projected_gradient(const ManifoldModel& mfd, const ScalarField& field, const Vec& x)
{
    return project_to_tangent(mfd, x, field.ambient_gradient(x));
}

/// Same as projected_gradient without the on-manifold check (integrator hot path).
inline Vec projected_gradient_unchecked(const ManifoldModel& mfd, const ScalarField& field, const Vec& x)
{
    const Vec g = field.ambient_gradient(x);
    const Mat j = mfd.jacobian(x);
    const Mat jjt = j * j.transpose();
    return g - j.transpose() * jjt.ldlt().solve(j * g);
}

/// Ambient representation of the Riemannian Hessian: the ambient Hessian of f
/// corrected by the Lagrange multipliers times the constraint Hessians. Its
/// restriction to the tangent space is the intrinsic Hessian.
inline Mat riemannian_hessian(const ManifoldModel& mfd, const ScalarField& field, const Vec& x)
{
    const Jet fj = field.jet(x);
    const Mat j = mfd.jacobian(x);
    const Vec mu = (j * j.transpose()).ldlt().solve(j * fj.g);
    Mat h = fj.h;
    for (int i = 0; i < mfd.codim(); ++i)
        h -= mu[i] * mfd.constraints[i].ambient_hessian(x);
    return 0.5 * (h + h.transpose());
}

/// Intrinsic Hessian in the orthonormal tangent basis `t`.
inline Mat tangent_hessian(const ManifoldModel& mfd, const ScalarField& field, const Vec& x, const Frame& t)
{
    const Mat h = t.transpose() * riemannian_hessian(mfd, field, x) * t;
    return 0.5 * (h + h.transpose());
}

/// Fix the sign of each column so that its largest-magnitude entry is positive.
inline void canonicalize_columns(Frame& f)
{
    for (int c = 0; c < f.cols(); ++c) {
        Eigen::Index i = 0;
        f.col(c).cwiseAbs().maxCoeff(&i);
        if (f(i, c) < 0)
            f.col(c) = -f.col(c);
    }
}

struct CriticalPoint
{
    std::string id;
    Vec location;
    int index = 0;
    Frame unstable_frame;  // N x index, orthonormal, spans the negative eigenspace
    Frame stable_frame;    // N x (m - index)
    Eigen::VectorXd eigenvalues;  // of the intrinsic Hessian, ascending
    double function_value = 0.0;
};

/// Newton search on the Lagrange system from `seed`, then index and frames
/// from the intrinsic Hessian.
inline CriticalPoint classify_critical_point(const ManifoldModel& mfd, const ScalarField& field, const Vec& seed,
                                             std::string id = {})
{
    const int n = mfd.ambient_dim;
    const int k = mfd.codim();
    Vec x = mfd.project(seed);
    Eigen::VectorXd mu;
    {
        const Mat j = mfd.jacobian(x);
        mu = (j * j.transpose()).ldlt().solve(j * field.ambient_gradient(x));
    }
    bool converged = false;
    for (int it = 0; it < 50; ++it) {
        const Jet fj = field.jet(x);
        const Mat j = mfd.jacobian(x);
        Eigen::VectorXd rhs(n + k);
        rhs.head(n) = fj.g - j.transpose() * mu;
        rhs.tail(k) = mfd.residual(x);
        if (rhs.lpNorm<Eigen::Infinity>() < 1e-14) {
            converged = true;
            break;
        }
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
        Mat hl = fj.h;
        for (int i = 0; i < k; ++i)
            hl -= mu[i] * mfd.constraints[i].ambient_hessian(x);
        kkt.topLeftCorner(n, n) = hl;
        kkt.topRightCorner(n, k) = -j.transpose();
        kkt.bottomLeftCorner(k, n) = j;
        const Eigen::VectorXd step = kkt.completeOrthogonalDecomposition().solve(rhs);
        x -= step.head(n);
        mu -= step.tail(k);
        if (step.lpNorm<Eigen::Infinity>() < 1e-15) {
            converged = true;
            break;
        }
    }
    x = mfd.project(x);
    const double gnorm = projected_gradient(mfd, field, x).norm();
    if (!converged && !(gnorm < kCriticalGradTol))
        throw Error(ErrorKind::search, mfd.name + "/" + field.name + ": Newton did not converge from seed (|grad| = " +
                                           std::to_string(gnorm) + ")");
    if (!(gnorm < kCriticalGradTol))
        throw Error(ErrorKind::search, mfd.name + "/" + field.name + ": residual gradient " + std::to_string(gnorm));

    const Frame t = tangent_basis(mfd, x);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(tangent_hessian(mfd, field, x, t)));
    const Eigen::VectorXd ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i)
        if (std::abs(ev[i]) < kDegeneracyTol)
            throw Error(ErrorKind::degeneracy, mfd.name + "/" + field.name + ": Hessian eigenvalue " +
                                                   std::to_string(ev[i]) + " (critical set is not isolated)");

    CriticalPoint cp;
    cp.id = std::move(id);
    cp.location = x;
    cp.eigenvalues = ev;
    cp.index = static_cast<int>((ev.array() < 0).count());
    const Eigen::MatrixXd vecs = t * es.eigenvectors();
    cp.unstable_frame = vecs.leftCols(cp.index);
    cp.stable_frame = vecs.rightCols(mfd.intrinsic_dim - cp.index);
    canonicalize_columns(cp.unstable_frame);
    canonicalize_columns(cp.stable_frame);
    cp.function_value = field.value(x);
    return cp;
}

/// Morse-Bott coordinates (u, v, w) about one connected lift of a critical
/// submanifold: f = f(C) - |v|^2 + |w|^2 inside the chart.
struct TubeChart
{
    VectorField normal_coords;                 // (v, w), m - c components
    std::function<bool(const Vec&)> in_domain;  // chart domain on the manifold
    std::function<Vec(double, const Vec&)> chart_point;  // (u, (v, w)) -> x
    double chart_radius = 0.0;                  // radial coordinate bound of the domain
};

struct CriticalSubmanifold
{
    std::string id;
    int dim = 0;
    int bott_index = 0;
    bool orientable = true;
    double value = 0.0;
    std::function<Vec(double)> parametrization;   // u in [0, 2 pi); constant for points
    std::function<Frame(double)> normal_splitting;  // N x (m - dim): columns [nu^- | nu^+]
    // Charts about each connected lift on the cover; lifts[1] (when present)
    // is the deck image of lifts[0].
    std::vector<TubeChart> lifts;
};

/// Normal Hessian H^nu_p(f) at parameter u, in the normal_splitting basis.
/// Throws when its signature disagrees with the declared Morse-Bott index.
inline Mat normal_hessian(const ManifoldModel& mfd, const ScalarField& field, const CriticalSubmanifold& sub,
                          double u)
{
    const Vec p = sub.parametrization(u);
    require_on_manifold(mfd, p);
    const Frame nb = sub.normal_splitting(u);
    const Mat h = nb.transpose() * riemannian_hessian(mfd, field, p) * nb;
    Mat hs = 0.5 * (h + h.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(hs)};
    const Eigen::VectorXd ev = es.eigenvalues();
    int neg = 0;
    for (int i = 0; i < ev.size(); ++i) {
        if (std::abs(ev[i]) < kDegeneracyTol)
            throw Error(ErrorKind::inconsistency, sub.id + ": degenerate normal Hessian");
        if (ev[i] < 0)
            ++neg;
    }
    if (neg != sub.bott_index)
        throw Error(ErrorKind::inconsistency, sub.id + ": normal Hessian has " + std::to_string(neg) +
                                                  " negative eigenvalues, declared index " +
                                                  std::to_string(sub.bott_index));
    return hs;
}

} // namespace msw

#endif // MSW_MODELS_HPP_
