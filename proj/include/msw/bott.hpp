#ifndef MSW_BOTT_HPP_
#define MSW_BOTT_HPP_

// Perturbation of a Morse-Bott function into a Morse function
// h = f + eps sum_j rho_j f_j, and the checks relating the complex of h to the
// complexes of the f_j on the critical submanifolds.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "msw/catalog.hpp"
#include "msw/complex.hpp"
#include "msw/flow.hpp"
#include "msw/poly.hpp"

namespace msw
{

struct BottConfig
{
    double initial_fraction = 0.5;  // starting outer radius, as a fraction of the chart radius
    double shrink = 0.8;
    double inner_fraction = 0.5;  // inner radius / outer radius
    double margin = 0.1;          // safety margin on sampled variations
    double radius_floor = 1e-4;
    int tube_samples = 2000;       // per neighborhood, for var and chart checks
    int drop_trajectories = 24;    // per neighborhood boundary
    int shell_samples = 10000;     // epsilon estimate
    int verify_samples = 1000;     // fresh samples re-checking epsilon
    int stray_samples = 10000;     // search for unexpected critical points of h
    double epsilon_safety = 0.5;
    std::uint64_t seed = 20240601;

    BottConfig scaled(double density) const
    {
        BottConfig c = *this;
        auto s = [density](int n) { return std::max(1, static_cast<int>(std::lround(n * density))); };
        c.tube_samples = s(tube_samples);
        c.drop_trajectories = s(drop_trajectories);
        c.shell_samples = s(shell_samples);
        c.verify_samples = s(verify_samples);
        c.stray_samples = s(stray_samples);
        return c;
    }
};

/// Permutation listing submanifolds by increasing f(C); ties keep catalog order.
inline std::vector<int> order_by_height(const std::vector<CriticalSubmanifold>& subs)
{
    std::vector<int> p(subs.size());
    std::iota(p.begin(), p.end(), 0);
    std::stable_sort(p.begin(), p.end(), [&](int a, int b) { return subs[a].value < subs[b].value; });
    return p;
}

namespace detail
{

template <typename T>
T eval(const ScalarField& f, const Point<T>& p)
{
    if constexpr (std::is_same_v<T, double>)
        return f.value_fn(p);
    else
        return f.jet_fn(p);
}

template <typename T>
std::array<T, kMaxAmbient> eval(const VectorField& f, const Point<T>& p)
{
    if constexpr (std::is_same_v<T, double>)
        return f.value_fn(p);
    else
        return f.jet_fn(p);
}

template <typename T>
Vec values_of(const Point<T>& p)
{
    Vec v(p.n);
    for (int i = 0; i < p.n; ++i)
        v[i] = value_of(p[i]);
    return v;
}

template <typename T>
Point<T> apply_linear(const Mat& a, const Point<T>& p)
{
    Point<T> out;
    out.n = p.n;
    for (int i = 0; i < p.n; ++i) {
        out[i] = constant_like(p[0], 0.0);
        for (int j = 0; j < p.n; ++j)
            if (a(i, j) != 0.0)
                out[i] = out[i] + a(i, j) * p[j];
    }
    return out;
}

} // namespace detail

/// Smooth nonincreasing step in the radial coordinate r: 1 on [0, inner],
/// 0 on [outer, inf), built from psi(x) = exp(-1/x).
struct BumpProfile
{
    double inner = 0.0;
    double outer = 0.0;
    double gradient_bound = 0.0;  // sup |d rho / d r|

    BumpProfile() = default;
    BumpProfile(double in, double out) : inner(in), outer(out)
    {
        // Sup of |S'(s)| for the normalized step, by dense sampling of the closed form.
        double best = 0.0;
        for (int i = 1; i < 4000; ++i) {
            const double s = i / 4000.0;
            best = std::max(best, std::abs(dstep(s)));
        }
        gradient_bound = best / (outer - inner);
    }

    static double psi(double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; }

    static double dstep(double s)
    {
        const double a = psi(1 - s), b = psi(s);
        if (a + b == 0)
            return 0.0;
        const double da = -a / ((1 - s) * (1 - s)), db = b / (s * s);
        return (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
    }

    /// Profile in r.
    double operator()(double r) const { return of_squared(r * r); }

    /// Profile as a function of q = r^2, usable with Jets.
    template <typename T>
    T of_squared(const T& q) const
    {
        constexpr double cut = 1.0 / 700.0;  // psi below exp(-700) is treated as zero
        const double qv = value_of(q);
        if (qv <= inner * inner)
            return constant_like(q, 1.0);
        if (qv >= outer * outer)
            return constant_like(q, 0.0);
        const double sv = (std::sqrt(qv) - inner) / (outer - inner);
        if (sv <= cut)
            return constant_like(q, 1.0);
        if (sv >= 1.0 - cut)
            return constant_like(q, 0.0);
        const T s = (sqrt(q) - inner) / (outer - inner);
        const T a = exp(-1.0 / (1.0 - s));
        const T b = exp(-1.0 / s);
        return a / (a + b);
    }
};

struct TubularNeighborhood
{
    int sub = -1;  // index into the model's submanifold list
    double outer_radius = 0.0;
    double inner_radius = 0.0;
    double chart_radius = 0.0;
};

namespace detail
{

inline double normal_norm(const TubeChart& t, const Vec& x) { return t.normal_coords.value(x).norm(); }

inline bool in_tube(const CriticalSubmanifold& sub, double radius, const Vec& x)
{
    for (const auto& t : sub.lifts)
        if (t.in_domain(x) && normal_norm(t, x) <= radius)
            return true;
    return false;
}

/// Deterministic sample of a tube: chart points with |n| <= radius (or in a
/// shell between lo and hi), over all lifts.
struct TubeSample
{
    Vec x;
    Vec n;
    int lift = 0;
};

inline std::vector<TubeSample> sample_tube(const CriticalSubmanifold& sub, int m, double lo, double hi, int count,
                                           std::mt19937_64& rng)
{
    const int d = m - sub.dim;
    std::uniform_real_distribution<double> uu(0.0, 2 * kPi), unit(0.0, 1.0);
    std::normal_distribution<double> gauss;
    std::vector<TubeSample> out;
    for (int i = 0; i < count; ++i) {
        const int lift = i % static_cast<int>(sub.lifts.size());
        const double u = sub.dim > 0 ? uu(rng) : 0.0;
        Vec dir(d);
        for (int k = 0; k < d; ++k)
            dir[k] = gauss(rng);
        if (dir.norm() == 0)
            dir[0] = 1;
        dir.normalize();
        // Every fourth sample sits on the outer boundary so extremes are seen.
        double r;
        if (i % 4 == 3)
            r = hi;
        else if (d == 1)
            r = lo + (hi - lo) * unit(rng);
        else
            r = std::sqrt(lo * lo + (hi * hi - lo * lo) * unit(rng));
        const Vec n = r * dir;
        out.push_back({sub.lifts[lift].chart_point(u, n), n, lift});
    }
    return out;
}

} // namespace detail

struct NeighborhoodReport
{
    bool pass = true;
    std::vector<std::string> failures;  // human-readable, first few
    std::vector<double> var;            // sampled var(f, T_j)
    bool disjoint = true;
    bool in_chart = true;
    bool normal_form = true;
    bool variation = true;
    bool drop = true;
    int drop_samples = 0;       // trajectories examined for the drop condition
    double min_drop_ratio = std::numeric_limits<double>::infinity();  // drop / (3 max var)
    std::vector<int> shrink_requests;  // submanifolds implicated in a failure
};

/// Checks conditions (disjointness, chart domain, normal form, variation
/// inequalities, drop along sampled flow lines) for given radii.
inline NeighborhoodReport check_neighborhoods(const ManifoldModel& mfd, const ScalarField& field,
                                              const std::vector<CriticalSubmanifold>& subs,
                                              const std::vector<double>& outer, const BottConfig& cfg = {})
{
    NeighborhoodReport rep;
    const int l = static_cast<int>(subs.size());
    const int m = mfd.intrinsic_dim;
    std::mt19937_64 rng(cfg.seed);
    std::vector<char> bad(l, 0);
    auto fail = [&](const std::string& what, std::initializer_list<int> who) {
        rep.pass = false;
        if (rep.failures.size() < 8)
            rep.failures.push_back(what);
        for (int j : who)
            bad[j] = 1;
    };

    rep.var.assign(l, 0.0);
    for (int j = 0; j < l; ++j) {
        const auto& sub = subs[j];
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        bool chart_ok = true, form_ok = true, disjoint_ok = true;
        // Chart checks extend 10% past the outer radius so the support of rho_j stays inside the domain.
        for (const auto& s : detail::sample_tube(sub, m, 0.0, 1.1 * outer[j], cfg.tube_samples, rng)) {
            const TubeChart& t = sub.lifts[s.lift];
            if (!t.in_domain(s.x) || !mfd.on_manifold(s.x, 1e-8) ||
                (t.normal_coords.value(s.x) - s.n).norm() > 1e-8) {
                chart_ok = false;
                continue;
            }
            if (s.n.norm() > outer[j])
                continue;
            const double f = field.value(s.x);
            lo = std::min(lo, f);
            hi = std::max(hi, f);
            const int nv = sub.bott_index;
            const double model = sub.value - s.n.head(nv).squaredNorm() + s.n.tail(s.n.size() - nv).squaredNorm();
            if (std::abs(f - model) > 1e-6 * outer[j] * outer[j])
                form_ok = false;
            for (int i = 0; i < l; ++i)
                if (i != j && detail::in_tube(subs[i], outer[i], s.x)) {
                    disjoint_ok = false;
                    if (rep.disjoint)
                        fail(sub.id + " and " + subs[i].id + " neighborhoods overlap", {i, j});
                    rep.disjoint = false;
                }
        }
        if (!chart_ok) {
            rep.in_chart = false;
            fail(sub.id + " neighborhood leaves its chart domain", {j});
        }
        if (!form_ok) {
            rep.normal_form = false;
            fail(sub.id + ": normal form residual above tolerance", {j});
        }
        (void)disjoint_ok;
        rep.var[j] = hi >= lo ? hi - lo : 0.0;
    }

    const double k = 1.0 + cfg.margin;
    for (int i = 0; i < l; ++i)
        for (int j = i + 1; j < l; ++j) {
            const double gap = std::abs(subs[i].value - subs[j].value);
            if (gap < 1e-12)
                continue;  // equal heights: the inequality does not apply
            if (k * (rep.var[i] + rep.var[j]) >= gap / 3.0) {
                rep.variation = false;
                fail("var(" + subs[i].id + ") + var(" + subs[j].id + ") too large for the height gap", {i, j});
            }
        }

    // Drop condition: flow lines of f leaving T_i and entering T_j lose at
    // least 3 max var.
    double max_var = 0.0;
    for (double v : rep.var)
        max_var = std::max(max_var, v);
    FlowConfig fc;
    fc.abs_tol = fc.rel_tol = 1e-8;
    // A flow line that has not reached a neighborhood by then has stalled
    // near a critical set missing from the list.
    fc.max_steps = 20000;
    fc.max_time = 1e4;
    for (int i = 0; i < l; ++i) {
        CriticalSet crit;
        std::vector<int> set_sub;
        for (int j = 0; j < l; ++j) {
            if (j == i)
                continue;
            crit.sets.push_back({subs[j].id,
                                 [&subs, &outer, j](const Vec& x) {
                                     return detail::in_tube(subs[j], outer[j], x) ? 0.0 : 1.0;
                                 },
                                 {}});
            set_sub.push_back(j);
        }
        for (const auto& s : detail::sample_tube(subs[i], m, outer[i], outer[i], cfg.drop_trajectories, rng)) {
            if (!mfd.on_manifold(s.x, 1e-8))
                continue;
            const TubeChart& t = subs[i].lifts[s.lift];
            // Exits when the flow -grad f increases |n|.
            const Vec g = projected_gradient(mfd, field, s.x);
            const Vec nq = t.normal_coords.value(s.x);
            Vec grad_q = Vec::Zero(mfd.ambient_dim);
            {
                const auto jets = t.normal_coords.jet_fn(to_jet_point(s.x));
                for (int c = 0; c < t.normal_coords.components; ++c)
                    grad_q += 2.0 * nq[c] * jets[c].g;
            }
            if (-g.dot(grad_q) <= 1e-9 * g.norm() * grad_q.norm())
                continue;
            Trajectory tr;
            try {
                tr = integrate(mfd, field, s.x, Direction::forward, crit, fc);
            } catch (const Error& e) {
                fail(std::string("drop check from ") + subs[i].id + ": " + e.what(), {i});
                rep.drop = false;
                continue;
            }
            ++rep.drop_samples;
            if (tr.limit_set < 0) {
                rep.drop = false;
                fail("flow line from " + subs[i].id + " did not reach another neighborhood", {i});
                continue;
            }
            const int j = set_sub[tr.limit_set];
            const double drop = field.value(s.x) - field.value(tr.end);
            const double need = 3.0 * k * max_var;
            if (need > 0)
                rep.min_drop_ratio = std::min(rep.min_drop_ratio, drop / need);
            if (drop < need) {
                rep.drop = false;
                fail("flow line " + subs[i].id + " -> " + subs[j].id + " drops less than 3 max var", {i, j});
            }
        }
    }
    for (int j = 0; j < l; ++j)
        if (bad[j])
            rep.shrink_requests.push_back(j);
    return rep;
}

struct NeighborhoodPlan
{
    std::vector<TubularNeighborhood> tubes;
    std::vector<BumpProfile> bumps;
    NeighborhoodReport report;
    int rounds = 0;
};

/// Shrinks radii from a fraction of each chart radius until every condition
/// in check_neighborhoods holds.
inline NeighborhoodPlan build_neighborhoods(const ManifoldModel& mfd, const ScalarField& field,
                                            const std::vector<CriticalSubmanifold>& subs,
                                            const BottConfig& cfg = {})
{
    const int l = static_cast<int>(subs.size());
    std::vector<double> outer(l);
    for (int j = 0; j < l; ++j) {
        if (subs[j].lifts.empty())
            throw Error(ErrorKind::construction, subs[j].id + ": no Morse-Bott chart");
        double cr = std::numeric_limits<double>::infinity();
        for (const auto& t : subs[j].lifts)
            cr = std::min(cr, t.chart_radius);
        outer[j] = cfg.initial_fraction * cr;
    }
    NeighborhoodPlan plan;
    for (;;) {
        ++plan.rounds;
        plan.report = check_neighborhoods(mfd, field, subs, outer, cfg);
        if (plan.report.pass)
            break;
        if (plan.report.shrink_requests.empty())
            throw Error(ErrorKind::construction, "build_neighborhoods: " + plan.report.failures.front());
        for (int j : plan.report.shrink_requests) {
            outer[j] *= cfg.shrink;
            if (outer[j] < cfg.radius_floor)
                throw Error(ErrorKind::construction, "build_neighborhoods: radius of " + subs[j].id +
                                                         " fell below " + std::to_string(cfg.radius_floor) +
                                                         " (" + plan.report.failures.front() + ")");
        }
    }
    for (int j = 0; j < l; ++j) {
        double cr = std::numeric_limits<double>::infinity();
        for (const auto& t : subs[j].lifts)
            cr = std::min(cr, t.chart_radius);
        plan.tubes.push_back({j, outer[j], cfg.inner_fraction * outer[j], cr});
        plan.bumps.emplace_back(cfg.inner_fraction * outer[j], outer[j]);
    }
    return plan;
}

/// rho_j f_j summed over the lifts of C_j; on lift l the function f_j is read
/// through the deck map so the sum is deck invariant.
inline ScalarField bump_times_fj(const ManifoldModel& mfd, const CriticalSubmanifold& sub, const BumpProfile& bump,
                                 const ScalarField& fj, double scale = 1.0)
{
    const Mat deck = mfd.deck ? *mfd.deck : Mat::Identity(mfd.ambient_dim, mfd.ambient_dim);
    return make_field("rho*f_" + sub.id, [sub, bump, fj, deck, scale](const auto& p) {
        using T = std::decay_t<decltype(p[0])>;
        const Vec xv = detail::values_of(p);
        T acc = constant_like(p[0], 0.0);
        for (std::size_t l = 0; l < sub.lifts.size(); ++l) {
            const TubeChart& t = sub.lifts[l];
            if (!t.in_domain(xv))
                continue;
            const auto n = detail::eval(t.normal_coords, p);
            T q = constant_like(p[0], 0.0);
            for (int c = 0; c < t.normal_coords.components; ++c)
                q = q + n[c] * n[c];
            if (value_of(q) >= bump.outer * bump.outer)
                continue;
            const T r = bump.of_squared(q);
            const T f = l == 0 ? detail::eval(fj, p) : detail::eval(fj, detail::apply_linear(deck, p));
            acc = acc + scale * r * f;
        }
        return acc;
    });
}

struct EpsilonEstimate
{
    double epsilon = 0.0;
    std::vector<double> inf_grad_f;     // per submanifold, over its shell
    std::vector<double> sup_grad_pert;  // sup |grad(rho_j f_j)| over the shell
    int samples_per_shell = 0;
    // Post hoc check at fresh samples: eps * sup < inf on every shell.
    bool verified = false;
    double verify_margin = 0.0;  // min_j inf / (eps sup) over the fresh samples
};

namespace detail
{

inline void shell_extremes(const ManifoldModel& mfd, const ScalarField& field, const CriticalSubmanifold& sub,
                           const BumpProfile& bump, const ScalarField& pert, int count, std::mt19937_64& rng,
                           double& inf_f, double& sup_p)
{
    inf_f = std::numeric_limits<double>::infinity();
    sup_p = 0.0;
    for (const auto& s : sample_tube(sub, mfd.intrinsic_dim, bump.inner, bump.outer, count, rng)) {
        const Vec x = mfd.project(s.x);
        inf_f = std::min(inf_f, projected_gradient_unchecked(mfd, field, x).norm());
        sup_p = std::max(sup_p, projected_gradient_unchecked(mfd, pert, x).norm());
    }
}

} // namespace detail

/// eps = safety * min_j inf |grad f| / sup |grad(rho_j f_j)| over the shells
/// T_j - T~_j, then re-checked at fresh samples.
inline EpsilonEstimate choose_epsilon(const ManifoldModel& mfd, const ScalarField& field,
                                      const std::vector<CriticalSubmanifold>& subs,
                                      const std::vector<BumpProfile>& bumps, const std::vector<ScalarField>& perts,
                                      const BottConfig& cfg = {}, std::optional<double> override_eps = {})
{
    EpsilonEstimate e;
    const int l = static_cast<int>(subs.size());
    std::mt19937_64 rng(cfg.seed + 1);
    e.samples_per_shell = cfg.shell_samples;
    double ratio = std::numeric_limits<double>::infinity();
    for (int j = 0; j < l; ++j) {
        double inf_f, sup_p;
        detail::shell_extremes(mfd, field, subs[j], bumps[j], perts[j], cfg.shell_samples, rng, inf_f, sup_p);
        if (!(inf_f > 1e-12))
            throw Error(ErrorKind::construction,
                        "choose_epsilon: |grad f| vanishes on the shell of " + subs[j].id + " (shell touches the critical set)");
        e.inf_grad_f.push_back(inf_f);
        e.sup_grad_pert.push_back(sup_p);
        if (sup_p > 0)
            ratio = std::min(ratio, inf_f / sup_p);
    }
    if (!std::isfinite(ratio))
        ratio = 1.0;  // no perturbation has a gradient on any shell
    e.epsilon = override_eps ? *override_eps : cfg.epsilon_safety * ratio;
    if (!(e.epsilon > 0))
        throw Error(ErrorKind::construction, "choose_epsilon: epsilon must be positive");

    std::mt19937_64 fresh(cfg.seed + 2);
    e.verified = true;
    e.verify_margin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < l; ++j) {
        double inf_f, sup_p;
        detail::shell_extremes(mfd, field, subs[j], bumps[j], perts[j], cfg.verify_samples, fresh, inf_f, sup_p);
        if (sup_p > 0)
            e.verify_margin = std::min(e.verify_margin, inf_f / (e.epsilon * sup_p));
        if (!(e.epsilon * sup_p < inf_f))
            e.verified = false;
    }
    return e;
}

/// h = f + eps sum_j rho_j f_j.
inline ScalarField assemble_h(const ScalarField& f, const std::vector<ScalarField>& perts, double eps)
{
    return make_field("h", [f, perts, eps](const auto& p) {
        auto acc = detail::eval(f, p);
        for (const auto& g : perts)
            acc = acc + eps * detail::eval(g, p);
        return acc;
    });
}

struct PerturbationPlan
{
    std::string model;
    std::vector<CriticalSubmanifold> subs;
    std::vector<SubmanifoldMorseData> fj;
    std::vector<int> height_order;
    NeighborhoodPlan neighborhoods;
    std::vector<ScalarField> perturbations;  // rho_j f_j
    EpsilonEstimate eps;
    ScalarField h;
    BottConfig cfg;
};

/// Neighborhoods, bumps, epsilon and h for a Morse-Bott function.
inline PerturbationPlan make_plan(const ManifoldModel& mfd, const ScalarField& field,
                                  std::vector<CriticalSubmanifold> subs, std::vector<SubmanifoldMorseData> fj,
                                  const BottConfig& cfg = {}, std::optional<double> eps_override = {})
{
    if (subs.size() != fj.size())
        throw Error(ErrorKind::construction, "make_plan: one f_j per critical submanifold is required");
    PerturbationPlan plan;
    plan.cfg = cfg;
    for (std::size_t j = 0; j < subs.size(); ++j) {
        normal_hessian(mfd, field, subs[j], 0.0);
        // f_j must be positive on C_j.
        for (int i = 0; i < 64; ++i) {
            const Vec x = subs[j].parametrization(2 * detail::kPi * i / 64.0);
            if (!(fj[j].fj.value(x) > 0))
                throw Error(ErrorKind::construction, "make_plan: f_" + subs[j].id + " is not positive");
        }
    }
    plan.height_order = order_by_height(subs);
    plan.neighborhoods = build_neighborhoods(mfd, field, subs, cfg);
    for (std::size_t j = 0; j < subs.size(); ++j)
        plan.perturbations.push_back(bump_times_fj(mfd, subs[j], plan.neighborhoods.bumps[j], fj[j].fj));
    plan.eps = choose_epsilon(mfd, field, subs, plan.neighborhoods.bumps, plan.perturbations, cfg, eps_override);
    plan.h = assemble_h(field, plan.perturbations, plan.eps.epsilon);
    plan.subs = std::move(subs);
    plan.fj = std::move(fj);
    return plan;
}

inline PerturbationPlan make_plan(const CatalogEntry& e, const BottConfig& cfg = {},
                                  std::optional<double> eps_override = {})
{
    if (e.kind != ModelKind::morse_bott)
        throw Error(ErrorKind::domain, "make_plan: " + e.name + " is not a Morse-Bott model");
    PerturbationPlan p = make_plan(e.manifold, e.field, e.subs, e.fj, cfg, eps_override);
    p.model = e.name;
    return p;
}

struct HCriticalData
{
    std::vector<CriticalPoint> points;
    std::vector<int> owner;           // submanifold of each point
    std::vector<int> relative_index;  // index as a critical point of f_j
    int stray_checked = 0;            // samples examined by the stray sweep
    int stray_newton = 0;             // of which were small-gradient and searched
};

/// Critical points of h: those of each f_j, with index lambda_j + lambda^j_p,
/// confirmed by classification on h and a sampling sweep for strays.
inline HCriticalData critical_points_of_h(const ManifoldModel& mfd, const PerturbationPlan& plan)
{
    HCriticalData out;
    for (std::size_t j = 0; j < plan.subs.size(); ++j) {
        const auto& sub = plan.subs[j];
        const auto& d = plan.fj[j];
        std::vector<std::pair<CriticalSeed, int>> seeds;
        if (sub.dim == 0) {
            seeds.push_back({{sub.id, sub.parametrization(0.0), 0}, 0});
        } else {
            for (const auto& s : d.seeds) {
                const CriticalPoint c = classify_critical_point(*d.intrinsic, d.fj, s.location, s.id);
                seeds.push_back({s, c.index});
            }
        }
        for (const auto& [s, rel] : seeds) {
            CriticalPoint cp;
            try {
                cp = classify_critical_point(mfd, plan.h, s.location, s.id);
            } catch (const Error& e) {
                throw Error(ErrorKind::perturbation, "critical_points_of_h: " + s.id + ": " + e.what());
            }
            if ((cp.location - s.location).norm() > 1e-6)
                throw Error(ErrorKind::perturbation, "critical_points_of_h: " + s.id + " moved under h");
            if (cp.index != sub.bott_index + rel)
                throw Error(ErrorKind::perturbation, "critical_points_of_h: " + s.id + " has index " +
                                                         std::to_string(cp.index) + " under h, expected " +
                                                         std::to_string(sub.bott_index + rel));
            out.points.push_back(std::move(cp));
            out.owner.push_back(static_cast<int>(j));
            out.relative_index.push_back(rel);
        }
    }

    std::mt19937_64 rng(plan.cfg.seed + 3);
    auto known = [&](const Vec& x) {
        for (const auto& p : out.points)
            for (const Vec& l : mfd.lifts(p.location))
                if ((x - l).norm() < 1e-6)
                    return true;
        return false;
    };
    // Newton searches start from every small-gradient sample and from the
    // lowest 2% of samples by gradient norm.
    std::vector<std::pair<double, Vec>> samples;
    for (int i = 0; i < plan.cfg.stray_samples; ++i) {
        const Vec x = mfd.random_point(rng);
        samples.emplace_back(projected_gradient(mfd, plan.h, x).norm(), x);
    }
    out.stray_checked = static_cast<int>(samples.size());
    std::stable_sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    const std::size_t lowest = std::max<std::size_t>(20, samples.size() / 50);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& [g, x] = samples[i];
        if (g > 1e-2 && i >= lowest)
            break;
        ++out.stray_newton;
        if (g == 0 && !known(x))
            throw Error(ErrorKind::perturbation, "critical_points_of_h: stray critical point at a sample");
        CriticalPoint c;
        try {
            c = classify_critical_point(mfd, plan.h, x);
        } catch (const Error&) {
            continue;  // no critical point found from here
        }
        if (!known(c.location))
            throw Error(ErrorKind::perturbation, "critical_points_of_h: stray critical point of index " +
                                                     std::to_string(c.index) + " found by the sampling sweep");
    }
    return out;
}

/// Morse-Smale-Witten complex of f_j on C_j (a single generator for points).
struct SubComplex
{
    int sub = -1;
    std::vector<CriticalPoint> points;
    ChainComplexData cx;
};

inline std::vector<SubComplex> build_sub_complexes(const PerturbationPlan& plan, Ring ring, const FlowConfig& cfg = {})
{
    std::vector<SubComplex> out;
    for (std::size_t j = 0; j < plan.subs.size(); ++j) {
        SubComplex s;
        s.sub = static_cast<int>(j);
        const auto& d = plan.fj[j];
        if (plan.subs[j].dim == 0) {
            s.cx = make_complex(ring, {{plan.subs[j].id}}, {IntMatrix(0, 1)});
        } else {
            for (const auto& seed : d.seeds)
                s.points.push_back(classify_critical_point(*d.intrinsic, d.fj, seed.location, seed.id));
            s.cx = build_complex(*d.intrinsic, d.fj, s.points, ring, cfg);
        }
        out.push_back(std::move(s));
    }
    return out;
}

namespace detail
{

/// Index of an h generator (degree n, position) in its owner's sub-complex.
struct Attribution
{
    int sub = -1;
    int degree = -1;  // k = n - lambda_j
    int position = -1;
};

inline Attribution attribute(const std::string& id, int n, const PerturbationPlan& plan,
                             const std::vector<SubComplex>& sc)
{
    for (const auto& s : sc) {
        const int k = n - plan.subs[s.sub].bott_index;
        if (k < 0 || k > s.cx.dim)
            continue;
        const auto& g = s.cx.generators[k];
        const auto it = std::find(g.begin(), g.end(), id);
        if (it != g.end())
            return {s.sub, k, static_cast<int>(it - g.begin())};
    }
    throw Error(ErrorKind::bookkeeping, "generator " + id + " in degree " + std::to_string(n) +
                                            " does not belong to any critical submanifold");
}

} // namespace detail

struct ChainComponent
{
    int sub = -1;
    int degree = -1;             // k in C_k(f_j)
    std::vector<BigInt> coeffs;  // over the sub-complex generators of degree k
};

struct GradedChainElement
{
    int degree = 0;
    std::vector<ChainComponent> components;  // nonzero ones, in height order
    int top = -1;                            // index into components
};

/// Splits a chain of h in degree n along C_n(h) = sum_{lambda_j + k = n} C_k(f_j).
inline GradedChainElement decompose_chain(const std::vector<BigInt>& alpha, int n, const ChainComplexData& cx_h,
                                          const PerturbationPlan& plan, const std::vector<SubComplex>& sc)
{
    if (static_cast<int>(alpha.size()) != cx_h.nu(n))
        throw Error(ErrorKind::bookkeeping, "decompose_chain: chain length does not match degree " + std::to_string(n));
    GradedChainElement g;
    g.degree = n;
    std::vector<std::optional<ChainComponent>> by_sub(plan.subs.size());
    for (int i = 0; i < cx_h.nu(n); ++i) {
        const auto a = detail::attribute(cx_h.generators[n][i], n, plan, sc);
        auto& c = by_sub[a.sub];
        if (!c) {
            c = ChainComponent{a.sub, a.degree, std::vector<BigInt>(sc[a.sub].cx.nu(a.degree))};
        }
        c->coeffs[a.position] = cx_h.ring == Ring::mod2 ? BigInt(abs(alpha[i]) % 2) : alpha[i];
    }
    for (int j : plan.height_order) {
        auto& c = by_sub[j];
        if (!c)
            continue;
        if (std::all_of(c->coeffs.begin(), c->coeffs.end(), [](const BigInt& v) { return v == 0; }))
            continue;
        g.components.push_back(std::move(*c));
    }
    g.top = static_cast<int>(g.components.size()) - 1;
    return g;
}

struct LemmaPair
{
    int sub = -1;
    std::string source, target;
    int unsigned_h = 0, unsigned_fj = 0;
    std::optional<int> signed_h, signed_fj;
    int mod2_h = 0, mod2_fj = 0;
};

struct BoundaryLemmaReport
{
    bool pass = true;
    std::vector<LemmaPair> pairs;
    std::vector<int> global_sign;  // per submanifold; 0 when undetermined
    std::vector<std::string> failures;
};

/// Counts between critical points of f_j on the same C_j agree under h on M
/// and under f_j on C_j: unsigned exactly, signed up to one sign per C_j.
inline BoundaryLemmaReport verify_boundary_lemma(const PerturbationPlan& plan, const ChainComplexData& cx_h,
                                                 const std::vector<SubComplex>& sc)
{
    BoundaryLemmaReport rep;
    rep.global_sign.assign(plan.subs.size(), 0);
    for (const auto& s : sc) {
        for (const auto& c : s.cx.counts) {
            const auto it = std::find_if(cx_h.counts.begin(), cx_h.counts.end(), [&](const FlowLineCount& h) {
                return h.source == c.source && h.target == c.target;
            });
            if (it == cx_h.counts.end()) {
                rep.pass = false;
                rep.failures.push_back("pair " + c.source + " -> " + c.target + " missing from the complex of h");
                continue;
            }
            LemmaPair p{s.sub, c.source, c.target, it->unsigned_count, c.unsigned_count, it->signed_sum,
                        c.signed_sum, it->mod2_sum, c.mod2_sum};
            if (p.unsigned_h != p.unsigned_fj) {
                rep.pass = false;
                rep.failures.push_back("unsigned count mismatch for " + c.source + " -> " + c.target + ": " +
                                       std::to_string(p.unsigned_h) + " under h, " + std::to_string(p.unsigned_fj) +
                                       " under f_j");
            }
            if (p.mod2_h != p.mod2_fj) {
                rep.pass = false;
                rep.failures.push_back("mod 2 count mismatch for " + c.source + " -> " + c.target);
            }
            if (p.signed_h && p.signed_fj) {
                const int a = *p.signed_h, b = *p.signed_fj;
                if (std::abs(a) != std::abs(b)) {
                    rep.pass = false;
                    rep.failures.push_back("signed count magnitude mismatch for " + c.source + " -> " + c.target);
                } else if (a != 0) {
                    const int sg = a == b ? 1 : -1;
                    int& g = rep.global_sign[s.sub];
                    if (g == 0)
                        g = sg;
                    else if (g != sg) {
                        rep.pass = false;
                        rep.failures.push_back("orientation convention: no single sign on " +
                                               plan.subs[s.sub].id + " reconciles the signed counts");
                    }
                }
            }
            rep.pairs.push_back(std::move(p));
        }
    }
    return rep;
}

struct UphillReport
{
    bool pass = true;
    int cross_entries = 0;  // counted connections between distinct submanifolds
    std::vector<std::string> violations;
};

/// Flow lines of h between distinct C_i, C_j only run downhill in f.
inline UphillReport verify_no_uphill_connections(const PerturbationPlan& plan, const HCriticalData& hc,
                                                 const ChainComplexData& cx_h)
{
    UphillReport rep;
    auto owner = [&](const std::string& id) {
        for (std::size_t i = 0; i < hc.points.size(); ++i)
            if (hc.points[i].id == id)
                return hc.owner[i];
        throw Error(ErrorKind::bookkeeping, "verify_no_uphill_connections: unknown generator " + id);
    };
    for (const auto& c : cx_h.counts) {
        if (c.unsigned_count == 0)
            continue;
        const int i = owner(c.source), j = owner(c.target);
        if (i == j)
            continue;
        ++rep.cross_entries;
        if (!(plan.subs[i].value > plan.subs[j].value)) {
            rep.pass = false;
            rep.violations.push_back(c.source + " (" + plan.subs[i].id + ") -> " + c.target + " (" +
                                     plan.subs[j].id + ")");
        }
    }
    return rep;
}

struct TopPartDegree
{
    int degree = 0;
    int kernel_rank_h = 0;
    int selected = 0;
    int sum_sub_kernels = 0;  // sum_{lambda_j + k = n} z_k^j
    bool inequality = true;
    bool pass = true;
    std::vector<std::string> witnesses;  // top parts, as "sub:k:[coeffs]"
    std::vector<std::string> failures;
};

struct TopPartReport
{
    bool pass = true;
    std::vector<TopPartDegree> degrees;
};

namespace detail
{

inline bool zero_vec(const std::vector<BigInt>& v)
{
    return std::all_of(v.begin(), v.end(), [](const BigInt& a) { return a == 0; });
}

inline std::string vec_text(const std::vector<BigInt>& v)
{
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + v[i].str();
    return s + "]";
}

} // namespace detail

/// Greedy selection of kernel elements of d_n^h whose top parts are
/// independent; each top part must lie in the kernel of the matching d^{f_j}.
inline TopPartReport verify_top_part(const ChainComplexData& cx_h, const PerturbationPlan& plan,
                                     const std::vector<SubComplex>& sc)
{
    TopPartReport rep;
    const bool mod2 = cx_h.ring == Ring::mod2;
    for (int n = 0; n <= cx_h.dim; ++n) {
        TopPartDegree d;
        d.degree = n;
        IntMatrix k = mod2 ? kernel_basis_mod2(cx_h.boundary(n)) : kernel_basis(cx_h.boundary(n));
        d.kernel_rank_h = k.cols();
        for (const auto& s : sc) {
            const int kk = n - plan.subs[s.sub].bott_index;
            if (kk >= 0 && kk <= s.cx.dim)
                d.sum_sub_kernels += kernel_ranks(s.cx)[kk];
        }
        d.inequality = d.sum_sub_kernels >= d.kernel_rank_h;

        std::vector<detail::Attribution> attr;
        for (int i = 0; i < cx_h.nu(n); ++i)
            attr.push_back(detail::attribute(cx_h.generators[n][i], n, plan, sc));

        auto reduce = [&](BigInt& v) {
            if (mod2)
                v = abs(v) % 2;
        };
        std::vector<int> pool(k.cols());
        std::iota(pool.begin(), pool.end(), 0);
        // Work from the highest submanifold down; columns whose block vanishes pass to the next one.
        for (auto it = plan.height_order.rbegin(); it != plan.height_order.rend(); ++it) {
            const int j = *it;
            std::vector<int> rows;
            for (int i = 0; i < cx_h.nu(n); ++i)
                if (attr[i].sub == j)
                    rows.push_back(i);
            if (rows.empty())
                continue;
            std::vector<int> chosen;
            for (int r : rows) {
                // gcd-reduce the pool on row r until one column carries it.
                for (;;) {
                    int piv = -1;
                    for (int c : pool)
                        if (k(r, c) != 0 && (piv < 0 || abs(k(r, c)) < abs(k(r, piv))))
                            piv = c;
                    if (piv < 0)
                        break;
                    bool others = false;
                    for (int c : pool) {
                        if (c == piv || k(r, c) == 0)
                            continue;
                        const BigInt q = k(r, c) / k(r, piv);
                        for (int i = 0; i < k.rows(); ++i) {
                            k(i, c) -= q * k(i, piv);
                            reduce(k(i, c));
                        }
                        if (k(r, c) != 0)
                            others = true;
                    }
                    if (!others) {
                        chosen.push_back(piv);
                        pool.erase(std::find(pool.begin(), pool.end(), piv));
                        break;
                    }
                }
            }
            const auto& s = sc[j];
            for (int c : chosen) {
                const int kk = attr[rows.front()].degree;
                std::vector<BigInt> top(s.cx.nu(kk));
                for (int r : rows)
                    top[attr[r].position] = k(r, c);
                IntMatrix t(s.cx.nu(kk), 1);
                for (int i = 0; i < t.rows(); ++i)
                    t(i, 0) = top[i];
                IntMatrix img = s.cx.boundary(kk) * t;
                if (mod2)
                    img = img.reduced_mod2();
                const std::string w = plan.subs[j].id + ":" + std::to_string(kk) + ":" + detail::vec_text(top);
                d.witnesses.push_back(w);
                if (detail::zero_vec(top)) {
                    d.pass = false;
                    d.failures.push_back("zero top part " + w);
                } else if (!img.is_zero()) {
                    d.pass = false;
                    d.failures.push_back("top part " + w + " is not a cycle of f_" + plan.subs[j].id);
                }
            }
            d.selected += static_cast<int>(chosen.size());
        }
        if (!pool.empty()) {
            d.pass = false;
            d.failures.push_back(std::to_string(pool.size()) + " kernel elements of d_" + std::to_string(n) +
                                 "^h have no attributable top part");
        }
        if (d.selected != d.kernel_rank_h)
            d.pass = false;
        if (!d.inequality) {
            d.pass = false;
            d.failures.push_back("kernel-rank inequality fails in degree " + std::to_string(n));
        }
        rep.pass = rep.pass && d.pass;
        rep.degrees.push_back(std::move(d));
    }
    return rep;
}

inline nlohmann::json to_json(const PerturbationPlan& p)
{
    nlohmann::json j;
    j["model"] = p.model;
    j["height_order"] = nlohmann::json::array();
    for (int i : p.height_order)
        j["height_order"].push_back(p.subs[i].id);
    nlohmann::json subs = nlohmann::json::array();
    for (std::size_t i = 0; i < p.subs.size(); ++i) {
        const auto& t = p.neighborhoods.tubes[i];
        const auto& d = p.fj[i];
        nlohmann::json s{{"id", p.subs[i].id},
                         {"dim", p.subs[i].dim},
                         {"bott_index", p.subs[i].bott_index},
                         {"value", p.subs[i].value},
                         {"lifts", p.subs[i].lifts.size()},
                         {"outer_radius", t.outer_radius},
                         {"inner_radius", t.inner_radius},
                         {"bump_gradient_bound", p.neighborhoods.bumps[i].gradient_bound},
                         {"var", p.neighborhoods.report.var[i]},
                         {"shell_inf_grad_f", p.eps.inf_grad_f[i]},
                         {"shell_sup_grad_rho_fj", p.eps.sup_grad_pert[i]}};
        if (p.subs[i].dim > 0)
            s["f_j"] = {{"form", "a + b cos(k (u - u0))"},
                        {"a", d.offset},
                        {"b", d.amplitude},
                        {"k", d.frequency},
                        {"u0", d.phase}};
        else
            s["f_j"] = {{"form", "constant"}, {"a", d.offset}};
        subs.push_back(s);
    }
    j["submanifolds"] = subs;
    j["epsilon"] = p.eps.epsilon;
    j["epsilon_verified"] = p.eps.verified;
    j["epsilon_verify_samples"] = p.cfg.verify_samples;
    j["epsilon_verify_margin"] = std::isfinite(p.eps.verify_margin) ? nlohmann::json(p.eps.verify_margin) : nlohmann::json();
    j["shell_samples"] = p.eps.samples_per_shell;
    const auto& r = p.neighborhoods.report;
    j["neighborhood_checks"] = {{"rounds", p.neighborhoods.rounds},
                                {"disjoint", r.disjoint},
                                {"in_chart", r.in_chart},
                                {"normal_form", r.normal_form},
                                {"variation", r.variation},
                                {"drop", r.drop},
                                {"drop_trajectories", r.drop_samples},
                                {"min_drop_ratio", std::isfinite(r.min_drop_ratio) ? nlohmann::json(r.min_drop_ratio)
                                                                                    : nlohmann::json()}};
    return j;
}

} // namespace msw

#endif // MSW_BOTT_HPP_
