#ifndef MSW_FLOW_HPP_
#define MSW_FLOW_HPP_

// Negative gradient flow on embedded manifolds, limit detection, and signed
// counts of flow lines between critical points of relative index one.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "msw/models.hpp"

namespace msw
{

struct FlowConfig
{
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double initial_step = 1e-3;
    double min_step = 1e-13;
    double max_step = 1.0;
    long max_steps = 2'000'000;
    double max_time = 1e7;
    double detect_radius = 1e-6;   // limit assignment for non-extremal critical points
    double capture_radius = 0.02;  // minima (forward) and maxima (backward) capture balls
    double link_radius = 1e-3;
    int link_samples = 48;
    double link_resolution = 1e-8;
    double jump_fraction = 0.25;   // label jump threshold, relative to capture_radius
    double monotone_tol = 1e-10;
    double transversality_radius = 1e-5;
    double passage_radius = 0.1;    // balls about saddles used for exit-side labels
    double curve_separation = 0.3;  // level-matched distance at which two link trajectories count as split
    int threads = 0;                // 0: hardware concurrency

    /// Tighter integrator and denser link sampling (robustness check).
    FlowConfig refined() const
    {
        FlowConfig c = *this;
        c.abs_tol *= 0.5;
        c.rel_tol *= 0.5;
        c.link_samples *= 2;
        return c;
    }
};

enum class Direction
{
    forward,  // t -> +infinity, along -grad f
    backward,
};

struct TrajectorySample
{
    double t = 0.0;
    Vec x;
    double f = 0.0;
};

/// Submanifold or other non-point critical element used as a limit target.
struct SetTarget
{
    std::string id;
    std::function<double(const Vec&)> distance;
    std::function<double(const Vec&)> parameter;
};

/// Critical elements against which limits are detected.
struct CriticalSet
{
    std::vector<CriticalPoint> points;
    std::vector<SetTarget> sets;
};

/// Transit through the passage ball of a non-extremal critical point.
struct Passage
{
    int point = -1;
    int lift = 0;
    double closest = 0.0;
    Vec offset;  // x - p on leaving the ball
    Vec side;    // offset in the expanding frame (unstable forward, stable backward)
};

struct Trajectory
{
    std::vector<TrajectorySample> samples;  // only when recording
    Direction direction = Direction::forward;
    std::string limit = "escaped";
    int limit_point = -1;  // index into CriticalSet::points
    int limit_lift = 0;
    int limit_set = -1;
    double limit_parameter = 0.0;
    bool captured = false;  // reached an extremal capture ball
    Vec entry;              // crossing of the capture ball (label for link bisection)
    Vec start;
    Vec end;
    double duration = 0.0;
    long steps = 0;
    std::vector<double> closest;        // per point, minimum distance over all lifts
    std::vector<int> closest_lift;
    std::vector<long> closest_step;     // step index (into samples when recording)
    std::vector<Passage> passages;
    bool monotone = true;
};

namespace detail
{

// Dormand-Prince 5(4) tableau.
struct DormandPrince
{
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
};

inline double point_distance(const Vec& a, const Vec& b) { return (a - b).norm(); }

} // namespace detail

/// Index of a point treated as an attractor of the flow in `dir` (minima for
/// forward flow, maxima for backward flow).
inline bool is_extremal(const CriticalPoint& p, int m, Direction dir)
{
    return dir == Direction::forward ? p.index == 0 : p.index == m;
}

/// Adaptive Runge-Kutta integration of -grad f (or +grad f backward) with
/// re-projection onto the constraint set after every step. Terminates on
/// reaching a critical element or when the budget runs out ("escaped").
/// With pass_saddles only the attracting extrema terminate; nearby passes of
/// other critical points are still recorded.
inline Trajectory integrate(const ManifoldModel& mfd, const ScalarField& field, const Vec& x0, Direction dir,
                            const CriticalSet& crit, const FlowConfig& cfg = {}, bool record = false,
                            bool pass_saddles = false)
{
    using DP = detail::DormandPrince;
    require_on_manifold(mfd, x0);

    const double sgn = dir == Direction::forward ? 1.0 : -1.0;
    auto rhs = [&](const Vec& x) -> Vec { return -sgn * projected_gradient_unchecked(mfd, field, x); };

    const int np = static_cast<int>(crit.points.size());
    std::vector<std::vector<Vec>> lifts(np);
    std::vector<std::vector<Frame>> expanding(np);
    for (int i = 0; i < np; ++i) {
        lifts[i] = mfd.lifts(crit.points[i].location);
        const Frame& f = dir == Direction::forward ? crit.points[i].unstable_frame : crit.points[i].stable_frame;
        expanding[i] = {f};
        if (mfd.deck)
            expanding[i].push_back(*mfd.deck * f);
    }
    // Passage state per (point, lift): closest distance while inside, or
    // +inf when outside; balls containing the start point are ignored.
    std::vector<std::vector<double>> inside(np);
    for (int i = 0; i < np; ++i)
        for (const Vec& c : lifts[i])
            inside[i].push_back((x0 - c).norm() < cfg.passage_radius ? -1.0
                                                                     : std::numeric_limits<double>::infinity());

    Trajectory tr;
    tr.direction = dir;
    tr.start = x0;
    tr.closest.assign(np, std::numeric_limits<double>::infinity());
    tr.closest_lift.assign(np, 0);
    tr.closest_step.assign(np, 0);

    Vec x = x0;
    double t = 0.0;
    double fx = field.value(x);
    if (record)
        tr.samples.push_back({t, x, fx});

    Vec prev = x;
    // Returns true when a limit is assigned at the current state.
    auto check_limits = [&](long step) -> bool {
        for (int i = 0; i < np; ++i) {
            const bool extremal = is_extremal(crit.points[i], mfd.intrinsic_dim, dir);
            for (int l = 0; l < static_cast<int>(lifts[i].size()); ++l) {
                const double d = detail::point_distance(x, lifts[i][l]);
                if (d < tr.closest[i]) {
                    tr.closest[i] = d;
                    tr.closest_lift[i] = l;
                    tr.closest_step[i] = step;
                }
                if (!extremal) {
                    double& st = inside[i][l];
                    if (d < cfg.passage_radius) {
                        if (st >= 0)
                            st = std::min(st, d);
                    } else if (st == -1.0) {
                        st = std::numeric_limits<double>::infinity();
                    } else if (st < std::numeric_limits<double>::infinity()) {
                        const Vec off = x - lifts[i][l];
                        tr.passages.push_back({i, l, st, off, Vec(expanding[i][l].transpose() * off)});
                        st = std::numeric_limits<double>::infinity();
                    }
                }
                const double radius = extremal ? cfg.capture_radius : cfg.detect_radius;
                if (d < radius && (extremal || !pass_saddles)) {
                    tr.limit = crit.points[i].id;
                    tr.limit_point = i;
                    tr.limit_lift = l;
                    tr.captured = extremal;
                    if (extremal) {
                        const double dp = detail::point_distance(prev, lifts[i][l]);
                        const double alpha = dp > d ? std::clamp((dp - radius) / (dp - d), 0.0, 1.0) : 1.0;
                        tr.entry = prev + alpha * (x - prev);
                    }
                    return true;
                }
            }
        }
        for (int s = 0; s < static_cast<int>(crit.sets.size()); ++s) {
            if (crit.sets[s].distance(x) < cfg.detect_radius) {
                tr.limit = crit.sets[s].id;
                tr.limit_set = s;
                if (crit.sets[s].parameter)
                    tr.limit_parameter = crit.sets[s].parameter(x);
                return true;
            }
        }
        return false;
    };

    auto finish = [&]() {
        tr.end = x;
        tr.duration = t;
        return tr;
    };

    if (check_limits(0))
        return finish();
    if (!(rhs(x).norm() > kCriticalGradTol))
        throw Error(ErrorKind::domain, "integrate: start point is critical but not a known critical element");

    double h = cfg.initial_step;
    Vec k1 = rhs(x);
    long step = 0;
    while (step < cfg.max_steps && t < cfg.max_time) {
        const Vec k2 = rhs(x + h * DP::a21 * k1);
        const Vec k3 = rhs(x + h * (DP::a31 * k1 + DP::a32 * k2));
        const Vec k4 = rhs(x + h * (DP::a41 * k1 + DP::a42 * k2 + DP::a43 * k3));
        const Vec k5 = rhs(x + h * (DP::a51 * k1 + DP::a52 * k2 + DP::a53 * k3 + DP::a54 * k4));
        const Vec k6 = rhs(x + h * (DP::a61 * k1 + DP::a62 * k2 + DP::a63 * k3 + DP::a64 * k4 + DP::a65 * k5));
        const Vec y = x + h * (DP::b1 * k1 + DP::b3 * k3 + DP::b4 * k4 + DP::b5 * k5 + DP::b6 * k6);
        const Vec k7 = rhs(y);
        const Vec err = h * (DP::e1 * k1 + DP::e3 * k3 + DP::e4 * k4 + DP::e5 * k5 + DP::e6 * k6 + DP::e7 * k7);
        double en = 0.0;
        for (int i = 0; i < err.size(); ++i) {
            const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(x[i]), std::abs(y[i]));
            en = std::max(en, std::abs(err[i]) / sc);
        }
        bool accept = en <= 1.0;
        Vec xn;
        double fn = 0.0;
        if (accept) {
            xn = mfd.project(y);
            fn = field.value(xn);
            // f must move monotonically; a violation means the step was too coarse.
            if (sgn * (fn - fx) > cfg.monotone_tol)
                accept = false;
        }
        if (!accept) {
            const double fac = en > 0 ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.5;
            h *= std::min(fac, 0.5);
            if (h < cfg.min_step)
                throw Error(ErrorKind::integration, "integrate: step size underflow at t = " + std::to_string(t));
            continue;
        }
        if (sgn * (fn - fx) > 0)
            tr.monotone = false;
        prev = x;
        x = xn;
        fx = fn;
        t += h;
        ++step;
        if (record)
            tr.samples.push_back({t, x, fx});
        tr.steps = step;
        if (check_limits(record ? static_cast<long>(tr.samples.size()) - 1 : step))
            return finish();
        const double fac = en > 0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(en, -0.2))) : 5.0;
        h = std::min(h * fac, cfg.max_step);
        k1 = rhs(x);
    }
    return finish();
}

/// Identifier of the critical element the forward flow from x0 converges to.
inline std::string limit_assignment(const ManifoldModel& mfd, const ScalarField& field, const Vec& x0,
                                    const CriticalSet& crit, const FlowConfig& cfg = {})
{
    const Trajectory tr = integrate(mfd, field, x0, Direction::forward, crit, cfg);
    if (tr.limit_point < 0 && tr.limit_set < 0)
        throw Error(ErrorKind::internal, "limit_assignment: trajectory escaped on a compact manifold");
    return tr.limit;
}

/// Sign pairing a transported frame of the unstable manifold against the
/// coorientation of the target stable manifold: sign det(C^T A) with
/// normalized columns. Equal column counts are required; empty frames give +1.
inline int orientation_sign(const Frame& transported, const Frame& coorientation)
{
    if (transported.cols() != coorientation.cols())
        throw Error(ErrorKind::orientation, "orientation_sign: frame dimensions differ");
    if (transported.cols() == 0)
        return 1;
    Frame a = transported, c = coorientation;
    for (int i = 0; i < a.cols(); ++i) {
        a.col(i).normalize();
        c.col(i).normalize();
    }
    const double d = Eigen::MatrixXd(c.transpose() * a).determinant();
    if (!(std::abs(d) >= 1e-10))
        throw Error(ErrorKind::orientation, "orientation_sign: combined frame is singular (det " +
                                                std::to_string(d) + ")");
    return d > 0 ? 1 : -1;
}

struct FlowLine
{
    std::string source;
    std::string target;
    int target_point = -1;
    int target_lift = 0;
    int sign = 1;                 // 0 when orientations were not requested
    double link_parameter = 0.0;  // angle on the link (or branch sign)
    Trajectory trajectory;        // recorded trajectory from the link point
};

struct FlowLineCount
{
    std::string source;
    std::string target;
    int unsigned_count = 0;
    std::optional<long> signed_sum;
    int mod2_sum = 0;
};

inline nlohmann::json to_json(const FlowLineCount& c)
{
    nlohmann::json j;
    j["source"] = c.source;
    j["target"] = c.target;
    j["unsigned"] = c.unsigned_count;
    j["signed"] = c.signed_sum ? nlohmann::json(*c.signed_sum) : nlohmann::json(nullptr);
    j["mod2"] = c.mod2_sum;
    return j;
}

/// Connection between critical points whose indices do not drop (forbidden
/// by the Morse-Smale condition).
struct ConnectionViolation
{
    std::string source;
    std::string target;
    double distance = 0.0;
};

struct LinkSweep
{
    std::string source;
    std::vector<FlowLine> lines;
    std::vector<ConnectionViolation> violations;
    std::vector<std::pair<double, std::string>> basin_samples;  // (link parameter, limit)
    long trajectories = 0;
};

namespace detail
{

template <typename F>
void parallel_for(int n, int threads, F&& body)
{
    int t = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    t = std::clamp(t, 1, std::max(1, n));
    if (t == 1) {
        for (int i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < t; ++w)
        pool.emplace_back([&, w] {
            for (int i = w; i < n; i += t)
                body(i);
        });
    for (auto& th : pool)
        th.join();
}

inline Frame lift_frame(const ManifoldModel& mfd, const Frame& f, int lift)
{
    if (lift == 0 || !mfd.deck)
        return f;
    return *mfd.deck * f;
}

inline Vec lift_location(const ManifoldModel& mfd, const CriticalPoint& p, int lift)
{
    return lift == 0 || !mfd.deck ? p.location : Vec(*mfd.deck * p.location);
}

struct Label
{
    int point = -1;
    int lift = 0;
    bool captured = false;
    Vec entry;
    std::vector<Passage> passages;
    std::vector<TrajectorySample> path;
};

inline Label label_of(const Trajectory& tr)
{
    return {tr.limit_point, tr.limit_lift, tr.captured, tr.entry, tr.passages, tr.samples};
}

// Position on a recorded forward path at level f (f decreases along the path).
inline Vec at_level(const std::vector<TrajectorySample>& path, double f)
{
    auto it = std::lower_bound(path.begin(), path.end(), f,
                               [](const TrajectorySample& s, double v) { return s.f > v; });
    if (it == path.begin())
        return path.front().x;
    if (it == path.end())
        return path.back().x;
    const auto& b = *it;
    const auto& a = *(it - 1);
    const double w = a.f > b.f ? (a.f - f) / (a.f - b.f) : 0.0;
    return a.x + w * (b.x - a.x);
}

/// Largest distance between two forward paths matched by level of f.
inline double level_distance(const std::vector<TrajectorySample>& a, const std::vector<TrajectorySample>& b)
{
    if (a.empty() || b.empty())
        return 0.0;
    const double hi = std::min(a.front().f, b.front().f);
    const double lo = std::max(a.back().f, b.back().f);
    double d = 0.0;
    for (const auto* pair : {&a, &b}) {
        const auto& other = pair == &a ? b : a;
        for (const auto& s : *pair)
            if (s.f <= hi && s.f >= lo)
                d = std::max(d, (s.x - at_level(other, s.f)).norm());
    }
    return d;
}

inline const Passage* find_passage(const std::vector<Passage>& ps, int point, int lift)
{
    for (const auto& p : ps)
        if (p.point == point && p.lift == lift)
            return &p;
    return nullptr;
}

/// Labels differ when the limits differ, entry points into the capture ball
/// separate, or a saddle passed by both is left on opposite sides.
inline bool jump(const Label& a, const Label& b, const FlowConfig& cfg)
{
    if (a.point != b.point || a.lift != b.lift)
        return true;
    if (a.captured && b.captured && (a.entry - b.entry).norm() > cfg.jump_fraction * cfg.capture_radius)
        return true;
    for (const auto& pa : a.passages)
        if (const Passage* pb = find_passage(b.passages, pa.point, pa.lift))
            if (pa.side.dot(pb->side) <= 0)
                return true;
    return level_distance(a.path, b.path) > cfg.curve_separation;
}

/// Offset from p (lift) on leaving its passage ball.
inline Vec exit_offset(const Trajectory& tr, int point, int lift, const std::string& where)
{
    const Passage* p = find_passage(tr.passages, point, lift);
    if (!p)
        throw Error(ErrorKind::resolution, where + ": trajectory does not pass through the neighborhood of its target");
    return p->offset;
}

/// Transport a frame transverse to the flow along a recorded forward path by
/// the linearized flow, re-orthonormalizing (orientation preserving) against
/// the flow direction after every substep.
inline Frame transport_frame(const ManifoldModel& mfd, const ScalarField& field,
                             const std::vector<TrajectorySample>& path, Frame v)
{
    auto F = [&](const Vec& x) -> Vec { return -projected_gradient_unchecked(mfd, field, x); };
    auto dF = [&](const Vec& x, const Vec& d) -> Vec {
        const double h = 1e-6;
        return (F(x + h * d) - F(x - h * d)) / (2 * h);
    };
    auto normalize = [&](const Vec& x, Frame& w) {
        Vec u = F(x);
        const double un = u.norm();
        if (un > 0)
            u /= un;
        for (int c = 0; c < w.cols(); ++c) {
            Vec col = project_to_tangent(mfd, mfd.project(x), w.col(c));
            if (un > 0)
                col -= u * u.dot(col);
            for (int b = 0; b < c; ++b)
                col -= w.col(b) * w.col(b).dot(col);
            const double n = col.norm();
            if (!(n > 1e-14))
                throw Error(ErrorKind::orientation, "transport_frame: transported frame degenerated");
            w.col(c) = col / n;
        }
    };
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const auto& a = path[i];
        const auto& b = path[i + 1];
        const double dt = b.t - a.t;
        // Substeps resolve the local rate of the linearized flow.
        double rate = 1e-3;
        for (int c = 0; c < v.cols(); ++c)
            rate = std::max(rate, dF(a.x, v.col(c)).norm());
        const double hmax = std::min(0.25, 0.1 / rate);
        const int sub = std::max(1, static_cast<int>(std::ceil(std::abs(dt) / hmax)));
        const double h = dt / sub;
        for (int j = 0; j < sub; ++j) {
            auto pos = [&](double s) -> Vec { return a.x + ((j + s) / sub) * (b.x - a.x); };
            const Vec x0 = pos(0.0), xm = pos(0.5), x1 = pos(1.0);
            for (int c = 0; c < v.cols(); ++c) {
                const Vec w0 = v.col(c);
                const Vec k1 = dF(x0, w0);
                const Vec k2 = dF(xm, w0 + 0.5 * h * k1);
                const Vec k3 = dF(xm, w0 + 0.5 * h * k2);
                const Vec k4 = dF(x1, w0 + h * k3);
                v.col(c) = w0 + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
            }
            normalize(x1, v);
        }
    }
    return v;
}

inline void check_escape(const Trajectory& tr, const std::string& where)
{
    if (tr.limit_point < 0 && tr.limit_set < 0)
        throw Error(ErrorKind::internal, where + ": trajectory escaped on a compact manifold");
}

/// Records equal-or-higher index critical points passed within the
/// transversality radius (other than the source itself).
inline void note_violations(const Trajectory& tr, const CriticalSet& crit, int source, bool forward,
                            const FlowConfig& cfg, LinkSweep& sweep)
{
    const int qi = crit.points[source].index;
    for (int i = 0; i < static_cast<int>(crit.points.size()); ++i) {
        if (i == source)
            continue;
        const int pi = crit.points[i].index;
        const bool bad = forward ? pi >= qi : pi <= qi;
        if (bad && tr.closest[i] < cfg.transversality_radius)
            sweep.violations.push_back({crit.points[source].id, crit.points[i].id, tr.closest[i]});
    }
}

} // namespace detail

enum class CountRoute
{
    automatic,        // shooting from maxima, link otherwise
    link_bisection,   // basin-transition bisection on the unstable link (index-2 sources)
    stable_shooting,  // backward shooting along 1-dimensional stable manifolds (top-index sources)
};

/// All flow lines leaving crit.points[qi] toward critical points of index one
/// lower. Index-1 sources use the two branches of their unstable manifold.
/// Top-index sources shoot backward from every target along its
/// one-dimensional stable manifold; index-2 sources in dimension 3 bisect
/// basin transitions on the unstable link circle.
inline LinkSweep sweep_unstable_link(const ManifoldModel& mfd, const ScalarField& field, const CriticalSet& crit,
                                     int qi, const FlowConfig& cfg = {}, bool record = false,
                                     CountRoute route = CountRoute::automatic, bool orient = true)
{
    const CriticalPoint& q = crit.points[qi];
    const int m = mfd.intrinsic_dim;
    LinkSweep sweep;
    sweep.source = q.id;
    if (q.index == 0)
        return sweep;

    auto forward_from = [&](const Vec& x, bool rec) {
        return integrate(mfd, field, x, Direction::forward, crit, cfg, rec);
    };
    auto through = [&](const Vec& x) { return integrate(mfd, field, x, Direction::forward, crit, cfg, true, true); };

    if (q.index == 1) {
        for (int s : {1, -1}) {
            const Vec x = mfd.project(q.location + s * cfg.link_radius * Vec(q.unstable_frame.col(0)));
            Trajectory tr = forward_from(x, record);
            ++sweep.trajectories;
            detail::check_escape(tr, "count_flow_lines");
            detail::note_violations(tr, crit, qi, true, cfg, sweep);
            sweep.basin_samples.emplace_back(s, tr.limit);
            if (tr.limit_point >= 0 && crit.points[tr.limit_point].index == q.index - 1) {
                FlowLine line;
                line.source = q.id;
                line.target = tr.limit;
                line.target_point = tr.limit_point;
                line.target_lift = tr.limit_lift;
                line.sign = s * orientation_sign(Frame(mfd.ambient_dim, 0), Frame(mfd.ambient_dim, 0));
                line.link_parameter = s;
                line.trajectory = std::move(tr);
                sweep.lines.push_back(std::move(line));
            }
        }
        return sweep;
    }

    if (route == CountRoute::automatic)
        route = q.index == m ? CountRoute::stable_shooting : CountRoute::link_bisection;

    if (route == CountRoute::link_bisection && q.index == 2) {
        const Vec e1 = q.unstable_frame.col(0), e2 = q.unstable_frame.col(1);
        auto link_point = [&](double th) {
            return mfd.project(q.location + cfg.link_radius * (std::cos(th) * e1 + std::sin(th) * e2));
        };
        auto label_at = [&](double th) {
            const Trajectory tr = through(link_point(th));
            detail::check_escape(tr, "count_flow_lines");
            return tr;
        };
        const int n = cfg.link_samples;
        const double two_pi = 2.0 * std::acos(-1.0);
        // Irrational offset keeps samples off symmetry planes of the catalog models.
        const double phase = 0.381966011250105;
        auto angle = [&](int i) { return two_pi * (i + phase) / n; };
        std::vector<Trajectory> base(n);
        detail::parallel_for(n, cfg.threads, [&](int i) { base[i] = label_at(angle(i)); });
        sweep.trajectories += n;
        for (int i = 0; i < n; ++i) {
            detail::note_violations(base[i], crit, qi, true, cfg, sweep);
            sweep.basin_samples.emplace_back(angle(i), base[i].limit);
        }

        struct Bracket
        {
            double a, b;
        };
        std::vector<std::vector<Bracket>> found(n);
        detail::parallel_for(n, cfg.threads, [&](int i) {
            const double a0 = angle(i), b0 = angle(i + 1);
            std::vector<std::tuple<double, detail::Label, double, detail::Label>> stack;
            stack.emplace_back(a0, detail::label_of(base[i]), b0, detail::label_of(base[(i + 1) % n]));
            while (!stack.empty()) {
                auto [a, la, b, lb] = stack.back();
                stack.pop_back();
                if (!detail::jump(la, lb, cfg))
                    continue;
                if (b - a < cfg.link_resolution) {
                    // Genuine boundaries straddle the stable manifold of a point one
                    // index lower; steep but continuous stretches keep bisecting.
                    bool straddles = false;
                    for (const auto& pa : la.passages)
                        if (crit.points[pa.point].index == q.index - 1)
                            if (const Passage* pb = detail::find_passage(lb.passages, pa.point, pa.lift))
                                straddles = straddles || pa.side.dot(pb->side) < 0;
                    if (straddles || b - a < 1e-13) {
                        found[i].push_back({a, b});
                        continue;
                    }
                }
                const double mid = 0.5 * (a + b);
                const detail::Label lm = detail::label_of(label_at(mid));
                // Push the upper half first so brackets come out in increasing angle.
                stack.emplace_back(mid, lm, b, lb);
                stack.emplace_back(a, la, mid, lm);
            }
        });

        for (int i = 0; i < n; ++i) {
            for (const Bracket& br : found[i]) {
                Trajectory ta = through(link_point(br.a));
                Trajectory tb = through(link_point(br.b));
                sweep.trajectories += 2;
                // The boundary lies on the stable manifold of the point one index
                // lower that both endpoints pass and leave on opposite sides.
                int best = -1, lift = 0, straddled = 0;
                for (const auto& pa : ta.passages) {
                    if (crit.points[pa.point].index != q.index - 1)
                        continue;
                    const Passage* pb = detail::find_passage(tb.passages, pa.point, pa.lift);
                    if (pb && pa.side.dot(pb->side) < 0) {
                        ++straddled;
                        best = pa.point;
                        lift = pa.lift;
                    }
                }
                if (straddled == 0) {
                    bool violation = false;
                    for (int k = 0; k < static_cast<int>(crit.points.size()); ++k) {
                        const double d = std::min(ta.closest[k], tb.closest[k]);
                        if (k != qi && crit.points[k].index >= q.index && d < cfg.transversality_radius) {
                            sweep.violations.push_back({q.id, crit.points[k].id, d});
                            violation = true;
                        }
                    }
                    if (violation)
                        continue;
                }
                if (straddled != 1)
                    throw Error(ErrorKind::resolution, "count_flow_lines: " + q.id +
                                                           ": basin boundary on link segment [" +
                                                           std::to_string(br.a) + ", " + std::to_string(br.b) +
                                                           "] separates " + std::to_string(straddled) +
                                                           " critical points of index " +
                                                           std::to_string(q.index - 1));
                const CriticalPoint& p = crit.points[best];
                const Frame eu = detail::lift_frame(mfd, p.unstable_frame, lift);
                const Vec oa = detail::exit_offset(ta, best, lift, "count_flow_lines");
                const Vec ob = detail::exit_offset(tb, best, lift, "count_flow_lines");
                Frame w(mfd.ambient_dim, 1);
                w.col(0) = ob - oa;  // transported link tangent (increasing angle)
                FlowLine line;
                line.source = q.id;
                line.target = p.id;
                line.target_point = best;
                line.target_lift = lift;
                line.sign = orientation_sign(w, eu);
                line.link_parameter = 0.5 * (br.a + br.b);
                // Keep the part of the path up to the closest approach to p.
                ta.samples.resize(std::min<std::size_t>(ta.samples.size(), ta.closest_step[best] + 1));
                ta.limit = p.id;
                ta.limit_point = best;
                ta.limit_lift = lift;
                ta.captured = false;
                ta.end = ta.samples.back().x;
                line.trajectory = std::move(ta);
                sweep.lines.push_back(std::move(line));
            }
        }
        return sweep;
    }

    if (route == CountRoute::stable_shooting && q.index == m) {
        const int k = q.index - 1;
        for (int pi = 0; pi < static_cast<int>(crit.points.size()); ++pi) {
            const CriticalPoint& p = crit.points[pi];
            if (p.index != k)
                continue;
            for (int lift = 0; lift < static_cast<int>(mfd.lifts(p.location).size()); ++lift) {
                const Vec pl = detail::lift_location(mfd, p, lift);
                const Frame es = detail::lift_frame(mfd, p.stable_frame, lift);
                const Frame eu = detail::lift_frame(mfd, p.unstable_frame, lift);
                for (int s : {1, -1}) {
                    const Vec x = mfd.project(pl + s * cfg.link_radius * Vec(es.col(0)));
                    Trajectory back = integrate(mfd, field, x, Direction::backward, crit, cfg, true);
                    ++sweep.trajectories;
                    detail::check_escape(back, "count_flow_lines");
                    if (back.limit_point >= 0 && !back.captured)
                        sweep.violations.push_back({crit.points[back.limit_point].id, p.id, 0.0});
                    if (back.limit_point != qi || back.limit_lift != 0)
                        continue;
                    // The backward path reversed is the flow line from q's capture ball to p.
                    std::reverse(back.samples.begin(), back.samples.end());
                    const double t0 = back.samples.front().t;
                    for (auto& smp : back.samples)
                        smp.t = t0 - smp.t;
                    // Orient W^u(q) at the first point by [flow direction, t_1 .. t_k],
                    // positive against q's unstable frame, then transport t along the line.
                    FlowLine line;
                    line.sign = 0;
                    if (orient) {
                        const Vec xc = back.samples.front().x;
                        const Vec flow = (-projected_gradient_unchecked(mfd, field, xc)).normalized();
                        const Eigen::MatrixXd tq = Eigen::MatrixXd(tangent_basis(mfd, xc));
                        const Eigen::MatrixXd rest = tq - flow * (flow.transpose() * tq);
                        Eigen::JacobiSVD<Eigen::MatrixXd> svd(rest, Eigen::ComputeThinU);
                        Frame t = svd.matrixU().leftCols(k);
                        Eigen::MatrixXd basis(m, m);
                        basis.col(0) = q.unstable_frame.transpose() * flow;
                        basis.rightCols(k) = q.unstable_frame.transpose() * t;
                        if (basis.determinant() < 0)
                            t.col(k - 1) = -t.col(k - 1);
                        const Frame w = detail::transport_frame(mfd, field, back.samples, t);
                        line.sign = orientation_sign(w, eu);
                    }
                    line.source = q.id;
                    line.target = p.id;
                    line.target_point = pi;
                    line.target_lift = lift;
                    line.link_parameter = s;
                    back.direction = Direction::forward;
                    back.limit = p.id;
                    back.limit_point = pi;
                    back.limit_lift = lift;
                    back.captured = false;
                    back.start = back.samples.front().x;
                    back.end = back.samples.back().x;
                    if (!record)
                        back.samples.clear();
                    line.trajectory = std::move(back);
                    sweep.lines.push_back(std::move(line));
                }
            }
        }
        return sweep;
    }
    throw Error(ErrorKind::index, "count_flow_lines: no counting route for a source of index " +
                                      std::to_string(q.index) + " in dimension " + std::to_string(m));
}

/// Aggregate the lines of a sweep ending at crit.points[pi].
inline FlowLineCount tally(const LinkSweep& sweep, const CriticalSet& crit, int pi, bool oriented)
{
    FlowLineCount c;
    c.source = sweep.source;
    c.target = crit.points[pi].id;
    long s = 0;
    for (const auto& l : sweep.lines)
        if (l.target_point == pi) {
            ++c.unsigned_count;
            s += l.sign;
        }
    if (oriented)
        c.signed_sum = s;
    c.mod2_sum = c.unsigned_count % 2;
    return c;
}

/// n(q, p) for crit.points[qi] -> crit.points[pi] of relative index one.
inline FlowLineCount count_flow_lines(const ManifoldModel& mfd, const ScalarField& field, const CriticalSet& crit,
                                     int qi, int pi, const FlowConfig& cfg = {},
                                     CountRoute route = CountRoute::automatic)
{
    if (crit.points[qi].index != crit.points[pi].index + 1)
        throw Error(ErrorKind::index, "count_flow_lines: " + crit.points[qi].id + " -> " + crit.points[pi].id +
                                          " is not of relative index one");
    const LinkSweep sweep = sweep_unstable_link(mfd, field, crit, qi, cfg, false, route);
    return tally(sweep, crit, pi, mfd.orientable && !mfd.deck);
}

/// Independent unsigned count for targets with a one-dimensional stable
/// manifold (index m - 1): shoot backward along both stable branches of
/// every lift of p and count arrivals at the fixed lift of q.
inline int count_by_stable_shooting(const ManifoldModel& mfd, const ScalarField& field, const CriticalSet& crit,
                                    int qi, int pi, const FlowConfig& cfg = {})
{
    const CriticalPoint& p = crit.points[pi];
    if (mfd.intrinsic_dim - p.index != 1)
        throw Error(ErrorKind::index, "count_by_stable_shooting: stable manifold of " + p.id +
                                          " is not one-dimensional");
    int count = 0;
    for (int lift = 0; lift < static_cast<int>(mfd.lifts(p.location).size()); ++lift) {
        const Vec pl = detail::lift_location(mfd, p, lift);
        const Frame es = detail::lift_frame(mfd, p.stable_frame, lift);
        for (int s : {1, -1}) {
            const Vec x = mfd.project(pl + s * cfg.link_radius * Vec(es.col(0)));
            const Trajectory back = integrate(mfd, field, x, Direction::backward, crit, cfg);
            detail::check_escape(back, "count_by_stable_shooting");
            if (back.limit_point == qi && back.limit_lift == 0)
                ++count;
        }
    }
    return count;
}

struct TransversalityReport
{
    bool pass = true;
    std::vector<ConnectionViolation> violations;
    bool stable_under_refinement = true;
    std::vector<std::string> unstable_pairs;
};

/// Numeric Morse-Smale check: no connection between critical points whose
/// index does not drop, and unsigned counts stable when link sampling density
/// and integrator accuracy are both increased.
inline TransversalityReport transversality_probe(const ManifoldModel& mfd, const ScalarField& field,
                                                 const CriticalSet& crit, const FlowConfig& cfg = {})
{
    TransversalityReport rep;
    const FlowConfig fine = cfg.refined();
    for (int qi = 0; qi < static_cast<int>(crit.points.size()); ++qi) {
        if (crit.points[qi].index == 0)
            continue;
        const LinkSweep a = sweep_unstable_link(mfd, field, crit, qi, cfg);
        const LinkSweep b = sweep_unstable_link(mfd, field, crit, qi, fine);
        for (const auto* s : {&a, &b})
            rep.violations.insert(rep.violations.end(), s->violations.begin(), s->violations.end());
        for (int pi = 0; pi < static_cast<int>(crit.points.size()); ++pi) {
            if (crit.points[pi].index != crit.points[qi].index - 1)
                continue;
            if (tally(a, crit, pi, false).unsigned_count != tally(b, crit, pi, false).unsigned_count) {
                rep.stable_under_refinement = false;
                rep.unstable_pairs.push_back(crit.points[qi].id + "->" + crit.points[pi].id);
            }
        }
    }
    rep.pass = rep.violations.empty() && rep.stable_under_refinement;
    return rep;
}

/// CSV dump: columns t, x1..xN, f.
inline void write_trajectory_csv(const Trajectory& tr, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
    const int n = tr.samples.empty() ? 0 : static_cast<int>(tr.samples.front().x.size());
    out << "t";
    for (int i = 1; i <= n; ++i)
        out << ",x" << i;
    out << ",f\n";
    out.precision(17);
    for (const auto& s : tr.samples) {
        out << s.t;
        for (int i = 0; i < n; ++i)
            out << ',' << s.x[i];
        out << ',' << s.f << '\n';
    }
    if (!out)
        throw Error(ErrorKind::io, "write failed for '" + path + "'");
}

} // namespace msw

#endif // MSW_FLOW_HPP_
