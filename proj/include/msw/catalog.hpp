#ifndef MSW_CATALOG_HPP_
#define MSW_CATALOG_HPP_

// Named manifold/function experiments with their expected critical structure
// and the known singular homology used as the test oracle.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "msw/models.hpp"

namespace msw
{

enum class Ring
{
    integers,
    mod2,
};

inline const char* to_string(Ring r) { return r == Ring::integers ? "Z" : "Z2"; }

struct CriticalSeed
{
    std::string id;
    Vec location;
    int expected_index = 0;
};

/// Morse data on one critical submanifold: the intrinsic model of C_j, the
/// function f_j written as an ambient field that is constant along normal
/// directions, and seeds for its critical points.
struct SubmanifoldMorseData
{
    std::optional<ManifoldModel> intrinsic;  // absent for point submanifolds
    ScalarField fj;
    std::vector<CriticalSeed> seeds;
    std::vector<int> betti;  // Poincare polynomial coefficients of C_j (stored value)
    double amplitude = 0.0;  // b in a + b cos(k (u - u0))
    double offset = 0.0;     // a
    double phase = 0.0;      // u0
    int frequency = 1;       // k
};

enum class ModelKind
{
    morse,
    morse_bott,
};

struct CatalogEntry
{
    std::string name;
    std::string description;
    ModelKind kind = ModelKind::morse;
    ManifoldModel manifold;
    ScalarField field;
    std::vector<CriticalSeed> seeds;           // Morse entries
    std::vector<CriticalSubmanifold> subs;     // Morse-Bott entries, catalog order
    std::vector<SubmanifoldMorseData> fj;      // parallel to subs
    std::vector<int> betti_z;                  // empty when nonorientable
    std::vector<int> betti_z2;

    Ring default_ring() const { return manifold.orientable ? Ring::integers : Ring::mod2; }

    const std::vector<int>& known_betti(Ring r) const { return r == Ring::integers ? betti_z : betti_z2; }
};

namespace detail
{

inline constexpr double kTorusMajor = 2.0;
inline constexpr double kTorusMinor = 1.0;
inline constexpr double kPi = std::numbers::pi;

inline Vec vec(std::initializer_list<double> xs)
{
    Vec v(static_cast<int>(xs.size()));
    int i = 0;
    for (double x : xs)
        v[i++] = x;
    return v;
}

template <typename T>
T cyl_radius(const Point<T>& p)
{
    return sqrt(p[0] * p[0] + p[1] * p[1]);
}

inline ManifoldModel circle_r2(double radius)
{
    ManifoldModel m;
    m.name = "S1";
    m.ambient_dim = 2;
    m.intrinsic_dim = 1;
    m.constraints.push_back(make_field("circle", [radius](const auto& p) {
        return p[0] * p[0] + p[1] * p[1] - radius * radius;
    }));
    m.parametrization = [radius](const Vec& u) { return vec({radius * std::cos(u[0]), radius * std::sin(u[0])}); };
    m.param_lo = vec({0.0});
    m.param_hi = vec({2 * kPi});
    return m;
}

/// Horizontal circle {rho = radius, z = height} in R^3.
inline ManifoldModel circle_r3(std::string name, double radius, double height)
{
    ManifoldModel m;
    m.name = std::move(name);
    m.ambient_dim = 3;
    m.intrinsic_dim = 1;
    m.constraints.push_back(make_field("rho", [radius](const auto& p) {
        return 0.5 * (p[0] * p[0] + p[1] * p[1] - radius * radius) / radius;
    }));
    m.constraints.push_back(make_field("height", [height](const auto& p) { return p[2] - height; }));
    m.parametrization = [radius, height](const Vec& u) {
        return vec({radius * std::cos(u[0]), radius * std::sin(u[0]), height});
    };
    m.param_lo = vec({0.0});
    m.param_hi = vec({2 * kPi});
    return m;
}

inline ManifoldModel sphere2()
{
    ManifoldModel m;
    m.name = "S2";
    m.ambient_dim = 3;
    m.intrinsic_dim = 2;
    m.constraints.push_back(make_field("sphere", [](const auto& p) {
        return 0.5 * (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - 1.0);
    }));
    m.parametrization = [](const Vec& u) {
        return vec({std::sin(u[0]) * std::cos(u[1]), std::sin(u[0]) * std::sin(u[1]), std::cos(u[0])});
    };
    m.param_lo = vec({0.0, 0.0});
    m.param_hi = vec({kPi, 2 * kPi});
    return m;
}

inline ManifoldModel sphere3()
{
    ManifoldModel m;
    m.name = "S3";
    m.ambient_dim = 4;
    m.intrinsic_dim = 3;
    m.constraints.push_back(make_field("sphere", [](const auto& p) {
        return 0.5 * (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3] - 1.0);
    }));
    m.parametrization = [](const Vec& u) {
        const double a = std::sin(u[0]), b = std::sin(u[1]);
        return vec({std::cos(u[0]), a * std::cos(u[1]), a * b * std::cos(u[2]), a * b * std::sin(u[2])});
    };
    m.param_lo = vec({0.0, 0.0, 0.0});
    m.param_hi = vec({kPi, kPi, 2 * kPi});
    return m;
}

/// Torus of revolution about the z axis, radii R = 2, r = 1.
inline ManifoldModel torus()
{
    ManifoldModel m;
    m.name = "T2";
    m.ambient_dim = 3;
    m.intrinsic_dim = 2;
    m.constraints.push_back(make_field("torus", [](const auto& p) {
        const auto d = cyl_radius(p) - kTorusMajor;
        return 0.5 * (d * d + p[2] * p[2] - kTorusMinor * kTorusMinor);
    }));
    m.parametrization = [](const Vec& u) {
        const double rho = kTorusMajor + kTorusMinor * std::cos(u[1]);
        return vec({rho * std::cos(u[0]), rho * std::sin(u[0]), kTorusMinor * std::sin(u[1])});
    };
    m.param_lo = vec({0.0, 0.0});
    m.param_hi = vec({2 * kPi, 2 * kPi});
    return m;
}

inline Mat antipodal(int n) { return -Mat::Identity(n, n); }

/// f(u) = a + b cos(k (u - u0)) with u the azimuth, as an ambient field.
inline ScalarField azimuthal_cosine(std::string name, double a, double b, double u0, int k)
{
    if (k == 1) {
        const double c = std::cos(u0), s = std::sin(u0);
        return make_field(std::move(name), [=](const auto& p) {
            return a + b * (p[0] * c + p[1] * s) / cyl_radius(p);
        });
    }
    // k == 2: cos 2(u - u0) = cos 2u cos 2u0 + sin 2u sin 2u0
    const double c = std::cos(2 * u0), s = std::sin(2 * u0);
    return make_field(std::move(name), [=](const auto& p) {
        const auto r2 = p[0] * p[0] + p[1] * p[1];
        return a + b * ((p[0] * p[0] - p[1] * p[1]) * c + 2.0 * p[0] * p[1] * s) / r2;
    });
}

inline Vec on_circle(double radius, double height, double u)
{
    return vec({radius * std::cos(u), radius * std::sin(u), height});
}

/// Morse data for a horizontal critical circle carrying a + b cos(k (u - u0)).
inline SubmanifoldMorseData circle_data(std::string id, double radius, double height, double u0, int k,
                                        bool quotient)
{
    SubmanifoldMorseData d;
    d.offset = 2.0;
    d.amplitude = 1.0;
    d.phase = u0;
    d.frequency = k;
    ManifoldModel c = circle_r3(id, radius, height);
    if (quotient)
        c.deck = antipodal(3);
    d.intrinsic = std::move(c);
    d.fj = azimuthal_cosine("f_" + id, d.offset, d.amplitude, u0, k);
    // Critical points of cos(k (u - u0)): maxima at u0 + 2 pi i / k, minima half a period later.
    // On a quotient circle (deck u -> u + pi) only one representative of each orbit is kept.
    const int reps = quotient ? 1 : k;
    for (int i = 0; i < reps; ++i) {
        const double umax = u0 + 2 * kPi * i / k;
        const double umin = umax + kPi / k;
        d.seeds.push_back({id + ".max" + (reps > 1 ? std::to_string(i) : ""), on_circle(radius, height, umax), 1});
        d.seeds.push_back({id + ".min" + (reps > 1 ? std::to_string(i) : ""), on_circle(radius, height, umin), 0});
    }
    d.betti = {1, 1};
    return d;
}

inline SubmanifoldMorseData point_data(std::string id)
{
    SubmanifoldMorseData d;
    d.offset = 1.0;
    d.fj = make_field("f_" + id, [](const auto& p) { return constant_like(p[0], 1.0); });
    d.betti = {1};
    return d;
}

inline Frame column(const Vec& v)
{
    Frame f(v.size(), 1);
    f.col(0) = v;
    return f;
}

// ---- sphere charts (f = s z^2, s = +1 or -1) ----

inline CriticalSubmanifold sphere_equator(int sign)
{
    CriticalSubmanifold c;
    c.id = "equator";
    c.dim = 1;
    c.bott_index = sign > 0 ? 0 : 1;
    c.value = 0.0;
    c.parametrization = [](double u) { return on_circle(1.0, 0.0, u); };
    c.normal_splitting = [](double) { return column(vec({0, 0, 1})); };
    TubeChart t;
    t.normal_coords = make_vector_field(1, [](const auto& p) {
        std::array<std::decay_t<decltype(p[0])>, kMaxAmbient> out{};
        out[0] = p[2];
        return out;
    });
    t.in_domain = [](const Vec& x) { return std::abs(x[2]) < 0.95; };
    t.chart_point = [](double u, const Vec& n) { return on_circle(std::sqrt(1.0 - n[0] * n[0]), n[0], u); };
    t.chart_radius = 0.9;
    c.lifts.push_back(std::move(t));
    return c;
}

inline CriticalSubmanifold sphere_pole(int pole, int sign)
{
    CriticalSubmanifold c;
    c.id = pole > 0 ? "north" : "south";
    c.dim = 0;
    c.bott_index = sign > 0 ? 2 : 0;
    c.value = sign > 0 ? 1.0 : -1.0;
    const double zp = pole > 0 ? 1.0 : -1.0;
    c.parametrization = [zp](double) { return vec({0, 0, zp}); };
    c.normal_splitting = [](double) {
        Frame f = Frame::Zero(3, 2);
        f(0, 0) = 1.0;
        f(1, 1) = 1.0;
        return f;
    };
    TubeChart t;
    t.normal_coords = make_vector_field(2, [](const auto& p) {
        std::array<std::decay_t<decltype(p[0])>, kMaxAmbient> out{};
        out[0] = p[0];
        out[1] = p[1];
        return out;
    });
    t.in_domain = [zp](const Vec& x) { return x[2] * zp > 0.2; };
    t.chart_point = [zp](double, const Vec& n) {
        return vec({n[0], n[1], zp * std::sqrt(1.0 - n.squaredNorm())});
    };
    t.chart_radius = 0.9;
    c.lifts.push_back(std::move(t));
    return c;
}

// ---- torus charts about horizontal circles ----

/// Circle at the bottom (level = -1) or top (level = +1) of the torus for f = z.
inline CriticalSubmanifold torus_height_circle(int level)
{
    CriticalSubmanifold c;
    const double r = kTorusMinor, big = kTorusMajor;
    c.id = level < 0 ? "bottom" : "top";
    c.dim = 1;
    c.bott_index = level < 0 ? 0 : 1;
    c.value = level * r;
    const double zc = level * r;
    c.parametrization = [=](double u) { return on_circle(big, zc, u); };
    c.normal_splitting = [](double u) { return column(vec({std::cos(u), std::sin(u), 0.0})); };
    TubeChart t;
    // (rho - R) / sqrt(r + level z) squares to |f - f(C)|.
    t.normal_coords = make_vector_field(1, [=](const auto& p) {
        std::array<std::decay_t<decltype(p[0])>, kMaxAmbient> out{};
        out[0] = (cyl_radius(p) - big) / sqrt(r + level * p[2]);
        return out;
    });
    t.in_domain = [=](const Vec& x) { return level * x[2] > 0.1; };
    t.chart_point = [=](double u, const Vec& n) {
        const double z = level * (r - n[0] * n[0]);
        const double rho = big + n[0] * std::sqrt(r + level * z);
        return on_circle(rho, z, u);
    };
    t.chart_radius = 0.9;
    c.lifts.push_back(std::move(t));
    return c;
}

/// Outer (side = +1) or inner (side = -1) equatorial circle for f = z^2.
inline CriticalSubmanifold torus_equator_circle(int side)
{
    CriticalSubmanifold c;
    const double r = kTorusMinor, big = kTorusMajor;
    c.id = side > 0 ? "outer" : "inner";
    c.dim = 1;
    c.bott_index = 0;
    c.value = 0.0;
    const double rc = big + side * r;
    c.parametrization = [=](double u) { return on_circle(rc, 0.0, u); };
    c.normal_splitting = [](double) { return column(vec({0, 0, 1})); };
    TubeChart t;
    t.normal_coords = make_vector_field(1, [](const auto& p) {
        std::array<std::decay_t<decltype(p[0])>, kMaxAmbient> out{};
        out[0] = p[2];
        return out;
    });
    t.in_domain = [=](const Vec& x) { return side * (std::hypot(x[0], x[1]) - big) > 0.1; };
    t.chart_point = [=](double u, const Vec& n) {
        return on_circle(big + side * std::sqrt(r * r - n[0] * n[0]), n[0], u);
    };
    t.chart_radius = 0.9;
    c.lifts.push_back(std::move(t));
    return c;
}

/// Top circle of the torus for f = z^2, together with its antipodal image.
inline CriticalSubmanifold torus_cap_pair()
{
    CriticalSubmanifold c;
    const double r = kTorusMinor, big = kTorusMajor;
    c.id = "caps";
    c.dim = 1;
    c.bott_index = 1;
    c.value = r * r;
    c.parametrization = [=](double u) { return on_circle(big, r, u); };
    c.normal_splitting = [](double u) { return column(vec({std::cos(u), std::sin(u), 0.0})); };
    for (int level : {1, -1}) {
        TubeChart t;
        t.normal_coords = make_vector_field(1, [=](const auto& p) {
            std::array<std::decay_t<decltype(p[0])>, kMaxAmbient> out{};
            out[0] = cyl_radius(p) - big;
            return out;
        });
        t.in_domain = [=](const Vec& x) { return level * x[2] > 0.1; };
        t.chart_point = [=](double u, const Vec& n) {
            const Vec top = on_circle(big + n[0], std::sqrt(r * r - n[0] * n[0]), u);
            return level > 0 ? top : Vec(-top);
        };
        t.chart_radius = 0.9;
        c.lifts.push_back(std::move(t));
    }
    return c;
}

inline std::vector<CatalogEntry> build_catalog()
{
    std::vector<CatalogEntry> cat;
    const double R = kTorusMajor, r = kTorusMinor;

    {
        CatalogEntry e;
        e.name = "circle-height";
        e.description = "height function on the unit circle";
        e.manifold = circle_r2(1.0);
        e.field = make_field("y", [](const auto& p) { return p[1]; });
        e.seeds = {{"min", vec({0, -1}), 0}, {"max", vec({0, 1}), 1}};
        e.betti_z = {1, 1};
        e.betti_z2 = {1, 1};
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e;
        e.name = "sphere-height";
        e.description = "height function on the round 2-sphere";
        e.manifold = sphere2();
        e.field = make_field("z", [](const auto& p) { return p[2]; });
        e.seeds = {{"min", vec({0, 0, -1}), 0}, {"max", vec({0, 0, 1}), 2}};
        e.betti_z = {1, 0, 1};
        e.betti_z2 = {1, 0, 1};
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e;
        e.name = "torus-tilted";
        e.description = "height in a tilted direction on the torus of revolution";
        e.manifold = torus();
        const double a = 0.3, ca = std::cos(a), sa = std::sin(a);
        e.field = make_field("tilted-height", [=](const auto& p) { return ca * p[0] + sa * p[2]; });
        // Critical points are where the torus normal is parallel to (cos a, 0, sin a).
        e.seeds = {
            {"min", vec({-(R + r * ca), 0, -r * sa}), 0},
            {"saddle-lo", vec({-(R - r * ca), 0, r * sa}), 1},
            {"saddle-hi", vec({R - r * ca, 0, -r * sa}), 1},
            {"max", vec({R + r * ca, 0, r * sa}), 2},
        };
        e.betti_z = {1, 2, 1};
        e.betti_z2 = {1, 2, 1};
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e;
        e.name = "torus-quadric";
        e.description = "x^2 + 2 y^2 on the torus (orientable double cover of the klein model)";
        e.manifold = torus();
        e.field = make_field("x2+2y2", [](const auto& p) { return p[0] * p[0] + 2.0 * p[1] * p[1]; });
        e.seeds = {
            {"min+", vec({R - r, 0, 0}), 0},     {"min-", vec({-(R - r), 0, 0}), 0},
            {"sx+", vec({R + r, 0, 0}), 1},      {"sx-", vec({-(R + r), 0, 0}), 1},
            {"sy+", vec({0, R - r, 0}), 1},      {"sy-", vec({0, -(R - r), 0}), 1},
            {"max+", vec({0, R + r, 0}), 2},     {"max-", vec({0, -(R + r), 0}), 2},
        };
        e.betti_z = {1, 2, 1};
        e.betti_z2 = {1, 2, 1};
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e;
        e.name = "rp2";
        e.description = "x^2 + 2 y^2 + 3 z^2 on the projective plane (sphere modulo antipodes)";
        e.manifold = sphere2();
        e.manifold.name = "RP2";
        e.manifold.orientable = false;
        e.manifold.deck = antipodal(3);
        e.field = make_field("quadric", [](const auto& p) {
            return p[0] * p[0] + 2.0 * p[1] * p[1] + 3.0 * p[2] * p[2];
        });
        e.seeds = {{"min", vec({1, 0, 0}), 0}, {"saddle", vec({0, 1, 0}), 1}, {"max", vec({0, 0, 1}), 2}};
        e.betti_z2 = {1, 1, 1};
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e;
        e.name = "klein";
        e.description = "x^2 + 2 y^2 on the Klein bottle (torus modulo the antipodal map)";
        e.manifold = torus();
        e.manifold.name = "Klein";
        e.manifold.orientable = false;
        e.manifold.deck = antipodal(3);
        e.field = make_field("x2+2y2", [](const auto& p) { return p[0] * p[0] + 2.0 * p[1] * p[1]; });
        e.seeds = {
            {"min", vec({R - r, 0, 0}), 0},
            {"sx", vec({R + r, 0, 0}), 1},
            {"sy", vec({0, R - r, 0}), 1},
            {"max", vec({0, R + r, 0}), 2},
        };
        e.betti_z2 = {1, 2, 1};
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e;
        e.name = "sphere3-quadric";
        e.description = "x1^2 + 2 x2^2 + 3 x3^2 + 4 x4^2 on the 3-sphere";
        e.manifold = sphere3();
        e.field = make_field("quadric", [](const auto& p) {
            return p[0] * p[0] + 2.0 * p[1] * p[1] + 3.0 * p[2] * p[2] + 4.0 * p[3] * p[3];
        });
        for (int i = 0; i < 4; ++i)
            for (int s : {1, -1}) {
                Vec x = Vec::Zero(4);
                x[i] = s;
                e.seeds.push_back({"e" + std::to_string(i + 1) + (s > 0 ? "+" : "-"), x, i});
            }
        e.betti_z = {1, 0, 0, 1};
        e.betti_z2 = {1, 0, 0, 1};
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e;
        e.name = "sphere-z2";
        e.kind = ModelKind::morse_bott;
        e.description = "z^2 on the 2-sphere: equator circle (index 0) and two maxima";
        e.manifold = sphere2();
        e.field = make_field("z^2", [](const auto& p) { return p[2] * p[2]; });
        e.subs = {sphere_equator(1), sphere_pole(1, 1), sphere_pole(-1, 1)};
        e.fj = {circle_data("equator", 1.0, 0.0, 0.4, 1, false), point_data("north"), point_data("south")};
        e.betti_z = {1, 0, 1};
        e.betti_z2 = {1, 0, 1};
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e;
        e.name = "sphere-mz2";
        e.kind = ModelKind::morse_bott;
        e.description = "-z^2 on the 2-sphere: equator circle (index 1) and two minima";
        e.manifold = sphere2();
        e.field = make_field("-z^2", [](const auto& p) { return -(p[2] * p[2]); });
        e.subs = {sphere_equator(-1), sphere_pole(1, -1), sphere_pole(-1, -1)};
        e.fj = {circle_data("equator", 1.0, 0.0, 0.4, 1, false), point_data("north"), point_data("south")};
        e.betti_z = {1, 0, 1};
        e.betti_z2 = {1, 0, 1};
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e;
        e.name = "torus-vertical";
        e.kind = ModelKind::morse_bott;
        e.description = "height along the axis of the torus: bottom and top critical circles";
        e.manifold = torus();
        e.field = make_field("z", [](const auto& p) { return p[2]; });
        e.subs = {torus_height_circle(-1), torus_height_circle(1)};
        e.fj = {circle_data("bottom", R, -r, 0.3, 1, false), circle_data("top", R, r, 1.9, 1, false)};
        e.betti_z = {1, 2, 1};
        e.betti_z2 = {1, 2, 1};
        cat.push_back(std::move(e));
    }
    {
        CatalogEntry e;
        e.name = "klein-bott-model";
        e.kind = ModelKind::morse_bott;
        e.description = "z^2 on the Klein bottle: outer, inner (index 0) and cap (index 1) circles";
        e.manifold = torus();
        e.manifold.name = "Klein";
        e.manifold.orientable = false;
        e.manifold.deck = antipodal(3);
        e.field = make_field("z^2", [](const auto& p) { return p[2] * p[2]; });
        e.subs = {torus_equator_circle(1), torus_equator_circle(-1), torus_cap_pair()};
        e.fj = {circle_data("outer", R + r, 0.0, 0.2, 2, true), circle_data("inner", R - r, 0.0, 1.3, 2, true),
                circle_data("caps", R, r, 0.7, 1, false)};
        e.betti_z2 = {1, 2, 1};
        cat.push_back(std::move(e));
    }
    return cat;
}

} // namespace detail

inline const std::vector<CatalogEntry>& catalog()
{
    static const std::vector<CatalogEntry> cat = detail::build_catalog();
    return cat;
}

inline const CatalogEntry& lookup(const std::string& name)
{
    for (const auto& e : catalog())
        if (e.name == name)
            return e;
    throw Error(ErrorKind::domain, "unknown model '" + name + "'");
}

inline nlohmann::json to_json_vec(const Vec& v)
{
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i)
        a.push_back(v[i]);
    return a;
}

/// Descriptor of a catalog entry: dimensions, orientability, seeds and expected indices.
inline nlohmann::json describe(const CatalogEntry& e)
{
    nlohmann::json j;
    j["name"] = e.name;
    j["kind"] = e.kind == ModelKind::morse ? "morse" : "morse-bott";
    j["ambient_dim"] = e.manifold.ambient_dim;
    j["intrinsic_dim"] = e.manifold.intrinsic_dim;
    j["orientable"] = e.manifold.orientable;
    j["quotient"] = e.manifold.deck.has_value();
    nlohmann::json seeds = nlohmann::json::array();
    if (e.kind == ModelKind::morse) {
        for (const auto& s : e.seeds)
            seeds.push_back({{"id", s.id}, {"location", to_json_vec(s.location)}, {"index", s.expected_index}});
    } else {
        for (std::size_t k = 0; k < e.subs.size(); ++k) {
            const auto& c = e.subs[k];
            seeds.push_back({{"id", c.id},
                             {"dim", c.dim},
                             {"bott_index", c.bott_index},
                             {"value", c.value},
                             {"location", to_json_vec(c.parametrization(0.0))}});
        }
    }
    j["critical"] = seeds;
    if (!e.betti_z.empty())
        j["betti_z"] = e.betti_z;
    j["betti_z2"] = e.betti_z2;
    return j;
}

} // namespace msw

#endif // MSW_CATALOG_HPP_
