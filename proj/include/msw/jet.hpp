#ifndef MSW_JET_HPP_
#define MSW_JET_HPP_

// Second-order forward-mode differentiation for low-dimensional ambient
// spaces. A Jet carries a value together with its gradient and Hessian with
// respect to the ambient coordinates, so every scalar field in the catalog
// is written once as a generic expression and differentiated exactly.

#include <array>
#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

namespace msw
{

inline constexpr int kMaxAmbient = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxAmbient, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbient, kMaxAmbient>;
using Frame = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbient, kMaxAmbient>;

struct Jet
{
    double v = 0.0;
    Vec g;
    Mat h;

    Jet() = default;
    Jet(double value, int n) : v(value), g(Vec::Zero(n)), h(Mat::Zero(n, n)) {}

    static Jet variable(double value, int i, int n)
    {
        Jet j(value, n);
        j.g[i] = 1.0;
        return j;
    }

    int dim() const { return static_cast<int>(g.size()); }
};

/// Point in ambient space whose coordinates are either doubles or Jets.
template <typename T>
struct Point
{
    std::array<T, kMaxAmbient> c{};
    int n = 0;

    const T& operator[](std::size_t i) const { return c[i]; }
    T& operator[](std::size_t i) { return c[i]; }
    int size() const { return n; }
};

inline Point<double> to_point(const Vec& x)
{
    Point<double> p;
    p.n = static_cast<int>(x.size());
    for (int i = 0; i < p.n; ++i)
        p.c[i] = x[i];
    return p;
}

inline Point<Jet> to_jet_point(const Vec& x)
{
    Point<Jet> p;
    p.n = static_cast<int>(x.size());
    for (int i = 0; i < p.n; ++i)
        p.c[i] = Jet::variable(x[i], i, p.n);
    return p;
}

// Apply a scalar function with first and second derivative d1, d2.
inline Jet chain(const Jet& a, double value, double d1, double d2)
{
    Jet r;
    r.v = value;
    r.g = d1 * a.g;
    r.h = d1 * a.h + d2 * a.g * a.g.transpose();
    return r;
}

inline Jet operator+(const Jet& a, const Jet& b)
{
    Jet r;
    r.v = a.v + b.v;
    r.g = a.g + b.g;
    r.h = a.h + b.h;
    return r;
}

inline Jet operator-(const Jet& a, const Jet& b)
{
    Jet r;
    r.v = a.v - b.v;
    r.g = a.g - b.g;
    r.h = a.h - b.h;
    return r;
}

inline Jet operator-(const Jet& a)
{
    Jet r;
    r.v = -a.v;
    r.g = -a.g;
    r.h = -a.h;
    return r;
}

inline Jet operator*(const Jet& a, const Jet& b)
{
    Jet r;
    r.v = a.v * b.v;
    r.g = a.v * b.g + b.v * a.g;
    r.h = a.v * b.h + b.v * a.h + a.g * b.g.transpose() + b.g * a.g.transpose();
    return r;
}

inline Jet operator+(const Jet& a, double s)
{
    Jet r = a;
    r.v += s;
    return r;
}
inline Jet operator+(double s, const Jet& a) { return a + s; }
inline Jet operator-(const Jet& a, double s) { return a + (-s); }
inline Jet operator-(double s, const Jet& a) { return (-a) + s; }

inline Jet operator*(const Jet& a, double s)
{
    Jet r;
    r.v = a.v * s;
    r.g = a.g * s;
    r.h = a.h * s;
    return r;
}
inline Jet operator*(double s, const Jet& a) { return a * s; }

inline Jet reciprocal(const Jet& a)
{
    const double inv = 1.0 / a.v;
    return chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
inline Jet operator/(const Jet& a, double s) { return a * (1.0 / s); }
inline Jet operator/(double s, const Jet& a) { return s * reciprocal(a); }

inline Jet& operator+=(Jet& a, const Jet& b) { return a = a + b; }
inline Jet& operator-=(Jet& a, const Jet& b) { return a = a - b; }
inline Jet& operator*=(Jet& a, const Jet& b) { return a = a * b; }

inline Jet sqrt(const Jet& a)
{
    const double s = std::sqrt(a.v);
    return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}

inline Jet sin(const Jet& a)
{
    const double s = std::sin(a.v);
    return chain(a, s, std::cos(a.v), -s);
}

inline Jet cos(const Jet& a)
{
    const double c = std::cos(a.v);
    return chain(a, c, -std::sin(a.v), -c);
}

inline Jet exp(const Jet& a)
{
    const double e = std::exp(a.v);
    return chain(a, e, e, e);
}

inline double sqrt(double x) { return std::sqrt(x); }
inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double exp(double x) { return std::exp(x); }

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.v; }

template <typename T>
T square(const T& x)
{
    return x * x;
}

/// Constant of the same kind as `like` (a Jet with zero derivatives, or a double).
inline double constant_like(const double&, double c) { return c; }
inline Jet constant_like(const Jet& like, double c) { return Jet(c, like.dim()); }

} // namespace msw

#endif // MSW_JET_HPP_
