#pragma once

// Forward-mode scalars. Dual carries one directional derivative; HyperDual
// carries two directions plus the mixed second derivative, which is enough
// for exact Hessian entries.

#include <cmath>
#include <ostream>

#include "special.hpp"

namespace reparam {

struct Dual {
    double v = 0;  // value
    double d = 0;  // derivative part

    constexpr Dual() = default;
    constexpr Dual(double value) : v(value) {}  // NOLINT: implicit on purpose, constants in generic code
    constexpr Dual(double value, double deriv) : v(value), d(deriv) {}

    Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
    Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
    Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
    Dual& operator/=(const Dual& o) { v /= o.v; d = (d - v * o.d) / o.v; return *this; }

    friend Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
    friend Dual operator+(Dual a, const Dual& b) { return a += b; }
    friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
    friend Dual operator*(Dual a, const Dual& b) { return a *= b; }
    friend Dual operator/(Dual a, const Dual& b) { return a /= b; }

    friend bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
    friend bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
    friend bool operator<=(const Dual& a, const Dual& b) { return a.v <= b.v; }
    friend bool operator>=(const Dual& a, const Dual& b) { return a.v >= b.v; }
    friend bool operator==(const Dual& a, const Dual& b) { return a.v == b.v; }

    friend std::ostream& operator<<(std::ostream& os, const Dual& a) { return os << a.v << "+" << a.d << "e"; }
};

struct HyperDual {
    double v = 0, d1 = 0, d2 = 0, d12 = 0;

    constexpr HyperDual() = default;
    constexpr HyperDual(double value) : v(value) {}  // NOLINT
    constexpr HyperDual(double value, double a, double b, double ab) : v(value), d1(a), d2(b), d12(ab) {}

    HyperDual& operator+=(const HyperDual& o) { v += o.v; d1 += o.d1; d2 += o.d2; d12 += o.d12; return *this; }
    HyperDual& operator-=(const HyperDual& o) { v -= o.v; d1 -= o.d1; d2 -= o.d2; d12 -= o.d12; return *this; }
    HyperDual& operator*=(const HyperDual& o) {
        d12 = d12 * o.v + v * o.d12 + d1 * o.d2 + d2 * o.d1;
        d1 = d1 * o.v + v * o.d1;
        d2 = d2 * o.v + v * o.d2;
        v *= o.v;
        return *this;
    }
    HyperDual& operator/=(const HyperDual& o) {
        // solve a = q b order by order, so v and d1 round exactly like double and Dual
        const double q = v / o.v;
        const double q1 = (d1 - q * o.d1) / o.v;
        const double q2 = (d2 - q * o.d2) / o.v;
        d12 = (d12 - q * o.d12 - q1 * o.d2 - q2 * o.d1) / o.v;
        v = q;
        d1 = q1;
        d2 = q2;
        return *this;
    }

    friend HyperDual operator-(const HyperDual& a) { return {-a.v, -a.d1, -a.d2, -a.d12}; }
    friend HyperDual operator+(HyperDual a, const HyperDual& b) { return a += b; }
    friend HyperDual operator-(HyperDual a, const HyperDual& b) { return a -= b; }
    friend HyperDual operator*(HyperDual a, const HyperDual& b) { return a *= b; }
    friend HyperDual operator/(HyperDual a, const HyperDual& b) { return a /= b; }

    friend bool operator<(const HyperDual& a, const HyperDual& b) { return a.v < b.v; }
    friend bool operator>(const HyperDual& a, const HyperDual& b) { return a.v > b.v; }
    friend bool operator<=(const HyperDual& a, const HyperDual& b) { return a.v <= b.v; }
    friend bool operator>=(const HyperDual& a, const HyperDual& b) { return a.v >= b.v; }
    friend bool operator==(const HyperDual& a, const HyperDual& b) { return a.v == b.v; }

    friend std::ostream& operator<<(std::ostream& os, const HyperDual& a) {
        return os << "(" << a.v << ", " << a.d1 << ", " << a.d2 << ", " << a.d12 << ")";
    }
};

inline double value(const Dual& x) { return x.v; }
inline double value(const HyperDual& x) { return x.v; }

// Chain rule for a unary primitive given f(x), f'(x) and f''(x).
inline Dual lift(const Dual& x, double f, double f1, double /*f2*/ = 0) { return {f, f1 * x.d}; }
inline HyperDual lift(const HyperDual& x, double f, double f1, double f2) {
    return {f, f1 * x.d1, f1 * x.d2, f1 * x.d12 + f2 * x.d1 * x.d2};
}

// Binary primitive: gradient (fa, fb), Hessian (faa, fab, fbb).
inline Dual lift2(const Dual& a, const Dual& b, double f, double fa, double fb, double, double, double) {
    return {f, fa * a.d + fb * b.d};
}
inline HyperDual lift2(const HyperDual& a, const HyperDual& b, double f, double fa, double fb, double faa,
                       double fab, double fbb) {
    return {f, fa * a.d1 + fb * b.d1, fa * a.d2 + fb * b.d2,
            fa * a.d12 + fb * b.d12 + faa * a.d1 * a.d2 + fab * (a.d1 * b.d2 + a.d2 * b.d1) + fbb * b.d1 * b.d2};
}

template <class T>
concept DualLike = std::is_same_v<T, Dual> || std::is_same_v<T, HyperDual>;

template <DualLike T> T exp(const T& x) { const double e = std::exp(x.v); return lift(x, e, e, e); }
template <DualLike T> T expm1(const T& x) { const double e = std::exp(x.v); return lift(x, std::expm1(x.v), e, e); }
template <DualLike T> T log(const T& x) { return lift(x, std::log(x.v), 1 / x.v, -1 / (x.v * x.v)); }
template <DualLike T> T log1p(const T& x) {
    const double u = 1 / (1 + x.v);
    return lift(x, std::log1p(x.v), u, -u * u);
}
template <DualLike T> T sqrt(const T& x) {
    const double s = std::sqrt(x.v);
    return lift(x, s, 0.5 / s, -0.25 / (s * x.v));
}
template <DualLike T> T cbrt(const T& x) {
    const double c = std::cbrt(x.v);
    return lift(x, c, 1 / (3 * c * c), -2 / (9 * c * c * x.v));
}
template <DualLike T> T pow(const T& x, double a) {
    const double p = std::pow(x.v, a);
    return lift(x, p, a * std::pow(x.v, a - 1), a * (a - 1) * std::pow(x.v, a - 2));
}
template <DualLike T> T sin(const T& x) { const double s = std::sin(x.v); return lift(x, s, std::cos(x.v), -s); }
template <DualLike T> T cos(const T& x) { const double c = std::cos(x.v); return lift(x, c, -std::sin(x.v), -c); }
template <DualLike T> T tanh(const T& x) {
    const double t = std::tanh(x.v);
    const double s = 1 - t * t;
    return lift(x, t, s, -2 * t * s);
}
template <DualLike T> T atanh(const T& x) {
    const double s = 1 / (1 - x.v * x.v);
    return lift(x, std::atanh(x.v), s, 2 * x.v * s * s);
}
template <DualLike T> T atan2(const T& y, const T& x) {
    const double r2 = x.v * x.v + y.v * y.v;
    const double r4 = r2 * r2;
    return lift2(y, x, std::atan2(y.v, x.v), x.v / r2, -y.v / r2, -2 * x.v * y.v / r4,
                 (y.v * y.v - x.v * x.v) / r4, 2 * x.v * y.v / r4);
}
template <DualLike T> T atan2(const T& y, double x) { return atan2(y, T(x)); }
template <DualLike T> T atan2(double y, const T& x) { return atan2(T(y), x); }

// abs/min/max pick a branch by value; at a tie max keeps its first
// argument and min its second, i.e. max(x,0) and min(x,0) both follow the
// right derivative at x = 0. abs'(0) = 0.
template <DualLike T> T abs(const T& x) {
    if (x.v > 0) return x;
    if (x.v < 0) return -x;
    return T(0.0);
}
template <DualLike T> T fmax(const T& a, const T& b) { return a.v >= b.v ? a : b; }
template <DualLike T> T fmin(const T& a, const T& b) { return a.v < b.v ? a : b; }

template <DualLike T> T erf(const T& x) {
    const double f1 = 2 / kSqrtPi * std::exp(-x.v * x.v);
    return lift(x, std::erf(x.v), f1, -2 * x.v * f1);
}
template <DualLike T> T erfc(const T& x) {
    const double f1 = -2 / kSqrtPi * std::exp(-x.v * x.v);
    return lift(x, std::erfc(x.v), f1, -2 * x.v * f1);
}
template <DualLike T> T erfinv(const T& t) {
    const double y = erfinv(t.v);
    const double f1 = kSqrtPi / 2 * std::exp(y * y);
    return lift(t, y, f1, 2 * y * f1 * f1);
}
template <DualLike T> T ndtri(const T& p) {
    const double z = ndtri(p.v);
    const double f1 = std::exp(0.5 * z * z + kLogSqrt2Pi);
    return lift(p, z, f1, z * f1 * f1);
}
template <DualLike T> T ndtr(const T& x) {
    const double f1 = std::exp(-0.5 * x.v * x.v - kLogSqrt2Pi);
    return lift(x, ndtr(x.v), f1, -x.v * f1);
}
template <DualLike T> T log_ndtr(const T& x) {
    const double f = log_ndtr(x.v);
    const double f1 = std::exp(-0.5 * x.v * x.v - kLogSqrt2Pi - f);
    return lift(x, f, f1, -f1 * (x.v + f1));
}
template <DualLike T> T log1pexp(const T& x) {
    const double e = expit(x.v);
    return lift(x, log1pexp(x.v), e, e * expit(-x.v));
}
template <DualLike T> T logexpm1(const T& y) {
    const double f1 = 1 / -std::expm1(-y.v);
    return lift(y, logexpm1(y.v), f1, -f1 * (f1 - 1));
}
template <DualLike T> T expit(const T& x) {
    const double e = expit(x.v);
    const double f1 = e * expit(-x.v);
    return lift(x, e, f1, f1 * (1 - 2 * e));
}
template <DualLike T> T logit(const T& p) {
    const double f1 = 1 / (p.v * (1 - p.v));
    return lift(p, logit(p.v), f1, f1 * f1 * (2 * p.v - 1));
}
template <DualLike T> T logistic_to_gaussian(const T& x) {
    const double g = logistic_to_gaussian(x.v);
    // expit(x) expit(-x) / phi(g), in log space for large |x|
    const double f1 = std::exp(-log1pexp(x.v) - log1pexp(-x.v) + kLogSqrt2Pi + 0.5 * g * g);
    return lift(x, g, f1, f1 * (1 - 2 * expit(x.v)) + g * f1 * f1);
}
template <DualLike T> T gaussian_to_logistic(const T& z) {
    const double h = gaussian_to_logistic(z.v);
    const double f1 = std::exp(-0.5 * z.v * z.v - kLogSqrt2Pi - log_ndtr(z.v) - log_ndtr(-z.v));
    return lift(z, h, f1, -z.v * f1 - f1 * f1 * (1 - 2 * ndtr(z.v)));
}

inline bool isfinite(const Dual& x) { return std::isfinite(x.v) && std::isfinite(x.d); }
inline bool isfinite(const HyperDual& x) {
    return std::isfinite(x.v) && std::isfinite(x.d1) && std::isfinite(x.d2) && std::isfinite(x.d12);
}

}  // namespace reparam
