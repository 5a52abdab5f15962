#pragma once

// R^n <-> open simplex, sphere, half-sphere and open ball.

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "scalar_maps.hpp"
#include "special.hpp"
#include "tensor.hpp"

namespace reparam {

template <class T>
std::vector<T> softmax_stable(std::span<const T> x) {
    if (x.empty()) throw ShapeError("softmax_stable: empty input");
    T m = x[0];
    for (const T& xi : x)
        if (xi > m) m = xi;
    std::vector<T> e(x.size());
    T s(0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        e[i] = exp(x[i] - m);
        s += e[i];
    }
    for (T& ei : e) ei /= s;
    return e;
}

// ---- simplex ---------------------------------------------------------------

template <class T>
std::vector<T> reals_to_simplex(std::span<const T> x) {
    const std::size_t n = x.size();
    if (n == 0) throw ShapeError("reals_to_simplex: need at least one coordinate");
    std::vector<T> logv(n + 1);
    T cum(0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const T xi = -log1pexp(x[k]) / static_cast<double>(n - k);
        logv[k] = log(-expm1(xi)) + cum;
        cum += xi;
    }
    logv[n] = cum;
    return softmax_stable<T>(logv);
}

inline constexpr double kSimplexSumTol = 1e-8;

template <class T>
std::vector<T> simplex_to_reals(std::span<const T> w_in) {
    if (w_in.size() < 2) throw ShapeError("simplex_to_reals: need at least two components");
    const std::size_t n = w_in.size() - 1;
    T total(0.0);
    for (const T& wi : w_in) {
        if (!(value(wi) > 0)) throw DomainError("simplex_to_reals: components must be > 0");
        total += wi;
    }
    if (std::abs(value(total) - 1) > kSimplexSumTol)
        throw DomainError("simplex_to_reals: components sum to " + std::to_string(value(total)) + ", not 1");
    std::vector<T> w(w_in.begin(), w_in.end());
    for (T& wi : w) wi /= total;

    std::vector<T> tail(n);
    T acc(0.0);
    for (std::size_t k = n; k-- > 0;) {
        acc += w[k + 1];
        tail[k] = acc;
    }
    std::vector<T> x(n);
    for (std::size_t k = 0; k < n; ++k) {
        const T xi = -static_cast<double>(n - k) * log1p(w[k] / tail[k]);
        x[k] = log(-expm1(xi)) - xi;
    }
    return x;
}

// ---- sphere / half-sphere ----------------------------------------------------

namespace detail {

template <class T>
T abs_by_value(const T& x) {
    return value(x) < 0 ? -x : x;
}

// xi = A*tanh(x/(2c)) and comp = A - |xi|, the latter computed as
// 2A*expit(-|x|/c) so it keeps full relative precision when xi nears +-A.
template <class T>
struct Angle {
    T xi, comp;
};

template <class T>
Angle<T> angle_from_real(const T& x, double c, double A) {
    return {A * tanh(x / (2 * c)), 2 * A * expit(-abs_by_value(x) / c)};
}

// log cos of a half angle (|xi| < pi/2): cos(xi) = sin(comp).
template <class T>
T log_cos_half(const Angle<T>& a) {
    if (std::abs(value(a.xi)) < kPi / 4) return log(cos(a.xi));
    return log(sin(a.comp));
}

// Inverse of angle_from_real for a half angle, given the pair
// (coordinate, nonnegative remainder) whose atan2 is the angle.
template <class T>
T real_from_half_angle(const T& num, const T& den, double c) {
    const T xi = atan2(num, den);
    if (std::abs(value(xi)) < kPi / 4) return 2 * c * atanh(xi / (kPi / 2));
    const T comp = atan2(den, abs_by_value(num));
    const T mag = c * (log(kPi - comp) - log(comp));
    return value(num) < 0 ? -mag : mag;
}

inline double sphere_coord_scale(std::size_t n, std::size_t k) { return std::sqrt(2.0 * double(n - k) - 1.0); }

inline void check_radius(double r) {
    if (!(r > 0) || !std::isfinite(r)) throw DomainError("radius must be positive and finite");
}

template <class T>
std::vector<T> scaled_copy(std::span<const T> v, double r) {
    std::vector<T> out(v.begin(), v.end());
    if (r != 1)
        for (T& x : out) x /= r;
    return out;
}

template <class T>
void check_norm(std::span<const T> v, double r, const char* who) {
    double s = 0;
    for (const T& x : v) s += value(x) * value(x);
    if (std::abs(std::sqrt(s) - r) > 1e-8 * r)
        throw DomainError(std::string(who) + ": point is not on the sphere of radius " + std::to_string(r));
}

}  // namespace detail

template <class T>
std::vector<T> reals_to_sphere(std::span<const T> x, double r = 1.0) {
    detail::check_radius(r);
    const std::size_t n = x.size();
    if (n == 0) throw ShapeError("reals_to_sphere: need at least one coordinate");
    std::vector<T> y(n + 1);
    T cum(0.0);  // running sum of log cos of the half angles
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const auto a = detail::angle_from_real(x[k], detail::sphere_coord_scale(n, k), kPi / 2);
        y[k] = sin(a.xi) * exp(cum);
        cum += detail::log_cos_half(a);
    }
    // last angle ranges over (-pi, pi)
    const auto a = detail::angle_from_real(x[n - 1], 1.0, kPi);
    T s, c;
    if (std::abs(value(a.xi)) <= kPi / 2) {
        s = sin(a.xi);
        c = cos(a.xi);
    } else {
        s = value(a.xi) < 0 ? -sin(a.comp) : sin(a.comp);
        c = -cos(a.comp);
    }
    const T zeta = exp(cum);
    y[n - 1] = s * zeta;
    y[n] = c * zeta;
    if (r != 1)
        for (T& v : y) v *= r;
    return y;
}

template <class T>
std::vector<T> sphere_to_reals(std::span<const T> v_in, double r = 1.0) {
    detail::check_radius(r);
    if (v_in.size() < 2) throw ShapeError("sphere_to_reals: need at least two coordinates");
    detail::check_norm(v_in, r, "sphere_to_reals");
    const std::vector<T> v = detail::scaled_copy(v_in, r);
    const std::size_t n = v.size() - 1;
    std::vector<T> t2(n);  // t2[k] = sum_{j>k} v_j^2
    T acc(0.0);
    for (std::size_t k = n; k-- > 0;) {
        acc += v[k + 1] * v[k + 1];
        t2[k] = acc;
    }
    std::vector<T> x(n);
    for (std::size_t k = 0; k + 1 < n; ++k)
        x[k] = detail::real_from_half_angle(v[k], sqrt(t2[k]), detail::sphere_coord_scale(n, k));
    const T xi = atan2(v[n - 1], v[n]);
    if (std::abs(value(xi)) <= kPi / 2) {
        x[n - 1] = 2 * atanh(xi / kPi);
    } else {
        const T comp = atan2(detail::abs_by_value(v[n - 1]), -v[n]);
        const T mag = log(2 * kPi - comp) - log(comp);
        x[n - 1] = value(v[n - 1]) < 0 ? -mag : mag;
    }
    return x;
}

template <class T>
std::vector<T> reals_to_half_sphere(std::span<const T> x, double r = 1.0) {
    detail::check_radius(r);
    const std::size_t n = x.size();
    if (n == 0) throw ShapeError("reals_to_half_sphere: need at least one coordinate");
    std::vector<T> y(n + 1);
    T cum(0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const auto a = detail::angle_from_real(x[k], detail::sphere_coord_scale(n, k), kPi / 2);
        y[k] = sin(a.xi) * exp(cum);
        cum += detail::log_cos_half(a);
    }
    y[n] = exp(cum);
    if (r != 1)
        for (T& v : y) v *= r;
    return y;
}

template <class T>
std::vector<T> half_sphere_to_reals(std::span<const T> v_in, double r = 1.0) {
    detail::check_radius(r);
    if (v_in.size() < 2) throw ShapeError("half_sphere_to_reals: need at least two coordinates");
    if (!(value(v_in.back()) > 0)) throw DomainError("half_sphere_to_reals: last coordinate must be > 0");
    detail::check_norm(v_in, r, "half_sphere_to_reals");
    const std::vector<T> v = detail::scaled_copy(v_in, r);
    const std::size_t n = v.size() - 1;
    std::vector<T> t2(n);
    T acc(0.0);
    for (std::size_t k = n; k-- > 0;) {
        acc += v[k + 1] * v[k + 1];
        t2[k] = acc;
    }
    std::vector<T> x(n);
    for (std::size_t k = 0; k < n; ++k)
        x[k] = detail::real_from_half_angle(v[k], sqrt(t2[k]), detail::sphere_coord_scale(n, k));
    return x;
}

// ---- ball ------------------------------------------------------------------

namespace detail {

// 1 - sum(x_i^2) with the sum carried in double-double.
template <class T>
double one_minus_sumsq(std::span<const T> x) {
    double hi = 0, lo = 0;
    for (const T& xt : x) {
        const double v = value(xt);
        const double p = v * v, pe = std::fma(v, v, -p);
        const double s = hi + p, bb = s - hi;
        lo += (hi - (s - bb)) + (p - bb) + pe;
        hi = s;
    }
    return (1 - hi) - lo;
}

inline void set_value(double& x, double v) { x = v; }
template <class T>
void set_value(T& x, double v) {
    x.v = v;
}

inline void check_chi2_dim(int n) {
    if (n < 2) throw DomainError("chi2 approximation needs n >= 2");
}
inline double wh_mean(int n) { return std::cbrt(double(n)) * (1 - 2.0 / (9.0 * n)); }
inline double wh_sd(int n) { return std::sqrt(2.0 / (9.0 * std::cbrt(double(n)))); }

}  // namespace detail

// log m_n(y): exact chi2_2 CDF for n = 2, smoothed Wilson-Hilferty otherwise.
template <class T>
T log_chi2_cdf_approx(int n, const T& y) {
    detail::check_chi2_dim(n);
    if (!(value(y) > 0)) throw DomainError("chi2_cdf_approx: y must be > 0");
    if (n == 2) return log(-expm1(-y / 2));
    return log_ndtr((0.25 * logexpm1(4 * cbrt(y)) - detail::wh_mean(n)) / detail::wh_sd(n));
}

template <class T>
T chi2_cdf_approx(int n, const T& y) {
    return exp(log_chi2_cdf_approx(n, y));
}

// m_n^{-1} given log p; the complement 1 - p is formed as -expm1(log p).
template <class T>
T chi2_cdf_approx_inv_log(int n, const T& logp) {
    detail::check_chi2_dim(n);
    if (!(value(logp) < 0)) throw DomainError("chi2_cdf_approx_inv: p must lie in (0,1)");
    const T q = -expm1(logp);
    if (n == 2) return -2 * log(q);
    const T z = value(logp) < -std::log(2.0) ? ndtri(exp(logp)) : -ndtri(q);
    const T c = 0.25 * log1pexp(4 * (detail::wh_mean(n) + z * detail::wh_sd(n)));
    return c * c * c;
}

template <class T>
T chi2_cdf_approx_inv(int n, const T& p) {
    if (!(value(p) > 0 && value(p) < 1)) throw DomainError("chi2_cdf_approx_inv: p must lie in (0,1)");
    return chi2_cdf_approx_inv_log(n, log(p));
}

template <class T>
std::vector<T> reals_to_ball(std::span<const T> x, double r = 1.0) {
    detail::check_radius(r);
    const int n = static_cast<int>(x.size());
    if (n < 2) throw ShapeError("reals_to_ball: dimension must be >= 2");
    std::vector<T> g(x.size());
    T normsq(0.0);
    for (std::size_t k = 0; k < x.size(); ++k) {
        g[k] = logistic_to_gaussian(x[k]);
        normsq += g[k] * g[k];
    }
    if (value(normsq) == 0) {
        // Continuous extension: the scale factor m_n(q)^(1/n)/sqrt(q) tends to
        // 1/sqrt(2) for n = 2 and to 0 otherwise, which fixes the Jacobian here.
        const double f0 = n == 2 ? r * std::sqrt(0.5) : 0.0;
        for (T& gk : g) gk *= f0;
        return g;
    }
    const T f = r * exp(log_chi2_cdf_approx(n, normsq) / double(n) - 0.5 * log(normsq));
    for (T& gk : g) gk *= f;
    // Far out the true norm is within an ulp of r; pull the rounded point
    // back inside so the inverse's domain check always accepts it.
    while (!(detail::one_minus_sumsq<T>(detail::scaled_copy<T>(g, r)) > 0))
        for (T& gk : g) gk *= 1 - std::numeric_limits<double>::epsilon();
    return g;
}

template <class T>
std::vector<T> ball_to_reals(std::span<const T> u, double r = 1.0) {
    detail::check_radius(r);
    const int n = static_cast<int>(u.size());
    if (n < 2) throw ShapeError("ball_to_reals: dimension must be >= 2");
    std::vector<T> x = detail::scaled_copy(u, r);
    T normsq(0.0);
    for (const T& xk : x) normsq += xk * xk;
    if (!(detail::one_minus_sumsq<T>(x) > 0)) throw DomainError("ball_to_reals: point is not inside the open ball");
    if (value(normsq) == 0) {
        for (T& xk : x) xk *= 0.0;
        return x;
    }
    // The information sits in 1 - |x|^2, so that difference is formed from an
    // exactly accumulated sum of squares before taking logs.
    T logp = 0.5 * n * log(normsq);
    detail::set_value(logp, 0.5 * n * std::log1p(-detail::one_minus_sumsq<T>(x)));
    const T minv = chi2_cdf_approx_inv_log(n, logp);
    const T f = sqrt(minv / normsq);
    for (T& xk : x) xk = gaussian_to_logistic(f * xk);
    return x;
}

// ---- batching ----------------------------------------------------------------

// Applies a vector map over every leading index of `in`, whose last
// dimension must be in_dim.
template <class T, class F>
Tensor<T> vectorize_trailing(F&& map, const Tensor<T>& in, std::size_t in_dim, std::size_t out_dim) {
    const std::size_t a[] = {in_dim}, b[] = {out_dim};
    return map_trailing(std::forward<F>(map), in, a, b);
}

}  // namespace reparam
