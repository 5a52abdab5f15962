#pragma once

// Double-precision special functions shared by every map. The generic
// (templated) maps call these unqualified; dual-number overloads live in
// dual.hpp and are found by ADL.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "errors.hpp"

namespace reparam {

// Elementary functions are pulled into the namespace so generic code can
// call exp(x) etc. unqualified for both double and the dual scalars.
using std::abs;
using std::atan2;
using std::atanh;
using std::cbrt;
using std::cos;
using std::exp;
using std::expm1;
using std::fmax;
using std::fmin;
using std::isfinite;
using std::log;
using std::log1p;
using std::pow;
using std::sin;
using std::sqrt;
using std::tanh;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kSqrtPi = 1.7724538509055160273;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

inline double value(double x) { return x; }
inline double value(long double x) { return static_cast<double>(x); }

inline double erf(double x) { return std::erf(x); }
inline double erfc(double x) { return std::erfc(x); }

// exp(z^2) erfc(z) for z >= 20 by backward evaluation of the Laplace
// continued fraction; 60 terms is far past convergence in that range.
inline double erfcx_large(double z) {
    double f = z;
    for (int k = 60; k >= 1; --k) f = z + (0.5 * k) / f;
    return 1.0 / (kSqrtPi * f);
}

inline double log1pexp(double x) { return std::log1p(std::exp(-std::fabs(x))) + std::max(x, 0.0); }

inline double logexpm1(double y) {
    if (!(y > 0)) throw DomainError("logexpm1: argument must be > 0");
    return y + std::log(-std::expm1(-y));
}

inline double expit(double x) {
    const double lo = std::exp(std::min(x, 0.0));
    return lo / (lo + std::exp(-std::max(x, 0.0)));
}

inline double logit(double p) {
    if (!(p > 0 && p < 1)) throw DomainError("logit: argument must lie in (0,1)");
    return std::log(p) - std::log1p(-p);
}

inline double ndtr(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

inline double log_ndtr(double x) {
    if (x > 0) return std::log1p(-0.5 * std::erfc(x / kSqrt2));
    const double z = -x / kSqrt2;
    if (z < 20) return std::log(0.5 * std::erfc(z));
    return -z * z + std::log(0.5 * erfcx_large(z));
}

namespace detail {

// Acklam's rational approximation (relative error ~1e-9), refined below.
inline double ndtri_guess(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    if (p < 0.02425) {
        const double q = std::sqrt(-2 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

// Lower-tail quantile, p in (0, 0.5].
inline double ndtri_lower(double p) {
    double x = ndtri_guess(p);
    for (int it = 0; it < 3; ++it) {
        const double e = 0.5 * std::erfc(-x / kSqrt2) - p;
        if (e == 0) break;
        // e / pdf(x), assembled in log space so tiny p cannot overflow exp(x^2/2)
        const double u = std::copysign(std::exp(std::log(std::fabs(e)) + 0.5 * x * x + kLogSqrt2Pi), e);
        const double step = u / (1 + 0.5 * x * u);
        x -= step;
        if (std::fabs(step) <= 1e-16 * std::fabs(x)) break;
    }
    return x;
}

}  // namespace detail

// Standard normal quantile.
inline double ndtri(double p) {
    if (!(p > 0 && p < 1)) throw DomainError("ndtri: argument must lie in (0,1)");
    if (p <= 0.5) return detail::ndtri_lower(p);
    return -detail::ndtri_lower(1 - p);
}

inline double erfinv(double t) {
    if (!(std::fabs(t) < 1)) throw DomainError("erfinv: argument must lie in (-1,1)");
    if (t == 0) return t;
    const double at = std::fabs(t);
    if (at > 0.5) {
        // 1 - |t| is exact here, so the tail is resolved through the quantile
        return std::copysign(-detail::ndtri_lower(0.5 * (1 - at)) / kSqrt2, t);
    }
    // single-precision polynomial seed, then Halley on erf
    double w = -std::log((1 - t) * (1 + t)) - 2.5;
    double x = 2.81022636e-08;
    x = 3.43273939e-07 + x * w;
    x = -3.5233877e-06 + x * w;
    x = -4.39150654e-06 + x * w;
    x = 0.00021858087 + x * w;
    x = -0.00125372503 + x * w;
    x = -0.00417768164 + x * w;
    x = 0.246640727 + x * w;
    x = 1.50140941 + x * w;
    x *= t;
    for (int it = 0; it < 2; ++it) {
        const double f = std::erf(x) - t;
        const double r = f / (2 / kSqrtPi * std::exp(-x * x));
        x -= r / (1 + x * r);
    }
    return x;
}

// Phi^{-1}(expit(x)). Near 0 the tanh form keeps tiny magnitudes; in the
// tails the small probability expit(-|x|) is fed to the quantile directly
// so nothing is lost to rounding near 1.
inline double logistic_to_gaussian(double x) {
    if (std::fabs(x) < 1) return kSqrt2 * erfinv(std::tanh(x / 2));
    return std::copysign(-detail::ndtri_lower(expit(-std::fabs(x))), x);
}

// logit(Phi(z)), inverse of the above.
inline double gaussian_to_logistic(double z) {
    if (std::fabs(z) < 1) return 2 * std::atanh(std::erf(z / kSqrt2));
    const double lq = log_ndtr(-std::fabs(z));
    return std::copysign(std::log1p(-std::exp(lq)) - lq, z);
}

}  // namespace reparam
