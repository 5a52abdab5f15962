#pragma once

// Scalar parametrizations: half-lines through softplus, intervals through
// expit (tanh when the interval is symmetric about 0).

#include <cmath>
#include <string>

#include "special.hpp"

namespace reparam {

inline void check_scale(double s) {
    if (!(s > 0) || !std::isfinite(s)) throw DomainError("scale must be positive and finite");
}

template <class T>
T softplus(const T& x, double s = 1.0) {
    check_scale(s);
    return s * log1pexp(x);
}

template <class T>
T softplusinv(const T& y, double s = 1.0) {
    check_scale(s);
    if (!(value(y) > 0)) throw DomainError("softplusinv: argument must be > 0");
    return logexpm1(y / s);
}

struct IntervalBounds {
    double a, b;
    IntervalBounds(double lo, double hi) : a(lo), b(hi) {
        if (!std::isfinite(a) || !std::isfinite(b) || !(a < b))
            throw DomainError("interval bounds must be finite with a < b");
    }
    bool symmetric() const { return a == -b; }
};

template <class T>
T reals_to_interval(const T& x, const IntervalBounds& iv) {
    if (iv.symmetric()) return iv.b * tanh(x / 2);
    return iv.a + (iv.b - iv.a) * expit(x);
}

template <class T>
T interval_to_reals(const T& y, const IntervalBounds& iv) {
    const double yv = value(y);
    if (!(yv > iv.a && yv < iv.b))
        throw DomainError("interval_to_reals: value outside the open interval (" + std::to_string(iv.a) + ", " +
                          std::to_string(iv.b) + ")");
    if (iv.symmetric()) return 2 * atanh(y / iv.b);
    return logit((y - iv.a) / (iv.b - iv.a));
}

enum class Side { lower, upper };

struct HalfLineBound {
    double a;
    Side side;
    HalfLineBound(double bound, Side s) : a(bound), side(s) {
        if (!std::isfinite(a)) throw DomainError("half-line bound must be finite");
    }
};

template <class T>
T reals_to_half_line(const T& x, const HalfLineBound& hl, double s = 1.0) {
    return hl.side == Side::lower ? hl.a + softplus(x, s) : hl.a - softplus(x, s);
}

template <class T>
T half_line_to_reals(const T& y, const HalfLineBound& hl, double s = 1.0) {
    const double yv = value(y);
    if (hl.side == Side::lower) {
        if (!(yv > hl.a)) throw DomainError("half_line_to_reals: value must be > " + std::to_string(hl.a));
        return softplusinv(y - hl.a, s);
    }
    if (!(yv < hl.a)) throw DomainError("half_line_to_reals: value must be < " + std::to_string(hl.a));
    return softplusinv(hl.a - y, s);
}

}  // namespace reparam
