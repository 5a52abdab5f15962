#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dual.hpp"
#include "tensor.hpp"

namespace reparam {

// Gradient of a scalar field; f must accept std::vector<Dual>. k evaluations.
template <class F>
RealVec gradient(F&& f, const RealVec& theta) {
    const std::size_t k = theta.size();
    std::vector<Dual> x(k);
    RealVec g(k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) x[j] = Dual(theta[j], i == j ? 1.0 : 0.0);
        g[i] = f(x).d;
    }
    return g;
}

// Jacobian of a vector map (f returns a container of Dual); rows = outputs.
template <class F>
RealMat jacobian(F&& f, const RealVec& theta) {
    const std::size_t k = theta.size();
    std::vector<Dual> x(k);
    RealMat jac;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) x[j] = Dual(theta[j], i == j ? 1.0 : 0.0);
        const auto y = f(x);
        if (i == 0) jac = RealMat(y.size(), k);
        for (std::size_t r = 0; r < y.size(); ++r) jac(r, i) = y[r].d;
    }
    return jac;
}

struct ValueGradHess {
    double value = 0;
    RealVec grad;
    RealMat hess;
};

// Value, gradient and Hessian from the k(k+1)/2 hyper-dual evaluations
// along (e_i, e_j), j <= i.
template <class F>
ValueGradHess value_grad_hessian(F&& f, const RealVec& theta) {
    const std::size_t k = theta.size();
    ValueGradHess out{0, RealVec(k), RealMat(k, k)};
    std::vector<HyperDual> x(k);
    if (k == 0) {
        out.value = value(f(x));
        return out;
    }
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            for (std::size_t m = 0; m < k; ++m)
                x[m] = HyperDual(theta[m], m == i ? 1.0 : 0.0, m == j ? 1.0 : 0.0, 0.0);
            const HyperDual y = f(x);
            out.hess(i, j) = y.d12;
            if (j == i) {
                out.grad[i] = y.d1;
                out.value = y.v;
            }
        }
    }
    // only the lower triangle was evaluated, so mirroring is the symmetrization
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < i; ++j) out.hess(j, i) = out.hess(i, j);
    return out;
}

template <class F>
RealMat hessian(F&& f, const RealVec& theta) {
    return value_grad_hessian(std::forward<F>(f), theta).hess;
}

inline double fd_step(double t, double rel = 1e-6) { return rel * std::max(1.0, std::abs(t)); }

// Central differences, h_i = rel * max(1, |theta_i|); f takes RealVec.
template <class F>
RealVec fd_gradient(F&& f, const RealVec& theta, double rel = 1e-6) {
    RealVec g(theta.size()), x = theta;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double h = fd_step(theta[i], rel);
        x[i] = theta[i] + h;
        const double fp = f(x);
        x[i] = theta[i] - h;
        const double fm = f(x);
        x[i] = theta[i];
        g[i] = (fp - fm) / (2 * h);
    }
    return g;
}

template <class F>
RealMat fd_jacobian(F&& f, const RealVec& theta, double rel = 1e-6) {
    RealMat jac;
    RealVec x = theta;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double h = fd_step(theta[i], rel);
        x[i] = theta[i] + h;
        const auto fp = f(x);
        x[i] = theta[i] - h;
        const auto fm = f(x);
        x[i] = theta[i];
        if (i == 0) jac = RealMat(fp.size(), theta.size());
        for (std::size_t r = 0; r < fp.size(); ++r) jac(r, i) = (fp[r] - fm[r]) / (2 * h);
    }
    return jac;
}

// Nested central differences. The default step is larger than for
// gradients: the second difference divides round-off by h^2.
template <class F>
RealMat fd_hessian(F&& f, const RealVec& theta, double rel = 1e-4) {
    const std::size_t k = theta.size();
    RealMat h(k, k);
    RealVec x = theta;
    auto at = [&](std::size_t i, double di, std::size_t j, double dj) {
        x[i] += di;
        x[j] += dj;
        const double v = f(x);
        x[i] = theta[i];
        x[j] = theta[j];
        return v;
    };
    for (std::size_t i = 0; i < k; ++i) {
        const double hi = fd_step(theta[i], rel);
        for (std::size_t j = 0; j <= i; ++j) {
            const double hj = fd_step(theta[j], rel);
            double v;
            if (i == j) {
                v = (at(i, hi, i, hi) - 2 * at(i, 0, i, 0) + at(i, -hi, i, -hi)) / (4 * hi * hi);
            } else {
                v = (at(i, hi, j, hj) - at(i, hi, j, -hj) - at(i, -hi, j, hj) + at(i, -hi, j, -hj)) /
                    (4 * hi * hj);
            }
            h(i, j) = v;
            h(j, i) = v;
        }
    }
    return h;
}

}  // namespace reparam
