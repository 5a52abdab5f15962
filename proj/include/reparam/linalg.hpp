#pragma once

// Small dense linear algebra: Cholesky, triangular solves, packed symmetric
// storage, Jacobi eigensolver, symmetric solve.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "special.hpp"
#include "tensor.hpp"

namespace reparam {

template <class T>
double frobenius(const Matrix<T>& m) {
    double s = 0;
    for (const T& x : m.data) s += value(x) * value(x);
    return std::sqrt(s);
}

template <class T>
void require_square(const Matrix<T>& m, const char* who) {
    if (m.rows != m.cols) throw ShapeError(std::string(who) + ": matrix must be square");
}

// True when |M_ij - M_ji| <= tol * max(1, max|M|).
template <class T>
bool is_symmetric(const Matrix<T>& m, double tol) {
    if (m.rows != m.cols) return false;
    double scale = 1;
    for (const T& x : m.data) scale = std::max(scale, std::abs(value(x)));
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (std::abs(value(m(i, j)) - value(m(j, i))) > tol * scale) return false;
    return true;
}

// Lower Cholesky factor; reads only the lower triangle.
template <class T>
Matrix<T> cholesky(const Matrix<T>& m) {
    require_square(m, "cholesky");
    const std::size_t n = m.rows;
    Matrix<T> l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        T d = m(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(value(d) > 0)) throw NotPositiveDefinite(j);
        const T ljj = sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            T s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

// Solves L y = b, or L^T y = b when `transposed`.
template <class T>
std::vector<T> tri_solve(const Matrix<T>& l, std::span<const T> b, bool transposed = false) {
    require_square(l, "tri_solve");
    const std::size_t n = l.rows;
    if (b.size() != n) throw ShapeError("tri_solve: right-hand side has wrong length");
    for (std::size_t i = 0; i < n; ++i)
        if (value(l(i, i)) == 0) throw SingularMatrix("tri_solve: zero on the diagonal at " + std::to_string(i));
    std::vector<T> y(b.begin(), b.end());
    if (!transposed) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < i; ++k) y[i] -= l(i, k) * y[k];
            y[i] /= l(i, i);
        }
    } else {
        for (std::size_t i = n; i-- > 0;) {
            for (std::size_t k = i + 1; k < n; ++k) y[i] -= l(k, i) * y[k];
            y[i] /= l(i, i);
        }
    }
    return y;
}

inline std::size_t triangular_dim(std::size_t len) {
    const auto n = static_cast<std::size_t>(std::llround((std::sqrt(8.0 * double(len) + 1) - 1) / 2));
    if (n * (n + 1) / 2 != len) throw ShapeError("no n with n(n+1)/2 = " + std::to_string(len));
    return n;
}

// Row-by-row lower triangle: M00, M10, M11, M20, ...
template <class T>
std::vector<T> pack_lower(const Matrix<T>& m) {
    require_square(m, "pack_lower");
    std::vector<T> out;
    out.reserve(m.rows * (m.rows + 1) / 2);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j <= i; ++j) out.push_back(m(i, j));
    return out;
}

template <class T>
Matrix<T> unpack_lower(std::span<const T> data) {
    const std::size_t n = triangular_dim(data.size());
    Matrix<T> m(n, n);
    std::size_t p = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            m(i, j) = data[p];
            m(j, i) = data[p];
            ++p;
        }
    return m;
}

struct Eigh {
    RealVec values;   // ascending
    RealMat vectors;  // column k pairs with values[k]
};

// Cyclic Jacobi rotations.
inline Eigh jacobi_eigh(const RealMat& m_in) {
    require_square(m_in, "jacobi_eigh");
    if (!is_symmetric(m_in, 1e-8)) throw DomainError("jacobi_eigh: matrix is not symmetric");
    const std::size_t n = m_in.rows;
    RealMat a = m_in;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) a(i, j) = a(j, i) = 0.5 * (m_in(i, j) + m_in(j, i));
    RealMat v = RealMat::identity(n);
    const double norm = frobenius(a);
    auto off = [&] {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };
    for (int sweep = 0; sweep < 50 && off() > 1e-12 * norm; ++sweep) {
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
    Eigh out{RealVec(n), RealMat(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

namespace detail {

inline RealVec lu_solve(RealMat a, RealVec b, double tiny) {
    const std::size_t n = a.rows;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (std::abs(a(piv, k)) <= tiny) throw SingularMatrix("solve_sym: matrix is singular");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = i + 1; j < n; ++j) b[i] -= a(i, j) * b[j];
        b[i] /= a(i, i);
    }
    return b;
}

}  // namespace detail

// H x = g for symmetric H. LDL^T when H is definite (all pivots of one
// sign), which is the Newton case near an optimum; otherwise pivoted LU.
inline RealVec solve_sym(const RealMat& h, const RealVec& g) {
    require_square(h, "solve_sym");
    const std::size_t n = h.rows;
    if (g.size() != n) throw ShapeError("solve_sym: right-hand side has wrong length");
    double hmax = 0;
    for (double x : h.data) hmax = std::max(hmax, std::abs(x));
    const double tiny = 1e-12 * std::max(hmax, 1e-300);

    RealMat l = RealMat::identity(n);
    RealVec d(n);
    bool ok = true;
    for (std::size_t j = 0; j < n && ok; ++j) {
        double dj = h(j, j);
        for (std::size_t k = 0; k < j; ++k) dj -= l(j, k) * l(j, k) * d[k];
        if (std::abs(dj) <= tiny || (j > 0 && (dj > 0) != (d[0] > 0))) {
            ok = false;  // near-singular or indefinite
            break;
        }
        d[j] = dj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = h(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k) * d[k];
            l(i, j) = s / dj;
        }
    }
    if (!ok) return detail::lu_solve(h, g, tiny);
    RealVec y = tri_solve<double>(l, g);
    for (std::size_t i = 0; i < n; ++i) y[i] /= d[i];
    return tri_solve<double>(l, y, true);
}

// Inverse of a symmetric matrix, column by column.
inline RealMat inverse_sym(const RealMat& h) {
    const std::size_t n = h.rows;
    RealMat inv(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        RealVec e(n, 0.0);
        e[j] = 1;
        const RealVec c = solve_sym(h, e);
        for (std::size_t i = 0; i < n; ++i) inv(i, j) = c[i];
    }
    return inv;
}

}  // namespace reparam
