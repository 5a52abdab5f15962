#pragma once

// Diagonal, symmetric, diagonal-PD, SPD and correlation matrices.

#include <cmath>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "linalg.hpp"
#include "scalar_maps.hpp"
#include "tensor.hpp"
#include "vector_maps.hpp"

namespace reparam {

inline constexpr double kSymmetryTol = 1e-10;

// Scalar or per-diagonal scale (expected order of magnitude of M_ii).
struct ScaleSpec {
    std::vector<double> values{1.0};
    bool is_scalar = true;

    ScaleSpec() = default;
    ScaleSpec(double s) : values{s} {}  // NOLINT: a plain number is the common case
    ScaleSpec(std::vector<double> s) : values(std::move(s)), is_scalar(false) {}  // NOLINT

    double operator[](std::size_t i) const { return is_scalar ? values[0] : values[i]; }

    void check(std::size_t n) const {
        if (!is_scalar && values.size() != n)
            throw ShapeError("scale vector has length " + std::to_string(values.size()) + ", matrix dim is " +
                             std::to_string(n));
        for (double s : values)
            if (!(s > 0) || !std::isfinite(s)) throw DomainError("scale entries must be positive and finite");
    }
};

namespace detail {

template <class T>
void require_symmetric(const Matrix<T>& m, const char* who) {
    require_square(m, who);
    if (!is_symmetric(m, kSymmetryTol)) throw DomainError(std::string(who) + ": matrix is not symmetric");
}

// The inverse maps recover L from a rounded L L^T, so for plain doubles the
// factorization runs in extended precision; that keeps the algorithm's own
// error below the representation error of the input matrix.
template <class T>
Matrix<T> cholesky_accurate(const Matrix<T>& m) {
    if constexpr (std::is_same_v<T, double>) {
        Matrix<long double> w(m.rows, m.cols);
        for (std::size_t i = 0; i < m.data.size(); ++i) w.data[i] = m.data[i];
        const Matrix<long double> l = cholesky(w);
        Matrix<double> out(m.rows, m.cols);
        for (std::size_t i = 0; i < l.data.size(); ++i) out.data[i] = static_cast<double>(l.data[i]);
        return out;
    } else {
        return cholesky(m);
    }
}

template <class T>
void require_diagonal(const Matrix<T>& m, const char* who) {
    require_square(m, who);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j)
            if (i != j && std::abs(value(m(i, j))) > 1e-12)
                throw DomainError(std::string(who) + ": off-diagonal entry is not zero");
}

}  // namespace detail

template <class T>
Matrix<T> reals_to_diag(std::span<const T> x) {
    Matrix<T> m(x.size(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) m(i, i) = x[i];
    return m;
}

template <class T>
std::vector<T> diag_to_reals(const Matrix<T>& m) {
    detail::require_diagonal(m, "diag_to_reals");
    std::vector<T> x(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) x[i] = m(i, i);
    return x;
}

template <class T>
Matrix<T> reals_to_sym(std::span<const T> x) {
    return unpack_lower(x);
}

template <class T>
std::vector<T> sym_to_reals(const Matrix<T>& m) {
    detail::require_symmetric(m, "sym_to_reals");
    return pack_lower(m);
}

template <class T>
Matrix<T> reals_to_diag_pd(std::span<const T> x, const ScaleSpec& s = {}) {
    s.check(x.size());
    Matrix<T> m(x.size(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) m(i, i) = softplus(x[i], s[i]);
    return m;
}

template <class T>
std::vector<T> diag_pd_to_reals(const Matrix<T>& m, const ScaleSpec& s = {}) {
    detail::require_diagonal(m, "diag_pd_to_reals");
    s.check(m.rows);
    std::vector<T> x(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) {
        if (!(value(m(i, i)) > 0)) throw DomainError("diag_pd_to_reals: diagonal entries must be > 0");
        x[i] = softplusinv(m(i, i), s[i]);
    }
    return x;
}

template <class T>
Matrix<T> reals_to_spd(std::span<const T> x, const ScaleSpec& s = {}) {
    const std::size_t n = triangular_dim(x.size());
    s.check(n);
    Matrix<T> l(n, n);
    std::size_t p = n;
    for (std::size_t i = 0; i < n; ++i) {
        l(i, i) = log1pexp(x[i]);
        for (std::size_t j = 0; j < i; ++j) l(i, j) = x[p++];
    }
    // rows are shrunk by sqrt(i+1) so every diagonal entry of L L^T has the
    // same order of magnitude
    for (std::size_t i = 0; i < n; ++i) {
        const double f = 1 / std::sqrt(double(i + 1));
        for (std::size_t j = 0; j <= i; ++j) l(i, j) *= f;
    }
    Matrix<T> m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            T acc(0.0);
            for (std::size_t k = 0; k <= j; ++k) acc += l(i, k) * l(j, k);
            acc *= std::sqrt(s[i]) * std::sqrt(s[j]);
            m(i, j) = acc;
            m(j, i) = acc;
        }
    return m;
}

template <class T>
std::vector<T> spd_to_reals(const Matrix<T>& m, const ScaleSpec& s = {}) {
    detail::require_symmetric(m, "spd_to_reals");
    const std::size_t n = m.rows;
    s.check(n);
    Matrix<T> ms = m;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) ms(i, j) /= std::sqrt(s[i]) * std::sqrt(s[j]);
    const Matrix<T> l = detail::cholesky_accurate(ms);
    std::vector<T> x(n * (n + 1) / 2);
    std::size_t p = n;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = std::sqrt(double(i + 1));
        x[i] = logexpm1(l(i, i) * f);
        for (std::size_t j = 0; j < i; ++j) x[p++] = l(i, j) * f;
    }
    return x;
}

inline std::size_t corr_dim(std::size_t len) { return triangular_dim(len) + 1; }

template <class T>
Matrix<T> reals_to_corr(std::span<const T> x) {
    const std::size_t n = corr_dim(x.size());
    Matrix<T> l(n, n);
    l(0, 0) = T(1.0);
    for (std::size_t i = 1; i < n; ++i) {
        const auto row = reals_to_half_sphere<T>(x.subspan(i * (i - 1) / 2, i));
        for (std::size_t j = 0; j <= i; ++j) l(i, j) = row[j];
    }
    Matrix<T> m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            T acc(0.0);
            for (std::size_t k = 0; k <= j; ++k) acc += l(i, k) * l(j, k);
            m(i, j) = acc;
            m(j, i) = acc;
        }
    return m;
}

template <class T>
std::vector<T> corr_to_reals(const Matrix<T>& m) {
    detail::require_symmetric(m, "corr_to_reals");
    const std::size_t n = m.rows;
    if (n == 0) throw ShapeError("corr_to_reals: empty matrix");
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(value(m(i, i)) - 1) > 1e-8) throw DomainError("corr_to_reals: diagonal entries must be 1");
    const Matrix<T> l = detail::cholesky_accurate(m);
    std::vector<T> x;
    x.reserve(n * (n - 1) / 2);
    for (std::size_t i = 1; i < n; ++i) {
        const auto xi = half_sphere_to_reals<T>(l.row(i).subspan(0, i + 1));
        x.insert(x.end(), xi.begin(), xi.end());
    }
    return x;
}

// Batched forms: a vector->matrix map over the last dimension, and a
// matrix->vector map over the last two.
template <class T, class F>
Tensor<T> vectorize_trailing2(F&& map, const Tensor<T>& in, std::size_t in_dim, std::size_t n) {
    const std::size_t a[] = {in_dim}, b[] = {n, n};
    return map_trailing([&](std::span<const T> v) { return map(v).data; }, in, a, b);
}

template <class T, class F>
Tensor<T> vectorize_trailing2_inv(F&& map, const Tensor<T>& in, std::size_t n, std::size_t out_dim) {
    const std::size_t a[] = {n, n}, b[] = {out_dim};
    return map_trailing(
        [&](std::span<const T> v) { return map(Matrix<T>(n, n, std::vector<T>(v.begin(), v.end()))); }, in, a,
        b);
}

}  // namespace reparam
