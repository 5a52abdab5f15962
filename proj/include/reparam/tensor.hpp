#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace reparam {

// Dense row-major matrix.
template <class T>
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<T> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, T fill = T(0)) : rows(r), cols(c), data(r * c, fill) {}
    Matrix(std::size_t r, std::size_t c, std::vector<T> values) : rows(r), cols(c), data(std::move(values)) {
        if (data.size() != r * c) throw ShapeError("Matrix: data length does not match rows*cols");
    }
    Matrix(std::initializer_list<std::initializer_list<T>> init) {
        rows = init.size();
        cols = rows ? init.begin()->size() : 0;
        for (const auto& row : init) {
            if (row.size() != cols) throw ShapeError("Matrix: ragged initializer");
            data.insert(data.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1.0);
        return m;
    }

    T& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<T> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const T> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

    Matrix transpose() const {
        Matrix t(cols, rows);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
        return t;
    }
};

using RealVec = std::vector<double>;
using RealMat = Matrix<double>;

template <class T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.cols != b.rows) throw ShapeError("matmul: inner dimensions differ");
    Matrix<T> c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = 0; k < a.cols; ++k) {
            const T aik = a(i, k);
            for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

template <class T>
std::vector<T> matvec(const Matrix<T>& a, std::span<const T> x) {
    if (a.cols != x.size()) throw ShapeError("matvec: dimension mismatch");
    std::vector<T> y(a.rows, T(0.0));
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) y[i] += a(i, j) * x[j];
    return y;
}

inline std::size_t shape_product(std::span<const std::size_t> shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_string(std::span<const std::size_t> shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

// N-dimensional row-major array; an empty shape is a scalar.
template <class T>
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<T> data;

    Tensor() : data(1) {}
    Tensor(std::vector<std::size_t> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != shape_product(shape))
            throw ShapeError("Tensor: " + std::to_string(data.size()) + " values for shape " + shape_string(shape));
    }
    static Tensor scalar(T v) { return Tensor({}, {v}); }
    static Tensor vector(std::vector<T> v) {
        const std::size_t n = v.size();
        return Tensor({n}, std::move(v));
    }
    static Tensor matrix(const Matrix<T>& m) { return Tensor({m.rows, m.cols}, m.data); }

    std::size_t ndim() const { return shape.size(); }
    std::size_t size() const { return data.size(); }

    // Sub-array at a leading multi-index (row-major flattened index over the
    // leading dims), as a view of the trailing block.
    std::span<const T> block(std::size_t leading_index, std::size_t block_size) const {
        return {data.data() + leading_index * block_size, block_size};
    }
};

// Applies `map` to every trailing block. `in_trailing` are the dims the map
// consumes, `out_trailing` the dims it produces; the leading dims are kept.
template <class T, class F>
Tensor<T> map_trailing(F&& map, const Tensor<T>& in, std::span<const std::size_t> in_trailing,
                       std::span<const std::size_t> out_trailing) {
    const std::size_t k = in_trailing.size();
    bool ok = in.ndim() >= k;
    for (std::size_t i = 0; ok && i < k; ++i) ok = in.shape[in.ndim() - k + i] == in_trailing[i];
    if (!ok)
        throw ShapeError("expected trailing dims " + shape_string(in_trailing) + ", got array of shape " +
                         shape_string(in.shape));
    std::vector<std::size_t> shape(in.shape.begin(), in.shape.end() - static_cast<std::ptrdiff_t>(k));
    const std::size_t lead = shape_product(shape);
    const std::size_t bin = shape_product(in_trailing), bout = shape_product(out_trailing);
    std::vector<T> out;
    out.reserve(lead * bout);
    for (std::size_t i = 0; i < lead; ++i) {
        const auto y = map(in.block(i, bin));
        if (y.size() != bout) throw ShapeError("map_trailing: map produced an unexpected number of values");
        out.insert(out.end(), y.begin(), y.end());
    }
    shape.insert(shape.end(), out_trailing.begin(), out_trailing.end());
    return Tensor<T>(std::move(shape), std::move(out));
}

}  // namespace reparam
