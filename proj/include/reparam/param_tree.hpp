#pragma once

// Composable parametrization specs: leaves for every map, tuples, named
// tuples and a shape lift, with packing to and from a flat real vector.

#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dual.hpp"
#include "matrix_maps.hpp"
#include "scalar_maps.hpp"
#include "tensor.hpp"
#include "vector_maps.hpp"

namespace reparam {

using Shape = std::vector<std::size_t>;

enum class Kind {
    Real,
    RealPositive,
    RealNegative,
    RealLowerBounded,
    RealUpperBounded,
    RealBounded01,
    RealBounded,
    VectorSimplex,
    VectorSphere,
    VectorHalfSphere,
    VectorBall,
    MatrixDiag,
    MatrixDiagPosDef,
    MatrixSym,
    MatrixSymPosDef,
    MatrixCorrelation,
    Tuple,
    NamedTuple,
    Custom,
};

// User extension point. forward is needed for each scalar type the spec is
// evaluated with; make_custom_leaf builds all three from one generic lambda.
class CustomLeaf {
public:
    virtual ~CustomLeaf() = default;
    virtual std::string name() const = 0;
    virtual std::size_t size() const = 0;
    virtual Shape value_shape() const = 0;
    virtual std::vector<double> forward(std::span<const double> x) const = 0;
    virtual std::vector<Dual> forward(std::span<const Dual> x) const = 0;
    virtual std::vector<HyperDual> forward(std::span<const HyperDual> x) const = 0;
    // Must throw DomainError when y is not in the image.
    virtual std::vector<double> inverse(std::span<const double> y) const = 0;
};

template <class F, class G>
std::shared_ptr<const CustomLeaf> make_custom_leaf(std::string name, std::size_t size, Shape value_shape, F fwd,
                                                   G inv) {
    struct Impl final : CustomLeaf {
        std::string nm;
        std::size_t k;
        Shape vs;
        F f;
        G g;
        Impl(std::string a, std::size_t b, Shape c, F d, G e)
            : nm(std::move(a)), k(b), vs(std::move(c)), f(std::move(d)), g(std::move(e)) {}
        std::string name() const override { return nm; }
        std::size_t size() const override { return k; }
        Shape value_shape() const override { return vs; }
        std::vector<double> forward(std::span<const double> x) const override { return f(x); }
        std::vector<Dual> forward(std::span<const Dual> x) const override { return f(x); }
        std::vector<HyperDual> forward(std::span<const HyperDual> x) const override { return f(x); }
        std::vector<double> inverse(std::span<const double> y) const override { return g(y); }
    };
    return std::make_shared<Impl>(std::move(name), size, std::move(value_shape), std::move(fwd), std::move(inv));
}

class ParamSpec;

struct SpecNode {
    Kind kind = Kind::Real;
    Shape shape;
    std::size_t dim = 0;
    double loc = 0, scale = 1, a = 0, b = 1, radius = 1;
    ScaleSpec mscale;
    std::vector<ParamSpec> children;
    std::vector<std::string> names;
    std::shared_ptr<const CustomLeaf> custom;
};

// Immutable, cheap to copy (shared node).
class ParamSpec {
public:
    static ParamSpec real(Shape shape = {}, double loc = 0, double scale = 1) {
        if (!std::isfinite(loc)) throw SpecError("real: loc must be finite");
        check_pos(scale, "real: scale");
        auto n = leaf(Kind::Real, std::move(shape));
        n.loc = loc;
        n.scale = scale;
        return ParamSpec(std::move(n));
    }
    static ParamSpec real_positive(Shape shape = {}, double scale = 1) {
        check_pos(scale, "realpos: scale");
        auto n = leaf(Kind::RealPositive, std::move(shape));
        n.scale = scale;
        return ParamSpec(std::move(n));
    }
    static ParamSpec real_negative(Shape shape = {}, double scale = 1) {
        check_pos(scale, "realneg: scale");
        auto n = leaf(Kind::RealNegative, std::move(shape));
        n.scale = scale;
        return ParamSpec(std::move(n));
    }
    static ParamSpec real_lower_bounded(double a, Shape shape = {}, double scale = 1) {
        return half_line(Kind::RealLowerBounded, a, std::move(shape), scale);
    }
    static ParamSpec real_upper_bounded(double a, Shape shape = {}, double scale = 1) {
        return half_line(Kind::RealUpperBounded, a, std::move(shape), scale);
    }
    static ParamSpec real_bounded01(Shape shape = {}) {
        auto n = leaf(Kind::RealBounded01, std::move(shape));
        n.a = 0;
        n.b = 1;
        return ParamSpec(std::move(n));
    }
    static ParamSpec real_bounded(double a, double b, Shape shape = {}) {
        if (!std::isfinite(a) || !std::isfinite(b) || !(a < b))
            throw SpecError("bounded: need finite bounds with a < b");
        auto n = leaf(Kind::RealBounded, std::move(shape));
        n.a = a;
        n.b = b;
        return ParamSpec(std::move(n));
    }
    static ParamSpec vector_simplex(std::size_t dim, Shape shape = {}) {
        return with_dim(Kind::VectorSimplex, dim, std::move(shape));
    }
    static ParamSpec vector_sphere(std::size_t dim, double radius = 1, Shape shape = {}) {
        return with_radius(Kind::VectorSphere, dim, radius, std::move(shape));
    }
    static ParamSpec vector_half_sphere(std::size_t dim, double radius = 1, Shape shape = {}) {
        return with_radius(Kind::VectorHalfSphere, dim, radius, std::move(shape));
    }
    static ParamSpec vector_ball(std::size_t dim, double radius = 1, Shape shape = {}) {
        if (dim < 2) throw SpecError("ball: dim must be >= 2");
        return with_radius(Kind::VectorBall, dim, radius, std::move(shape));
    }
    static ParamSpec matrix_diag(std::size_t dim, Shape shape = {}) {
        return with_dim(Kind::MatrixDiag, dim, std::move(shape));
    }
    static ParamSpec matrix_diag_pos_def(std::size_t dim, ScaleSpec scale = {}, Shape shape = {}) {
        return with_mscale(Kind::MatrixDiagPosDef, dim, std::move(scale), std::move(shape));
    }
    static ParamSpec matrix_sym(std::size_t dim, Shape shape = {}) {
        return with_dim(Kind::MatrixSym, dim, std::move(shape));
    }
    static ParamSpec matrix_sym_pos_def(std::size_t dim, ScaleSpec scale = {}, Shape shape = {}) {
        return with_mscale(Kind::MatrixSymPosDef, dim, std::move(scale), std::move(shape));
    }
    static ParamSpec matrix_correlation(std::size_t dim, Shape shape = {}) {
        return with_dim(Kind::MatrixCorrelation, dim, std::move(shape));
    }
    static ParamSpec tuple(std::vector<ParamSpec> children) {
        SpecNode n;
        n.kind = Kind::Tuple;
        n.children = std::move(children);
        return ParamSpec(std::move(n));
    }
    static ParamSpec named_tuple(std::vector<std::pair<std::string, ParamSpec>> fields) {
        SpecNode n;
        n.kind = Kind::NamedTuple;
        for (auto& [name, spec] : fields) {
            if (name.empty()) throw SpecError("named tuple: empty field name");
            for (const auto& prev : n.names)
                if (prev == name) throw SpecError("named tuple: duplicate field '" + name + "'");
            n.names.push_back(name);
            n.children.push_back(std::move(spec));
        }
        return ParamSpec(std::move(n));
    }
    static ParamSpec custom(std::shared_ptr<const CustomLeaf> leaf_impl, Shape shape = {}) {
        if (!leaf_impl) throw SpecError("custom: null implementation");
        auto n = leaf(Kind::Custom, std::move(shape));
        n.custom = std::move(leaf_impl);
        return ParamSpec(std::move(n));
    }

    const SpecNode& node() const { return *node_; }
    Kind kind() const { return node_->kind; }
    bool is_leaf() const { return kind() != Kind::Tuple && kind() != Kind::NamedTuple; }
    const Shape& shape() const { return node_->shape; }
    const std::vector<ParamSpec>& children() const { return node_->children; }
    const std::vector<std::string>& names() const { return node_->names; }

    // Reals consumed by one block of a leaf (before shape lifting).
    std::size_t block_size() const {
        const auto& n = *node_;
        switch (n.kind) {
            case Kind::VectorSimplex:
            case Kind::VectorSphere:
            case Kind::VectorHalfSphere:
            case Kind::VectorBall:
            case Kind::MatrixDiag:
            case Kind::MatrixDiagPosDef: return n.dim;
            case Kind::MatrixSym:
            case Kind::MatrixSymPosDef: return n.dim * (n.dim + 1) / 2;
            case Kind::MatrixCorrelation: return n.dim * (n.dim - 1) / 2;
            case Kind::Custom: return n.custom->size();
            case Kind::Tuple:
            case Kind::NamedTuple: return size();
            default: return 1;
        }
    }

    // Shape of one block's value.
    Shape block_value_shape() const {
        const auto& n = *node_;
        switch (n.kind) {
            case Kind::VectorSimplex:
            case Kind::VectorSphere:
            case Kind::VectorHalfSphere: return {n.dim + 1};
            case Kind::VectorBall: return {n.dim};
            case Kind::MatrixDiag:
            case Kind::MatrixDiagPosDef:
            case Kind::MatrixSym:
            case Kind::MatrixSymPosDef:
            case Kind::MatrixCorrelation: return {n.dim, n.dim};
            case Kind::Custom: return n.custom->value_shape();
            default: return {};
        }
    }

    Shape value_shape() const {
        Shape s = shape();
        const Shape b = block_value_shape();
        s.insert(s.end(), b.begin(), b.end());
        return s;
    }

    std::size_t size() const {
        if (!is_leaf()) {
            std::size_t s = 0;
            for (const auto& c : children()) s += c.size();
            return s;
        }
        return shape_product(shape()) * block_size();
    }

private:
    explicit ParamSpec(SpecNode n) : node_(std::make_shared<const SpecNode>(std::move(n))) {}

    std::shared_ptr<const SpecNode> node_;

    static void check_pos(double v, const char* what) {
        if (!(v > 0) || !std::isfinite(v)) throw SpecError(std::string(what) + " must be positive and finite");
    }
    static SpecNode leaf(Kind k, Shape shape) {
        for (std::size_t d : shape)
            if (d == 0) throw SpecError("shape entries must be >= 1");
        SpecNode n;
        n.kind = k;
        n.shape = std::move(shape);
        return n;
    }
    static ParamSpec half_line(Kind k, double a, Shape shape, double scale) {
        if (!std::isfinite(a)) throw SpecError("half-line bound must be finite");
        check_pos(scale, "half-line scale");
        auto n = leaf(k, std::move(shape));
        n.a = a;
        n.scale = scale;
        return ParamSpec(std::move(n));
    }
    static ParamSpec with_dim(Kind k, std::size_t dim, Shape shape) {
        if (dim < 1) throw SpecError("dim must be >= 1");
        auto n = leaf(k, std::move(shape));
        n.dim = dim;
        return ParamSpec(std::move(n));
    }
    static ParamSpec with_radius(Kind k, std::size_t dim, double radius, Shape shape) {
        check_pos(radius, "radius");
        auto p = with_dim(k, dim, std::move(shape));
        SpecNode n = p.node();
        n.radius = radius;
        return ParamSpec(std::move(n));
    }
    static ParamSpec with_mscale(Kind k, std::size_t dim, ScaleSpec scale, Shape shape) {
        try {
            scale.check(dim);
        } catch (const std::exception& e) {
            throw SpecError(e.what());
        }
        auto p = with_dim(k, dim, std::move(shape));
        SpecNode n = p.node();
        n.mscale = std::move(scale);
        return ParamSpec(std::move(n));
    }
};

// Realized values, mirroring the spec tree.
template <class T>
class ParamsValue {
public:
    enum class Type { leaf, tuple, named };

    ParamsValue() = default;

    static ParamsValue leaf(Tensor<T> t) {
        ParamsValue v;
        v.type_ = Type::leaf;
        v.leaf_ = std::move(t);
        return v;
    }
    static ParamsValue scalar(T x) { return leaf(Tensor<T>::scalar(x)); }
    static ParamsValue vector(std::vector<T> x) { return leaf(Tensor<T>::vector(std::move(x))); }
    static ParamsValue matrix(const Matrix<T>& m) { return leaf(Tensor<T>::matrix(m)); }
    static ParamsValue tuple(std::vector<ParamsValue> items) {
        ParamsValue v;
        v.type_ = Type::tuple;
        v.items_ = std::move(items);
        return v;
    }
    static ParamsValue named(std::vector<std::pair<std::string, ParamsValue>> fields) {
        ParamsValue v;
        v.type_ = Type::named;
        for (auto& [k, x] : fields) {
            v.names_.push_back(k);
            v.items_.push_back(std::move(x));
        }
        return v;
    }

    Type type() const { return type_; }
    bool is_leaf() const { return type_ == Type::leaf; }
    std::size_t count() const { return items_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    const Tensor<T>& tensor() const {
        if (!is_leaf()) throw ShapeError("ParamsValue: not a leaf");
        return leaf_;
    }
    T scalar() const {
        const auto& t = tensor();
        if (t.size() != 1) throw ShapeError("ParamsValue: leaf is not a scalar, shape " + shape_string(t.shape));
        return t.data[0];
    }
    std::vector<T> vector() const {
        const auto& t = tensor();
        if (t.ndim() != 1) throw ShapeError("ParamsValue: leaf is not a vector, shape " + shape_string(t.shape));
        return t.data;
    }
    Matrix<T> matrix() const {
        const auto& t = tensor();
        if (t.ndim() != 2) throw ShapeError("ParamsValue: leaf is not a matrix, shape " + shape_string(t.shape));
        return Matrix<T>(t.shape[0], t.shape[1], t.data);
    }
    const ParamsValue& operator[](std::size_t i) const {
        if (is_leaf() || i >= items_.size()) throw ShapeError("ParamsValue: index out of range");
        return items_[i];
    }
    const ParamsValue& operator[](std::string_view name) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return items_[i];
        throw ShapeError("ParamsValue: no field named '" + std::string(name) + "'");
    }

private:
    Type type_ = Type::leaf;
    Tensor<T> leaf_;
    std::vector<ParamsValue> items_;
    std::vector<std::string> names_;
};

namespace detail {

template <class T>
std::vector<T> leaf_forward(const SpecNode& n, std::span<const T> x) {
    switch (n.kind) {
        case Kind::Real: return {n.loc + n.scale * x[0]};
        case Kind::RealPositive: return {softplus(x[0], n.scale)};
        case Kind::RealNegative: return {reals_to_half_line(x[0], HalfLineBound(0, Side::upper), n.scale)};
        case Kind::RealLowerBounded: return {reals_to_half_line(x[0], HalfLineBound(n.a, Side::lower), n.scale)};
        case Kind::RealUpperBounded: return {reals_to_half_line(x[0], HalfLineBound(n.a, Side::upper), n.scale)};
        case Kind::RealBounded01:
        case Kind::RealBounded: return {reals_to_interval(x[0], IntervalBounds(n.a, n.b))};
        case Kind::VectorSimplex: return reals_to_simplex(x);
        case Kind::VectorSphere: return reals_to_sphere(x, n.radius);
        case Kind::VectorHalfSphere: return reals_to_half_sphere(x, n.radius);
        case Kind::VectorBall: return reals_to_ball(x, n.radius);
        case Kind::MatrixDiag: return reals_to_diag(x).data;
        case Kind::MatrixDiagPosDef: return reals_to_diag_pd(x, n.mscale).data;
        case Kind::MatrixSym: return reals_to_sym(x).data;
        case Kind::MatrixSymPosDef: return reals_to_spd(x, n.mscale).data;
        case Kind::MatrixCorrelation: return reals_to_corr(x).data;
        case Kind::Custom: return n.custom->forward(x);
        default: throw std::logic_error("leaf_forward: not a leaf");
    }
}

inline std::vector<double> leaf_inverse(const SpecNode& n, std::span<const double> y) {
    auto mat = [&] { return Matrix<double>(n.dim, n.dim, std::vector<double>(y.begin(), y.end())); };
    switch (n.kind) {
        case Kind::Real: return {(y[0] - n.loc) / n.scale};
        case Kind::RealPositive: return {softplusinv(y[0], n.scale)};
        case Kind::RealNegative: return {half_line_to_reals(y[0], HalfLineBound(0, Side::upper), n.scale)};
        case Kind::RealLowerBounded: return {half_line_to_reals(y[0], HalfLineBound(n.a, Side::lower), n.scale)};
        case Kind::RealUpperBounded: return {half_line_to_reals(y[0], HalfLineBound(n.a, Side::upper), n.scale)};
        case Kind::RealBounded01:
        case Kind::RealBounded: return {interval_to_reals(y[0], IntervalBounds(n.a, n.b))};
        case Kind::VectorSimplex: return simplex_to_reals(y);
        case Kind::VectorSphere: return sphere_to_reals(y, n.radius);
        case Kind::VectorHalfSphere: return half_sphere_to_reals(y, n.radius);
        case Kind::VectorBall: return ball_to_reals(y, n.radius);
        case Kind::MatrixDiag: return diag_to_reals(mat());
        case Kind::MatrixDiagPosDef: return diag_pd_to_reals(mat(), n.mscale);
        case Kind::MatrixSym: return sym_to_reals(mat());
        case Kind::MatrixSymPosDef: return spd_to_reals(mat(), n.mscale);
        case Kind::MatrixCorrelation: return corr_to_reals(mat());
        case Kind::Custom: return n.custom->inverse(y);
        default: throw std::logic_error("leaf_inverse: not a leaf");
    }
}

template <class T>
ParamsValue<T> unpack(const ParamSpec& spec, std::span<const T> theta, std::size_t& pos) {
    if (spec.is_leaf()) {
        const std::size_t blocks = shape_product(spec.shape()), k = spec.block_size();
        std::vector<T> out;
        for (std::size_t b = 0; b < blocks; ++b) {
            const auto y = leaf_forward(spec.node(), theta.subspan(pos, k));
            out.insert(out.end(), y.begin(), y.end());
            pos += k;
        }
        return ParamsValue<T>::leaf(Tensor<T>(spec.value_shape(), std::move(out)));
    }
    std::vector<ParamsValue<T>> items;
    for (const auto& c : spec.children()) items.push_back(unpack(c, theta, pos));
    if (spec.kind() == Kind::Tuple) return ParamsValue<T>::tuple(std::move(items));
    std::vector<std::pair<std::string, ParamsValue<T>>> fields;
    for (std::size_t i = 0; i < items.size(); ++i) fields.emplace_back(spec.names()[i], std::move(items[i]));
    return ParamsValue<T>::named(std::move(fields));
}

inline std::string child_path(const std::string& path, const ParamSpec& spec, std::size_t i) {
    if (spec.kind() == Kind::NamedTuple) return path.empty() ? spec.names()[i] : path + "." + spec.names()[i];
    return path + "[" + std::to_string(i) + "]";
}

inline void pack(const ParamSpec& spec, const ParamsValue<double>& v, const std::string& path,
                 std::vector<double>& out) {
    const std::string where = path.empty() ? "<root>" : path;
    if (spec.is_leaf()) {
        if (!v.is_leaf()) throw ShapeError("at " + where + ": expected a leaf value");
        const auto& t = v.tensor();
        if (t.shape != spec.value_shape())
            throw ShapeError("at " + where + ": expected shape " + shape_string(spec.value_shape()) + ", got " +
                             shape_string(t.shape));
        const std::size_t blocks = shape_product(spec.shape());
        const std::size_t bs = shape_product(spec.block_value_shape());
        for (std::size_t b = 0; b < blocks; ++b) {
            try {
                const auto x = leaf_inverse(spec.node(), t.block(b, bs));
                out.insert(out.end(), x.begin(), x.end());
            } catch (const ShapeError& e) {
                throw ShapeError("at " + where + ": " + e.what());
            } catch (const DomainError& e) {
                throw DomainError("at " + where + ": " + e.what());
            }
        }
        return;
    }
    const bool named = spec.kind() == Kind::NamedTuple;
    const auto want = named ? ParamsValue<double>::Type::named : ParamsValue<double>::Type::tuple;
    if (v.type() != want || v.count() != spec.children().size())
        throw ShapeError("at " + where + ": expected a " + std::string(named ? "named tuple" : "tuple") + " of " +
                         std::to_string(spec.children().size()) + " items");
    for (std::size_t i = 0; i < spec.children().size(); ++i) {
        if (named && v.names()[i] != spec.names()[i])
            throw ShapeError("at " + where + ": expected field '" + spec.names()[i] + "', got '" + v.names()[i] +
                             "'");
        pack(spec.children()[i], v[i], child_path(path, spec, i), out);
    }
}

}  // namespace detail

inline std::size_t size(const ParamSpec& spec) { return spec.size(); }

template <class T>
ParamsValue<T> reals1d_to_params(const ParamSpec& spec, std::span<const T> theta) {
    if (theta.size() != spec.size())
        throw ShapeError("reals1d_to_params: expected " + std::to_string(spec.size()) + " reals, got " +
                         std::to_string(theta.size()));
    for (const T& t : theta)
        if (!std::isfinite(value(t))) throw DomainError("reals1d_to_params: non-finite input");
    std::size_t pos = 0;
    return detail::unpack(spec, theta, pos);
}

template <class T>
ParamsValue<T> reals1d_to_params(const ParamSpec& spec, const std::vector<T>& theta) {
    return reals1d_to_params(spec, std::span<const T>(theta));
}

// Size-1 specs also accept a bare scalar.
inline ParamsValue<double> reals1d_to_params(const ParamSpec& spec, double theta) {
    const double one[] = {theta};
    return reals1d_to_params(spec, std::span<const double>(one));
}

inline std::vector<double> params_to_reals1d(const ParamSpec& spec, const ParamsValue<double>& value) {
    std::vector<double> out;
    out.reserve(spec.size());
    detail::pack(spec, value, "", out);
    return out;
}

}  // namespace reparam
