#pragma once

// Text form of ParamSpec: parse_spec and the canonical renderer.
//
//   spec := leaf | tuple(spec, ...) | named(name=spec, ...)
//   leaf := kind(args)   args: optional positional dim, then key=value
//
// Kind and keyword names are case-insensitive; field names keep their case.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "param_tree.hpp"

namespace reparam {

namespace detail {

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Shortest form that parses back to the same double.
inline std::string fmt_num(double x) {
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

struct KindInfo {
    const char* name;
    Kind kind;
    bool has_dim;
    std::vector<std::string> keys;  // accepted keywords besides dim
};

inline const std::vector<KindInfo>& kind_table() {
    static const std::vector<KindInfo> t = {
        {"real", Kind::Real, false, {"shape", "loc", "scale"}},
        {"realpos", Kind::RealPositive, false, {"shape", "scale"}},
        {"realneg", Kind::RealNegative, false, {"shape", "scale"}},
        {"reallower", Kind::RealLowerBounded, false, {"a", "shape", "scale"}},
        {"realupper", Kind::RealUpperBounded, false, {"a", "shape", "scale"}},
        {"bounded01", Kind::RealBounded01, false, {"shape"}},
        {"bounded", Kind::RealBounded, false, {"a", "b", "shape"}},
        {"simplex", Kind::VectorSimplex, true, {"shape"}},
        {"sphere", Kind::VectorSphere, true, {"radius", "shape"}},
        {"halfsphere", Kind::VectorHalfSphere, true, {"radius", "shape"}},
        {"ball", Kind::VectorBall, true, {"radius", "shape"}},
        {"diag", Kind::MatrixDiag, true, {"shape"}},
        {"diagpd", Kind::MatrixDiagPosDef, true, {"scale", "shape"}},
        {"sym", Kind::MatrixSym, true, {"shape"}},
        {"spd", Kind::MatrixSymPosDef, true, {"scale", "shape"}},
        {"corr", Kind::MatrixCorrelation, true, {"shape"}},
    };
    return t;
}

inline const KindInfo& kind_info(Kind k) {
    for (const auto& ki : kind_table())
        if (ki.kind == k) return ki;
    throw SpecError("kind has no text form");
}

class SpecParser {
public:
    explicit SpecParser(std::string_view text) : s_(text) {}

    ParamSpec parse() {
        ParamSpec spec = parse_spec();
        skip_ws();
        if (i_ != s_.size()) fail("expected end of input");
        return spec;
    }

private:
    // Argument value: a number or a parenthesized list of numbers.
    struct Arg {
        std::size_t pos;
        bool is_list;
        std::vector<double> nums;
    };

    std::string_view s_;
    std::size_t i_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        std::string got = i_ < s_.size() ? "'" + std::string(1, s_[i_]) + "'" : "end of input";
        throw ParseError(what + ", got " + got, i_);
    }
    [[noreturn]] static void semantic(std::size_t pos, const std::string& what) {
        throw SpecError("invalid spec at position " + std::to_string(pos) + ": " + what);
    }

    void skip_ws() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool peek(char c) {
        skip_ws();
        return i_ < s_.size() && s_[i_] == c;
    }
    void expect(char c) {
        if (!peek(c)) fail(std::string("expected '") + c + "'");
        ++i_;
    }
    std::string ident() {
        skip_ws();
        const std::size_t b = i_;
        if (i_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) {
            ++i_;
            while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
        }
        if (b == i_) fail("expected a name");
        return std::string(s_.substr(b, i_ - b));
    }
    double number() {
        skip_ws();
        const std::string rest(s_.substr(i_));
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(rest.c_str(), &end);
        // strtod also accepts inf/nan/hex; only plain decimals belong here
        if (end == rest.c_str() || !(std::isdigit(static_cast<unsigned char>(rest[0])) || rest[0] == '-' ||
                                     rest[0] == '+' || rest[0] == '.'))
            fail("expected a number");
        const std::size_t len = static_cast<std::size_t>(end - rest.c_str());
        for (std::size_t k = 0; k < len; ++k) {
            const char c = rest[k];
            if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.' || c == 'e' ||
                  c == 'E'))
                fail("expected a number");
        }
        if (errno == ERANGE && std::abs(v) > 1) fail("number out of range");
        i_ += len;
        return v;
    }
    Arg arg_value() {
        skip_ws();
        Arg a{i_, false, {}};
        if (peek('(')) {
            ++i_;
            a.is_list = true;
            if (!peek(')')) {
                a.nums.push_back(number());
                while (peek(',')) {
                    ++i_;
                    if (peek(')')) break;  // trailing comma, as in (3,)
                    a.nums.push_back(number());
                }
            }
            expect(')');
        } else {
            a.nums.push_back(number());
        }
        return a;
    }

    static std::size_t as_count(const Arg& a, double v, const char* what) {
        if (!(v >= 1) || v != std::floor(v) || v > 1e9)
            semantic(a.pos, std::string(what) + " must be a positive integer");
        return static_cast<std::size_t>(v);
    }
    static double as_scalar(const Arg& a, const char* what) {
        if (a.is_list) semantic(a.pos, std::string(what) + " must be a number");
        return a.nums[0];
    }

    ParamSpec parse_spec() {
        skip_ws();
        const std::size_t at = i_;
        const std::string kw = lower(ident());
        expect('(');
        if (kw == "tuple") {
            std::vector<ParamSpec> kids{parse_spec()};
            while (peek(',')) {
                ++i_;
                kids.push_back(parse_spec());
            }
            expect(')');
            return ParamSpec::tuple(std::move(kids));
        }
        if (kw == "named") {
            std::vector<std::pair<std::string, ParamSpec>> fields;
            do {
                if (!fields.empty()) ++i_;
                skip_ws();
                const std::size_t npos = i_;
                std::string name = ident();
                for (const auto& f : fields)
                    if (f.first == name) semantic(npos, "duplicate field '" + name + "'");
                expect('=');
                fields.emplace_back(std::move(name), parse_spec());
            } while (peek(','));
            expect(')');
            return ParamSpec::named_tuple(std::move(fields));
        }
        const KindInfo* info = nullptr;
        for (const auto& ki : kind_table())
            if (kw == ki.name) info = &ki;
        if (!info) {
            i_ = at;
            fail("expected a spec kind (real, realpos, ..., tuple, named)");
        }
        return parse_leaf(*info, at);
    }

    ParamSpec parse_leaf(const KindInfo& info, std::size_t at) {
        std::optional<Arg> dim;
        std::map<std::string, Arg> kw;
        bool first = true;
        while (!peek(')')) {
            if (!first) {
                if (!peek(',')) fail("expected ',' or ')'");
                ++i_;
            }
            first = false;
            skip_ws();
            const std::size_t pos = i_;
            if (i_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[i_]))) {
                const std::string key = lower(ident());
                expect('=');
                Arg v = arg_value();
                const bool known = key == "dim" ? info.has_dim
                                                : std::find(info.keys.begin(), info.keys.end(), key) != info.keys.end();
                if (!known) semantic(pos, std::string(info.name) + " does not take '" + key + "'");
                if ((key == "dim" && dim) || kw.count(key)) semantic(pos, "argument '" + key + "' given twice");
                if (key == "dim")
                    dim = v;
                else
                    kw.emplace(key, v);
            } else {
                Arg v = arg_value();
                if (!info.has_dim || dim || !kw.empty())
                    semantic(pos, std::string("unexpected positional argument to ") + info.name);
                dim = v;
            }
        }
        expect(')');

        Shape shape;
        if (auto it = kw.find("shape"); it != kw.end())
            for (double d : it->second.nums) shape.push_back(as_count(it->second, d, "shape entry"));
        auto num = [&](const char* key, double dflt) {
            auto it = kw.find(key);
            return it == kw.end() ? dflt : as_scalar(it->second, key);
        };
        auto required = [&](const char* key) {
            if (!kw.count(key)) semantic(at, std::string(info.name) + " needs '" + key + "='");
            return num(key, 0);
        };
        std::size_t n = 0;
        if (info.has_dim) {
            if (!dim) semantic(at, std::string(info.name) + " needs a dim");
            if (dim->is_list) semantic(dim->pos, "dim must be a number");
            n = as_count(*dim, dim->nums[0], "dim");
        }
        ScaleSpec mscale;
        if (auto it = kw.find("scale"); it != kw.end() && info.has_dim)
            mscale = it->second.is_list ? ScaleSpec(it->second.nums) : ScaleSpec(it->second.nums[0]);

        try {
            switch (info.kind) {
                case Kind::Real: return ParamSpec::real(shape, num("loc", 0), num("scale", 1));
                case Kind::RealPositive: return ParamSpec::real_positive(shape, num("scale", 1));
                case Kind::RealNegative: return ParamSpec::real_negative(shape, num("scale", 1));
                case Kind::RealLowerBounded:
                    return ParamSpec::real_lower_bounded(required("a"), shape, num("scale", 1));
                case Kind::RealUpperBounded:
                    return ParamSpec::real_upper_bounded(required("a"), shape, num("scale", 1));
                case Kind::RealBounded01: return ParamSpec::real_bounded01(shape);
                case Kind::RealBounded: return ParamSpec::real_bounded(required("a"), required("b"), shape);
                case Kind::VectorSimplex: return ParamSpec::vector_simplex(n, shape);
                case Kind::VectorSphere: return ParamSpec::vector_sphere(n, num("radius", 1), shape);
                case Kind::VectorHalfSphere: return ParamSpec::vector_half_sphere(n, num("radius", 1), shape);
                case Kind::VectorBall: return ParamSpec::vector_ball(n, num("radius", 1), shape);
                case Kind::MatrixDiag: return ParamSpec::matrix_diag(n, shape);
                case Kind::MatrixDiagPosDef: return ParamSpec::matrix_diag_pos_def(n, mscale, shape);
                case Kind::MatrixSym: return ParamSpec::matrix_sym(n, shape);
                case Kind::MatrixSymPosDef: return ParamSpec::matrix_sym_pos_def(n, mscale, shape);
                case Kind::MatrixCorrelation: return ParamSpec::matrix_correlation(n, shape);
                default: break;
            }
        } catch (const SpecError& e) {
            semantic(at, e.what());
        }
        semantic(at, "unsupported kind");
    }
};

inline std::string render_shape(const Shape& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
    return out + ")";
}

}  // namespace detail

inline ParamSpec parse_spec(std::string_view text) { return detail::SpecParser(text).parse(); }

// Canonical text: lowercase kinds, every keyword explicit, round-trip numbers.
// Custom leaves have no text form and render as custom:<name>.
inline std::string render(const ParamSpec& spec) {
    using detail::fmt_num;
    const auto& n = spec.node();
    if (spec.kind() == Kind::Tuple || spec.kind() == Kind::NamedTuple) {
        std::string out = spec.kind() == Kind::Tuple ? "tuple(" : "named(";
        for (std::size_t i = 0; i < n.children.size(); ++i) {
            if (i) out += ", ";
            if (spec.kind() == Kind::NamedTuple) out += n.names[i] + "=";
            out += render(n.children[i]);
        }
        return out + ")";
    }
    if (spec.kind() == Kind::Custom) return "custom:" + n.custom->name();
    const auto& info = detail::kind_info(spec.kind());
    std::vector<std::string> args;
    if (info.has_dim) args.push_back(std::to_string(n.dim));
    for (const auto& key : info.keys) {
        if (key == "shape")
            args.push_back("shape=" + detail::render_shape(n.shape));
        else if (key == "loc")
            args.push_back("loc=" + fmt_num(n.loc));
        else if (key == "a")
            args.push_back("a=" + fmt_num(n.a));
        else if (key == "b")
            args.push_back("b=" + fmt_num(n.b));
        else if (key == "radius")
            args.push_back("radius=" + fmt_num(n.radius));
        else if (key == "scale" && !info.has_dim)
            args.push_back("scale=" + fmt_num(n.scale));
        else if (key == "scale") {
            if (n.mscale.is_scalar) {
                args.push_back("scale=" + fmt_num(n.mscale.values[0]));
            } else {
                std::string l = "scale=(";
                for (std::size_t i = 0; i < n.mscale.values.size(); ++i)
                    l += (i ? "," : "") + fmt_num(n.mscale.values[i]);
                args.push_back(l + ")");
            }
        }
    }
    std::string out = std::string(info.name) + "(";
    for (std::size_t i = 0; i < args.size(); ++i) out += (i ? ", " : "") + args[i];
    return out + ")";
}

}  // namespace reparam
