#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "reparam/autodiff.hpp"
#include "reparam/param_tree.hpp"
#include "reparam/spec_grammar.hpp"
#include "reparam/stat_oracles.hpp"

namespace rp = reparam;
using rp::Dual;
using rp::HyperDual;
using rp::RealMat;
using Vec = std::vector<double>;

namespace {

// A primitive written once as a generic lambda, so one definition is
// evaluated with double, Dual and HyperDual.
struct Primitive {
    std::string name;
    std::function<double(double)> f;
    std::function<Dual(Dual)> fd;
    std::function<HyperDual(HyperDual)> fh;
    double lo, hi;
};

#define PRIM(NAME, EXPR, LO, HI)                                                                 \
    Primitive {                                                                                  \
        NAME, [](double x) { using namespace std; return EXPR; },                                \
            [](Dual x) { using namespace std; using namespace reparam; return EXPR; },           \
            [](HyperDual x) { using namespace std; using namespace reparam; return EXPR; }, LO, HI \
    }

std::vector<Primitive> primitives() {
    return {
        PRIM("exp", exp(x), -5, 5),
        PRIM("expm1", expm1(x), -3, 3),
        PRIM("log", log(x), 0.05, 20),
        PRIM("log1p", log1p(x), -0.9, 10),
        PRIM("sqrt", sqrt(x), 0.01, 50),
        PRIM("cbrt", cbrt(x), 0.01, 50),
        PRIM("pow", pow(x, 2.7), 0.1, 5),
        PRIM("sin", sin(x), -6, 6),
        PRIM("cos", cos(x), -6, 6),
        PRIM("tanh", tanh(x), -4, 4),
        PRIM("atanh", atanh(x), -0.95, 0.95),
        PRIM("atan2_y", atan2(x, 0.7), -3, 3),
        PRIM("atan2_x", atan2(-1.3, x), -3, 3),
        PRIM("abs", abs(x), 0.1, 3),
        PRIM("abs_neg", abs(x), -3, -0.1),
        PRIM("erf", rp::erf(x), -3, 3),
        PRIM("erfc", rp::erfc(x), -3, 5),
        PRIM("erfinv", rp::erfinv(x), -0.99, 0.99),
        PRIM("ndtri", rp::ndtri(x), 0.01, 0.99),
        PRIM("ndtr", rp::ndtr(x), -5, 5),
        PRIM("log_ndtr", rp::log_ndtr(x), -30, 5),
        PRIM("log1pexp", rp::log1pexp(x), -20, 20),
        PRIM("logexpm1", rp::logexpm1(x), 0.05, 20),
        PRIM("expit", rp::expit(x), -10, 10),
        PRIM("logit", rp::logit(x), 0.02, 0.98),
        PRIM("logistic_to_gaussian", rp::logistic_to_gaussian(x), -20, 20),
        PRIM("gaussian_to_logistic", rp::gaussian_to_logistic(x), -6, 6),
        PRIM("quotient", (x * x + 1) / (x - 4), -3, 3),
        PRIM("softplus", rp::softplus(x, 0.7), -10, 10),
        PRIM("softplusinv", rp::softplusinv(x, 2.0), 0.1, 10),
        PRIM("interval", rp::reals_to_interval(x, rp::IntervalBounds(-1, 3)), -8, 8),
    };
}

// Five-point stencil, error O(h^4).
double deriv5(const std::function<double(double)>& f, double x, double h) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

}  // namespace

TEST(Dual, Arithmetic) {
    const Dual a{3, 2}, b{-2, 5};
    const Dual s = a + b, p = a * b, q = a / b;
    EXPECT_EQ(s.v, 1);
    EXPECT_EQ(s.d, 7);
    EXPECT_EQ(p.v, -6);
    EXPECT_EQ(p.d, 2 * -2 + 3 * 5);
    EXPECT_EQ(q.v, -1.5);
    EXPECT_DOUBLE_EQ(q.d, (2 * -2 - 3 * 5) / 4.0);
    EXPECT_EQ((-a).d, -2);
    EXPECT_EQ((a - 1.0).v, 2);
    EXPECT_EQ((2.0 * a).d, 4);
    EXPECT_TRUE(b < a);
    EXPECT_EQ(rp::value(a), 3);
}

TEST(HyperDual, Arithmetic) {
    const HyperDual x{2, 1, 0, 0}, y{3, 0, 1, 0};
    const HyperDual p = x * x * y;  // d/dx = 2xy, d/dy = x^2, d2/dxdy = 2x
    EXPECT_EQ(p.v, 12);
    EXPECT_EQ(p.d1, 12);
    EXPECT_EQ(p.d2, 4);
    EXPECT_EQ(p.d12, 4);
    const HyperDual q = x / y;  // d/dx = 1/y, d/dy = -x/y^2, mixed = -1/y^2
    EXPECT_DOUBLE_EQ(q.d1, 1.0 / 3);
    EXPECT_DOUBLE_EQ(q.d2, -2.0 / 9);
    EXPECT_DOUBLE_EQ(q.d12, -1.0 / 9);
    const HyperDual z{0.7, 1, 1, 0};
    const HyperDual r = 1.0 / z;
    EXPECT_DOUBLE_EQ(r.d12, 2 / (0.7 * 0.7 * 0.7));
}

TEST(Primitives, ClosedFormRules) {
    for (double x : {-2.0, -0.3, 0.0, 1.1, 2.5}) {
        const Dual e = rp::erf(Dual{x, 1});
        EXPECT_DOUBLE_EQ(e.d, 2 / std::sqrt(M_PI) * std::exp(-x * x)) << x;
    }
    for (double t : {-0.9, -0.2, 0.0, 0.5, 0.999}) {
        const Dual e = rp::erfinv(Dual{t, 1});
        EXPECT_NEAR(e.d, std::sqrt(M_PI) / 2 * std::exp(e.v * e.v), 1e-14 * e.d) << t;
    }
    const Dual ay = rp::atan2(Dual{1.5, 1}, Dual{-0.5, 0});
    const Dual ax = rp::atan2(Dual{1.5, 0}, Dual{-0.5, 1});
    EXPECT_DOUBLE_EQ(ay.d, -0.5 / 2.5);
    EXPECT_DOUBLE_EQ(ax.d, -1.5 / 2.5);
    EXPECT_EQ(rp::abs(Dual{-2, 1}).d, -1);
    EXPECT_EQ(rp::abs(Dual{2, 1}).d, 1);
    EXPECT_EQ(rp::abs(Dual{0, 1}).d, 0);
    EXPECT_EQ(rp::fmax(Dual{0, 1}, Dual{0, 0}).d, 1);
    EXPECT_EQ(rp::fmin(Dual{0, 1}, Dual{0, 0}).d, 0);
}

TEST(Primitives, DualMatchesFiniteDifferences) {
    rp::Rng rng(21);
    for (const auto& p : primitives()) {
        for (int t = 0; t < 25; ++t) {
            const double x = p.lo + (p.hi - p.lo) * rng.uniform();
            const Dual d = p.fd(Dual{x, 1});
            EXPECT_EQ(d.v, p.f(x)) << p.name;
            const double h = 1e-3 * std::max(1.0, std::abs(x)) * std::min(1.0, (p.hi - p.lo) / 10);
            EXPECT_LE(rel_err(d.d, deriv5(p.f, x, h)), 1e-7) << p.name << " at " << x;
        }
    }
}

// d12 against the differentiated first-derivative part, and a second-order
// Taylor expansion whose remainder must shrink like h^3.
TEST(Primitives, HyperDualTaylorConsistency) {
    rp::Rng rng(22);
    for (const auto& p : primitives()) {
        auto first = [&](double x) { return p.fd(Dual{x, 1}).d; };
        for (int t = 0; t < 25; ++t) {
            const double x = p.lo + (p.hi - p.lo) * rng.uniform();
            const HyperDual y = p.fh(HyperDual{x, 1, 1, 0});
            EXPECT_EQ(y.v, p.f(x)) << p.name;
            EXPECT_EQ(y.d1, first(x)) << p.name;
            EXPECT_EQ(y.d2, y.d1) << p.name;
            const double h = 1e-3 * std::max(1.0, std::abs(x)) * std::min(1.0, (p.hi - p.lo) / 10);
            EXPECT_LE(rel_err(y.d12, deriv5(first, x, h)), 1e-6) << p.name << " at " << x;

            const double h1 = 1e-2 * std::min(1.0, (p.hi - p.lo) / 10), h2 = h1 / 4;
            auto rem = [&](double s) { return std::abs(p.f(x + s) - (y.v + s * y.d1 + 0.5 * s * s * y.d12)); };
            const double r1 = rem(h1), r2 = rem(h2);
            const double floor = 64 * 2.2e-16 * (std::abs(y.v) + h1 * std::abs(y.d1));
            if (r1 > 1e3 * floor) {
                EXPECT_LE(r2, r1 / 30) << p.name << " at " << x;  // ideal ratio 64
            }
        }
    }
}

TEST(Primitives, MixedDirections) {
    // two different seeds on the same input: d12 picks up f'' * d1 * d2
    const HyperDual y = rp::log1pexp(HyperDual{0.3, 2, -3, 0});
    const double s = rp::expit(0.3);
    EXPECT_DOUBLE_EQ(y.d1, 2 * s);
    EXPECT_DOUBLE_EQ(y.d2, -3 * s);
    EXPECT_DOUBLE_EQ(y.d12, -6 * s * (1 - s));
}

TEST(Gradient, Examples) {
    auto sumsq = [](const auto& t) {
        auto s = t[0] * t[0];
        for (std::size_t i = 1; i < t.size(); ++i) s += t[i] * t[i];
        return s;
    };
    EXPECT_EQ(rp::gradient(sumsq, Vec{1, 2}), (Vec{2, 4}));
    const Vec sp = rp::gradient([](const std::vector<Dual>& t) { return rp::softplus(t[0], 1.0); }, Vec{0});
    EXPECT_DOUBLE_EQ(sp[0], 0.5);

    rp::Rng rng(23);
    for (int t = 0; t < 50; ++t) {
        const Vec th{6 * rng.uniform() - 3};
        const Vec g = rp::gradient([](const std::vector<Dual>& x) { return rp::reals_to_simplex<Dual>(x)[0]; }, th);
        const Vec f = rp::fd_gradient([](const Vec& x) { return rp::reals_to_simplex<double>(x)[0]; }, th);
        EXPECT_NEAR(g[0], f[0], 1e-6) << th[0];
    }
}

TEST(Hessian, Examples) {
    const RealMat h = rp::hessian([](const std::vector<HyperDual>& t) { return t[0] * t[0] * t[1]; }, Vec{1, 1});
    EXPECT_EQ(h(0, 0), 2);
    EXPECT_EQ(h(0, 1), 2);
    EXPECT_EQ(h(1, 0), 2);
    EXPECT_EQ(h(1, 1), 0);
    const RealMat g = rp::hessian([](const std::vector<HyperDual>& t) { return rp::log1pexp(t[0]); }, Vec{0});
    EXPECT_DOUBLE_EQ(g(0, 0), 0.25);

    const auto vgh = rp::value_grad_hessian(
        [](const std::vector<HyperDual>& t) { return rp::sin(t[0]) * rp::exp(t[1]) + t[2] * t[0]; }, Vec{0.4, -1, 2});
    EXPECT_DOUBLE_EQ(vgh.value, std::sin(0.4) * std::exp(-1) + 0.8);
    EXPECT_DOUBLE_EQ(vgh.grad[0], std::cos(0.4) * std::exp(-1) + 2);
    EXPECT_DOUBLE_EQ(vgh.grad[2], 0.4);
    EXPECT_DOUBLE_EQ(vgh.hess(0, 1), std::cos(0.4) * std::exp(-1));
    EXPECT_EQ(vgh.hess(0, 2), 1);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(vgh.hess(i, j), vgh.hess(j, i));
}

TEST(Hessian, MatchesNestedFiniteDifferences) {
    auto f = [](const auto& t) {
        using std::exp;
        using std::log;
        return log(1.0 + t[0] * t[0]) * exp(0.3 * t[1]) + t[1] * t[2] * t[2] - rp::log1pexp(t[0] - t[2]);
    };
    rp::Rng rng(24);
    for (int k = 0; k < 20; ++k) {
        Vec th(3);
        for (double& v : th) v = 4 * rng.uniform() - 2;
        const RealMat h = rp::hessian([&](const std::vector<HyperDual>& t) { return f(t); }, th);
        const RealMat n = rp::fd_hessian([&](const Vec& t) { return f(t); }, th);
        double scale = 0;
        for (double v : h.data) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i < h.data.size(); ++i) EXPECT_LE(std::abs(h.data[i] - n.data[i]), 1e-3 * scale);
    }
}

TEST(FdGradient, Examples) {
    const Vec lin = rp::fd_gradient([](const Vec& t) { return 3 * t[0] - 2 * t[1] + 0.5 * t[2]; }, Vec{0.5, -0.25, 0.125});
    EXPECT_NEAR(lin[0], 3, 1e-9);
    EXPECT_NEAR(lin[1], -2, 1e-9);
    EXPECT_NEAR(lin[2], 0.5, 1e-9);
    const Vec quad = rp::fd_gradient([](const Vec& t) { return t[0] * t[0] + 3 * t[0] * t[1]; }, Vec{0.7, -1.2});
    EXPECT_NEAR(quad[0], 2 * 0.7 + 3 * -1.2, 1e-8);
    EXPECT_NEAR(quad[1], 3 * 0.7, 1e-8);
    EXPECT_EQ(rp::fd_step(0.5), 1e-6);
    EXPECT_EQ(rp::fd_step(-300), 3e-4);
}

TEST(FdGradient, AgreesWithGradientOnRandomSmoothFunctions) {
    rp::Rng rng(25);
    for (int t = 0; t < 50; ++t) {
        const std::size_t k = 1 + t % 5;
        Vec a(k), b(k), w(k), th(k);
        for (std::size_t i = 0; i < k; ++i) {
            a[i] = 4 * rng.uniform() - 2;
            b[i] = 0.2 + 2 * rng.uniform();
            w[i] = rng.uniform() - 0.5;
            th[i] = 4 * rng.uniform() - 2;
        }
        auto f = [&](const auto& x) {
            using std::exp;
            using std::sin;
            auto dot = w[0] * x[0];
            auto s = a[0] * sin(b[0] * x[0]);
            for (std::size_t i = 1; i < k; ++i) {
                dot += w[i] * x[i];
                s += a[i] * sin(b[i] * x[i]);
            }
            return s + exp(dot) + rp::log1pexp(x[0] * x[k - 1]);
        };
        const Vec g = rp::gradient([&](const std::vector<Dual>& x) { return f(x); }, th);
        const Vec n = rp::fd_gradient([&](const Vec& x) { return f(x); }, th);
        double scale = 1;
        for (double v : g) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i < k; ++i) EXPECT_LE(std::abs(g[i] - n[i]), 1e-6 * scale) << t;
    }
}

TEST(ChainRule, CompositionMatchesJacobianTransposeGradient) {
    auto f = [](const auto& x) {
        using T = std::decay_t<decltype(x[0])>;
        return std::vector<T>{x[0] * x[1] + 2.0, x[1] * x[1] * x[2] - x[0], 3.0 * x[2] + x[0] * x[0] * x[0]};
    };
    auto g = [](const auto& y) { return y[0] * y[0] * y[1] - 4.0 * y[2] + y[1] * y[2]; };
    rp::Rng rng(26);
    for (int t = 0; t < 50; ++t) {
        Vec th(3);
        for (double& v : th) v = 4 * rng.uniform() - 2;
        const Vec direct = rp::gradient([&](const std::vector<Dual>& x) { return g(f(x)); }, th);
        const RealMat jf = rp::jacobian([&](const std::vector<Dual>& x) { return f(x); }, th);
        const Vec gy = rp::gradient([&](const std::vector<Dual>& y) { return g(y); }, f(th));
        for (std::size_t i = 0; i < 3; ++i) {
            double s = 0;
            for (std::size_t r = 0; r < 3; ++r) s += jf(r, i) * gy[r];
            EXPECT_LE(std::abs(direct[i] - s), 1e-10 * std::max(1.0, std::abs(s)));
        }
    }
}

TEST(Jacobian, EveryLeafKindMatchesFiniteDifferences) {
    const std::vector<std::string> kinds{"real(loc=1, scale=2)", "realpos(scale=0.5)", "realneg()", "reallower(a=-2)",
                                         "realupper(a=3, scale=2)", "bounded01()", "bounded(a=-1, b=4)"};
    const std::vector<std::string> dimmed{"simplex", "sphere", "halfsphere", "ball", "diag", "diagpd",
                                          "sym",     "spd",    "corr"};
    std::vector<rp::ParamSpec> specs;
    for (std::size_t d : {1u, 2u, 3u, 5u}) {
        for (const auto& k : kinds) specs.push_back(rp::parse_spec(k));
        for (const auto& k : dimmed) {
            if (k == "ball" && d < 2) continue;
            specs.push_back(rp::parse_spec(k + "(" + std::to_string(d) + ")"));
        }
    }
    rp::Rng rng(27);
    int checked = 0;
    for (const auto& spec : specs) {
        const std::size_t k = spec.size();
        if (k == 0) continue;
        auto fwd_d = [&](const std::vector<Dual>& x) { return rp::reals1d_to_params(spec, x).tensor().data; };
        auto fwd = [&](const Vec& x) { return rp::reals1d_to_params(spec, x).tensor().data; };
        for (int t = 0; t < 20; ++t) {
            Vec th(k);
            for (double& v : th) v = 6 * rng.uniform() - 3;
            const RealMat j = rp::jacobian(fwd_d, th);
            const RealMat n = rp::fd_jacobian(fwd, th);
            ASSERT_EQ(j.rows, n.rows);
            for (std::size_t r = 0; r < j.rows; ++r) {
                double gmax = 0, diff = 0;
                for (std::size_t c = 0; c < k; ++c) {
                    gmax = std::max(gmax, std::abs(j(r, c)));
                    diff = std::max(diff, std::abs(j(r, c) - n(r, c)));
                }
                // outputs with zero derivative (the correlation diagonal) only see FD round-off
                EXPECT_LE(diff, 1e-5 * gmax + 1e-9) << rp::render(spec) << " row " << r;
            }
            ++checked;
        }
    }
    EXPECT_EQ(checked, 20 * int(specs.size()) - 20 * 1);  // corr(1) has no coordinates
}

// At the origin the Jacobian is the limit of the scale factor times the
// logistic-to-gaussian slope sqrt(2 pi)/4: r/sqrt(2) for n = 2, and 0 for
// n >= 3 where the smoothed chi2 CDF vanishes faster than any power of q.
TEST(Jacobian, BallAtOrigin) {
    const double slope = std::sqrt(2 * M_PI) / 4;
    for (std::size_t n : {2u, 3u, 5u}) {
        const Vec zero(n, 0.0);
        const RealMat j =
            rp::jacobian([](const std::vector<Dual>& x) { return rp::reals_to_ball<Dual>(x, 2.0); }, zero);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                const double want = (a == b && n == 2) ? 2 * slope / std::sqrt(2.0) : 0.0;
                EXPECT_NEAR(j(a, b), want, 1e-15) << n;
            }
    }
    const RealMat fd2 = rp::fd_jacobian([](const Vec& x) { return rp::reals_to_ball<double>(x, 2.0); }, Vec{0, 0});
    EXPECT_NEAR(fd2(0, 0), 2 * slope / std::sqrt(2.0), 1e-6);
    EXPECT_NEAR(fd2(1, 0), 0, 1e-9);
    // n = 3: the secant slope along an axis goes to 0, but only for tiny t
    auto secant = [](double t) { return rp::reals_to_ball<double>(Vec{t, 0, 0})[0] / t; };
    EXPECT_GT(secant(1e-6), 1);
    EXPECT_LT(secant(1e-30), secant(1e-12));
    EXPECT_LT(secant(1e-100), 1e-100);
}
