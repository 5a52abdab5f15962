#pragma once

// Verification routines shared by the CLI and the acceptance suite:
// round trips over a spec, distribution checks, figure grids, MLE demos.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "inference.hpp"
#include "param_tree.hpp"
#include "stat_oracles.hpp"

namespace reparam {

enum class Status { pass, fail, info };

inline const char* status_name(Status s) {
    switch (s) {
        case Status::pass: return "pass";
        case Status::fail: return "fail";
        default: return "info";
    }
}

// `info` checks are reported but never fail a run.
struct Check {
    std::string name;
    Status status;
    double metric;
    double threshold;
};

inline Check check_le(std::string name, double metric, double threshold) {
    return {std::move(name), metric <= threshold ? Status::pass : Status::fail, metric, threshold};
}

inline Check check_ge(std::string name, double metric, double threshold) {
    return {std::move(name), metric >= threshold ? Status::pass : Status::fail, metric, threshold};
}

inline bool all_pass(const std::vector<Check>& checks) {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.status != Status::fail; });
}

// ---- round trips -------------------------------------------------------------

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(a[i] - b[i]);
        if (!(d <= m)) m = d;  // NaN propagates as the maximum
    }
    return m;
}

inline std::vector<double> flatten(const ParamsValue<double>& v) {
    if (v.is_leaf()) return v.tensor().data;
    std::vector<double> out;
    for (std::size_t i = 0; i < v.count(); ++i) {
        const auto part = flatten(v[i]);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

struct RoundTripError {
    double theta = 0;  // |theta - inv(fwd(theta))|_inf
    double value = 0;  // |y - fwd(inv(y))|_inf with y = fwd(theta)
    bool threw = false;
};

// A failing inverse (point rounded out of the set) counts as infinite error.
inline RoundTripError roundtrip_error(const ParamSpec& spec, const std::vector<double>& theta) {
    RoundTripError e;
    const auto y = reals1d_to_params(spec, theta);
    try {
        const auto back = params_to_reals1d(spec, y);
        e.theta = max_abs_diff(theta, back);
        e.value = max_abs_diff(flatten(y), flatten(reals1d_to_params(spec, back)));
    } catch (const std::exception&) {
        e.threw = true;
        e.theta = e.value = std::numeric_limits<double>::infinity();
    }
    return e;
}

struct RoundTripStats {
    std::size_t trials = 0;
    std::size_t size = 0;
    double max_theta_error = 0;
    double max_value_error = 0;
    std::size_t inverse_failures = 0;
    std::vector<double> worst_theta;
};

enum class Draw { uniform10, logistic };

inline std::vector<double> draw_theta(Rng& rng, std::size_t k, Draw d) {
    if (d == Draw::logistic) return sample_logistic(rng, k);
    std::vector<double> t(k);
    for (double& x : t) x = 20 * rng.uniform() - 10;
    return t;
}

inline RoundTripStats roundtrip_trials(const ParamSpec& spec, std::size_t trials, Rng& rng,
                                       Draw d = Draw::uniform10) {
    RoundTripStats s;
    s.trials = trials;
    s.size = spec.size();
    for (std::size_t t = 0; t < trials; ++t) {
        const auto theta = draw_theta(rng, s.size, d);
        const auto e = roundtrip_error(spec, theta);
        if (e.threw) ++s.inverse_failures;
        if (!(e.theta <= s.max_theta_error)) {
            s.max_theta_error = e.theta;
            s.worst_theta = theta;
        }
        if (!(e.value <= s.max_value_error)) s.max_value_error = e.value;
    }
    return s;
}

// ---- distribution checks -----------------------------------------------------

inline constexpr double kTestLevel = 0.01;

inline Check ks_check(std::string name, std::span<const double> sample, const std::function<double(double)>& cdf) {
    const auto r = ks_test(sample, cdf);
    return {std::move(name), r.p_value > kTestLevel ? Status::pass : Status::fail, r.p_value, kTestLevel};
}

// |mean - target| / se, passing below 4.
inline Check mean_check(std::string name, std::span<const double> sample, double target) {
    const auto ms = mean_se(sample);
    return check_le(std::move(name), std::abs(ms.mean - target) / ms.se, 4.0);
}

inline std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t j) {
    std::vector<double> c(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) c[i] = rows[i][j];
    return c;
}

template <class F>
std::vector<std::vector<double>> map_logistic_draws(Rng& rng, std::size_t n, std::size_t samples, F&& map) {
    std::vector<std::vector<double>> out(samples);
    for (auto& row : out) {
        const auto x = sample_logistic(rng, n);
        row = map(std::span<const double>(x));
    }
    return out;
}

inline std::vector<Check> distcheck_simplex(Rng& rng, std::size_t n, std::size_t samples) {
    std::vector<Check> out;
    const auto w = map_logistic_draws(rng, n, samples, [](auto x) { return reals_to_simplex(x); });
    // each coordinate of a uniform simplex point is Beta(1, n)
    const auto beta1n = [n](double t) { return t <= 0 ? 0.0 : t >= 1 ? 1.0 : -std::expm1(double(n) * std::log1p(-t)); };
    for (std::size_t j = 0; j <= n; ++j) {
        const auto c = column(w, j);
        out.push_back(mean_check("simplex mean w" + std::to_string(j), c, 1.0 / double(n + 1)));
        out.push_back(ks_check("simplex KS w" + std::to_string(j) + " vs Beta(1,n)", c, beta1n));
    }
    // uniform simplex points through the inverse chain give independent
    // Logistic coordinates, i.e. Uniform(0,1) after expit(-x)
    std::vector<std::vector<double>> u(samples);
    for (auto& row : u) {
        const auto p = sample_uniform_simplex(rng, n);
        row = simplex_to_reals(std::span<const double>(p));
        for (double& x : row) x = expit(-x);
    }
    for (std::size_t j = 0; j < n; ++j)
        out.push_back(ks_check("simplex inverse KS u" + std::to_string(j) + " vs Uniform", column(u, j),
                               [](double t) { return std::clamp(t, 0.0, 1.0); }));
    return out;
}

inline std::vector<Check> distcheck_sphere(Rng& rng, std::size_t n, std::size_t samples, bool half) {
    std::vector<Check> out;
    const auto v = map_logistic_draws(rng, n, samples, [half](auto x) {
        return half ? reals_to_half_sphere(x) : reals_to_sphere(x);
    });
    const std::string fam = half ? "halfsphere" : "sphere";
    for (std::size_t j = 0; j < n; ++j) out.push_back(mean_check(fam + " mean v" + std::to_string(j), column(v, j), 0));
    return out;
}

inline std::vector<Check> distcheck_ball(Rng& rng, std::size_t n, std::size_t samples) {
    std::vector<Check> out;
    const auto u = map_logistic_draws(rng, n, samples, [](auto x) { return reals_to_ball(x); });
    std::vector<double> radial(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        double s = 0;
        for (double x : u[i]) s += x * x;
        radial[i] = std::pow(s, 0.5 * double(n));
    }
    Check k = ks_check("ball radial KS |u|^n vs Uniform", radial, [](double t) { return std::clamp(t, 0.0, 1.0); });
    if (n != 2) k.status = Status::info;  // exact only for n = 2
    out.push_back(k);
    for (std::size_t j = 0; j < n; ++j) out.push_back(mean_check("ball mean u" + std::to_string(j), column(u, j), 0));
    return out;
}

inline std::vector<Check> distcheck_gaussian(Rng& rng, std::size_t samples) {
    auto x = sample_logistic(rng, samples);
    for (double& v : x) v = logistic_to_gaussian(v);
    return {ks_check("logistic_to_gaussian KS vs N(0,1)", x, [](double t) { return ndtr(t); })};
}

// family: simplex | sphere | halfsphere | ball | gaussian
inline std::vector<Check> distcheck(const std::string& family, std::size_t n, std::size_t samples, Rng& rng) {
    if (family == "simplex") return distcheck_simplex(rng, n, samples);
    if (family == "sphere") return distcheck_sphere(rng, n, samples, false);
    if (family == "halfsphere") return distcheck_sphere(rng, n, samples, true);
    if (family == "ball") {
        if (n < 2) throw SpecError("ball needs dim >= 2");
        return distcheck_ball(rng, n, samples);
    }
    if (family == "gaussian") return distcheck_gaussian(rng, samples);
    throw SpecError("unknown family '" + family + "'");
}

// ---- figure grids ------------------------------------------------------------

struct GridRow {
    double x0, x1;
    std::vector<double> y;
};

// Grid {-R, -R+h, ..., R}^2 through one of simplex2, sphere2, halfsphere2, ball2.
inline std::vector<GridRow> grid_rows(const std::string& map, double range, double step) {
    if (!(range > 0) || !(step > 0) || !std::isfinite(range)) throw SpecError("grid: need range > 0 and step > 0");
    const auto m = static_cast<std::size_t>(std::floor(2 * range / step + 1e-9)) + 1;
    if (m > 100000) throw SpecError("grid: too many points");
    std::vector<GridRow> rows;
    rows.reserve(m * m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const double x[2] = {-range + double(i) * step, -range + double(j) * step};
            const std::span<const double> xs(x);
            GridRow r{x[0], x[1], {}};
            if (map == "simplex2")
                r.y = reals_to_simplex(xs);
            else if (map == "sphere2")
                r.y = reals_to_sphere(xs);
            else if (map == "halfsphere2")
                r.y = reals_to_half_sphere(xs);
            else if (map == "ball2")
                r.y = reals_to_ball(xs);
            else
                throw SpecError("unknown map '" + map + "'");
            rows.push_back(std::move(r));
        }
    return rows;
}

// Worst codomain violation over a grid: 0 means every point is inside.
inline std::vector<Check> grid_membership(const std::string& map, const std::vector<GridRow>& rows) {
    double sum_err = 0, norm_err = 0, min_comp = std::numeric_limits<double>::infinity(),
           min_gap = std::numeric_limits<double>::infinity();
    bool finite = true;
    for (const auto& r : rows) {
        double s = 0, q = 0;
        for (double v : r.y) {
            finite = finite && std::isfinite(v);
            s += v;
            q += v * v;
        }
        if (map == "simplex2") {
            sum_err = std::max(sum_err, std::abs(s - 1));
            for (double v : r.y) min_comp = std::min(min_comp, v);
        } else if (map == "ball2") {
            // naive sum of squares rounds to 1 within an ulp of the boundary
            min_gap = std::min(min_gap, detail::one_minus_sumsq<double>(r.y));
        } else {
            norm_err = std::max(norm_err, std::abs(std::sqrt(q) - 1));
            if (map == "halfsphere2") min_comp = std::min(min_comp, r.y.back());
        }
    }
    std::vector<Check> out{{"all outputs finite", finite ? Status::pass : Status::fail, finite ? 0.0 : 1.0, 0}};
    if (map == "simplex2") {
        out.push_back(check_le("simplex |sum - 1|", sum_err, 1e-12));
        out.push_back({"simplex min component > 0", min_comp > 0 ? Status::pass : Status::fail, min_comp, 0});
    } else if (map == "ball2") {
        out.push_back({"ball min 1 - |u|^2 > 0", min_gap > 0 ? Status::pass : Status::fail, min_gap, 0});
    } else {
        out.push_back(check_le(map + " ||v| - 1|", norm_err, 1e-12));
        if (map == "halfsphere2")
            out.push_back({"halfsphere min last coordinate > 0", min_comp > 0 ? Status::pass : Status::fail, min_comp, 0});
    }
    return out;
}

// ---- MLE demos -----------------------------------------------------------------

struct GumbelDemo {
    FitReport fit;
    double mu_hat, beta_hat;
    ConfidenceInterval mu_ci, beta_ci;
};

// Data from substream 0 of the seed, random-init draws from substream 1.
inline GumbelDemo run_gumbel_demo(std::size_t n, double mu, double beta, std::uint64_t seed, double beta_scale = 1,
                                  bool moment_init = true) {
    const Rng base(seed);
    Rng data_rng = base.substream(0), init_rng = base.substream(1);
    const auto x = sample_gumbel(data_rng, mu, beta, n);
    const auto spec = gumbel_spec(beta_scale);
    FitConfig cfg;
    if (moment_init) cfg.init = params_to_reals1d(spec, gumbel_moment_guess(x));
    GumbelDemo d{fit_mle(spec, gumbel_model(x), cfg, init_rng), 0, 0, {}, {}};
    const auto v = reals1d_to_params(spec, d.fit.theta_hat);
    d.mu_hat = v["mu"].scalar();
    d.beta_hat = v["beta"].scalar();
    d.mu_ci = delta_method_ci([](const auto& p) { return p["mu"].scalar(); }, d.fit);
    d.beta_ci = delta_method_ci([](const auto& p) { return p["beta"].scalar(); }, d.fit);
    return d;
}

inline const RealMat& demo_student_sigma() {
    static const RealMat s{{2, 1, 1}, {1, 2, 1.5}, {1, 1.5, 2}};
    return s;
}

template <class T>
T det_spd(const Matrix<T>& m) {
    const auto l = cholesky(m);
    T d(1.0);
    for (std::size_t i = 0; i < m.rows; ++i) d *= l(i, i);
    return d * d;
}

struct StudentDemo {
    FitReport fit;
    std::vector<double> mu_hat;
    RealMat sigma_hat;
    double nu_hat, det_hat;
    ConfidenceInterval nu_ci, det_ci;
};

inline StudentDemo run_student_demo(std::size_t n, std::uint64_t seed, double nu = 7, bool moment_init = true) {
    const Rng base(seed);
    Rng data_rng = base.substream(0), init_rng = base.substream(1);
    const double mu[3] = {0, 1, 2};
    const RealMat x = sample_multivariate_student(data_rng, mu, demo_student_sigma(), nu, n);
    const auto spec = student_spec(3);
    FitConfig cfg;
    if (moment_init) cfg.init = params_to_reals1d(spec, student_moment_guess(x));
    StudentDemo d;
    d.fit = fit_mle(spec, student_model(x), cfg, init_rng);
    const auto v = reals1d_to_params(spec, d.fit.theta_hat);
    d.mu_hat = v["mu"].vector();
    d.sigma_hat = v["Sigma"].matrix();
    d.nu_hat = v["df"].scalar();
    d.det_hat = det_spd(d.sigma_hat);
    d.nu_ci = delta_method_ci([](const auto& p) { return p["df"].scalar(); }, d.fit);
    d.det_ci = delta_method_ci([](const auto& p) { return det_spd(p["Sigma"].matrix()); }, d.fit);
    return d;
}

}  // namespace reparam
