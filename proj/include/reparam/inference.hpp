#pragma once

// Maximum likelihood over a ParamSpec: ascent with 1/lambda_max steps, then
// damped Newton; Fisher information and delta-method intervals. Also the
// Gumbel and multivariate Student models used by the demos.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "autodiff.hpp"
#include "dual.hpp"
#include "linalg.hpp"
#include "param_tree.hpp"
#include "stat_oracles.hpp"

namespace reparam {

// ---- log-gamma and its derivatives --------------------------------------

inline double digamma(double x) {
    double acc = 0;
    while (x < 12) {
        acc -= 1 / x;
        x += 1;
    }
    const double r = 1 / (x * x);
    return acc + std::log(x) - 0.5 / x -
           r * (1.0 / 12 - r * (1.0 / 120 - r * (1.0 / 252 - r * (1.0 / 240 - r * (1.0 / 132)))));
}

inline double trigamma(double x) {
    double acc = 0;
    while (x < 12) {
        acc += 1 / (x * x);
        x += 1;
    }
    const double r = 1 / (x * x);
    return acc + 1 / x + r / 2 +
           r / x * (1.0 / 6 - r * (1.0 / 30 - r * (1.0 / 42 - r * (1.0 / 30 - r * (5.0 / 66)))));
}

// libm lgamma for the value; digamma/trigamma give the derivative parts.
inline double log_gamma(double x) { return std::lgamma(x); }
template <DualLike T>
T log_gamma(const T& x) {
    return lift(x, std::lgamma(x.v), digamma(x.v), trigamma(x.v));
}

// ---- models ----------------------------------------------------------------

template <class T>
T gumbel_loglik(const T& mu, const T& beta, std::span<const double> data) {
    if (!(value(beta) > 0)) throw DomainError("gumbel_loglik: beta must be > 0");
    const T lb = log(beta);
    T acc(0.0);
    for (double x : data) {
        const T z = (mu - x) / beta;
        acc += z - exp(z) - lb;
    }
    return acc;
}

// data rows are observations.
template <class T>
T student_loglik(std::span<const T> mu, const Matrix<T>& sigma, const T& nu, const RealMat& data) {
    const std::size_t p = mu.size();
    if (sigma.rows != p || sigma.cols != p || data.cols != p) throw ShapeError("student_loglik: dimension mismatch");
    if (!(value(nu) > 0)) throw DomainError("student_loglik: nu must be > 0");
    const Matrix<T> l = cholesky(sigma);
    T logdet(0.0);
    for (std::size_t i = 0; i < p; ++i) logdet += log(l(i, i));
    logdet *= 2.0;
    const double pd = double(p);
    const T half_nup = 0.5 * (nu + pd);
    const T per_obs = log_gamma(half_nup) - log_gamma(0.5 * nu) - 0.5 * pd * log(nu * kPi) - 0.5 * logdet;
    T acc(0.0);
    std::vector<T> d(p);
    for (std::size_t i = 0; i < data.rows; ++i) {
        for (std::size_t j = 0; j < p; ++j) d[j] = data(i, j) - mu[j];
        const auto y = tri_solve<T>(l, d);
        T q(0.0);
        for (const T& yj : y) q += yj * yj;
        acc += per_obs - half_nup * log1p(q / nu);
    }
    return acc;
}

inline ParamSpec gumbel_spec(double beta_scale = 1.0) {
    return ParamSpec::named_tuple({{"mu", ParamSpec::real()}, {"beta", ParamSpec::real_positive({}, beta_scale)}});
}

inline ParamSpec student_spec(std::size_t p) {
    return ParamSpec::named_tuple({{"mu", ParamSpec::real({p})},
                                   {"Sigma", ParamSpec::matrix_sym_pos_def(p)},
                                   {"df", ParamSpec::real_positive()}});
}

// Log-likelihoods over the spec values, generic in the scalar type.
inline auto gumbel_model(std::span<const double> data) {
    return [data](const auto& v) { return gumbel_loglik(v["mu"].scalar(), v["beta"].scalar(), data); };
}

inline auto student_model(const RealMat& data) {
    return [&data](const auto& v) {
        using T = std::decay_t<decltype(v["df"].scalar())>;
        const auto& mu = v["mu"].tensor().data;
        return student_loglik<T>(std::span<const T>(mu), v["Sigma"].matrix(), v["df"].scalar(), data);
    };
}

// Moment-based starting values.
inline ParamsValue<double> gumbel_moment_guess(std::span<const double> data) {
    const auto ms = mean_se(data);
    const double sd = ms.se * std::sqrt(double(data.size()));
    const double beta = std::max(sd * std::sqrt(6.0) / kPi, 1e-3);
    constexpr double euler_gamma = 0.57721566490153286;
    return ParamsValue<double>::named(
        {{"mu", ParamsValue<double>::scalar(ms.mean - euler_gamma * beta)}, {"beta", ParamsValue<double>::scalar(beta)}});
}

// Sample covariance rescaled by (nu-2)/nu for a guessed nu of 10.
inline ParamsValue<double> student_moment_guess(const RealMat& data) {
    const std::size_t n = data.rows, p = data.cols;
    std::vector<double> mu(p, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) mu[j] += data(i, j) / double(n);
    const double nu = 10;
    RealMat s(p, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < p; ++b)
                s(a, b) += (data(i, a) - mu[a]) * (data(i, b) - mu[b]) / double(n - 1) * (nu - 2) / nu;
    return ParamsValue<double>::named({{"mu", ParamsValue<double>::vector(mu)},
                                       {"Sigma", ParamsValue<double>::matrix(s)},
                                       {"df", ParamsValue<double>::scalar(nu)}});
}

// ---- fitting ---------------------------------------------------------------

struct InitializationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FitConfig {
    int max_gradient_iterations = 1000;
    double gradient_tol = 1e-2;  // stop ascent once the increase is below this
    double newton_tol = 1e-6;
    int min_newton_iterations = 4;
    int max_newton_iterations = 100;
    int max_init_draws = 10;
    std::optional<RealVec> init;  // theta; random Logistic draw when absent

    void validate() const {
        if (!(gradient_tol > 0) || !(newton_tol > 0)) throw std::invalid_argument("FitConfig: tolerances must be > 0");
        if (max_gradient_iterations < 0 || max_newton_iterations < 0 || max_init_draws < 1)
            throw std::invalid_argument("FitConfig: iteration limits must be nonnegative");
    }
};

// Damping of Newton step `it` (0-based).
inline double newton_damping(int it) { return std::min(1.0, 0.1 * std::pow(2.0, it)); }

struct FitReport {
    ParamSpec spec = ParamSpec::real();
    RealVec theta_hat;
    double loglik = 0;
    RealVec gradient;
    RealMat fisher;  // -Hessian at theta_hat
    int init_draws = 0;
    int gradient_iterations = 0;
    int newton_iterations = 0;
    int fallback_steps = 0;  // Newton steps replaced by a gradient step
    bool converged = false;

    double gradient_norm() const {
        double s = 0;
        for (double g : gradient) s += g * g;
        return std::sqrt(s);
    }
};

namespace detail {

inline double lambda_max_abs(const RealMat& neg_h) {
    if (neg_h.rows == 0) return 1;
    const auto e = jacobi_eigh(neg_h);
    double m = 0;
    for (double v : e.values) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace detail

template <class Model>
FitReport fit_mle(const ParamSpec& spec, Model&& model, const FitConfig& config, Rng& rng) {
    config.validate();
    auto objective = [&](const auto& theta) {
        using T = typename std::decay_t<decltype(theta)>::value_type;
        return model(reals1d_to_params<T>(spec, theta));
    };
    auto safe_value = [&](const RealVec& theta) {
        try {
            const double v = objective(theta);
            return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
        } catch (const DomainError&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    FitReport rep;
    rep.spec = spec;
    const std::size_t k = spec.size();
    RealVec theta;
    double f = -std::numeric_limits<double>::infinity();
    for (int draw = 0; draw < config.max_init_draws; ++draw) {
        theta = (draw == 0 && config.init) ? *config.init : sample_logistic(rng, k);
        if (theta.size() != k) throw ShapeError("fit_mle: init has the wrong length");
        rep.init_draws = draw + 1;
        f = safe_value(theta);
        if (std::isfinite(f)) break;
    }
    if (!std::isfinite(f))
        throw InitializationError("fit_mle: log-likelihood not finite at " + std::to_string(config.max_init_draws) +
                                  " initial draws");

    // Backtracks along `step` until the objective does not decrease.
    auto try_step = [&](const RealVec& step) {
        for (double t = 1; t > 1e-10; t /= 2) {
            RealVec cand = theta;
            for (std::size_t i = 0; i < k; ++i) cand[i] += t * step[i];
            const double fc = safe_value(cand);
            if (fc >= f) return std::make_pair(cand, fc);
        }
        return std::make_pair(theta, f);
    };

    // phase 1
    for (int it = 0; it < config.max_gradient_iterations; ++it) {
        const auto vgh = value_grad_hessian(objective, theta);
        RealMat neg_h = vgh.hess;
        for (double& x : neg_h.data) x = -x;
        const double lam = detail::lambda_max_abs(neg_h);
        if (!(lam > 0)) break;
        RealVec step = vgh.grad;
        for (double& s : step) s /= lam;
        auto [cand, fc] = try_step(step);
        rep.gradient_iterations = it + 1;
        const double gain = fc - f;
        theta = cand;
        f = fc;
        if (gain < config.gradient_tol) break;
    }

    // phase 2
    for (int it = 0; it < config.max_newton_iterations; ++it) {
        const auto vgh = value_grad_hessian(objective, theta);
        RealVec dir;
        bool ascent = false;
        try {
            dir = solve_sym(vgh.hess, vgh.grad);
            double slope = 0;  // directional derivative along -dir
            for (std::size_t i = 0; i < k; ++i) slope -= vgh.grad[i] * dir[i];
            ascent = slope > 0;
        } catch (const SingularMatrix&) {
        }
        RealVec step(k);
        if (ascent) {
            const double damp = newton_damping(it);
            for (std::size_t i = 0; i < k; ++i) step[i] = -damp * dir[i];
        } else {
            // not a maximizing direction here, take a gradient step instead
            ++rep.fallback_steps;
            RealMat neg_h = vgh.hess;
            for (double& x : neg_h.data) x = -x;
            const double lam = std::max(detail::lambda_max_abs(neg_h), 1e-12);
            for (std::size_t i = 0; i < k; ++i) step[i] = vgh.grad[i] / lam;
        }
        auto [cand, fc] = try_step(step);
        rep.newton_iterations = it + 1;
        const double gain = fc - f;
        theta = cand;
        f = fc;
        if (it + 1 >= config.min_newton_iterations && gain < config.newton_tol) break;
    }

    const auto fin = value_grad_hessian(objective, theta);
    rep.theta_hat = theta;
    rep.loglik = fin.value;
    rep.gradient = fin.grad;
    rep.fisher = fin.hess;
    for (double& x : rep.fisher.data) x = -x;
    rep.converged = std::isfinite(rep.loglik) && rep.gradient_norm() <= 1e-4 * std::max(1.0, std::abs(rep.loglik));
    return rep;
}

struct ConfidenceInterval {
    double estimate;
    double se;
    double lower;
    double upper;
};

// g maps a ParamsValue<T> to T. Interval g_hat +- u * sqrt(d^T I^-1 d).
template <class G>
ConfidenceInterval delta_method_ci(G&& g, const FitReport& rep, double alpha = 0.05) {
    if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("delta_method_ci: alpha must lie in (0,1)");
    auto fn = [&](const auto& theta) {
        using T = typename std::decay_t<decltype(theta)>::value_type;
        return g(reals1d_to_params<T>(rep.spec, theta));
    };
    const RealVec delta = gradient(fn, rep.theta_hat);
    const double est = fn(rep.theta_hat);
    const RealVec w = solve_sym(rep.fisher, delta);
    double var = 0;
    for (std::size_t i = 0; i < delta.size(); ++i) var += delta[i] * w[i];
    if (!(var >= 0)) throw DomainError("delta_method_ci: Fisher information is not positive definite");
    const double se = std::sqrt(var);
    const double u = -ndtri(alpha / 2);
    return {est, se, est - u * se, est + u * se};
}

}  // namespace reparam
