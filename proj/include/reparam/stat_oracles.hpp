#pragma once

// Seeded sampling, reference distributions and tests for the property and
// distributional suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "linalg.hpp"
#include "special.hpp"
#include "tensor.hpp"

namespace reparam {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// xoshiro256++ seeded through splitmix64. Satisfies UniformRandomBitGenerator.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) : seed_(seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t out = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return out;
    }

    std::uint64_t seed() const { return seed_; }

    // Independent stream number `k` derived from this generator's seed;
    // does not advance this generator.
    Rng substream(std::uint64_t k) const {
        std::uint64_t sm = seed_ ^ (0xD1B54A32D192ED03ull * (k + 1));
        return Rng(splitmix64(sm));
    }

    // Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform(), u2 = uniform();
        const double r = std::sqrt(-2 * std::log(u1));
        spare_ = r * std::sin(2 * kPi * u2);
        has_spare_ = true;
        return r * std::cos(2 * kPi * u2);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t seed_;
    std::uint64_t s_[4];
    bool has_spare_ = false;
    double spare_ = 0;
};

inline std::vector<double> sample_logistic(Rng& rng, std::size_t n) {
    std::vector<double> out(n);
    for (double& x : out) x = logit(rng.uniform());
    return out;
}

inline std::vector<double> sample_std_normal(Rng& rng, std::size_t n) {
    std::vector<double> out(n);
    for (double& x : out) x = rng.normal();
    return out;
}

inline Tensor<double> sample_logistic(Rng& rng, const std::vector<std::size_t>& shape) {
    return Tensor<double>(shape, sample_logistic(rng, shape_product(shape)));
}

inline Tensor<double> sample_std_normal(Rng& rng, const std::vector<std::size_t>& shape) {
    return Tensor<double>(shape, sample_std_normal(rng, shape_product(shape)));
}

// Uniform on the open n-simplex (n+1 components).
inline std::vector<double> sample_uniform_simplex(Rng& rng, std::size_t n) {
    std::vector<double> e(n + 1);
    double s = 0;
    for (double& x : e) s += (x = -std::log(rng.uniform()));
    for (double& x : e) x /= s;
    return e;
}

// Uniform on the unit n-sphere in R^(n+1).
inline std::vector<double> sample_uniform_sphere(Rng& rng, std::size_t n) {
    std::vector<double> g;
    double s = 0;
    do {
        g = sample_std_normal(rng, n + 1);
        s = 0;
        for (double x : g) s += x * x;
    } while (s == 0);
    const double inv = 1 / std::sqrt(s);
    for (double& x : g) x *= inv;
    return g;
}

// Uniform in the open unit ball of R^n.
inline std::vector<double> sample_uniform_ball(Rng& rng, std::size_t n) {
    if (n < 1) throw std::invalid_argument("sample_uniform_ball: n must be >= 1");
    auto v = sample_uniform_sphere(rng, n - 1);
    const double r = std::pow(rng.uniform(), 1.0 / double(n));
    for (double& x : v) x *= r;
    return v;
}

struct KsResult {
    double statistic;
    double p_value;
};

// Asymptotic Kolmogorov survival function, 100-term alternating series.
inline double kolmogorov_sf(double t) {
    if (t < 0.2) return 1.0;  // series converges slowly here and the sf is 1 to ~1e-22
    double s = 0;
    for (int k = 1; k <= 100; ++k) s += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * t * t);
    return std::clamp(s, 0.0, 1.0);
}

inline KsResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf) {
    const std::size_t n = sample.size();
    if (n < 50) throw std::invalid_argument("ks_test: need at least 50 observations");
    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    double d = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, double(i + 1) / double(n) - f, f - double(i) / double(n)});
    }
    return {d, kolmogorov_sf(std::sqrt(double(n)) * d)};
}

// Regularized lower incomplete gamma P(a, x).
inline double gamma_p(double a, double x) {
    if (x <= 0) return 0;
    const double lpre = a * std::log(x) - x - std::lgamma(a);
    if (x < a + 1) {
        double term = 1 / a, sum = term;
        for (int k = 1; k < 10000; ++k) {
            term *= x / (a + k);
            sum += term;
            if (term < sum * 1e-17) break;
        }
        return std::exp(lpre) * sum;
    }
    // Lentz continued fraction for Q(a, x)
    const double tiny = 1e-300;
    double b = x + 1 - a, c = 1 / tiny, d = 1 / b, h = d;
    for (int k = 1; k < 10000; ++k) {
        const double an = -k * (k - a);
        b += 2;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1) < 1e-16) break;
    }
    return 1 - std::exp(lpre) * h;
}

inline double chi2_cdf_numeric(int n, double y) {
    if (n < 1) throw std::invalid_argument("chi2_cdf_numeric: n must be >= 1");
    if (!(y >= 0)) throw std::invalid_argument("chi2_cdf_numeric: y must be >= 0");
    return gamma_p(0.5 * n, 0.5 * y);
}

// Marsaglia-Tsang; shapes below 1 are boosted by U^(1/a).
inline double sample_gamma(Rng& rng, double shape) {
    if (!(shape > 0)) throw std::invalid_argument("sample_gamma: shape must be > 0");
    if (shape < 1) return sample_gamma(rng, shape + 1) * std::pow(rng.uniform(), 1 / shape);
    const double d = shape - 1.0 / 3, c = 1 / std::sqrt(9 * d);
    for (;;) {
        double z, v;
        do {
            z = rng.normal();
            v = 1 + c * z;
        } while (v <= 0);
        v = v * v * v;
        const double u = rng.uniform();
        if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) return d * v;
    }
}

inline double sample_chi2(Rng& rng, double nu) { return 2 * sample_gamma(rng, 0.5 * nu); }

inline std::vector<double> sample_gumbel(Rng& rng, double mu, double beta, std::size_t n) {
    if (!(beta > 0)) throw DomainError("sample_gumbel: beta must be > 0");
    std::vector<double> out(n);
    for (double& x : out) x = mu - beta * std::log(-std::log(rng.uniform()));
    return out;
}

// Rows are observations.
inline RealMat sample_multivariate_student(Rng& rng, std::span<const double> mu, const RealMat& sigma, double nu,
                                           std::size_t n) {
    if (!(nu > 0)) throw DomainError("sample_multivariate_student: nu must be > 0");
    const std::size_t p = mu.size();
    if (sigma.rows != p || sigma.cols != p) throw ShapeError("sample_multivariate_student: Sigma shape mismatch");
    const RealMat l = cholesky(sigma);
    RealMat out(n, p);
    for (std::size_t i = 0; i < n; ++i) {
        const auto z = sample_std_normal(rng, p);
        const double w = std::sqrt(sample_chi2(rng, nu) / nu);
        for (std::size_t j = 0; j < p; ++j) {
            double y = 0;
            for (std::size_t k = 0; k <= j; ++k) y += l(j, k) * z[k];
            out(i, j) = mu[j] + y / w;
        }
    }
    return out;
}

struct MeanSe {
    double mean;
    double se;
};

inline MeanSe mean_se(std::span<const double> x) {
    const double n = double(x.size());
    double m = 0;
    for (double v : x) m += v;
    m /= n;
    double ss = 0;
    for (double v : x) ss += (v - m) * (v - m);
    return {m, std::sqrt(ss / (n - 1) / n)};
}

}  // namespace reparam
