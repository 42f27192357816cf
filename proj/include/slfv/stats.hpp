#ifndef SLFV_STATS_HPP
#define SLFV_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <slfv/errors.hpp>

namespace slfv::stats
{

inline double mean(std::span<const double> v)
{
    if (v.empty()) {
        throw contract_violation("mean of an empty sample");
    }
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return s / static_cast<double>(v.size());
}

// Unbiased sample variance.
inline double variance(std::span<const double> v)
{
    if (v.size() < 2) {
        return 0.0;
    }
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) {
        s += (x - m) * (x - m);
    }
    return s / static_cast<double>(v.size() - 1);
}

inline double std_error(std::span<const double> v)
{
    return v.empty() ? 0.0 : std::sqrt(variance(v) / static_cast<double>(v.size()));
}

// Standard error of the difference of two independent sample means.
inline double pooled_se(std::span<const double> a, std::span<const double> b)
{
    const double sa = std_error(a), sb = std_error(b);
    return std::sqrt(sa * sa + sb * sb);
}

// Linear-interpolation quantile (type 7).
inline double quantile(std::vector<double> v, double q)
{
    if (v.empty()) {
        throw contract_violation("quantile of an empty sample");
    }
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median(std::vector<double> v)
{
    return quantile(std::move(v), 0.5);
}

// Binomial standard deviation of an empirical frequency estimating p from n trials.
inline double binomial_sigma(double p, std::size_t n)
{
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

// Kolmogorov distribution upper tail Q(λ) = 2 Σ (-1)^{k-1} exp(-2 k² λ²).
inline double kolmogorov_q(double lambda)
{
    if (lambda < 1e-3) {
        return 1.0;
    }
    if (lambda < 1.18) {
        // Small-λ form converges faster: P(K <= λ) = √(2π)/λ Σ exp(-(2k-1)² π² / (8 λ²)).
        constexpr double pi = 3.14159265358979323846;
        double s = 0.0;
        for (int k = 1; k <= 20; ++k) {
            const double j = 2.0 * k - 1.0;
            s += std::exp(-j * j * pi * pi / (8.0 * lambda * lambda));
        }
        return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * s, 0.0, 1.0);
    }
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 == 1 ? term : -term);
        if (term < 1e-16) {
            break;
        }
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

struct KsResult {
    double d = 0.0;
    double p_value = 1.0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
};

// Two-sample Kolmogorov-Smirnov statistic with the asymptotic p-value
// (effective size n1 n2 / (n1 + n2), Stephens' small-sample correction).
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty()) {
        throw contract_violation("KS test needs two non-empty samples");
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) {
            ++i;
        }
        while (j < b.size() && b[j] == x) {
            ++j;
        }
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d), a.size(), b.size()};
}

// Asymptotic two-sample critical value c(α) √((n1 + n2) / (n1 n2)); c(0.01) = 1.628.
inline double ks_critical(double c_alpha, std::size_t n1, std::size_t n2)
{
    const double a = static_cast<double>(n1), b = static_cast<double>(n2);
    return c_alpha * std::sqrt((a + b) / (a * b));
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    std::size_t n = 0;
};

// Ordinary least squares y = a + b x.
inline LinearFit least_squares(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw fit_undefined("least squares needs at least two paired points");
    }
    const double mx = mean(x), my = mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) {
        throw fit_undefined("least squares needs two distinct abscissae");
    }
    LinearFit f;
    f.n = x.size();
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (x.size() > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - f.intercept - f.slope * x[i];
            rss += r * r;
        }
        f.slope_se = std::sqrt(rss / static_cast<double>(x.size() - 2) / sxx);
    }
    return f;
}

} // namespace slfv::stats

#endif
