#include <catch_amalgamated.hpp>

#include <cmath>

#include <slfv/random.hpp>
#include <slfv/stats.hpp>

using namespace slfv;

namespace
{

double kolmogorov_series(double lambda)
{
    double s = 0.0;
    for (int k = 1; k <= 200; ++k) {
        s += (k % 2 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    }
    return 2.0 * s;
}

// Two-sample KS statistic by evaluating both ECDFs at every pooled point.
double ks_brute(const std::vector<double> &a, const std::vector<double> &b)
{
    double d = 0.0;
    const auto ecdf = [](const std::vector<double> &v, double x) {
        return static_cast<double>(std::count_if(v.begin(), v.end(), [&](double u) { return u <= x; })) /
               static_cast<double>(v.size());
    };
    for (const auto *v : {&a, &b}) {
        for (double x : *v) {
            d = std::max(d, std::abs(ecdf(a, x) - ecdf(b, x)));
        }
    }
    return d;
}

} // namespace

TEST_CASE("moments and quantiles")
{
    const std::vector<double> v{1, 2, 3, 4, 10};
    CHECK(stats::mean(v) == 4.0);
    CHECK(stats::variance(v) == Catch::Approx(12.5));
    CHECK(stats::std_error(v) == Catch::Approx(std::sqrt(12.5 / 5)));
    CHECK(stats::median(v) == 3.0);
    CHECK(stats::quantile(v, 0.25) == 2.0);
    CHECK(stats::quantile(v, 0.9) == Catch::Approx(7.6));
    CHECK(stats::quantile(v, 0.0) == 1.0);
    CHECK(stats::quantile(v, 1.0) == 10.0);
    CHECK(stats::median({4, 1, 3, 2}) == 2.5);
    CHECK(stats::pooled_se(v, v) == Catch::Approx(std::sqrt(2 * 12.5 / 5)));
    CHECK(stats::binomial_sigma(0.5, 100) == Catch::Approx(0.05));
}

TEST_CASE("Kolmogorov distribution")
{
    for (double l : {0.3, 0.5, 0.8, 1.0, 1.2, 1.36, 1.628, 2.0}) {
        CHECK(stats::kolmogorov_q(l) == Catch::Approx(kolmogorov_series(l)).margin(1e-9));
    }
    CHECK(stats::kolmogorov_q(1.36) == Catch::Approx(0.0494).margin(5e-4));
    CHECK(stats::kolmogorov_q(1.628) == Catch::Approx(0.0100).margin(3e-4));
    CHECK(stats::kolmogorov_q(0.0) == 1.0);
    CHECK(stats::ks_critical(1.628, 500, 500) == Catch::Approx(0.103).margin(5e-4));
}

TEST_CASE("two-sample KS statistic")
{
    const auto r = stats::ks_two_sample({1, 2, 3, 4, 5}, {6, 7, 8, 9, 10});
    CHECK(r.d == 1.0);
    CHECK(r.n1 == 5);
    CHECK(r.n2 == 5);

    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(1 + uniform_index(rng, 40)), b(1 + uniform_index(rng, 40));
        for (auto &x : a) {
            x = std::floor(uniform(rng, 0, 10));
        }
        for (auto &x : b) {
            x = std::floor(uniform(rng, 0, 10)) + (trial % 2);
        }
        REQUIRE(stats::ks_two_sample(a, b).d == Catch::Approx(ks_brute(a, b)));
    }

    // Same law: the p-value is roughly uniform, so small values are rare.
    int rejections = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(300), b(300);
        for (auto &x : a) {
            x = uniform01(rng);
        }
        for (auto &x : b) {
            x = uniform01(rng);
        }
        rejections += stats::ks_two_sample(a, b).p_value < 0.05;
    }
    CHECK(rejections <= 20);
}

TEST_CASE("least squares")
{
    const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
    const auto f = stats::least_squares(x, y);
    CHECK(f.slope == Catch::Approx(2));
    CHECK(f.intercept == Catch::Approx(1));
    CHECK(f.slope_se == Catch::Approx(0).margin(1e-12));
    CHECK(f.n == 4);
    const std::vector<double> flat{2, 2, 2, 2};
    CHECK_THROWS_AS(stats::least_squares(flat, y), fit_undefined);
    const std::vector<double> one{1};
    CHECK_THROWS_AS(stats::least_squares(one, one), fit_undefined);

    // Noisy line: slope within 3 standard errors.
    Rng rng(8);
    std::vector<double> xs, ys;
    for (int i = 0; i < 200; ++i) {
        xs.push_back(uniform(rng, 0, 5));
        ys.push_back(0.5 * xs.back() - 1 + uniform(rng, -0.5, 0.5));
    }
    const auto g = stats::least_squares(xs, ys);
    CHECK(std::abs(g.slope - 0.5) <= 3 * g.slope_se);
}
