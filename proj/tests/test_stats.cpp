#include "fragtail/errors.hpp"
#include "fragtail/rng.hpp"
#include "fragtail/stats.hpp"

#include <doctest.h>

#include <cmath>

using namespace fragtail;

namespace {

// P(X > t) = t² e^{-t} / (4 e^{-2}) on [2, ∞), decreasing there; sampled by bisection on the survival function.
double gamma_like_survival(double t) { return t * t * std::exp(-(t - 2.0)) / 4.0; }

std::vector<double> gamma_like_samples(std::size_t n, std::uint64_t seed)
{
    SplitMix64 rng(seed);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        double lo = 2.0, hi = 80.0;
        for (int k = 0; k < 60; ++k) {
            const double mid = 0.5 * (lo + hi);
            (gamma_like_survival(mid) > u ? lo : hi) = mid;
        }
        out.push_back(0.5 * (lo + hi));
    }
    return out;
}

std::vector<double> exponential_samples(std::size_t n, std::uint64_t seed)
{
    SplitMix64 rng(seed);
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(rng.exponential(1.0));
    return out;
}

} // namespace

TEST_CASE("survival curve of a point mass")
{
    const std::vector<double> samples(100, 1.0);
    const auto c = survival_curve(samples, {0.5, 1.0, 1.5});
    CHECK(c.n == 100);
    CHECK(c.p_hat == std::vector<double>{1.0, 0.0, 0.0});
    CHECK(c.ci_half == std::vector<double>{0.0, 0.0, 0.0});
    CHECK_THROWS_AS(survival_curve(std::vector<double>(99, 1.0), {1.0}), ConfigError);
}

TEST_CASE("survival curve of Exp(1)")
{
    const auto c = survival_curve(exponential_samples(100000, 3), {1.0, 3.0});
    for (std::size_t i = 0; i < 2; ++i) {
        const double want = std::exp(-c.t_grid[i]);
        CHECK(std::abs(c.p_hat[i] - want) < 4.0 * std::sqrt(want * (1 - want) / 1e5));
        CHECK(c.ci_half[i] == doctest::Approx(1.96 * std::sqrt(c.p_hat[i] * (1 - c.p_hat[i]) / 1e5)));
    }
}

TEST_CASE("survival curve is equivariant under time rescaling")
{
    const auto s = exponential_samples(1000, 5);
    const std::vector<double> grid{0.1, 0.5, 1.0, 2.0};
    for (double r : {0.25, 4.0}) {
        std::vector<double> rs, rg;
        for (double v : s)
            rs.push_back(r * v);
        for (double t : grid)
            rg.push_back(r * t);
        CHECK(survival_curve(rs, rg).p_hat == survival_curve(s, grid).p_hat);
    }
}

TEST_CASE("duplicating every sample leaves the curve unchanged")
{
    auto s = exponential_samples(500, 9);
    const std::vector<double> grid{0.2, 0.7, 1.9};
    const auto once = survival_curve(s, grid);
    const auto copy = s;
    s.insert(s.end(), copy.begin(), copy.end());
    CHECK(survival_curve(s, grid).p_hat == once.p_hat);
}

TEST_CASE("window grid spans the requested tail probabilities")
{
    const auto s = exponential_samples(100000, 11);
    const auto g = window_grid(s, 1e-3, 0.2, 20);
    REQUIRE(g.size() == 20);
    // Upper quantiles of Exp(1): -log p.
    CHECK(g.front() == doctest::Approx(-std::log(0.2 * 0.98)).epsilon(0.02));
    CHECK(g.back() == doctest::Approx(-std::log(1e-3 * 1.02)).epsilon(0.05));
    CHECK_THROWS_AS(window_grid(s, 0.2, 0.1, 20), ConfigError);
}

TEST_CASE("shape fit recovers the right shape and rejects the wrong one")
{
    const auto s = gamma_like_samples(1000000, 21);
    const auto curve = survival_curve(s, window_grid(s, 1e-2, 0.2, 30));
    const TailShape right{2.0, {{1.0, 1.0}}, ""};
    const TailShape wrong{0.0, {{1.0, 1.0}}, ""};
    const auto fit = shape_fit(curve, right, 1e-2, 0.2);
    CHECK(fit.max_abs_residual < 0.05);
    // C = e²/4.
    CHECK(fit.fitted_constant == doctest::Approx(2.0 - std::log(4.0)).epsilon(0.02));
    CHECK(fit.residuals.size() == fit.t.size());
    CHECK(shape_fit(curve, wrong, 1e-2, 0.2).max_abs_residual > 0.3);
}

TEST_CASE("shape fit needs points inside the window")
{
    const auto s = exponential_samples(1000, 1);
    const auto curve = survival_curve(s, {0.01, 0.02, 0.03});
    CHECK_THROWS_AS(shape_fit(curve, TailShape{0.0, {{1.0, 1.0}}, ""}), InsufficientWindow);
}

TEST_CASE("moment estimate")
{
    const auto m = moment_estimate({0.5, 0.5, 0.5}, 2.0);
    CHECK(m.mean == doctest::Approx(0.25));
    CHECK(m.stderr_ == 0.0);
    const auto v = moment_estimate({0.0, 1.0}, 1.0);
    CHECK(v.mean == 0.5);
    CHECK(v.stderr_ == doctest::Approx(0.5));
    CHECK_THROWS_AS(moment_estimate({}, 1.0), ConfigError);
    CHECK_THROWS_AS(moment_estimate({0.5}, 0.0), ConfigError);
}

TEST_CASE("two-sample KS")
{
    const auto a = exponential_samples(2000, 1);
    const auto same = ks_two_sample(a, a);
    CHECK(same.statistic == 0.0);
    CHECK(same.pass_1pct);
    CHECK(ks_two_sample(a, exponential_samples(3000, 2)).pass_1pct);
    std::vector<double> shifted;
    for (double v : a)
        shifted.push_back(v + 100.0);
    const auto apart = ks_two_sample(a, shifted);
    CHECK(apart.statistic == 1.0);
    CHECK_FALSE(apart.pass_1pct);
    CHECK(apart.critical == doctest::Approx(ks_c_1pct * std::sqrt(2.0 / 2000.0)));
    // Ties across samples are stepped together.
    CHECK(ks_two_sample({1.0, 1.0, 2.0}, {1.0, 2.0, 2.0}).statistic == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("one-sample KS")
{
    const auto a = exponential_samples(5000, 4);
    CHECK(ks_one_sample(a, [](double x) { return -std::expm1(-x); }).pass_1pct);
    CHECK_FALSE(ks_one_sample(a, [](double x) { return -std::expm1(-2.0 * x); }).pass_1pct);
    CHECK(ks_one_sample({0.5}, [](double x) { return x; }).statistic == doctest::Approx(0.5));
}

TEST_CASE("paired difference")
{
    const auto t = paired_difference({1.0, 2.0, 3.0, 4.0}, {0.0, 1.0, 2.0, 3.0});
    CHECK(t.diff == 1.0);
    CHECK(t.stderr_diff == 0.0);
    CHECK(t.z == INFINITY);
    CHECK_FALSE(t.pass);
    const auto u = paired_difference({1.0, 3.0}, {1.0, 1.0});
    CHECK(u.diff == 1.0);
    CHECK(u.stderr_diff == doctest::Approx(1.0));
    CHECK(u.pass);
    CHECK(mean_test({2.0, 2.0}, 2.0).pass);
    CHECK_THROWS_AS(paired_difference({1.0}, {1.0}), ConfigError);
}
