#include "fragtail/errors.hpp"
#include "fragtail/measure_io.hpp"
#include "fragtail/measures.hpp"
#include "fragtail/rng.hpp"
#include "fragtail/stats.hpp"

#include <doctest.h>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <numeric>

using namespace fragtail;

namespace {

void check_fragment_vector(const FragmentVector& f)
{
    for (std::size_t i = 1; i < f.parts.size(); ++i)
        CHECK(f.parts[i] <= f.parts[i - 1]);
    const double sum = std::accumulate(f.parts.begin(), f.parts.end(), 0.0);
    CHECK(std::abs(sum + f.dust_fraction - 1.0) <= 2.3e-16);
    CHECK(f.dust_fraction >= 0.0);
}

} // namespace

TEST_CASE("identical halves always split in two")
{
    const auto spec = families::identical_k(2);
    SplitMix64 rng(7);
    for (int i = 0; i < 1000; ++i) {
        const auto f = sample_split(spec, rng);
        REQUIRE(f.parts.size() == 2);
        CHECK(f.parts[0] == 0.5);
        CHECK(f.parts[1] == 0.5);
        CHECK(f.dust_fraction == 0.0);
    }
}

TEST_CASE("uniform binary split has E[s1] = 3/4")
{
    const auto spec = families::uniform_k(2);
    SplitMix64 rng(11);
    std::vector<double> s1;
    for (int i = 0; i < 100000; ++i)
        s1.push_back(sample_split(spec, rng).parts[0]);
    CHECK(mean_test(s1, 0.75).pass);
}

TEST_CASE("atoms that do not split are rejected")
{
    CHECK_THROWS_AS(DislocationSpec::finite_atomic({{{1.0, 0.0}, 1.0}}), ConfigError);
    CHECK_THROWS_AS(DislocationSpec::finite_atomic({{{0.3, 0.5}, 1.0}}), ConfigError);
    CHECK_THROWS_AS(DislocationSpec::finite_atomic({{{0.6, 0.6}, 1.0}}), ConfigError);
    CHECK_THROWS_AS(DislocationSpec::finite_atomic({{{0.5, 0.5}, 0.0}}), ConfigError);
}

TEST_CASE("total mass")
{
    CHECK(total_mass(families::identical_k(2)) == 1.0);
    CHECK(total_mass(DislocationSpec::finite_atomic({{{0.5, 0.5}, 0.3}, {{0.7, 0.3}, 0.7}})) ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK(total_mass(families::identical_k(2).scaled(2.0)) == 2.0);
    CHECK(total_mass(families::beta(2.0, 3.0).scaled(0.25)) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK_THROWS_AS(total_mass(families::stable(1.5)), UnsupportedSampling);
}

TEST_CASE("scaling leaves the split law unchanged")
{
    for (const auto& spec : {families::uniform_k(2), families::beta(0.7, 2.5), families::identical_k(3)}) {
        const auto scaled = spec.scaled(3.5);
        SplitMix64 rng(3);
        for (int i = 0; i < 200; ++i) {
            const double u = rng.uniform();
            CHECK(spec.split_from_uniform(u).parts == scaled.split_from_uniform(u).parts);
        }
    }
}

TEST_CASE("samples are nonincreasing and conserve mass with dust")
{
    const auto dusty = DislocationSpec::finite_atomic({{{0.5, 0.3}, 0.6}, {{0.4, 0.4, 0.2}, 0.4}});
    for (const auto& spec : {dusty, families::uniform_k(2), families::beta(0.5, 0.8), families::identical_k(5)}) {
        SplitMix64 rng(5);
        for (int i = 0; i < 2000; ++i)
            check_fragment_vector(sample_split(spec, rng));
    }
}

TEST_CASE("analytic-only measures cannot be sampled")
{
    SplitMix64 rng(1);
    CHECK_THROWS_AS(sample_split(families::ford(0.3), rng), UnsupportedSampling);
    CHECK_THROWS_AS(sample_split(families::uniform_k(4), rng), UnsupportedSampling);
}

TEST_CASE("beta sampler passes KS against the incomplete beta law of s1")
{
    // P(s1 <= x) = I_x(a, b) - I_{1-x}(a, b) for x in [1/2, 1].
    const std::pair<double, double> params[] = {{1.0, 1.0}, {2.0, 3.0}, {0.5, 0.5}, {0.6, 4.0}};
    for (const auto& [a, b] : params) {
        CAPTURE(a);
        CAPTURE(b);
        const auto spec = families::beta(a, b);
        SplitMix64 rng(derive_seed(99, static_cast<std::uint64_t>(10 * a + b)));
        std::vector<double> s1;
        for (int i = 0; i < 20000; ++i)
            s1.push_back(sample_split(spec, rng).parts[0]);
        const auto ks = ks_one_sample(s1, [&](double x) {
            return boost::math::ibeta(a, b, x) - boost::math::ibeta(a, b, 1.0 - x);
        });
        CHECK(ks.pass_1pct);
    }
}

TEST_CASE("smaller-part spline cdf is accurate")
{
    const double a = 2.0, b = 3.0;
    const auto spec = families::beta(a, b);
    for (double v : {1e-6, 0.01, 0.1, 0.25, 0.4, 0.5}) {
        // P(min(B, 1-B) <= v) = P(B <= v) + P(B >= 1 - v).
        const double want = boost::math::ibeta(a, b, v) + 1.0 - boost::math::ibeta(a, b, 1.0 - v);
        CHECK(spec.smaller_part_cdf(v) == doctest::Approx(want).epsilon(1e-9));
    }
    for (double u : {1e-9, 0.1, 0.5, 0.9, 1 - 1e-9})
        CHECK(spec.smaller_part_cdf(spec.smaller_part_quantile(u)) == doctest::Approx(u).epsilon(1e-9));
}

TEST_CASE("integrability of (1 - s1)^-1")
{
    const auto ex1 = corollary3_integrability(families::identical_k(2));
    CHECK(ex1.status == Integrability::Status::finite);
    CHECK(ex1.value == doctest::Approx(2.0));

    // E[1/min(B, 1-B)] for B ~ Beta(2, 3) by Gauss-Kronrod on each half.
    const boost::math::beta_distribution<> law(2.0, 3.0);
    auto f = [&](double v) { return boost::math::pdf(law, v) / std::min(v, 1.0 - v); };
    const double want = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 0.5) +
                        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.5, 1.0);
    const auto b23 = corollary3_integrability(families::beta(2.0, 3.0));
    CHECK(b23.status == Integrability::Status::finite);
    CHECK(b23.value == doctest::Approx(want).epsilon(1e-8));

    CHECK(corollary3_integrability(families::uniform_k(2)).status == Integrability::Status::infinite);
    CHECK(corollary3_integrability(families::beta(1.0, 1.0)).status == Integrability::Status::infinite);
    CHECK(corollary3_integrability(families::beta(0.5, 3.0)).status == Integrability::Status::infinite);
    CHECK(corollary3_integrability(families::stable(2.0)).status == Integrability::Status::unknown);
}

TEST_CASE("divergence detection without a declared endpoint exponent")
{
    auto flat = DislocationSpec::binary_density([](double) { return 1.0; }, 1.0, std::nullopt);
    CHECK(corollary3_integrability(flat).status == Integrability::Status::infinite);
    auto linear = DislocationSpec::binary_density([](double v) { return v; }, 1.0, std::nullopt);
    const auto r = corollary3_integrability(linear);
    CHECK(r.status == Integrability::Status::finite);
    // Normalized density 8v on (0, 1/2]: ∫ 8v/v dv = 4.
    CHECK(r.value == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("json measure specs round-trip")
{
    const char* docs[] = {
        R"({"family":"identical-k","params":{"k":3},"scale":2.0})",
        R"({"family":"uniform-k","params":{"k":2},"scale":1.0})",
        R"({"family":"beta","params":{"a":0.7,"b":1.3},"scale":0.5})",
        R"({"family":"stable","params":{"gamma":1.5},"scale":1.0})",
        R"({"family":"ford","params":{"a":0.3},"scale":1.0})",
        R"({"family":"beta-splitting","params":{"beta":-1.6},"scale":1.0})",
        R"({"family":"atomic","params":{"atoms":[{"parts":[0.5,0.3],"weight":0.6}]},"scale":1.0})",
    };
    for (const char* text : docs) {
        CAPTURE(text);
        const auto doc = nlohmann::json::parse(text);
        const auto spec = measure_from_json(doc);
        const auto back = measure_to_json(spec);
        CHECK(back["family"] == doc["family"]);
        CHECK(back["params"] == doc["params"]);
        CHECK(back["scale"].get<double>() == doc["scale"].get<double>());
        CHECK(measure_to_json(measure_from_json(back)) == back);
    }
    CHECK_THROWS_AS(measure_from_json(nlohmann::json::parse(R"({"family":"nope"})")), ConfigError);
    CHECK_THROWS_AS(measure_from_json(nlohmann::json::parse(R"({"family":"beta","params":{"a":1}})")), ConfigError);
    CHECK_THROWS_AS(load_measure_file("/nonexistent/measure.json"), ConfigError);
}
