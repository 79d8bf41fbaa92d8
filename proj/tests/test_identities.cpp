#include "fragtail/errors.hpp"
#include "fragtail/identities.hpp"

#include <doctest.h>

using namespace fragtail;

namespace {

CascadeConfig config(std::vector<double> checkpoints, std::uint64_t seed)
{
    CascadeConfig c;
    c.alpha = AlphaIndex(-1.0);
    c.cutoff = 0x1p-10;
    c.checkpoints = std::move(checkpoints);
    c.seed = seed;
    return c;
}

} // namespace

TEST_CASE("paired identities hold for the uniform binary split")
{
    const auto spec = families::uniform_k(2);
    for (const char* suite : {"eq10", "s2", "joint"}) {
        CAPTURE(suite);
        const auto rep = run_identity_suite(suite, spec, config({1.0, 2.0, 4.0}, 31), 20000);
        CHECK(rep.suite == suite);
        REQUIRE(rep.paired.size() == 3);
        for (const auto& p : rep.paired) {
            CHECK(std::abs(p.z) <= 4.0);
            CHECK(p.mean_x > 0.0);
        }
        CHECK(rep.pass);
    }
}

TEST_CASE("paired identities hold for a measure with dust")
{
    const auto spec = DislocationSpec::finite_atomic({{{0.5, 0.3}, 0.6}, {{0.4, 0.4, 0.2}, 0.4}});
    for (const char* suite : {"eq10", "s2"}) {
        CAPTURE(suite);
        CHECK(run_identity_suite(suite, spec, config({0.5, 1.5}, 32), 10000).pass);
    }
}

TEST_CASE("identical halves: P(T_sep > t) tracks S2 exactly at t = 0")
{
    const auto rep = run_identity_suite("eq10", families::identical_k(2), config({0.0}, 33), 1000);
    CHECK(rep.paired[0].mean_x == 1.0);
    CHECK(rep.paired[0].mean_y == 1.0);
}

TEST_CASE("shifted extinction time matches the sup over fragments")
{
    const auto rep = run_identity_suite("eq13", families::uniform_k(2), config({}, 34), 3000);
    REQUIRE(rep.ks.has_value());
    CHECK(rep.p_hat_at_t == doctest::Approx(0.3).epsilon(0.1));
    CHECK(rep.pass);
}

TEST_CASE("identity suites reject bad configurations")
{
    const auto spec = families::uniform_k(2);
    CHECK_THROWS_AS(run_identity_suite("nope", spec, config({1.0}, 1), 10), ConfigError);
    CHECK_THROWS_AS(run_identity_suite("s2", spec, config({}, 1), 10), ConfigError);
}
