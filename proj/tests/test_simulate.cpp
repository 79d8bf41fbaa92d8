#include "fragtail/errors.hpp"
#include "fragtail/simulate.hpp"
#include "fragtail/stats.hpp"

#include <doctest.h>

#include <cmath>

using namespace fragtail;

namespace {

CascadeConfig config(double cutoff, std::vector<double> checkpoints = {}, std::uint64_t seed = 1)
{
    CascadeConfig c;
    c.alpha = AlphaIndex(-1.0);
    c.cutoff = cutoff;
    c.checkpoints = std::move(checkpoints);
    c.seed = seed;
    c.zeta_rms = 1.0;
    return c;
}

} // namespace

TEST_CASE("SplitMix64 output is pinned")
{
    SplitMix64 rng(0);
    CHECK(rng() == 0xE220A8397B1DCDAFULL);
    CHECK(derive_seed(5, 2) == mix64(mix64(5) + golden_gamma * 3));
    SplitMix64 u(123);
    for (int i = 0; i < 10000; ++i) {
        const double v = u.uniform();
        CHECK((v > 0.0 && v < 1.0));
    }
}

TEST_CASE("config validation")
{
    const auto spec = families::identical_k(2);
    CHECK_THROWS_AS(CascadeSimulator(spec, config(0.0)), ConfigError);
    CHECK_THROWS_AS(CascadeSimulator(spec, config(1.0)), ConfigError);
    CHECK_THROWS_AS(CascadeSimulator(spec, config(0.1, {2.0, 1.0})), ConfigError);
    CHECK_THROWS_AS(CascadeSimulator(spec, config(0.1, {-1.0})), ConfigError);
    auto c = config(0.1);
    c.max_events = 0;
    CHECK_THROWS_AS(CascadeSimulator(spec, c), ConfigError);
    CHECK_THROWS_AS(CascadeSimulator(families::stable(1.5), config(0.1)), UnsupportedSampling);
}

TEST_CASE("identical halves: S2 is 1/2 just after the first split")
{
    const auto spec = families::identical_k(2);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const CascadeSimulator probe(spec, config(0x1p-12, {}, seed));
        const double t1 = probe.run(0).first_event_time;
        const CascadeSimulator sim(spec, config(0x1p-12, {t1 * (1.0 - 1e-12), t1 * (1.0 + 1e-12)}, seed));
        const auto r = sim.run(0);
        CHECK(r.first_event_time == t1);
        CHECK(r.checkpoints[0].S2 == 1.0);
        CHECK(r.checkpoints[0].F1 == 1.0);
        CHECK(r.checkpoints[1].S2 == 0.5);
        CHECK(r.checkpoints[1].S1 == 1.0);
        CHECK(r.checkpoints[1].F1 == 0.5);
    }
}

TEST_CASE("first split time is Exp(total mass)")
{
    const CascadeSimulator sim(families::identical_k(2).scaled(2.0), config(0.75));
    std::vector<double> t;
    for (std::uint64_t i = 0; i < 20000; ++i) {
        const auto r = sim.run(i);
        CHECK(r.events == 1);
        t.push_back(r.first_event_time);
    }
    CHECK(mean_test(t, 0.5).pass);
    CHECK(ks_one_sample(t, [](double x) { return -std::expm1(-2.0 * x); }).pass_1pct);
}

TEST_CASE("identical halves: mean separation time is 4/3")
{
    // Together through k splits with probability 2^-k, each split taking mean 2^-k.
    // The cutoff drops only the terms past k = 10, about 4^-10 in total.
    const CascadeSimulator sim(families::identical_k(2), config(0x1p-10));
    std::vector<double> sep;
    for (std::uint64_t i = 0; i < 20000; ++i)
        sep.push_back(sim.run(i).tags.separation_time);
    CHECK(mean_test(sep, 4.0 / 3.0).pass);
}

TEST_CASE("tags are killed only by dust")
{
    const CascadeSimulator sim(families::uniform_k(2), config(0x1p-8));
    for (std::uint64_t i = 0; i < 500; ++i) {
        const auto r = sim.run(i);
        CHECK_FALSE(r.tags.tags[0].killed);
        CHECK_FALSE(r.tags.tags[1].killed);
    }
    // Each split keeps 0.3 + 0.3 and turns 0.4 into dust.
    const CascadeSimulator dusty(DislocationSpec::finite_atomic({{{0.3, 0.3}, 1.0}}), config(0x1p-16));
    int killed = 0;
    for (std::uint64_t i = 0; i < 2000; ++i)
        killed += dusty.run(i).tags.tags[0].killed;
    // Ten splits above the cutoff: P(killed) = 1 - 0.6^10.
    CHECK(killed > 1950);
}

TEST_CASE("checkpoint statistics satisfy the ordering invariants")
{
    const std::vector<double> cps{0.0, 0.5, 1.0, 2.0, 4.0};
    for (const auto& spec : {families::uniform_k(2), families::beta(0.7, 1.3),
                             DislocationSpec::finite_atomic({{{0.5, 0.3}, 0.6}, {{0.4, 0.4, 0.2}, 0.4}})}) {
        const CascadeSimulator sim(spec, config(0x1p-10, cps));
        for (std::uint64_t i = 0; i < 300; ++i) {
            const auto r = sim.run(i);
            CHECK(r.checkpoints[0].S1 == 1.0);
            CHECK(r.first_event_time <= r.extinction_est);
            CHECK(r.trunc_error_bound >= 0.0);
            double prev_s1 = 1.0;
            for (std::size_t c = 0; c < cps.size(); ++c) {
                const auto& st = r.checkpoints[c];
                CHECK(st.S1 <= prev_s1 + 1e-15);
                CHECK(st.F1 <= st.S1 + 1e-15);
                CHECK(st.S2 <= st.F1 * st.S1 + 1e-15);
                CHECK(st.S2 >= st.F1 * st.F1 - 1e-15);
                for (const auto& tag : r.tags.tags)
                    CHECK(tag.mass[c] <= st.F1);
                prev_s1 = st.S1;
            }
            for (const auto& tag : r.tags.tags)
                CHECK(tag.death_time <= r.extinction_est);
            CHECK(r.tags.separation_time <= std::min(r.tags.tags[0].death_time, r.tags.tags[1].death_time));
        }
    }
}

TEST_CASE("a smaller cutoff only expands more of the same cascade")
{
    const auto spec = families::uniform_k(2);
    const CascadeSimulator coarse(spec, config(0x1p-6, {0.5, 1.0}));
    const CascadeSimulator fine(spec, config(0x1p-10, {0.5, 1.0}));
    for (std::uint64_t i = 0; i < 200; ++i) {
        const auto a = coarse.run(i);
        const auto b = fine.run(i);
        CHECK(a.first_event_time == b.first_event_time);
        CHECK(a.extinction_est <= b.extinction_est);
        CHECK(a.events <= b.events);
        for (std::size_t c = 0; c < 2; ++c)
            CHECK(a.checkpoints[c].S1 <= b.checkpoints[c].S1 + 1e-15);
    }
}

TEST_CASE("event cap truncates the run")
{
    auto c = config(0x1p-20);
    c.max_events = 5;
    const auto r = CascadeSimulator(families::uniform_k(2), c).run(0);
    CHECK(r.truncated);
    CHECK(r.events == 5);
}

TEST_CASE("runs replay bit for bit across thread counts")
{
    auto c = config(0x1p-8, {0.5, 1.5});
    c.zeta_rms.reset();
    const CascadeSimulator sim(families::beta(0.7, 1.3), c);
    const CascadeSimulator again(families::beta(0.7, 1.3), c);
    CHECK(sim.zeta_rms() == again.zeta_rms());
    CHECK(sim.zeta_rms() > 0.0);
    auto collect = [&](unsigned threads) {
        std::vector<double> out(300);
        for_each_run(sim, 0, 300, [&](std::uint64_t i, CascadeRun&& r) {
            out[i] = r.extinction_est + r.checkpoints[1].S2 + r.tags.separation_time;
        }, threads);
        return out;
    };
    CHECK(collect(1) == collect(3));
    CHECK(sim.run(17).extinction_est == run_cascade(families::beta(0.7, 1.3), c, derive_seed(c.seed, 17)).extinction_est);
}

TEST_CASE("tagged extinction time has mean 2 for halves and 3 for the uniform split")
{
    const std::pair<DislocationSpec, double> cases[] = {{families::identical_k(2), 2.0}, {families::uniform_k(2), 3.0}};
    for (const auto& [spec, mean] : cases) {
        const ZetaTagSampler sampler(spec, AlphaIndex(-1.0), 1e-6);
        const auto samples = sample_zeta_tags(sampler, 42, 20000, 1);
        std::vector<double> v;
        for (const auto& s : samples) {
            CHECK(s.truncated_mean_bound < 1e-6);
            CHECK_FALSE(s.killed);
            v.push_back(s.value);
        }
        CHECK(mean_test(v, mean).pass);
    }
    CHECK_THROWS_AS(ZetaTagSampler(families::uniform_k(2), AlphaIndex(-1.0), 0.0), ConfigError);
}

TEST_CASE("tagged sampler matches tag death times in the cascade")
{
    // Tolerance ε/φ(|α|) stops the lineage exactly where the cascade cutoff ε does.
    const auto spec = families::uniform_k(2);
    const double eps = 0x1p-10;
    const ZetaTagSampler sampler(spec, AlphaIndex(-1.0), eps / PhiEvaluator(spec).phi(1.0));
    std::vector<double> lone;
    for (const auto& s : sample_zeta_tags(sampler, 7, 3000, 1))
        lone.push_back(s.value);
    const CascadeSimulator sim(spec, config(eps, {}, 8));
    std::vector<double> tagged;
    for (std::uint64_t i = 0; i < 3000; ++i)
        tagged.push_back(sim.run(i).tags.tags[1].death_time);
    CHECK(ks_two_sample(lone, tagged).pass_1pct);
}
