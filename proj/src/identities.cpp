#include "fragtail/identities.hpp"

#include "fragtail/errors.hpp"

#include <algorithm>
#include <cmath>

namespace fragtail {

IdentityReport paired_identity(const std::string& suite, const CascadeSimulator& sim, std::uint64_t runs)
{
    if (suite != "eq10" && suite != "s2" && suite != "joint")
        throw ConfigError("unknown paired identity suite '" + suite + "'");
    if (!sim.config().track_tags)
        throw ConfigError("identity suites need tag tracking");
    const auto& cps = sim.config().checkpoints;
    if (cps.empty())
        throw ConfigError("identity suites need checkpoints");
    const std::size_t nc = cps.size();
    std::vector<std::vector<double>> x(nc, std::vector<double>(runs));
    std::vector<std::vector<double>> y(nc, std::vector<double>(runs));

    for_each_run(sim, 0, runs, [&](std::uint64_t i, CascadeRun&& r) {
        const auto& t0 = r.tags.tags[0].mass;
        const auto& t1 = r.tags.tags[1].mass;
        for (std::size_t c = 0; c < nc; ++c) {
            const double s2 = r.checkpoints[c].S2;
            if (suite == "eq10") {
                x[c][i] = r.tags.separation_time > cps[c] ? 1.0 : 0.0;
                y[c][i] = t0[c];
            } else if (suite == "s2") {
                x[c][i] = t0[c];
                y[c][i] = s2;
            } else {
                x[c][i] = t0[c] * t1[c];
                y[c][i] = s2 * s2;
            }
        }
    });

    IdentityReport rep;
    rep.suite = suite;
    rep.t = cps;
    rep.pass = true;
    for (std::size_t c = 0; c < nc; ++c) {
        rep.paired.push_back(paired_difference(x[c], y[c]));
        rep.pass = rep.pass && rep.paired.back().pass;
    }
    return rep;
}

IdentityReport eq13_identity(const DislocationSpec& spec, const CascadeConfig& cfg, std::uint64_t runs,
                             double target_p)
{
    constexpr std::uint64_t pilot_salt = 0x65713133ULL;
    constexpr std::uint64_t pool_salt = 0x706f6f6cULL;
    constexpr std::uint64_t draw_salt = 0x64726177ULL;

    CascadeConfig base = cfg;
    base.checkpoints.clear();
    base.track_tags = false;
    base.snapshot_time.reset();

    // Independent batches: pilot (choose t), pool (the ζ⁽ⁱ⁾), main (snapshots).
    auto batch = [&](std::uint64_t salt, std::optional<double> snapshot) {
        CascadeConfig c = base;
        c.seed = derive_seed(cfg.seed, salt);
        c.snapshot_time = snapshot;
        return CascadeSimulator(spec, c);
    };
    auto extinctions = [&](const CascadeSimulator& sim, std::uint64_t n) {
        std::vector<double> out(n);
        for_each_run(sim, 0, n, [&](std::uint64_t i, CascadeRun&& r) { out[i] = r.extinction_est; });
        return out;
    };

    std::vector<double> pilot = extinctions(batch(pilot_salt, std::nullopt), runs);
    std::sort(pilot.begin(), pilot.end());
    const double t = pilot[static_cast<std::size_t>(std::floor((1.0 - target_p) * double(runs)))];

    const std::uint64_t pool_size = 2 * runs;
    const std::vector<double> pool = extinctions(batch(pool_salt, std::nullopt), pool_size);

    const CascadeSimulator main = batch(0, t);
    const double a = cfg.alpha.abs();
    std::vector<double> left(runs);
    std::vector<double> right(runs);
    std::uint64_t above = 0;
    for_each_run(main, 0, runs, [&](std::uint64_t i, CascadeRun&& r) {
        left[i] = std::max(r.extinction_est - t, 0.0);
        SplitMix64 rng(derive_seed(derive_seed(cfg.seed, draw_salt), i));
        double sup = 0.0;
        for (double m : r.snapshot) {
            const auto k = static_cast<std::size_t>(rng() % pool_size);
            sup = std::max(sup, std::pow(m, a) * pool[k]);
        }
        right[i] = sup;
    });
    for (double v : left)
        above += v > 0.0;

    IdentityReport rep;
    rep.suite = "eq13";
    rep.t = {t};
    rep.p_hat_at_t = double(above) / double(runs);
    rep.ks = ks_two_sample(left, right);
    rep.pass = rep.ks->pass_1pct;
    return rep;
}

IdentityReport run_identity_suite(const std::string& suite, const DislocationSpec& spec, const CascadeConfig& cfg,
                                  std::uint64_t runs)
{
    if (suite == "eq13")
        return eq13_identity(spec, cfg, runs);
    CascadeConfig c = cfg;
    c.track_tags = true;
    return paired_identity(suite, CascadeSimulator(spec, c), runs);
}

} // namespace fragtail
