#include "fragtail/simulate.hpp"

#include "fragtail/errors.hpp"
#include "fragtail/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>

namespace fragtail {

namespace {

constexpr std::uint64_t pilot_runs = 2000;
constexpr double pilot_cutoff = 0x1p-8;
constexpr double pilot_margin = 1.25;
constexpr std::uint64_t pilot_salt = 0x70696c6f74ULL;

// Index of the part a uniformly placed point lands in, or -1 for dust.
int route(const SplitView& view, double u)
{
    double c = 0.0;
    const int n = static_cast<int>(view.parts.size());
    for (int j = 0; j < n; ++j) {
        c += view.parts[static_cast<std::size_t>(j)];
        if (u < c)
            return j;
    }
    return view.dust_fraction > 0.0 || n == 0 ? -1 : n - 1;
}

struct Node {
    double mass;
    double birth;
    std::uint64_t key;
    std::uint8_t tags;
};

} // namespace

void CascadeConfig::validate() const
{
    if (!(cutoff > 0.0 && cutoff < 1.0))
        throw ConfigError("cutoff must lie in (0, 1)");
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
        throw ConfigError("checkpoints must be sorted ascending");
    for (double c : checkpoints)
        if (!(c >= 0.0) || !std::isfinite(c))
            throw ConfigError("checkpoints must be finite and nonnegative");
    if (max_events == 0)
        throw ConfigError("max_events must be positive");
    if (zeta_rms && !(*zeta_rms >= 0.0))
        throw ConfigError("zeta_rms must be nonnegative");
}

CascadeSimulator::CascadeSimulator(DislocationSpec spec, CascadeConfig cfg)
    : spec_(std::move(spec)), cfg_(std::move(cfg)), rate_(spec_.total_mass())
{
    cfg_.validate();
    if (cfg_.zeta_rms) {
        zeta_rms_ = *cfg_.zeta_rms;
        return;
    }
    CascadeConfig pilot;
    pilot.alpha = cfg_.alpha;
    pilot.cutoff = std::max(cfg_.cutoff, pilot_cutoff);
    pilot.max_events = cfg_.max_events;
    pilot.seed = derive_seed(cfg_.seed, pilot_salt);
    pilot.track_tags = false;
    pilot.zeta_rms = 0.0;
    CascadeSimulator p(spec_, pilot);
    std::vector<double> sq(pilot_runs);
    for_each_run(p, 0, pilot_runs, [&](std::uint64_t i, CascadeRun&& r) {
        sq[i] = r.extinction_est * r.extinction_est;
    });
    double sum = 0.0;
    for (double v : sq)
        sum += v;
    zeta_rms_ = pilot_margin * std::sqrt(sum / double(pilot_runs));
}

CascadeRun CascadeSimulator::run_seeded(std::uint64_t root_key) const
{
    const double a = cfg_.alpha.abs();
    const double eps = cfg_.cutoff;
    const auto& cps = cfg_.checkpoints;
    const std::size_t nc = cps.size();
    const bool tags = cfg_.track_tags;

    CascadeRun run;
    run.checkpoints.assign(nc, CheckpointStats{});
    for (auto& t : run.tags.tags) {
        t.mass.assign(tags ? nc : 0, 0.0);
        t.death_time = tags ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    }
    run.tags.separation_time = tags ? 0.0 : std::numeric_limits<double>::quiet_NaN();

    std::vector<Node> stack;
    stack.reserve(256);
    stack.push_back({1.0, 0.0, root_key, static_cast<std::uint8_t>(tags ? 3 : 0)});
    double dust_sq = 0.0;
    SplitView view;

    while (!stack.empty()) {
        const Node n = stack.back();
        stack.pop_back();
        if (run.events == cfg_.max_events) {
            run.truncated = true;
            break;
        }
        ++run.events;

        SplitMix64 rng(n.key);
        const double u_wait = rng.uniform();
        const double u_split = rng.uniform();
        const double u_tag0 = rng.uniform();
        const double u_tag1 = rng.uniform();

        const double ma = std::pow(n.mass, a);
        const double death = n.birth - std::log(u_wait) * ma / rate_;
        if (n.birth == 0.0 && n.mass == 1.0)
            run.first_event_time = death;
        run.extinction_est = std::max(run.extinction_est, death);

        if (nc > 0) {
            auto it = std::lower_bound(cps.begin(), cps.end(), n.birth);
            for (std::size_t c = static_cast<std::size_t>(it - cps.begin()); c < nc && cps[c] < death; ++c) {
                auto& st = run.checkpoints[c];
                st.F1 = std::max(st.F1, n.mass);
                st.S1 += n.mass;
                st.S2 += n.mass * n.mass;
                if (n.tags & 1)
                    run.tags.tags[0].mass[c] = n.mass;
                if (n.tags & 2)
                    run.tags.tags[1].mass[c] = n.mass;
            }
        }
        if (cfg_.snapshot_time && n.birth <= *cfg_.snapshot_time && *cfg_.snapshot_time < death)
            run.snapshot.push_back(n.mass);

        spec_.split_from_uniform(u_split, view);

        int dest[2] = {-2, -2};
        if (n.tags & 1)
            dest[0] = route(view, u_tag0);
        if (n.tags & 2)
            dest[1] = route(view, u_tag1);

        std::uint8_t live_tags = 0;
        const auto nparts = view.parts.size();
        for (std::size_t j = nparts; j-- > 0;) {
            const double cm = n.mass * view.parts[j];
            std::uint8_t child_tags = 0;
            if (dest[0] == int(j))
                child_tags |= 1;
            if (dest[1] == int(j))
                child_tags |= 2;
            if (cm >= eps) {
                stack.push_back({cm, death, derive_seed(n.key, j), child_tags});
                live_tags |= child_tags;
            } else if (cm > 0.0) {
                dust_sq += std::pow(cm, 2.0 * a);
            }
        }

        for (int b = 0; b < 2; ++b) {
            if (!(n.tags & (1 << b)) || (live_tags & (1 << b)))
                continue;
            auto& rec = run.tags.tags[static_cast<std::size_t>(b)];
            rec.death_time = death;
            rec.killed = dest[b] == -1;
        }
        if (n.tags == 3 && !(dest[0] == dest[1] && live_tags == 3))
            run.tags.separation_time = death;
    }

    run.trunc_error_bound = std::sqrt(dust_sq) * zeta_rms_;
    return run;
}

CascadeRun run_cascade(const DislocationSpec& spec, const CascadeConfig& cfg, std::uint64_t run_seed)
{
    return CascadeSimulator(spec, cfg).run_seeded(run_seed);
}

std::pair<CascadeRun, TwoTagRecord> run_two_tags(const DislocationSpec& spec, const CascadeConfig& cfg,
                                                 std::uint64_t run_seed)
{
    CascadeConfig c = cfg;
    c.track_tags = true;
    CascadeRun run = run_cascade(spec, c, run_seed);
    TwoTagRecord rec = run.tags;
    return {std::move(run), std::move(rec)};
}

ZetaTagSampler::ZetaTagSampler(DislocationSpec spec, AlphaIndex alpha, double tol)
    : spec_(std::move(spec)), alpha_(alpha), tol_(tol), rate_(spec_.total_mass()),
      phi_abs_alpha_(PhiEvaluator(spec_).phi(alpha.abs()))
{
    if (!(tol > 0.0))
        throw ConfigError("zeta-tag tolerance must be positive");
}

ZetaTagSample ZetaTagSampler::sample(SplitMix64& rng) const
{
    constexpr std::uint64_t max_steps = 100000000;
    const double a = alpha_.abs();
    ZetaTagSample out;
    double m = 1.0;
    SplitView view;
    for (;;) {
        const double ma = std::pow(m, a);
        const double remainder = ma / phi_abs_alpha_;
        if (remainder < tol_) {
            out.truncated_mean_bound = remainder;
            return out;
        }
        if (++out.steps > max_steps)
            throw NumericalFailure("tagged lineage did not terminate", remainder);
        out.value -= std::log(rng.uniform()) * ma / rate_;
        spec_.split_from_uniform(rng.uniform(), view);
        const int j = route(view, rng.uniform());
        if (j < 0) {
            out.killed = true;
            return out;
        }
        m *= view.parts[static_cast<std::size_t>(j)];
    }
}

ZetaTagSample simulate_zeta_tag(const DislocationSpec& spec, AlphaIndex alpha, double tol, SplitMix64& rng)
{
    return ZetaTagSampler(spec, alpha, tol).sample(rng);
}

unsigned worker_threads()
{
    if (const char* env = std::getenv("FRAGTAIL_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return static_cast<unsigned>(v);
        throw ConfigError(std::string("FRAGTAIL_THREADS must be a positive integer, got '") + env + "'");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

template <class Body>
void parallel_indices(std::uint64_t count, unsigned threads, Body&& body)
{
    threads = static_cast<unsigned>(std::clamp<std::uint64_t>(threads, 1, std::max<std::uint64_t>(count, 1)));
    if (threads == 1) {
        for (std::uint64_t i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::uint64_t i = w; i < count; i += threads)
                    body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace

void for_each_run(const CascadeSimulator& sim, std::uint64_t first, std::uint64_t count,
                  const std::function<void(std::uint64_t, CascadeRun&&)>& sink, unsigned threads)
{
    parallel_indices(count, threads, [&](std::uint64_t i) { sink(first + i, sim.run(first + i)); });
}

std::vector<ZetaTagSample> sample_zeta_tags(const ZetaTagSampler& sampler, std::uint64_t base_seed, std::uint64_t n,
                                            unsigned threads)
{
    std::vector<ZetaTagSample> out(n);
    parallel_indices(n, threads, [&](std::uint64_t i) {
        SplitMix64 rng(derive_seed(base_seed, i));
        out[i] = sampler.sample(rng);
    });
    return out;
}

} // namespace fragtail
