#pragma once

#include "fragtail/asymptotics.hpp"
#include "fragtail/measures.hpp"
#include "fragtail/rng.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace fragtail {

struct CascadeConfig {
    AlphaIndex alpha{-1.0};
    double cutoff = 0x1p-30;
    std::vector<double> checkpoints;
    std::uint64_t max_events = std::uint64_t(1) << 32;
    std::uint64_t seed = 0;
    bool track_tags = true;
    /// Records every live mass at this time when set.
    std::optional<double> snapshot_time;
    /// RMS of the extinction time of a unit mass; estimated by a pilot batch when unset.
    std::optional<double> zeta_rms;

    void validate() const;
};

struct CheckpointStats {
    double F1 = 0.0;
    double S1 = 0.0;
    double S2 = 0.0;
};

struct TagRecord {
    std::vector<double> mass;  // per checkpoint, 0 once dead
    double death_time = 0.0;
    bool killed = false;
};

struct TwoTagRecord {
    std::array<TagRecord, 2> tags;
    /// First event at which the tags stop sharing a live fragment.
    double separation_time = 0.0;
};

struct CascadeRun {
    double extinction_est = 0.0;
    /// Bound on the expected extinction time still owed by truncated fragments.
    double trunc_error_bound = 0.0;
    double first_event_time = 0.0;
    std::uint64_t events = 0;
    bool truncated = false;
    std::vector<CheckpointStats> checkpoints;
    TwoTagRecord tags;
    std::vector<double> snapshot;
};

/// Event-driven (α, ν) cascade for a finite measure.
///
/// Each fragment owns a 64-bit key; the root key is the run seed and the
/// key of child j is derive_seed(parent_key, j). A fragment's waiting time,
/// split and tag routes are drawn from SplitMix64(key) in that order, so a
/// run is a pure function of (seed, measure, α) and the cutoff only decides
/// which fragments are expanded.
class CascadeSimulator {
public:
    CascadeSimulator(DislocationSpec spec, CascadeConfig cfg);

    const CascadeConfig& config() const { return cfg_; }
    const DislocationSpec& spec() const { return spec_; }
    double zeta_rms() const { return zeta_rms_; }

    /// Run `index` of the batch, seeded with derive_seed(cfg.seed, index).
    CascadeRun run(std::uint64_t index) const { return run_seeded(derive_seed(cfg_.seed, index)); }
    CascadeRun run_seeded(std::uint64_t root_key) const;

private:
    DislocationSpec spec_;
    CascadeConfig cfg_;
    double rate_;
    double zeta_rms_ = 0.0;
};

CascadeRun run_cascade(const DislocationSpec& spec, const CascadeConfig& cfg, std::uint64_t run_seed);
std::pair<CascadeRun, TwoTagRecord> run_two_tags(const DislocationSpec& spec, const CascadeConfig& cfg,
                                                 std::uint64_t run_seed);

struct ZetaTagSample {
    double value = 0.0;
    /// Expected remaining lifetime m^{|α|}/φ(|α|) when the lineage was cut; 0 if killed.
    double truncated_mean_bound = 0.0;
    std::uint64_t steps = 0;
    bool killed = false;
};

/// Tagged lineage alone: size-biased walk through split outcomes.
class ZetaTagSampler {
public:
    ZetaTagSampler(DislocationSpec spec, AlphaIndex alpha, double tol);

    double phi_at_abs_alpha() const { return phi_abs_alpha_; }
    ZetaTagSample sample(SplitMix64& rng) const;

private:
    DislocationSpec spec_;
    AlphaIndex alpha_;
    double tol_;
    double rate_;
    double phi_abs_alpha_;
};

ZetaTagSample simulate_zeta_tag(const DislocationSpec& spec, AlphaIndex alpha, double tol, SplitMix64& rng);

/// FRAGTAIL_THREADS if set, else the hardware concurrency.
unsigned worker_threads();

/// Runs indices [first, first + count) across `threads` workers; `sink`
/// receives each run exactly once, from any worker.
void for_each_run(const CascadeSimulator& sim, std::uint64_t first, std::uint64_t count,
                  const std::function<void(std::uint64_t, CascadeRun&&)>& sink, unsigned threads = worker_threads());

/// Sample i uses SplitMix64(derive_seed(base_seed, i)).
std::vector<ZetaTagSample> sample_zeta_tags(const ZetaTagSampler& sampler, std::uint64_t base_seed, std::uint64_t n,
                                            unsigned threads = worker_threads());

} // namespace fragtail
