#pragma once

#include "fragtail/simulate.hpp"
#include "fragtail/stats.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fragtail {

/// Exact-in-law identities checked on simulated cascades.
///   eq10:  P(T_sep > t) = E[F_tag1(t)]
///   s2:    E[F_tag(t)] = E[S2(t)]
///   joint: E[F_tag1(t) F_tag2(t)] = E[S2(t)²]
///   eq13:  (ζ - t)⁺ =(d) sup_i F_i(t)^{|α|} ζ⁽ⁱ⁾ with independent ζ⁽ⁱ⁾
struct IdentityReport {
    std::string suite;
    std::vector<double> t;
    std::vector<PairedTest> paired;  // one per checkpoint
    std::optional<KsResult> ks;
    double p_hat_at_t = 0.0;  // eq13 only
    bool pass = false;
};

IdentityReport paired_identity(const std::string& suite, const CascadeSimulator& sim, std::uint64_t runs);

/// Picks t with empirical P(ζ > t) ≈ target_p from a pilot batch, then runs the eq13 comparison.
IdentityReport eq13_identity(const DislocationSpec& spec, const CascadeConfig& cfg, std::uint64_t runs,
                             double target_p = 0.3);

IdentityReport run_identity_suite(const std::string& suite, const DislocationSpec& spec, const CascadeConfig& cfg,
                                  std::uint64_t runs);

} // namespace fragtail
