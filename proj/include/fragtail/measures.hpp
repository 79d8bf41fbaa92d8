#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fragtail {

/// One atom of a finite dislocation measure: a nonincreasing list of mass
/// fractions (sum <= 1, the rest is dust) carrying the given weight.
struct Atom {
    std::vector<double> parts;
    double weight = 0.0;
};

struct FragmentVector {
    std::vector<double> parts;
    double dust_fraction = 0.0;
};

/// Non-owning view of one split; `parts` may point into `buffer`.
struct SplitView {
    std::span<const double> parts;
    double dust_fraction = 0.0;
    std::array<double, 2> buffer{};
};

enum class MeasureKind { finite_atomic, finite_binary_density, analytic_only };

const char* to_string(MeasureKind kind);

/// Closed-form Laplace exponent of an unscaled measure.
struct AnalyticPhi {
    std::function<double(double)> phi;
    std::function<double(double)> phi_prime;
    double x_psi = 0.0;
};

struct Integrability {
    enum class Status { finite, infinite, unknown };
    Status status = Status::unknown;
    double value = 0.0;  // meaningful only when finite
};

const char* to_string(Integrability::Status status);

class DislocationSpec {
public:
    static DislocationSpec finite_atomic(std::vector<Atom> atoms);

    /// Binary conservative splits (1 - v, v) where the smaller part v has the
    /// given (unnormalized) density on (0, 1/2]. The density is normalized so
    /// that the measure has total mass `total_mass`. `small_end_exponent` is e
    /// with density ~ C v^e as v -> 0, when known.
    /// exact_quantile, when given, replaces the spline inverse of the normalized smaller-part law.
    static DislocationSpec binary_density(std::function<double(double)> smaller_density, double total_mass,
                                          std::optional<double> small_end_exponent,
                                          std::function<double(double)> exact_quantile = {});

    static DislocationSpec analytic(AnalyticPhi phi);

    DislocationSpec with_family(std::string id, std::map<std::string, double> params) const;

    /// The measure r·ν: rates scale by r, split law unchanged.
    DislocationSpec scaled(double r) const;

    MeasureKind kind() const;
    bool is_finite() const { return kind() != MeasureKind::analytic_only; }
    double scale() const { return scale_; }
    const std::string& family_id() const;
    const std::map<std::string, double>& params() const;
    double param(const std::string& name) const;

    /// ν(S↓); throws UnsupportedSampling for analytic-only measures.
    double total_mass() const;

    const std::vector<Atom>& atoms() const;

    /// ν-density of the smaller part v ∈ (0, 1/2], scale included.
    double smaller_part_density(double v) const;
    std::optional<double> small_end_exponent() const;
    /// Sampler's normalized CDF of the smaller part.
    double smaller_part_cdf(double v) const;
    double smaller_part_quantile(double u) const;

    /// Unscaled closed form; only for analytic-only measures.
    const AnalyticPhi& analytic_phi() const;

    /// Split drawn from ν/ν(S↓) using a single uniform u ∈ [0, 1).
    void split_from_uniform(double u, SplitView& out) const;
    FragmentVector split_from_uniform(double u) const;

    struct Impl;

private:
    explicit DislocationSpec(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    const Impl& impl() const { return *impl_; }

    std::shared_ptr<const Impl> impl_;
    double scale_ = 1.0;
};

double total_mass(const DislocationSpec& spec);

template <class Rng>
FragmentVector sample_split(const DislocationSpec& spec, Rng& rng)
{
    return spec.split_from_uniform(rng.uniform());
}

/// Whether ∫(1 - s₁)⁻¹ ν(ds) is finite, with its value when it is.
Integrability corollary3_integrability(const DislocationSpec& spec);

namespace families {

DislocationSpec identical_k(int k);
/// Uniform split of the unit mass into k pieces; k = 2 is samplable.
DislocationSpec uniform_k(int k);
/// Binary split (B, 1 - B) with B ~ Beta(a, b).
DislocationSpec beta(double a, double b);
/// Stable tree, γ ∈ (1, 2].
DislocationSpec stable(double gamma);
/// Ford's alpha-model with parameter a ∈ (0, 1).
DislocationSpec ford(double a);
/// Aldous' beta-splitting with β ∈ (-2, -1).
DislocationSpec beta_splitting(double beta);

} // namespace families

} // namespace fragtail
