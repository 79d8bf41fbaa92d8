#pragma once

#include "fragtail/measures.hpp"
#include "fragtail/psi.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fragtail {

class AlphaIndex {
public:
    explicit AlphaIndex(double alpha);
    double value() const { return alpha_; }
    double abs() const { return -alpha_; }

private:
    double alpha_;
};

struct ExpansionTerm {
    double coefficient = 0.0;
    double exponent = 0.0;
};

/// φ(x) = scale · x^γ (1 - Σ cᵢ x^{-γᵢ} + O(x^{-1-ε})).
struct ExpansionSpec {
    double gamma = 0.0;
    std::vector<ExpansionTerm> terms;  // exponents strictly increasing, last one exactly 1
    double epsilon = 1.0;
    double scale = 1.0;

    void validate() const;
};

/// ψ(x)/x = scale · x^index (1 - Σ dⱼ x^{-eⱼ}).
struct PsiRatioExpansion {
    double index = 0.0;
    double scale = 1.0;
    std::vector<ExpansionTerm> terms;
};

struct ExpTerm {
    double coefficient = 0.0;
    double power = 0.0;
};

/// t^{poly_exponent} exp(-Σ coefficient · t^power), up to a constant.
struct TailShape {
    double poly_exponent = 0.0;
    std::vector<ExpTerm> exp_terms;  // powers strictly decreasing
    std::string validity;

    double log_value(double t) const;
    /// Shape of t ↦ f(r t).
    TailShape time_scaled(double r) const;
    /// Sort by power, merge equal powers, drop zero coefficients.
    void normalize();
    void validate() const;
};

struct TailValue {
    double t = 0.0;
    double t0 = 0.0;
    double log_prefactor = 0.0;
    double integral = 0.0;

    double log_value() const { return log_prefactor - integral; }
    /// exp(log_value) when it does not underflow.
    std::optional<double> value() const;
};

/// max((x_ψ+1)/|α|, x_ψ/|α| + 1).
double default_t0(const PsiSolver& solver, AlphaIndex alpha);

inline constexpr double default_integral_tol = 1e-12;

/// (1/|α| - 1) log(ψ(|α|t)/t) + ½ log ψ'(|α|t).
double theorem1_log_prefactor(const PsiSolver& solver, AlphaIndex alpha, double t);

TailValue theorem1_rhs(const PsiSolver& solver, AlphaIndex alpha, double t, std::optional<double> t0 = std::nullopt,
                       double integral_tol = default_integral_tol);
TailValue tagged_tail_rhs(const PsiSolver& solver, AlphaIndex alpha, double t, std::optional<double> t0 = std::nullopt,
                          double integral_tol = default_integral_tol);
/// (ψ(|α|t)/t)^{1/|α|}.
double proposition2_ratio(const PsiSolver& solver, AlphaIndex alpha, double t);
/// num/den computed from the log parts, keeping full relative precision.
double tail_ratio(const TailValue& num, const TailValue& den);

PsiRatioExpansion lemma9_psi_expansion(const ExpansionSpec& exp);
TailShape lemma9_tail_shape(const ExpansionSpec& exp, AlphaIndex alpha);

/// Registry φ-expansion of a family (stable, ford, beta-splitting, beta with a > 1/2, uniform-k, identical-k).
ExpansionSpec phi_expansion(const DislocationSpec& spec);

/// Index of self-similarity the tree families come with.
std::optional<double> natural_alpha(const DislocationSpec& spec);

TailShape example_tail_shape(const DislocationSpec& spec, AlphaIndex alpha);

/// log theorem1_rhs(t) - log lemma9_tail_shape(phi_expansion(spec), alpha)(t) for the stable, Ford and
/// beta-splitting families at ascending times ts. Both logs grow like t^{1/(1-γ)}, which outruns double precision
/// (β = -1.9 gives t^10), so the integral, ψ and the shape's exponential part are carried in 50 digits.
std::vector<double> theorem1_lemma9_gap(const DislocationSpec& spec, AlphaIndex alpha, const std::vector<double>& ts,
                                        std::optional<double> t0 = std::nullopt);

double kennedy_brownian_tail(double t);

/// C · shape, with C known.
struct ScaledTailShape {
    double constant = 1.0;
    TailShape shape;
};

/// 8 t² exp(-2t²).
ScaledTailShape kennedy_shape();
/// t ↦ f(t/s) for f = C t^p exp(-Σ a t^q).
ScaledTailShape substitute_time_scale(const ScaledTailShape& f, double s);

} // namespace fragtail
