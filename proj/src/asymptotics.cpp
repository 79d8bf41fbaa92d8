#include "fragtail/asymptotics.hpp"

#include "fragtail/errors.hpp"
#include "fragtail/quadrature.hpp"
#include "fragtail/special.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <sstream>

namespace fragtail {

AlphaIndex::AlphaIndex(double alpha) : alpha_(alpha)
{
    if (!(alpha < 0.0) || !std::isfinite(alpha))
        throw ConfigError("self-similarity index alpha must be negative and finite");
}

void ExpansionSpec::validate() const
{
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw UnsupportedExpansion("expansion index gamma must lie in [0, 1)");
    if (!(scale > 0.0) || !(epsilon > 0.0))
        throw UnsupportedExpansion("expansion scale and remainder exponent must be positive");
    if (terms.empty() || terms.back().exponent != 1.0)
        throw UnsupportedExpansion("expansion must end with an exponent-1 term");
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (!(terms[i].exponent > 0.0) || !std::isfinite(terms[i].coefficient))
            throw UnsupportedExpansion("expansion exponents must be positive and coefficients finite");
        if (i > 0 && !(terms[i].exponent > terms[i - 1].exponent))
            throw UnsupportedExpansion("expansion exponents must be strictly increasing");
    }
}

double TailShape::log_value(double t) const
{
    double out = poly_exponent * std::log(t);
    for (const auto& e : exp_terms)
        out -= e.coefficient * std::pow(t, e.power);
    return out;
}

TailShape TailShape::time_scaled(double r) const
{
    TailShape out = *this;
    for (auto& e : out.exp_terms)
        e.coefficient *= std::pow(r, e.power);
    return out;
}

void TailShape::normalize()
{
    std::sort(exp_terms.begin(), exp_terms.end(), [](const ExpTerm& a, const ExpTerm& b) { return a.power > b.power; });
    std::vector<ExpTerm> merged;
    for (const auto& e : exp_terms) {
        if (!merged.empty() && std::abs(merged.back().power - e.power) <= 1e-12 * e.power)
            merged.back().coefficient += e.coefficient;
        else
            merged.push_back(e);
    }
    std::erase_if(merged, [](const ExpTerm& e) { return e.coefficient == 0.0; });
    exp_terms = std::move(merged);
}

void TailShape::validate() const
{
    if (exp_terms.empty())
        throw UnsupportedExpansion("tail shape has no exponential term");
    if (!(exp_terms.front().coefficient > 0.0) || !(exp_terms.front().power >= 1.0))
        throw UnsupportedExpansion("leading exponential term must have positive coefficient and power >= 1");
    for (std::size_t i = 1; i < exp_terms.size(); ++i)
        if (!(exp_terms[i].power < exp_terms[i - 1].power) || !(exp_terms[i].power > 0.0))
            throw UnsupportedExpansion("exponential powers must be positive and strictly decreasing");
}

std::optional<double> TailValue::value() const
{
    const double lv = log_value();
    if (lv < std::log(DBL_MIN))
        return std::nullopt;
    return std::exp(lv);
}

double default_t0(const PsiSolver& solver, AlphaIndex alpha)
{
    const double xp = solver.x_psi();
    return std::max((xp + 1.0) / alpha.abs(), xp / alpha.abs() + 1.0);
}

namespace {

struct TailParts {
    double psi = 0.0;
    double psi_prime = 0.0;
    double t0 = 0.0;
    double integral = 0.0;
};

TailParts tail_parts(const PsiSolver& solver, AlphaIndex alpha, double t, std::optional<double> t0_opt, double tol)
{
    const double a = alpha.abs();
    TailParts p;
    p.t0 = t0_opt.value_or(default_t0(solver, alpha));
    if (!(a * p.t0 > solver.x_psi()))
        throw DomainError("t0 too small: |alpha| t0 must exceed x_psi");
    if (!(t >= p.t0))
        throw DomainError("t must be at least t0");
    p.psi = solver.psi(a * t);
    p.psi_prime = solver.psi_prime(a * t);
    auto f = [&](double r) { return solver.psi(a * r) / (a * r); };
    p.integral = quad::integrate_smooth(f, p.t0, t, tol).value;
    return p;
}

} // namespace

double theorem1_log_prefactor(const PsiSolver& solver, AlphaIndex alpha, double t)
{
    const double x = alpha.abs() * t;
    return (1.0 / alpha.abs() - 1.0) * std::log(solver.psi(x) / t) + 0.5 * std::log(solver.psi_prime(x));
}

TailValue theorem1_rhs(const PsiSolver& solver, AlphaIndex alpha, double t, std::optional<double> t0, double tol)
{
    const TailParts p = tail_parts(solver, alpha, t, t0, tol);
    TailValue v;
    v.t = t;
    v.t0 = p.t0;
    v.log_prefactor = (1.0 / alpha.abs() - 1.0) * std::log(p.psi / t) + 0.5 * std::log(p.psi_prime);
    v.integral = p.integral;
    return v;
}

TailValue tagged_tail_rhs(const PsiSolver& solver, AlphaIndex alpha, double t, std::optional<double> t0, double tol)
{
    const TailParts p = tail_parts(solver, alpha, t, t0, tol);
    TailValue v;
    v.t = t;
    v.t0 = p.t0;
    v.log_prefactor = std::log(t) + 0.5 * std::log(p.psi_prime) - std::log(p.psi);
    v.integral = p.integral;
    return v;
}

double proposition2_ratio(const PsiSolver& solver, AlphaIndex alpha, double t)
{
    return std::pow(solver.psi(alpha.abs() * t) / t, 1.0 / alpha.abs());
}

double tail_ratio(const TailValue& num, const TailValue& den)
{
    return std::exp((num.log_prefactor - den.log_prefactor) - (num.integral - den.integral));
}

namespace {

// Terms with a zero coefficient carry no information and are not subject to the γᵢ > 1/2 restriction.
std::vector<ExpansionTerm> live_terms(const ExpansionSpec& exp)
{
    exp.validate();
    std::vector<ExpansionTerm> out;
    for (const auto& term : exp.terms) {
        if (term.coefficient == 0.0 && term.exponent != 1.0)
            continue;
        if (!(term.exponent > 0.5))
            throw UnsupportedExpansion("expansion exponent " + std::to_string(term.exponent) +
                                       " <= 1/2 produces extra terms the engine does not derive");
        out.push_back(term);
    }
    return out;
}

} // namespace

PsiRatioExpansion lemma9_psi_expansion(const ExpansionSpec& exp)
{
    const auto terms = live_terms(exp);
    const double g = exp.gamma;
    const double k = exp.scale;
    PsiRatioExpansion out;
    out.index = g / (1.0 - g);
    // For φ = κφ₀, ψ(x) = ψ₀(κx).
    out.scale = std::pow(k, 1.0 / (1.0 - g));
    for (const auto& term : terms) {
        const double e = term.exponent / (1.0 - g);
        out.terms.push_back({term.coefficient / ((1.0 - g) * std::pow(k, e)), e});
    }
    return out;
}

TailShape lemma9_tail_shape(const ExpansionSpec& exp, AlphaIndex alpha)
{
    const auto terms = live_terms(exp);
    const double g = exp.gamma;
    const double a = alpha.abs();
    TailShape s;
    s.poly_exponent = g / (1.0 - g) * (1.0 / a - 0.5) + terms.back().coefficient / (a * (1.0 - g));
    s.exp_terms.push_back({std::pow(a, g / (1.0 - g)) * (1.0 - g), 1.0 / (1.0 - g)});
    for (std::size_t i = 0; i + 1 < terms.size(); ++i) {
        const double gi = terms[i].exponent;
        s.exp_terms.push_back({-terms[i].coefficient * std::pow(a, (g - gi) / (1.0 - g)) / (1.0 - gi),
                               (1.0 - gi) / (1.0 - g)});
    }
    // The measure κν₀ runs the ν₀ fragmentation κ times faster.
    s = s.time_scaled(exp.scale);
    s.normalize();
    s.validity = "phi expansion with all exponents > 1/2";
    return s;
}

namespace {

double effective_mass(const DislocationSpec& spec)
{
    return spec.is_finite() ? spec.total_mass() : spec.scale();
}

ExpansionSpec beta_expansion(double a, double b, double scale)
{
    if (a > b)
        std::swap(a, b);
    const double A = boost::math::tgamma(a + b) / boost::math::tgamma(b);
    const double B = boost::math::tgamma(a + b) / boost::math::tgamma(a);
    ExpansionSpec e;
    e.gamma = 0.0;
    e.scale = scale;
    double remainder = a + 1.0;
    std::vector<ExpansionTerm> raw{{A, a}, {B, b}};
    for (const auto& t : raw) {
        if (t.exponent > 1.0) {
            remainder = std::min(remainder, t.exponent);
            continue;
        }
        if (!e.terms.empty() && e.terms.back().exponent == t.exponent)
            e.terms.back().coefficient += t.coefficient;
        else
            e.terms.push_back(t);
    }
    if (e.terms.empty() || e.terms.back().exponent != 1.0)
        e.terms.push_back({0.0, 1.0});
    e.epsilon = remainder - 1.0;
    return e;
}

} // namespace

ExpansionSpec phi_expansion(const DislocationSpec& spec)
{
    const std::string& f = spec.family_id();
    ExpansionSpec e;
    if (f == "stable") {
        const double g = spec.param("gamma");
        e.gamma = 1.0 - 1.0 / g;
        e.terms = {{(1.0 - 1.0 / g) * (1.0 / g) / 2.0, 1.0}};
        e.scale = g * spec.scale();
    } else if (f == "ford") {
        const double a = spec.param("a");
        e.gamma = a;
        e.terms = {{1.5 * a * a - 4.5 * a + 2.0, 1.0}};
        e.scale = spec.scale();
    } else if (f == "beta-splitting") {
        const double beta = spec.param("beta");
        e.gamma = -beta - 1.0;
        const double c1 = boost::math::tgamma(beta + 2.0) * special::rgamma(2.0 * beta + 3.0);
        if (c1 != 0.0)
            e.terms.push_back({c1, -beta - 1.0});
        e.terms.push_back({(beta + 1.0) * (3.0 * beta + 4.0) / 2.0, 1.0});
        e.scale = spec.scale();
    } else if (f == "beta") {
        e = beta_expansion(spec.param("a"), spec.param("b"), spec.scale());
    } else if (f == "uniform-k") {
        e.terms = {{spec.param("k") == 2.0 ? 2.0 : 0.0, 1.0}};
        e.scale = spec.scale();
    } else if (f == "identical-k" || spec.kind() == MeasureKind::finite_atomic) {
        // φ tends to ν(S↓) exponentially fast.
        e.terms = {{0.0, 1.0}};
        e.scale = effective_mass(spec);
    } else {
        throw UnsupportedExpansion("no registry expansion for measure family '" + f + "'");
    }
    e.validate();
    return e;
}

std::optional<double> natural_alpha(const DislocationSpec& spec)
{
    const std::string& f = spec.family_id();
    if (f == "stable")
        return 1.0 / spec.param("gamma") - 1.0;
    if (f == "ford")
        return -spec.param("a");
    if (f == "beta-splitting")
        return 1.0 + spec.param("beta");
    return std::nullopt;
}

namespace {

bool near(double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(y)); }

// Shapes below are for the unscaled measure; the caller rescales time.
TailShape beta_shape(double a, double b, double abs_alpha)
{
    if (a > b)
        std::swap(a, b);
    const double A = boost::math::tgamma(a + b) / boost::math::tgamma(b);
    const double B = boost::math::tgamma(a + b) / boost::math::tgamma(a);
    TailShape s;
    s.exp_terms.push_back({1.0, 1.0});
    auto add_exp = [&](double coef, double power) { s.exp_terms.push_back({-coef, power}); };
    std::ostringstream v;
    v << "beta split, a=" << a << ", b=" << b << ": ";
    if (a > 0.5) {
        if (a > 1.0) {
            v << "b >= a > 1";
        } else if (near(a, 1.0) && b > 1.0) {
            s.poly_exponent = b / abs_alpha;
            v << "b > a = 1";
        } else if (near(a, 1.0)) {
            s.poly_exponent = 2.0 / abs_alpha;
            v << "b = a = 1";
        } else if (b > 1.0 && !near(b, 1.0)) {
            add_exp(A / ((1.0 - a) * std::pow(abs_alpha, a)), 1.0 - a);
            v << "b > 1 > a > 1/2";
        } else if (near(b, 1.0)) {
            add_exp(A / ((1.0 - a) * std::pow(abs_alpha, a)), 1.0 - a);
            s.poly_exponent = a / abs_alpha;
            v << "1 = b > a > 1/2";
        } else {
            add_exp(A / ((1.0 - a) * std::pow(abs_alpha, a)), 1.0 - a);
            add_exp(B / ((1.0 - b) * std::pow(abs_alpha, b)), 1.0 - b);
            v << "1 > b >= a > 1/2";
        }
    } else if (a > 1.0 / 3.0 && b > 0.5 && b < 1.0) {
        add_exp(A / ((1.0 - a) * std::pow(abs_alpha, a)), 1.0 - a);
        add_exp(B / ((1.0 - b) * std::pow(abs_alpha, b)), 1.0 - b);
        const double gb = boost::math::tgamma(b);
        if (near(a, 0.5)) {
            const double g = boost::math::tgamma(b + 0.5);
            s.poly_exponent = g * g / (2.0 * gb * gb * abs_alpha);
            v << "a = 1/2, b in (1/2, 1)";
        } else {
            const double gab = boost::math::tgamma(a + b);
            add_exp(a * gab * gab / (gb * gb * (1.0 - 2.0 * a) * std::pow(abs_alpha, 2.0 * a)), 1.0 - 2.0 * a);
            const double ga = boost::math::tgamma(a);
            if (near(a + b, 1.0)) {
                s.poly_exponent = 1.0 / (ga * gb * abs_alpha);
                v << "a in (1/3, 1/2), a + b = 1";
            } else if (a + b < 1.0) {
                add_exp((a + b) * gab * gab / (ga * gb * (1.0 - a - b) * std::pow(abs_alpha, a + b)), 1.0 - a - b);
                v << "a in (1/3, 1/2), a + b < 1";
            } else {
                v << "a in (1/3, 1/2), a + b > 1";
            }
        }
    } else {
        throw UncoveredRegion("beta split with min(a, b) <= 1/2 is covered only for a in (1/3, 1/2] and b in (1/2, 1); "
                              "outside that region further terms appear in or in front of the exponential");
    }
    s.validity = v.str();
    return s;
}

} // namespace

TailShape example_tail_shape(const DislocationSpec& spec, AlphaIndex alpha)
{
    const std::string& f = spec.family_id();
    const double a = alpha.abs();
    const auto nat = natural_alpha(spec);
    const bool at_natural = nat && near(*nat, alpha.value());
    TailShape s;

    if (f == "identical-k" || (f == "atomic" && spec.kind() == MeasureKind::finite_atomic)) {
        // ∫(1 - s₁)⁻¹ν < ∞ for every atomic measure without s₁ = 1.
        s.exp_terms = {{1.0, 1.0}};
        s.validity = "finite measure with integrable (1 - s1)^-1: exp(-nu(S) t)";
        s = s.time_scaled(effective_mass(spec));
    } else if (f == "uniform-k") {
        const double k = spec.param("k");
        s.exp_terms = {{1.0, 1.0}};
        s.poly_exponent = k == 2.0 ? 2.0 / a : 0.0;
        s.validity = k == 2.0 ? "uniform binary split" : "uniform split into k >= 3 pieces";
        s = s.time_scaled(spec.scale());
    } else if (f == "beta") {
        s = beta_shape(spec.param("a"), spec.param("b"), a).time_scaled(spec.scale());
    } else if (f == "stable" && at_natural) {
        const double g = spec.param("gamma");
        s.poly_exponent = 1.0 + g / 2.0;
        s.exp_terms = {{std::pow(g - 1.0, g - 1.0), g}};
        s.validity = "stable tree at alpha = 1/gamma - 1";
        s = s.time_scaled(spec.scale());
    } else if (f == "ford" && at_natural) {
        const double fa = spec.param("a");
        s.poly_exponent = (2.0 * fa * fa - 7.0 * fa + 4.0) / (2.0 * fa * (1.0 - fa));
        s.exp_terms = {{std::pow(fa, fa / (1.0 - fa)) * (1.0 - fa), 1.0 / (1.0 - fa)}};
        s.validity = "Ford tree at alpha = -a";
        s = s.time_scaled(spec.scale());
    } else if (f == "beta-splitting") {
        const double beta = spec.param("beta");
        if (beta > -1.5)
            throw UncoveredRegion("beta-splitting with beta > -3/2 has gamma_1 < 1/2; further terms appear in or in "
                                  "front of the exponential");
        if (!at_natural)
            return lemma9_tail_shape(phi_expansion(spec), alpha);
        const double a_beta = std::pow(-beta - 1.0, (-beta - 1.0) / (beta + 2.0)) * (beta + 2.0);
        const double b_beta = (2.0 * beta + 3.0) * boost::math::tgamma(beta + 2.0) /
                              ((beta + 2.0) * boost::math::tgamma(2.0 * beta + 4.0));
        s.poly_exponent = (-2.0 * beta - 1.0) / (2.0 * (beta + 2.0));
        s.exp_terms = {{a_beta, 1.0 / (beta + 2.0)}, {-b_beta, 1.0}};
        s.validity = "beta-splitting tree at alpha = 1 + beta, beta in (-2, -3/2]";
        s = s.time_scaled(spec.scale());
    } else if (f == "stable" || f == "ford") {
        return lemma9_tail_shape(phi_expansion(spec), alpha);
    } else {
        throw UncoveredRegion("no closed-form tail shape for measure family '" + f + "'");
    }
    s.normalize();
    return s;
}

double kennedy_brownian_tail(double t)
{
    if (!(t > 0.0))
        throw DomainError("kennedy_brownian_tail needs t > 0");
    return 8.0 * t * t * std::exp(-2.0 * t * t);
}

ScaledTailShape kennedy_shape()
{
    ScaledTailShape k;
    k.constant = 8.0;
    k.shape.poly_exponent = 2.0;
    k.shape.exp_terms = {{2.0, 2.0}};
    k.shape.validity = "Brownian tree height, first order";
    return k;
}

ScaledTailShape substitute_time_scale(const ScaledTailShape& f, double s)
{
    if (!(s > 0.0))
        throw DomainError("time scale must be positive");
    ScaledTailShape out = f;
    out.constant *= std::pow(s, -f.shape.poly_exponent);
    out.shape = f.shape.time_scaled(1.0 / s);
    return out;
}

} // namespace fragtail
