#include "fragtail/asymptotics.hpp"
#include "fragtail/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <functional>
#include <vector>

namespace fragtail {
namespace {

using Real = boost::multiprecision::cpp_bin_float_50;

// Γ(x+p)/Γ(x+q) and its log-derivative ψ₀(x+p) - ψ₀(x+q).
struct ShiftedRatio {
    Real p, q;

    Real value(const Real& x) const
    {
        if (x + q > 0)
            return boost::math::tgamma_delta_ratio(Real(x + p), Real(q - p));
        const Real z = x + q;
        if (z == floor(z))
            return 0;
        return boost::math::tgamma(Real(x + p)) / boost::math::tgamma(z);
    }
    Real log_derivative(const Real& x) const
    {
        const Real z = x + q;
        const Real d = p - q;
        if (z < 1e6)
            return boost::math::digamma(Real(x + p)) - boost::math::digamma(z);
        // ψ₀(z) ~ ln z - 1/(2z) - Σ B_{2k}/(2k z^{2k}), differenced so nothing of size ln z is subtracted.
        static const Real b2k_over_2k[] = {Real(1) / 12, Real(-1) / 120, Real(1) / 252, Real(-1) / 240,
                                           Real(1) / 132, Real(-691) / 32760, Real(1) / 12};
        const Real zd = z + d;
        Real out = log1p(d / z) + d / (2 * z * zd);
        Real pz = 1, pzd = 1;
        for (const auto& c : b2k_over_2k) {
            pz /= z * z;
            pzd /= zd * zd;
            out -= c * (pzd - pz);
        }
        return out;
    }
};

// φ and x φ'(x)/φ(x) in 50 digits; the scale cancels in the latter.
struct PrecisePhi {
    std::function<Real(const Real&)> phi;
    std::function<Real(const Real&)> elasticity;
};

struct PreciseTerm {
    Real coefficient, exponent;
};

struct PreciseModel {
    PrecisePhi phi;
    Real gamma, scale;
    std::vector<PreciseTerm> terms;  // the φ expansion, last exponent 1
};

PreciseModel precise_model(const DislocationSpec& spec)
{
    const std::string& f = spec.family_id();
    const Real s = spec.scale();
    PreciseModel m;
    if (f == "stable") {
        const Real g = spec.param("gamma");
        const Real c = 1 - 1 / g;
        const ShiftedRatio r{c, Real(1)};
        m.phi.phi = [=](const Real& x) { return s * g * x * r.value(x); };
        m.phi.elasticity = [=](const Real& x) { return 1 + x * r.log_derivative(x); };
        m.gamma = c;
        m.terms = {{c * (1 / g) / 2, Real(1)}};
        m.scale = g * s;
    } else if (f == "ford") {
        const Real a = spec.param("a");
        const Real w = 2 - 4 * a;
        const ShiftedRatio r1{1 - a, 1 - 2 * a};
        const ShiftedRatio r2{2 - a, 3 - 2 * a};
        const Real base = r1.value(Real(0)) - w * r2.value(Real(0));
        m.phi.phi = [=](const Real& x) { return s * (r1.value(x) - w * r2.value(x) - base); };
        m.phi.elasticity = [=](const Real& x) {
            const Real v1 = r1.value(x);
            const Real v2 = r2.value(x);
            return x * (v1 * r1.log_derivative(x) - w * v2 * r2.log_derivative(x)) / (v1 - w * v2 - base);
        };
        m.gamma = a;
        m.terms = {{Real(1.5) * a * a - Real(4.5) * a + 2, Real(1)}};
        m.scale = s;
    } else if (f == "beta-splitting") {
        const Real beta = spec.param("beta");
        const ShiftedRatio r{beta + 2, 2 * beta + 3};
        const Real base = r.value(Real(0));
        m.phi.phi = [=](const Real& x) { return s * (r.value(x) - base); };
        m.phi.elasticity = [=](const Real& x) {
            const Real v = r.value(x);
            return x * v * r.log_derivative(x) / (v - base);
        };
        m.gamma = -beta - 1;
        // 1/Γ(2β+3) vanishes at β = -3/2.
        if (2 * beta + 3 != 0)
            m.terms.push_back({boost::math::tgamma(Real(beta + 2)) / boost::math::tgamma(Real(2 * beta + 3)), -beta - 1});
        m.terms.push_back({(beta + 1) * (3 * beta + 4) / 2, Real(1)});
        m.scale = s;
    } else {
        throw UnsupportedExpansion("no 50-digit model for measure family '" + f + "'");
    }
    return m;
}

struct PreciseShape {
    Real poly_exponent;
    std::vector<PreciseTerm> exp_terms;  // exp(-Σ coefficient t^exponent)

    Real log_value(const Real& t) const
    {
        Real out = poly_exponent * log(t);
        for (const auto& e : exp_terms)
            out -= e.coefficient * pow(t, e.exponent);
        return out;
    }
};

// Same algebra as lemma9_tail_shape.
PreciseShape precise_lemma9(const PreciseModel& m, const Real& a)
{
    const Real& g = m.gamma;
    std::vector<PreciseTerm> live;
    for (std::size_t i = 0; i < m.terms.size(); ++i) {
        if (m.terms[i].coefficient == 0 && i + 1 < m.terms.size())
            continue;
        if (!(m.terms[i].exponent > Real(0.5)))
            throw UnsupportedExpansion("expansion exponent <= 1/2 produces extra terms the engine does not derive");
        live.push_back(m.terms[i]);
    }
    PreciseShape s;
    s.poly_exponent = g / (1 - g) * (1 / a - Real(0.5)) + live.back().coefficient / (a * (1 - g));
    s.exp_terms.push_back({pow(a, g / (1 - g)) * (1 - g), 1 / (1 - g)});
    for (std::size_t i = 0; i + 1 < live.size(); ++i) {
        const Real& gi = live[i].exponent;
        s.exp_terms.push_back({-live[i].coefficient * pow(a, (g - gi) / (1 - g)) / (1 - gi), (1 - gi) / (1 - g)});
    }
    for (auto& e : s.exp_terms)
        e.coefficient *= pow(m.scale, e.exponent);
    return s;
}

// Root of y/φ(y) = x, bracketed around the double-precision solution.
Real precise_psi(const PrecisePhi& phi, const PsiSolver& solver, const Real& x)
{
    const double guess = solver.psi(static_cast<double>(x));
    auto f = [&](const Real& y) { return y / phi.phi(y) - x; };
    Real lo = guess * (1 - Real(1e-9));
    Real hi = guess * (1 + Real(1e-9));
    Real flo = f(lo);
    Real fhi = f(hi);
    for (int i = 0; flo > 0 && i < 60; ++i) {
        lo /= 2;
        flo = f(lo);
    }
    for (int i = 0; fhi < 0 && i < 60; ++i) {
        hi *= 2;
        fhi = f(hi);
    }
    if (!(flo <= 0 && fhi >= 0))
        throw NumericalFailure("50-digit psi bracket not found", INFINITY);
    std::uintmax_t iters = 300;
    auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                    boost::math::tools::eps_tolerance<Real>(150), iters);
    return (a + b) / 2;
}

} // namespace

std::vector<double> theorem1_lemma9_gap(const DislocationSpec& spec, AlphaIndex alpha, const std::vector<double>& ts,
                                        std::optional<double> t0_opt)
{
    const PreciseModel model = precise_model(spec);
    const Real a = alpha.abs();
    const PreciseShape shape = precise_lemma9(model, a);
    const PsiSolver solver{PhiEvaluator(spec)};
    const double t0 = t0_opt.value_or(default_t0(solver, alpha));
    if (!(alpha.abs() * t0 > solver.x_psi()))
        throw DomainError("t0 too small: |alpha| t0 must exceed x_psi");

    // With y = ψ(|α|r): ∫ ψ(|α|r)/(|α|r) dr = (1/|α|) ∫ (1 - yφ'(y)/φ(y)) dy, integrated over s = log y.
    auto integrand = [&](const Real& s) {
        const Real y = exp(s);
        return (1 - model.phi.elasticity(y)) * y;
    };
    Real s_prev = log(precise_psi(model.phi, solver, a * Real(t0)));
    Real integral = 0;
    double t_prev = t0;
    std::vector<double> out;
    out.reserve(ts.size());
    for (double t : ts) {
        if (!(t >= t_prev))
            throw ConfigError("gap times must be ascending and at least t0");
        const Real s_next = log(precise_psi(model.phi, solver, a * Real(t)));
        // Unit-width pieces keep each 15-point rule on a nearly polynomial stretch of exp(s).
        const int pieces = std::max(1, static_cast<int>(std::ceil(static_cast<double>(s_next - s_prev))));
        for (int i = 0; i < pieces; ++i) {
            const Real lo = s_prev + (s_next - s_prev) * i / pieces;
            const Real hi = s_prev + (s_next - s_prev) * (i + 1) / pieces;
            integral += boost::math::quadrature::gauss_kronrod<Real, 15>::integrate(integrand, lo, hi, 8, Real(1e-34));
        }
        s_prev = s_next;
        t_prev = t;
        const Real exact_part = -integral / a - shape.log_value(Real(t));
        out.push_back(theorem1_log_prefactor(solver, alpha, t) + static_cast<double>(exact_part));
    }
    return out;
}

} // namespace fragtail
