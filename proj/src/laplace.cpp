#include "fragtail/laplace.hpp"

#include "fragtail/errors.hpp"
#include "fragtail/quadrature.hpp"
#include "fragtail/special.hpp"


#include <algorithm>
#include <cmath>

namespace fragtail {

const char* to_string(PhiMethod method)
{
    switch (method) {
    case PhiMethod::atomic_sum: return "atomic-sum";
    case PhiMethod::quadrature: return "quadrature";
    case PhiMethod::closed_form: return "closed-form";
    }
    return "?";
}

namespace {

PhiMethod method_for(MeasureKind kind)
{
    switch (kind) {
    case MeasureKind::finite_atomic: return PhiMethod::atomic_sum;
    case MeasureKind::finite_binary_density: return PhiMethod::quadrature;
    case MeasureKind::analytic_only: return PhiMethod::closed_form;
    }
    return PhiMethod::closed_form;
}

// 1 - w^{x+1} for w ∈ [0, 1] written so that it keeps relative accuracy for small x and w near 1.
inline double one_minus_pow(double w, double lw, double x)
{
    // 1 - w^{x+1} = (1 - w) + w(1 - w^x)
    return (1.0 - w) - w * std::expm1(x * lw);
}

} // namespace

PhiEvaluator::PhiEvaluator(DislocationSpec spec, double rel_tol)
    : spec_(std::move(spec)), method_(method_for(spec_.kind())), rel_tol_(rel_tol)
{
    if (!(rel_tol > 0.0))
        throw ConfigError("phi tolerance must be positive");
    x_psi_ = compute_x_psi();
}

PhiValue PhiEvaluator::phi_detailed(double x) const
{
    if (!(x >= 0.0))
        throw DomainError("phi needs x >= 0");
    switch (method_) {
    case PhiMethod::atomic_sum: {
        // Σ_atoms w [dust + Σ s(1 - s^x)]; every term is nonnegative.
        double total = 0.0;
        for (const auto& atom : spec_.atoms()) {
            double sum = 0.0;
            double mass = 0.0;
            for (double s : atom.parts) {
                if (s > 0.0)
                    sum -= s * std::expm1(x * std::log(s));
                mass += s;
            }
            total += atom.weight * (sum + std::max(0.0, 1.0 - mass));
        }
        return {spec_.scale() * total, 0.0};
    }
    case PhiMethod::quadrature: {
        // Splits (1 - v, v): 1 - (1-v)^{x+1} - v^{x+1} = (1-v)(1 - (1-v)^x) + v(1 - v^x).
        auto f = [&](double v, double, double) {
            const double w = 1.0 - v;
            const double val = -w * std::expm1(x * std::log1p(-v)) - v * std::expm1(x * std::log(v));
            return val * spec_.smaller_part_density(v);
        };
        auto r = quad::integrate_de(f, 0.0, 0.5, rel_tol_);
        return {r.value, r.abs_error};
    }
    case PhiMethod::closed_form:
        return {spec_.scale() * spec_.analytic_phi().phi(x), 0.0};
    }
    return {};
}

double PhiEvaluator::phi_prime(double x) const
{
    if (!(x >= 0.0))
        throw DomainError("phi_prime needs x >= 0");
    switch (method_) {
    case PhiMethod::atomic_sum: {
        double total = 0.0;
        for (const auto& atom : spec_.atoms()) {
            double sum = 0.0;
            for (double s : atom.parts)
                if (s > 0.0)
                    sum -= std::pow(s, x + 1.0) * std::log(s);
            total += atom.weight * sum;
        }
        return spec_.scale() * total;
    }
    case PhiMethod::quadrature: {
        auto f = [&](double v, double, double) {
            const double lw = std::log1p(-v);
            const double lv = std::log(v);
            return -(std::exp((x + 1.0) * lw) * lw + std::exp((x + 1.0) * lv) * lv) * spec_.smaller_part_density(v);
        };
        return quad::integrate_de(f, 0.0, 0.5, rel_tol_).value;
    }
    case PhiMethod::closed_form:
        return spec_.scale() * spec_.analytic_phi().phi_prime(x);
    }
    return 0.0;
}

double PhiEvaluator::phi_first(double x) const
{
    if (!(x >= 0.0))
        throw DomainError("phi_first needs x >= 0");
    switch (method_) {
    case PhiMethod::atomic_sum: {
        double total = 0.0;
        for (const auto& atom : spec_.atoms()) {
            const double s = atom.parts.empty() ? 0.0 : atom.parts[0];
            total += atom.weight * (s > 0.0 ? one_minus_pow(s, std::log(s), x) : 1.0);
        }
        return spec_.scale() * total;
    }
    case PhiMethod::quadrature: {
        auto f = [&](double v, double, double) {
            return one_minus_pow(1.0 - v, std::log1p(-v), x) * spec_.smaller_part_density(v);
        };
        return quad::integrate_de(f, 0.0, 0.5, rel_tol_).value;
    }
    case PhiMethod::closed_form:
        break;
    }
    throw UnsupportedSampling("phi_first needs a finite measure");
}

double PhiEvaluator::compute_x_psi() const
{
    if (method_ == PhiMethod::closed_form)
        return spec_.analytic_phi().x_psi / spec_.scale();
    if (phi(0.0) > 0.0)
        return 0.0;
    const double d = phi_prime(0.0);
    return d > 0.0 && std::isfinite(d) ? 1.0 / d : 0.0;
}

HReport check_hypothesis_H(const PhiEvaluator& eval, double x_max, std::size_t n_grid, double delta)
{
    if (!(x_max >= 100.0))
        throw ConfigError("hypothesis check needs x_max >= 100");
    if (n_grid < 4)
        throw ConfigError("hypothesis check needs at least 4 grid points");
    HReport rep;
    rep.delta = delta;
    const double step = std::log(x_max) / double(n_grid - 1);
    for (std::size_t i = 0; i < n_grid; ++i) {
        const double x = std::exp(step * double(i));
        rep.grid.push_back(x);
        rep.ratio.push_back(eval.phi_prime(x) * x / eval.phi(x));
    }
    rep.tail_sup = *std::max_element(rep.ratio.begin() + long(n_grid / 2), rep.ratio.end());
    rep.pass = rep.tail_sup < 1.0 - delta;
    return rep;
}

GammaQuotient gamma_quotient(double x, double c)
{
    if (!(x > std::max(0.0, -c)))
        throw DomainError("gamma_quotient needs x > max(0, -c)");
    GammaQuotient q;
    q.exact = special::gamma_ratio_shifted(x, c, 0.0);
    q.expansion2 = std::pow(x, c) * (1.0 - c * (1.0 - c) / (2.0 * x));
    return q;
}

IncompleteBetaPhi incomplete_beta_phi(double a, double b, double x)
{
    if (!(a > 0.0 && b > -1.0 && x >= 0.0))
        throw DomainError("incomplete_beta_phi needs a > 0, b > -1, x >= 0");
    IncompleteBetaPhi out;
    if (x == 0.0) {
        out.gamma_form = 0.0;
    } else {
        out.gamma_form = special::gamma_ratio(a, a + b) - special::gamma_ratio_shifted(x, a, a + b);
    }
    if (b > 0.0) {
        auto f = [&](double, double du, double dv) {
            // du = u, dv = 1 - u, both exact near their endpoints.
            const double lu = du < 0.5 ? std::log(du) : std::log1p(-dv);
            const double one_minus_ux = -std::expm1(x * lu);
            return one_minus_ux * std::pow(du, a - 1.0) * std::pow(dv, b - 1.0);
        };
        out.quadrature = quad::integrate_de(f, 0.0, 1.0, 1e-12).value * special::rgamma(b);
    }
    return out;
}

} // namespace fragtail
