#include "fragtail/measures.hpp"

#include "fragtail/errors.hpp"
#include "fragtail/quadrature.hpp"
#include "fragtail/special.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <variant>

namespace fragtail {

namespace {

constexpr double cdf_node_tol = 1e-12;
constexpr double spline_tol = 1e-10;
constexpr std::size_t max_spline_nodes = 8192;

// Monotone cubic Hermite interpolant of the smaller-part CDF on [0, 1/2].
class CdfSpline {
public:
    CdfSpline(const std::function<double(double)>& g, std::optional<double> exponent)
    {
        std::vector<double> nodes{0.0};
        for (int j = 40; j >= 1; --j)
            nodes.push_back(std::ldexp(0.5, -j));
        for (int i = 1; i <= 32; ++i)
            nodes.push_back(0.5 * i / 32.0);
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

        std::vector<double> mass(nodes.size() - 1);
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
            mass[i] = piece(g, nodes[i], nodes[i + 1]);

        // Refine until every midpoint is reproduced; midpoints become nodes.
        for (;;) {
            set_nodes(g, nodes, mass, exponent);
            std::vector<double> new_nodes{nodes[0]};
            std::vector<double> new_mass;
            bool refined = false;
            for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
                const double mid = 0.5 * (nodes[i] + nodes[i + 1]);
                const bool room = nodes.size() + new_nodes.size() < max_spline_nodes && mid > nodes[i] &&
                                  mid < nodes[i + 1];
                if (room) {
                    const double left = piece(g, nodes[i], mid);
                    const double exact = (cum_[i] + left) / total_;
                    if (std::abs(exact - eval(i, mid)) > spline_tol) {
                        new_nodes.push_back(mid);
                        new_mass.push_back(left);
                        new_mass.push_back(mass[i] - left);
                        new_nodes.push_back(nodes[i + 1]);
                        refined = true;
                        continue;
                    }
                }
                new_nodes.push_back(nodes[i + 1]);
                new_mass.push_back(mass[i]);
            }
            if (!refined)
                break;
            nodes = std::move(new_nodes);
            mass = std::move(new_mass);
        }
    }

    double total() const { return total_; }

    double cdf(double v) const
    {
        if (v <= 0.0)
            return 0.0;
        if (v >= x_.back())
            return 1.0;
        const auto i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), v) - x_.begin()) - 1;
        return eval(i, v);
    }

    double quantile(double u) const
    {
        if (u <= 0.0)
            return 0.0;
        if (u >= 1.0)
            return x_.back();
        auto it = std::upper_bound(f_.begin(), f_.end(), u);
        std::size_t i = static_cast<std::size_t>(it - f_.begin()) - 1;
        i = std::min(i, x_.size() - 2);
        const double h = x_[i + 1] - x_[i];
        const double df = f_[i + 1] - f_[i];
        if (df <= 0.0)
            return x_[i];
        double lo = 0.0;
        double hi = 1.0;
        double tau = std::clamp((u - f_[i]) / df, 0.0, 1.0);
        for (int iter = 0; iter < 100; ++iter) {
            const double val = hermite(i, tau) - u;
            if (val > 0.0)
                hi = tau;
            else
                lo = tau;
            const double der = hermite_slope(i, tau);
            double next = der > 0.0 ? tau - val / der : 0.5 * (lo + hi);
            if (!(next > lo && next < hi))
                next = 0.5 * (lo + hi);
            // Newton is quadratic here, so a 1e-15 step leaves an error far below one ulp.
            if (std::abs(next - tau) <= 1e-15 || hi - lo <= 1e-16) {
                tau = next;
                break;
            }
            tau = next;
        }
        return x_[i] + tau * h;
    }

private:
    static double piece(const std::function<double(double)>& g, double a, double b)
    {
        if (!(b > a))
            return 0.0;
        return quad::integrate_de([&](double x, double, double) { return g(x); }, a, b, cdf_node_tol).value;
    }

    void set_nodes(const std::function<double(double)>& g, const std::vector<double>& nodes,
                   const std::vector<double>& mass, std::optional<double> exponent)
    {
        x_ = nodes;
        cum_.assign(nodes.size(), 0.0);
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
            cum_[i + 1] = cum_[i] + mass[i];
        total_ = cum_.back();
        if (!(total_ > 0.0) || !std::isfinite(total_))
            throw ConfigError("binary density must have positive finite mass on (0, 1/2]");
        f_.resize(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i)
            f_[i] = cum_[i] / total_;
        f_.back() = 1.0;

        m_.resize(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            double d = nodes[i] == 0.0 && exponent && *exponent != 0.0 ? NAN : g(nodes[i]) / total_;
            m_[i] = std::isfinite(d) && d >= 0.0 ? d : NAN;
        }
        // Fritsch-Carlson: slopes within 3x the secants keep the cubic monotone.
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
            const double delta = (f_[i + 1] - f_[i]) / (x_[i + 1] - x_[i]);
            for (std::size_t j : {i, i + 1})
                if (std::isnan(m_[j]))
                    m_[j] = 3.0 * delta;
            if (delta == 0.0) {
                m_[i] = m_[i + 1] = 0.0;
                continue;
            }
            const double a = m_[i] / delta;
            const double b = m_[i + 1] / delta;
            const double r = a * a + b * b;
            if (r > 9.0) {
                const double s = 3.0 / std::sqrt(r);
                m_[i] = s * a * delta;
                m_[i + 1] = s * b * delta;
            }
        }
    }

    double hermite(std::size_t i, double t) const
    {
        const double h = x_[i + 1] - x_[i];
        const double t2 = t * t;
        const double t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * f_[i] + (t3 - 2 * t2 + t) * h * m_[i] + (-2 * t3 + 3 * t2) * f_[i + 1] +
               (t3 - t2) * h * m_[i + 1];
    }

    double hermite_slope(std::size_t i, double t) const
    {
        const double h = x_[i + 1] - x_[i];
        const double t2 = t * t;
        return (6 * t2 - 6 * t) * f_[i] + (3 * t2 - 4 * t + 1) * h * m_[i] + (-6 * t2 + 6 * t) * f_[i + 1] +
               (3 * t2 - 2 * t) * h * m_[i + 1];
    }

    double eval(std::size_t i, double v) const
    {
        const double t = (v - x_[i]) / (x_[i + 1] - x_[i]);
        return std::clamp(hermite(i, t), 0.0, 1.0);
    }

    std::vector<double> x_;
    std::vector<double> cum_;
    std::vector<double> f_;
    std::vector<double> m_;
    double total_ = 0.0;
};

struct AtomicData {
    std::vector<Atom> atoms;
    std::vector<double> cumulative;  // normalized, last entry exactly 1
    std::vector<double> dust;
    double mass = 0.0;
};

struct DensityData {
    std::function<double(double)> raw;
    std::shared_ptr<const CdfSpline> spline;
    double mass = 0.0;  // requested ν(S↓)
    std::optional<double> exponent;
    std::function<double(double)> quantile;

    double inverse(double u) const { return quantile ? quantile(u) : spline->quantile(u); }
};

} // namespace

struct DislocationSpec::Impl {
    std::variant<AtomicData, DensityData, AnalyticPhi> data;
    std::string family = "custom";
    std::map<std::string, double> params;
};

const char* to_string(MeasureKind kind)
{
    switch (kind) {
    case MeasureKind::finite_atomic: return "finite-atomic";
    case MeasureKind::finite_binary_density: return "finite-binary-density";
    case MeasureKind::analytic_only: return "analytic-only";
    }
    return "?";
}

const char* to_string(Integrability::Status status)
{
    switch (status) {
    case Integrability::Status::finite: return "finite";
    case Integrability::Status::infinite: return "infinite";
    case Integrability::Status::unknown: return "unknown";
    }
    return "?";
}

DislocationSpec DislocationSpec::finite_atomic(std::vector<Atom> atoms)
{
    if (atoms.empty())
        throw ConfigError("atomic measure needs at least one atom");
    AtomicData d;
    for (auto& atom : atoms) {
        if (!(atom.weight > 0.0) || !std::isfinite(atom.weight))
            throw ConfigError("atom weights must be positive and finite");
        while (!atom.parts.empty() && atom.parts.back() == 0.0)
            atom.parts.pop_back();
        double sum = 0.0;
        for (std::size_t i = 0; i < atom.parts.size(); ++i) {
            const double s = atom.parts[i];
            if (!(s >= 0.0 && s <= 1.0))
                throw ConfigError("atom parts must lie in [0, 1]");
            if (i > 0 && s > atom.parts[i - 1])
                throw ConfigError("atom parts must be nonincreasing");
            sum += s;
        }
        if (sum > 1.0 + 1e-12)
            throw ConfigError("atom parts must sum to at most 1");
        if (!atom.parts.empty() && atom.parts[0] >= 1.0)
            throw ConfigError("atom with s1 = 1 does not split");
        d.dust.push_back(std::max(0.0, 1.0 - sum));
        d.mass += atom.weight;
    }
    double c = 0.0;
    for (const auto& atom : atoms) {
        c += atom.weight;
        d.cumulative.push_back(c / d.mass);
    }
    d.cumulative.back() = 1.0;
    d.atoms = std::move(atoms);
    auto impl = std::make_shared<Impl>();
    impl->data = std::move(d);
    impl->family = "atomic";
    return DislocationSpec(std::move(impl));
}

DislocationSpec DislocationSpec::binary_density(std::function<double(double)> smaller_density, double total_mass,
                                                std::optional<double> small_end_exponent,
                                                std::function<double(double)> exact_quantile)
{
    if (!(total_mass > 0.0) || !std::isfinite(total_mass))
        throw ConfigError("binary density total mass must be positive and finite");
    if (small_end_exponent && !(*small_end_exponent > -1.0))
        throw ConfigError("smaller-part density must be integrable at 0 (exponent > -1)");
    DensityData d;
    d.spline = std::make_shared<const CdfSpline>(smaller_density, small_end_exponent);
    d.raw = std::move(smaller_density);
    d.mass = total_mass;
    d.exponent = small_end_exponent;
    d.quantile = std::move(exact_quantile);
    auto impl = std::make_shared<Impl>();
    impl->data = std::move(d);
    impl->family = "binary-density";
    return DislocationSpec(std::move(impl));
}

DislocationSpec DislocationSpec::analytic(AnalyticPhi phi)
{
    if (!phi.phi || !phi.phi_prime)
        throw ConfigError("analytic measure needs phi and phi_prime");
    auto impl = std::make_shared<Impl>();
    impl->data = std::move(phi);
    impl->family = "analytic";
    return DislocationSpec(std::move(impl));
}

DislocationSpec DislocationSpec::with_family(std::string id, std::map<std::string, double> params) const
{
    auto impl = std::make_shared<Impl>(*impl_);
    impl->family = std::move(id);
    impl->params = std::move(params);
    DislocationSpec out(std::move(impl));
    out.scale_ = scale_;
    return out;
}

DislocationSpec DislocationSpec::scaled(double r) const
{
    if (!(r > 0.0) || !std::isfinite(r))
        throw ConfigError("measure scale must be positive and finite");
    DislocationSpec out = *this;
    out.scale_ *= r;
    return out;
}

MeasureKind DislocationSpec::kind() const
{
    switch (impl().data.index()) {
    case 0: return MeasureKind::finite_atomic;
    case 1: return MeasureKind::finite_binary_density;
    default: return MeasureKind::analytic_only;
    }
}

const std::string& DislocationSpec::family_id() const { return impl().family; }

const std::map<std::string, double>& DislocationSpec::params() const { return impl().params; }

double DislocationSpec::param(const std::string& name) const
{
    auto it = impl().params.find(name);
    if (it == impl().params.end())
        throw ConfigError("measure family '" + impl().family + "' has no parameter '" + name + "'");
    return it->second;
}

double DislocationSpec::total_mass() const
{
    if (auto* a = std::get_if<AtomicData>(&impl().data))
        return scale_ * a->mass;
    if (auto* d = std::get_if<DensityData>(&impl().data))
        return scale_ * d->mass;
    throw UnsupportedSampling("analytic-only measure '" + impl().family + "' has no total mass");
}

const std::vector<Atom>& DislocationSpec::atoms() const
{
    if (auto* a = std::get_if<AtomicData>(&impl().data))
        return a->atoms;
    throw UnsupportedSampling("measure is not atomic");
}

double DislocationSpec::smaller_part_density(double v) const
{
    auto* d = std::get_if<DensityData>(&impl().data);
    if (!d)
        throw UnsupportedSampling("measure has no binary density");
    if (!(v > 0.0 && v <= 0.5))
        return 0.0;
    return scale_ * d->mass * d->raw(v) / d->spline->total();
}

std::optional<double> DislocationSpec::small_end_exponent() const
{
    if (auto* d = std::get_if<DensityData>(&impl().data))
        return d->exponent;
    return std::nullopt;
}

double DislocationSpec::smaller_part_cdf(double v) const
{
    auto* d = std::get_if<DensityData>(&impl().data);
    if (!d)
        throw UnsupportedSampling("measure has no binary density");
    return d->spline->cdf(v);
}

double DislocationSpec::smaller_part_quantile(double u) const
{
    auto* d = std::get_if<DensityData>(&impl().data);
    if (!d)
        throw UnsupportedSampling("measure has no binary density");
    return d->inverse(u);
}

const AnalyticPhi& DislocationSpec::analytic_phi() const
{
    if (auto* p = std::get_if<AnalyticPhi>(&impl().data))
        return *p;
    throw ConfigError("measure has no closed-form phi");
}

void DislocationSpec::split_from_uniform(double u, SplitView& out) const
{
    if (auto* a = std::get_if<AtomicData>(&impl().data)) {
        auto it = std::upper_bound(a->cumulative.begin(), a->cumulative.end(), u);
        std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(it - a->cumulative.begin()),
                                              a->atoms.size() - 1);
        out.parts = a->atoms[j].parts;
        out.dust_fraction = a->dust[j];
        return;
    }
    if (auto* d = std::get_if<DensityData>(&impl().data)) {
        const double v = d->inverse(u);
        out.buffer = {1.0 - v, v};
        out.parts = std::span<const double>(out.buffer.data(), 2);
        out.dust_fraction = 0.0;
        return;
    }
    throw UnsupportedSampling("cannot sample splits from analytic-only measure '" + impl().family + "'");
}

FragmentVector DislocationSpec::split_from_uniform(double u) const
{
    SplitView view;
    split_from_uniform(u, view);
    return FragmentVector{std::vector<double>(view.parts.begin(), view.parts.end()), view.dust_fraction};
}

double total_mass(const DislocationSpec& spec) { return spec.total_mass(); }

Integrability corollary3_integrability(const DislocationSpec& spec)
{
    Integrability out;
    switch (spec.kind()) {
    case MeasureKind::analytic_only:
        return out;
    case MeasureKind::finite_atomic: {
        double sum = 0.0;
        for (const auto& atom : spec.atoms()) {
            const double s1 = atom.parts.empty() ? 0.0 : atom.parts[0];
            sum += atom.weight / (1.0 - s1);
        }
        out.status = Integrability::Status::finite;
        out.value = spec.scale() * sum;
        return out;
    }
    case MeasureKind::finite_binary_density:
        break;
    }

    // Here 1 - s₁ is the smaller part v.
    auto integrand = [&](double v, double, double) { return spec.smaller_part_density(v) / v; };
    if (auto e = spec.small_end_exponent()) {
        if (*e <= 0.0) {
            out.status = Integrability::Status::infinite;
            return out;
        }
        out.status = Integrability::Status::finite;
        out.value = quad::integrate_de(integrand, 0.0, 0.5, 1e-10).value;
        return out;
    }

    // Unknown endpoint behavior: watch partial integrals ∫_δ^{1/2} as δ shrinks.
    std::vector<double> partial;
    double acc = 0.0;
    double hi = 0.5;
    for (int k = 1; k <= 8; ++k) {
        const double lo = std::ldexp(0.5, -5 * k);
        acc += quad::integrate_de(integrand, lo, hi, 1e-10).value;
        partial.push_back(acc);
        hi = lo;
    }
    const double d_prev = partial[6] - partial[5];
    const double d_last = partial[7] - partial[6];
    if (d_last > 1e-6 * partial.back() && d_last >= 0.5 * d_prev) {
        out.status = Integrability::Status::infinite;
    } else {
        out.status = Integrability::Status::finite;
        out.value = partial.back() + (d_prev > 0.0 ? d_last * d_last / std::max(d_prev - d_last, 1e-300) : 0.0);
    }
    return out;
}

namespace families {

namespace {

double rgamma_ratio(double x, double p, double q) { return special::gamma_ratio_shifted(x, p, q); }

} // namespace

DislocationSpec identical_k(int k)
{
    if (k < 2)
        throw ConfigError("identical-k needs k >= 2");
    Atom atom{std::vector<double>(static_cast<std::size_t>(k), 1.0 / k), 1.0};
    return DislocationSpec::finite_atomic({atom}).with_family("identical-k", {{"k", double(k)}});
}

DislocationSpec uniform_k(int k)
{
    if (k < 2)
        throw ConfigError("uniform-k needs k >= 2");
    if (k == 2)
        return DislocationSpec::binary_density([](double) { return 2.0; }, 1.0, 0.0, [](double u) { return 0.5 * u; })
            .with_family("uniform-k", {{"k", 2.0}});

    // φ(x) = 1 - Π_{j=2..k} j/(x+j).
    AnalyticPhi phi;
    phi.phi = [k](double x) {
        double s = 0.0;
        for (int j = 2; j <= k; ++j)
            s += std::log1p(x / j);
        return -std::expm1(-s);
    };
    phi.phi_prime = [k](double x) {
        double s = 0.0;
        double h = 0.0;
        for (int j = 2; j <= k; ++j) {
            s += std::log1p(x / j);
            h += 1.0 / (x + j);
        }
        return std::exp(-s) * h;
    };
    double h0 = 0.0;
    for (int j = 2; j <= k; ++j)
        h0 += 1.0 / j;
    phi.x_psi = 1.0 / h0;
    return DislocationSpec::analytic(std::move(phi)).with_family("uniform-k", {{"k", double(k)}});
}

DislocationSpec beta(double a, double b)
{
    if (!(a > 0.0 && b > 0.0))
        throw ConfigError("beta family needs a, b > 0");
    const double inv_b = 1.0 / boost::math::beta(a, b);
    auto g = [a, b, inv_b](double v) {
        const double w = 1.0 - v;
        return inv_b * (std::pow(v, b - 1.0) * std::pow(w, a - 1.0) + std::pow(v, a - 1.0) * std::pow(w, b - 1.0));
    };
    return DislocationSpec::binary_density(g, 1.0, std::min(a, b) - 1.0).with_family("beta", {{"a", a}, {"b", b}});
}

DislocationSpec stable(double gamma)
{
    if (!(gamma > 1.0 && gamma <= 2.0))
        throw ConfigError("stable family needs gamma in (1, 2]");
    const double c = 1.0 - 1.0 / gamma;
    // φ(x) = γ Γ(x+1-1/γ)/Γ(x), written as γ x Γ(x+c)/Γ(x+1).
    AnalyticPhi phi;
    phi.phi = [gamma, c](double x) { return gamma * x * rgamma_ratio(x, c, 1.0); };
    phi.phi_prime = [gamma, c](double x) {
        const double r = rgamma_ratio(x, c, 1.0);
        return gamma * r * (1.0 + x * special::digamma_difference(x + 1.0, c - 1.0));
    };
    phi.x_psi = 1.0 / (gamma * boost::math::tgamma(c));
    return DislocationSpec::analytic(std::move(phi)).with_family("stable", {{"gamma", gamma}});
}

DislocationSpec ford(double a)
{
    if (!(a > 0.0 && a < 1.0))
        throw ConfigError("ford family needs a in (0, 1)");
    const double w = 2.0 - 4.0 * a;
    const double r1_0 = boost::math::tgamma(1.0 - a) * special::rgamma(1.0 - 2.0 * a);
    const double r2_0 = rgamma_ratio(0.0, 2.0 - a, 3.0 - 2.0 * a);
    auto r1 = [a](double x) { return rgamma_ratio(x, 1.0 - a, 1.0 - 2.0 * a); };
    auto r2 = [a](double x) { return rgamma_ratio(x, 2.0 - a, 3.0 - 2.0 * a); };
    AnalyticPhi phi;
    phi.phi = [=](double x) { return (r1(x) - r1_0) + w * (r2_0 - r2(x)); };
    phi.phi_prime = [a, w](double x) {
        return special::gamma_ratio_derivative(x, 1.0 - a, 1.0 - 2.0 * a) -
               w * special::gamma_ratio_derivative(x, 2.0 - a, 3.0 - 2.0 * a);
    };
    phi.x_psi = 1.0 / phi.phi_prime(0.0);
    return DislocationSpec::analytic(std::move(phi)).with_family("ford", {{"a", a}});
}

DislocationSpec beta_splitting(double beta)
{
    if (!(beta > -2.0 && beta < -1.0))
        throw ConfigError("beta-splitting family needs beta in (-2, -1)");
    const double p = beta + 2.0;
    const double q = 2.0 * beta + 3.0;
    const double r0 = boost::math::tgamma(p) * special::rgamma(q);
    AnalyticPhi phi;
    phi.phi = [=](double x) { return rgamma_ratio(x, p, q) - r0; };
    phi.phi_prime = [=](double x) { return special::gamma_ratio_derivative(x, p, q); };
    phi.x_psi = 1.0 / phi.phi_prime(0.0);
    return DislocationSpec::analytic(std::move(phi)).with_family("beta-splitting", {{"beta", beta}});
}

} // namespace families

} // namespace fragtail
