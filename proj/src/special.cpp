#include "fragtail/special.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/sin_pi.hpp>
#include <boost/math/constants/constants.hpp>

#include <cmath>

namespace fragtail::special {

namespace {

bool is_nonpositive_integer(double z) { return z <= 0.0 && z == std::floor(z); }

} // namespace

double rgamma(double z)
{
    if (z > 0.0) {
        if (z > 170.0)
            return std::exp(-boost::math::lgamma(z));
        return 1.0 / boost::math::tgamma(z);
    }
    if (is_nonpositive_integer(z))
        return 0.0;
    // Reflection: 1/Γ(z) = Γ(1-z) sin(πz)/π.
    return boost::math::tgamma(1.0 - z) * boost::math::sin_pi(z) / boost::math::constants::pi<double>();
}

double rgamma_prime(double z)
{
    if (is_nonpositive_integer(z)) {
        const auto n = static_cast<unsigned>(-z);
        const double f = boost::math::factorial<double>(n);
        return (n % 2 == 0) ? f : -f;
    }
    return -boost::math::digamma(z) * rgamma(z);
}

double gamma_ratio(double p, double q)
{
    if (q > 0.0)
        return boost::math::tgamma_delta_ratio(p, q - p);
    return boost::math::tgamma(p) * rgamma(q);
}

double gamma_ratio_shifted(double x, double p, double q)
{
    if (x + q > 0.0)
        return boost::math::tgamma_delta_ratio(x + p, q - p);
    return boost::math::tgamma(x + p) * rgamma(x + q);
}

double digamma_difference(double z, double delta)
{
    if (delta == 0.0)
        return 0.0;
    if (std::min(z, z + delta) < 10.0)
        return boost::math::digamma(z + delta) - boost::math::digamma(z);

    // Asymptotic series ψ₀(z) ~ ln z - 1/(2z) - Σ B_{2k}/(2k z^{2k}), differenced term by term.
    static constexpr double b2k_over_2k[] = {1.0 / 12.0, -1.0 / 120.0, 1.0 / 252.0, -1.0 / 240.0, 1.0 / 132.0};
    const double l = std::log1p(delta / z);
    double out = l + 0.5 * delta / (z * (z + delta));
    double zpow = 1.0;
    for (int k = 1; k <= 5; ++k) {
        zpow /= z * z;
        // (z+δ)^{-2k} - z^{-2k}
        const double diff = zpow * std::expm1(-2.0 * k * l);
        out -= b2k_over_2k[k - 1] * diff;
    }
    return out;
}

double gamma_ratio_derivative(double x, double p, double q)
{
    if (x + q > 0.0)
        return gamma_ratio_shifted(x, p, q) * digamma_difference(x + q, p - q);
    const double g = boost::math::tgamma(x + p);
    return g * (boost::math::digamma(x + p) * rgamma(x + q) + rgamma_prime(x + q));
}

} // namespace fragtail::special
