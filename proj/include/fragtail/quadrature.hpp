#pragma once

#include "fragtail/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <cstddef>
#include <string>

namespace fragtail::quad {

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;
    double l1 = 0.0;
};

// Ten refinement levels of tanh-sinh stay under 2^14 abscissas.
inline constexpr std::size_t max_de_refinements = 10;

/// Tanh-sinh on [a, b] for integrands with algebraic endpoint singularities.
/// f is called as f(x, dist_to_a, dist_to_b) with both distances computed
/// without cancellation, so singular factors like (b - x)^{-3/4} stay exact.
template <class F>
QuadResult integrate_de(F&& f, double a, double b, double rel_tol)
{
    thread_local boost::math::quadrature::tanh_sinh<double> integrator(max_de_refinements);
    QuadResult r;
    if (!(b > a))
        return r;
    const double width = b - a;
    auto g = [&](double x, double xc) {
        // Boost passes xc = a - x left of the midpoint and b - x right of it.
        if (xc <= 0.0)
            return f(x, -xc, width + xc);
        return f(x, width - xc, xc);
    };
    try {
        r.value = integrator.integrate(g, a, b, rel_tol, &r.abs_error, &r.l1);
    } catch (const std::exception& e) {
        throw NumericalFailure(std::string("tanh-sinh quadrature failed: ") + e.what(), INFINITY);
    }
    // Boost reports the error on the normalized interval [-1, 1].
    r.abs_error *= 0.5 * width;
    if (!std::isfinite(r.value) || r.abs_error > 10.0 * rel_tol * r.l1)
        throw NumericalFailure("tanh-sinh quadrature did not reach tolerance", r.abs_error);
    return r;
}

/// Adaptive Gauss-Kronrod (15 points) on [a, b] for smooth integrands.
template <class F>
QuadResult integrate_smooth(F&& f, double a, double b, double rel_tol)
{
    QuadResult r;
    if (a == b)
        return r;
    try {
        r.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
            f, a, b, 30, rel_tol, &r.abs_error, &r.l1);
    } catch (const std::exception& e) {
        throw NumericalFailure(std::string("Gauss-Kronrod quadrature failed: ") + e.what(), INFINITY);
    }
    if (!std::isfinite(r.value) || r.abs_error > 10.0 * rel_tol * r.l1)
        throw NumericalFailure("Gauss-Kronrod quadrature did not reach tolerance", r.abs_error);
    return r;
}

} // namespace fragtail::quad
