#include "fragtail/psi.hpp"

#include "fragtail/errors.hpp"

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>

namespace fragtail {

PsiSolver::PsiSolver(PhiEvaluator eval, double rel_tol)
    : eval_(std::move(eval)), rel_tol_(rel_tol), x_psi_(eval_.x_psi())
{
    if (!(rel_tol > 0.0))
        throw ConfigError("psi tolerance must be positive");
}

PsiSolver::PsiSolver(const PsiSolver& other)
    : eval_(other.eval_), rel_tol_(other.rel_tol_), x_psi_(other.x_psi_)
{
    std::lock_guard lock(other.mutex_);
    solved_ = other.solved_;
    dyadic_ = other.dyadic_;
}

std::size_t PsiSolver::cache_size() const
{
    std::lock_guard lock(mutex_);
    return solved_.size();
}

double PsiSolver::dyadic_g(int k) const
{
    {
        std::lock_guard lock(mutex_);
        if (auto it = dyadic_.find(k); it != dyadic_.end())
            return it->second;
    }
    const double v = g(std::ldexp(1.0, k));
    std::lock_guard lock(mutex_);
    dyadic_.emplace(k, v);
    return v;
}

double PsiSolver::psi(double x) const
{
    if (!(x >= x_psi_ * (1.0 + 1e-6)) || !(x > x_psi_) || !std::isfinite(x))
        throw DomainError("psi is defined only for x > x_psi = " + std::to_string(x_psi_));
    {
        std::lock_guard lock(mutex_);
        if (auto it = solved_.find(x); it != solved_.end())
            return it->second;
    }

    // g(y) = y/φ(y) is strictly increasing from x_ψ; find g(2^k) < x <= g(2^{k+1}).
    constexpr int k_min = -1000;
    constexpr int k_max = 1000;
    int k = 0;
    if (dyadic_g(0) < x) {
        while (dyadic_g(k + 1) < x) {
            if (++k >= k_max)
                throw NumericalFailure("psi bracket search overflowed", INFINITY);
        }
    } else {
        do {
            if (--k <= k_min)
                throw NumericalFailure("psi bracket search underflowed", INFINITY);
        } while (!(dyadic_g(k) < x));
    }
    double lo = std::ldexp(1.0, k);
    double hi = std::ldexp(1.0, k + 1);
    double y = hi;
    if (dyadic_g(k + 1) != x) {
        std::uintmax_t max_iter = 200;
        auto f = [&](double v) { return g(v) - x; };
        auto [a, b] = boost::math::tools::toms748_solve(
            f, lo, hi, dyadic_g(k) - x, dyadic_g(k + 1) - x, boost::math::tools::eps_tolerance<double>(50), max_iter);
        y = std::abs(f(a)) <= std::abs(f(b)) ? a : b;
    }
    const double resid = std::abs(g(y) - x);
    if (!(resid <= rel_tol_ * x))
        throw NumericalFailure("psi residual above tolerance", resid / x);

    std::lock_guard lock(mutex_);
    solved_.emplace(x, y);
    return y;
}

double PsiSolver::psi_prime(double x) const
{
    const double y = psi(x);
    const double p = eval_.phi(y);
    const double denom = p - y * eval_.phi_prime(y);
    if (!(denom > 0.0))
        throw NumericalFailure("psi_prime denominator is not positive", denom);
    return p * p / denom;
}

double PsiSolver::residual(double x) const
{
    const double y = psi(x);
    return std::abs(g(y) - x) / x;
}

GrowthBound psi_growth_bound(const PsiSolver& solver, double x_max)
{
    double x0 = std::max(2.0 * solver.x_psi(), 1.0);
    std::vector<double> steps;
    for (double x = x0; 2.0 * x <= x_max; x *= 2.0)
        steps.push_back(std::log2(solver.psi(2.0 * x) / solver.psi(x)));
    if (steps.size() < 2)
        throw ConfigError("psi_growth_bound needs x_max >= 4 max(2 x_psi, 1)");
    GrowthBound out;
    for (std::size_t i = steps.size() / 2; i < steps.size(); ++i)
        out.kappa = std::max(out.kappa, steps[i]);
    return out;
}

} // namespace fragtail
