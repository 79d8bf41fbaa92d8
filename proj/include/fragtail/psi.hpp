#pragma once

#include "fragtail/laplace.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace fragtail {

/// ψ, the inverse of y ↦ y/φ(y) on (x_ψ, ∞).
///
/// Solved values are memoized. Every solve starts from the same dyadic
/// bracket [2^k, 2^{k+1}] regardless of what is cached, so results never
/// depend on call order or thread interleaving.
class PsiSolver {
public:
    explicit PsiSolver(PhiEvaluator eval, double rel_tol = 1e-10);
    PsiSolver(const PsiSolver& other);
    PsiSolver& operator=(const PsiSolver&) = delete;

    const PhiEvaluator& evaluator() const { return eval_; }
    double x_psi() const { return x_psi_; }
    double rel_tol() const { return rel_tol_; }

    double psi(double x) const;
    /// φ(ψ)²/(φ(ψ) - ψ φ'(ψ)) at ψ = psi(x).
    double psi_prime(double x) const;
    /// |ψ/φ(ψ) - x|/x at the solved ψ.
    double residual(double x) const;

    std::size_t cache_size() const;

private:
    double g(double y) const { return y / eval_.phi(y); }
    double dyadic_g(int k) const;

    PhiEvaluator eval_;
    double rel_tol_;
    double x_psi_;

    mutable std::mutex mutex_;
    mutable std::map<double, double> solved_;
    mutable std::map<int, double> dyadic_;
};

struct GrowthBound {
    double kappa = 0.0;
};

/// Largest log₂(ψ(2x)/ψ(x)) over the upper half of the doubling steps below x_max.
GrowthBound psi_growth_bound(const PsiSolver& solver, double x_max);

} // namespace fragtail
