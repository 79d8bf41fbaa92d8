#pragma once

// Gamma-function helpers that stay finite where the naive formulas do not:
// reciprocal Gamma through its zeros, ratios at large arguments, and
// digamma differences without cancellation.

namespace fragtail::special {

/// 1/Γ(z); entire, zero at z = 0, -1, -2, ...
double rgamma(double z);

/// d/dz 1/Γ(z), including the nonpositive integers.
double rgamma_prime(double z);

/// Γ(p)/Γ(q) for p > 0 and any real q.
double gamma_ratio(double p, double q);

/// Γ(x+p)/Γ(x+q) with the offset q - p taken exactly; (x+q) - (x+p) loses digits for large x.
double gamma_ratio_shifted(double x, double p, double q);

/// ψ₀(z + delta) - ψ₀(z) for z > 0, z + delta > 0.
double digamma_difference(double z, double delta);

/// d/dx [Γ(x+p)/Γ(x+q)] for x + p > 0.
double gamma_ratio_derivative(double x, double p, double q);

} // namespace fragtail::special
