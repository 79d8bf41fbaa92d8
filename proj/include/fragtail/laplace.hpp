#pragma once

#include "fragtail/measures.hpp"

#include <optional>
#include <vector>

namespace fragtail {

enum class PhiMethod { atomic_sum, quadrature, closed_form };

const char* to_string(PhiMethod method);

struct PhiValue {
    double value = 0.0;
    double abs_error = 0.0;
};

/// φ(x) = ∫(1 - Σ sᵢ^{x+1}) ν(ds) and friends for one measure.
class PhiEvaluator {
public:
    explicit PhiEvaluator(DislocationSpec spec, double rel_tol = 1e-10);

    const DislocationSpec& spec() const { return spec_; }
    PhiMethod method() const { return method_; }
    double rel_tol() const { return rel_tol_; }

    double phi(double x) const { return phi_detailed(x).value; }
    PhiValue phi_detailed(double x) const;
    double phi_prime(double x) const;
    /// φ₁(x) = ∫(1 - s₁^{x+1}) ν(ds); finite measures only.
    double phi_first(double x) const;
    /// lim_{x→0+} x/φ(x).
    double x_psi() const { return x_psi_; }

private:
    double compute_x_psi() const;

    DislocationSpec spec_;
    PhiMethod method_;
    double rel_tol_;
    double x_psi_ = 0.0;
};

struct HReport {
    std::vector<double> grid;
    std::vector<double> ratio;  // φ'(x)·x/φ(x)
    double tail_sup = 0.0;
    double delta = 0.01;
    bool pass = false;
};

HReport check_hypothesis_H(const PhiEvaluator& eval, double x_max, std::size_t n_grid = 200, double delta = 0.01);

struct GammaQuotient {
    double exact = 0.0;
    double expansion2 = 0.0;
};

/// Γ(x+c)/Γ(x) and its two-term expansion x^c(1 - c(1-c)/(2x)).
GammaQuotient gamma_quotient(double x, double c);

struct IncompleteBetaPhi {
    double gamma_form = 0.0;
    std::optional<double> quadrature;  // only for b > 0
};

/// Γ(a)/Γ(a+b) - Γ(x+a)/Γ(x+a+b), and for b > 0 the integral it equals.
IncompleteBetaPhi incomplete_beta_phi(double a, double b, double x);

} // namespace fragtail
