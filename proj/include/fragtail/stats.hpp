#pragma once

#include "fragtail/asymptotics.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace fragtail {

struct SurvivalCurve {
    std::vector<double> t_grid;
    std::vector<double> p_hat;
    std::vector<double> ci_half;  // 1.96 √(p̂(1-p̂)/n)
    std::size_t n = 0;
};

/// Empirical P(X > t) on the grid.
SurvivalCurve survival_curve(std::vector<double> samples, const std::vector<double>& t_grid);

/// n_points equally spaced times between the empirical (1 - p_hi) and (1 - p_lo) quantiles, pulled 2% inside.
std::vector<double> window_grid(std::vector<double> samples, double p_lo, double p_hi, std::size_t n_points);

struct ShapeFit {
    TailShape shape;
    double fitted_constant = 0.0;
    std::vector<double> t;
    std::vector<double> residuals;
    double max_abs_residual = 0.0;
};

/// Least-squares constant of log p̂ - log shape over grid points with p̂ ∈ [p_lo, p_hi].
ShapeFit shape_fit(const SurvivalCurve& curve, const TailShape& shape, double p_lo = 1e-3, double p_hi = 0.2);

struct MomentEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

MomentEstimate moment_estimate(const std::vector<double>& masses, double a);

struct KsResult {
    double statistic = 0.0;
    double critical = 0.0;
    bool pass_1pct = false;
};

inline constexpr double ks_c_1pct = 1.63;

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
KsResult ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Mean of x - y over paired observations, with the standard error of the difference.
struct PairedTest {
    double mean_x = 0.0;
    double mean_y = 0.0;
    double diff = 0.0;
    double stderr_diff = 0.0;
    double z = 0.0;
    bool pass = false;
};

PairedTest paired_difference(const std::vector<double>& x, const std::vector<double>& y, double z_max = 4.0);
/// Sample mean against a known value.
PairedTest mean_test(const std::vector<double>& x, double target, double z_max = 4.0);

} // namespace fragtail
