#include "fragtail/stats.hpp"

#include "fragtail/errors.hpp"

#include <algorithm>
#include <cmath>

namespace fragtail {

SurvivalCurve survival_curve(std::vector<double> samples, const std::vector<double>& t_grid)
{
    if (samples.size() < 100)
        throw ConfigError("survival_curve needs at least 100 samples");
    std::sort(samples.begin(), samples.end());
    SurvivalCurve c;
    c.n = samples.size();
    c.t_grid = t_grid;
    const double n = double(c.n);
    for (double t : t_grid) {
        const auto above = samples.end() - std::upper_bound(samples.begin(), samples.end(), t);
        const double p = double(above) / n;
        c.p_hat.push_back(p);
        c.ci_half.push_back(1.96 * std::sqrt(p * (1.0 - p) / n));
    }
    return c;
}

std::vector<double> window_grid(std::vector<double> samples, double p_lo, double p_hi, std::size_t n_points)
{
    if (samples.empty() || n_points < 2 || !(p_lo > 0.0 && p_lo < p_hi && p_hi < 1.0))
        throw ConfigError("window_grid needs samples, >= 2 points and 0 < p_lo < p_hi < 1");
    std::sort(samples.begin(), samples.end());
    const double n = double(samples.size());
    auto upper_quantile = [&](double p) {
        const auto k = static_cast<std::size_t>(std::clamp(std::floor(n * (1.0 - p)), 0.0, n - 1.0));
        return samples[k];
    };
    const double t_a = upper_quantile(p_hi * 0.98);
    const double t_b = upper_quantile(p_lo * 1.02);
    std::vector<double> grid;
    for (std::size_t i = 0; i < n_points; ++i)
        grid.push_back(t_a + (t_b - t_a) * double(i) / double(n_points - 1));
    return grid;
}

ShapeFit shape_fit(const SurvivalCurve& curve, const TailShape& shape, double p_lo, double p_hi)
{
    ShapeFit fit;
    fit.shape = shape;
    std::vector<double> diff;
    for (std::size_t i = 0; i < curve.t_grid.size(); ++i) {
        const double p = curve.p_hat[i];
        if (p >= p_lo && p <= p_hi && p > 0.0) {
            fit.t.push_back(curve.t_grid[i]);
            diff.push_back(std::log(p) - shape.log_value(curve.t_grid[i]));
        }
    }
    if (diff.size() < 5)
        throw InsufficientWindow("shape_fit needs at least 5 grid points inside the window, got " +
                                 std::to_string(diff.size()));
    double sum = 0.0;
    for (double d : diff)
        sum += d;
    fit.fitted_constant = sum / double(diff.size());
    for (double d : diff) {
        fit.residuals.push_back(d - fit.fitted_constant);
        fit.max_abs_residual = std::max(fit.max_abs_residual, std::abs(fit.residuals.back()));
    }
    return fit;
}

MomentEstimate moment_estimate(const std::vector<double>& masses, double a)
{
    if (!(a > 0.0))
        throw ConfigError("moment power must be positive");
    if (masses.empty())
        throw ConfigError("moment_estimate needs samples");
    double s = 0.0;
    double s2 = 0.0;
    for (double m : masses) {
        const double v = std::pow(m, a);
        s += v;
        s2 += v * v;
    }
    const double n = double(masses.size());
    MomentEstimate out;
    out.mean = s / n;
    const double var = n > 1 ? std::max(0.0, (s2 - n * out.mean * out.mean) / (n - 1.0)) : 0.0;
    out.stderr_ = std::sqrt(var / n);
    return out;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty())
        throw ConfigError("ks_two_sample needs nonempty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = double(a.size());
    const double nb = double(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    // Step both ECDFs past each distinct value so ties are handled exactly.
    while (i < a.size() || j < b.size()) {
        double x;
        if (j == b.size() || (i < a.size() && a[i] <= b[j]))
            x = a[i];
        else
            x = b[j];
        while (i < a.size() && a[i] == x)
            ++i;
        while (j < b.size() && b[j] == x)
            ++j;
        d = std::max(d, std::abs(double(i) / na - double(j) / nb));
    }
    KsResult r;
    r.statistic = d;
    r.critical = ks_c_1pct * std::sqrt((na + nb) / (na * nb));
    r.pass_1pct = d < r.critical;
    return r;
}

KsResult ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf)
{
    if (samples.empty())
        throw ConfigError("ks_one_sample needs samples");
    std::sort(samples.begin(), samples.end());
    const double n = double(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, std::abs(double(i + 1) / n - f), std::abs(f - double(i) / n)});
    }
    KsResult r;
    r.statistic = d;
    r.critical = ks_c_1pct / std::sqrt(n);
    r.pass_1pct = d < r.critical;
    return r;
}

PairedTest paired_difference(const std::vector<double>& x, const std::vector<double>& y, double z_max)
{
    if (x.size() != y.size() || x.size() < 2)
        throw ConfigError("paired_difference needs equally sized samples (n >= 2)");
    const double n = double(x.size());
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    PairedTest t;
    t.mean_x = sx / n;
    t.mean_y = sy / n;
    t.diff = t.mean_x - t.mean_y;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = (x[i] - y[i]) - t.diff;
        ss += d * d;
    }
    t.stderr_diff = std::sqrt(ss / (n - 1.0) / n);
    t.z = t.stderr_diff > 0.0 ? t.diff / t.stderr_diff : (t.diff == 0.0 ? 0.0 : INFINITY);
    t.pass = std::abs(t.z) <= z_max;
    return t;
}

PairedTest mean_test(const std::vector<double>& x, double target, double z_max)
{
    return paired_difference(x, std::vector<double>(x.size(), target), z_max);
}

} // namespace fragtail
