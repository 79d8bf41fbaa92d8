#include "fragtail/errors.hpp"
#include "fragtail/psi.hpp"

#include <doctest.h>

#include <cmath>
#include <thread>

using namespace fragtail;

namespace {

std::vector<double> log_grid(double lo, double hi, int n)
{
    std::vector<double> g;
    for (int i = 0; i < n; ++i)
        g.push_back(lo * std::pow(hi / lo, double(i) / (n - 1)));
    return g;
}

// Root of y/(1 - 2^-y) = x by plain bisection on (0, x].
double halves_psi_oracle(double x)
{
    double lo = 0.0, hi = x;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mid / -std::expm1(-mid * std::log(2.0)) < x ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("uniform binary split has psi(x) = x - 2")
{
    const PsiSolver solver{PhiEvaluator(families::uniform_k(2))};
    CHECK(solver.psi(4.0) == doctest::Approx(2.0).epsilon(1e-9));
    for (double x : log_grid(2.1, 1e3, 50)) {
        CAPTURE(x);
        CHECK(std::abs(solver.psi(x) - (x - 2.0)) <= 1e-9 * x);
        CHECK(solver.psi_prime(x) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("identical halves against a bisection oracle")
{
    const PsiSolver solver{PhiEvaluator(families::identical_k(2))};
    const double want = halves_psi_oracle(5.0);
    CHECK(want == doctest::Approx(4.823404066).epsilon(1e-9));
    CHECK(solver.psi(5.0) == doctest::Approx(want).epsilon(1e-10));
    for (double x : {1.5, 2.0, 10.0, 100.0})
        CHECK(solver.psi(x) == doctest::Approx(halves_psi_oracle(x)).epsilon(1e-10));
}

TEST_CASE("psi_prime matches central differences")
{
    const std::pair<DislocationSpec, double> cases[] = {
        {families::identical_k(2), 5.0}, {families::stable(1.5), 100.0}, {families::beta(2.0, 3.0), 30.0}};
    for (const auto& [spec, x] : cases) {
        const PsiSolver solver{PhiEvaluator(spec)};
        const double h = 1e-4 * x;
        const double fd = (solver.psi(x + h) - solver.psi(x - h)) / (2 * h);
        CAPTURE(spec.family_id());
        CHECK(solver.psi_prime(x) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("psi is undefined at and below x_psi")
{
    const PsiSolver solver{PhiEvaluator(families::uniform_k(2))};
    CHECK_THROWS_AS(solver.psi(2.0), DomainError);
    CHECK_THROWS_AS(solver.psi(1.0), DomainError);
    CHECK_THROWS_AS(solver.psi(NAN), DomainError);
    CHECK_THROWS_AS(solver.psi(INFINITY), DomainError);
}

TEST_CASE("residual, monotonicity and elasticity on log grids")
{
    const DislocationSpec specs[] = {families::identical_k(2), families::uniform_k(2), families::uniform_k(4),
                                     families::beta(0.7, 1.3), families::stable(1.25), families::stable(2.0),
                                     families::ford(0.3), families::beta_splitting(-1.6),
                                     families::beta_splitting(-1.9)};
    for (const auto& spec : specs) {
        CAPTURE(spec.family_id());
        const PsiSolver solver{PhiEvaluator(spec)};
        const double lo = solver.x_psi() * 1.01 + 1e-3;
        double prev = 0.0;
        for (double x : log_grid(lo, 1e6, 60)) {
            CAPTURE(x);
            CHECK(solver.residual(x) <= 1e-10);
            const double y = solver.psi(x);
            CHECK(y > prev);
            prev = y;
            // x ψ'/ψ = 1/(1 - yφ'(y)/φ(y)) at y = ψ(x).
            CHECK(solver.psi_prime(x) * x / y >= 1.0 - 1e-6);
        }
    }
}

TEST_CASE("growth exponent tracks the index of phi")
{
    CHECK(psi_growth_bound(PsiSolver{PhiEvaluator(families::uniform_k(2))}, 1e5).kappa ==
          doctest::Approx(1.0).epsilon(1e-2));
    // φ ~ x^{1-1/γ} gives ψ ~ x^γ.
    const double k15 = psi_growth_bound(PsiSolver{PhiEvaluator(families::stable(1.5))}, 1e6).kappa;
    CHECK(k15 == doctest::Approx(1.5).epsilon(1e-2));
    CHECK_THROWS_AS(psi_growth_bound(PsiSolver{PhiEvaluator(families::uniform_k(2))}, 5.0), ConfigError);
}

TEST_CASE("results do not depend on call order or threads")
{
    const auto spec = families::beta_splitting(-1.6);
    const auto xs = log_grid(2.0, 1e5, 40);
    std::vector<double> fresh;
    for (double x : xs)
        fresh.push_back(PsiSolver{PhiEvaluator(spec)}.psi(x));

    const PsiSolver reverse{PhiEvaluator(spec)};
    for (std::size_t i = xs.size(); i-- > 0;)
        CHECK(reverse.psi(xs[i]) == fresh[i]);

    const PsiSolver shared{PhiEvaluator(spec)};
    std::vector<double> out(xs.size());
    std::vector<std::thread> pool;
    for (int w = 0; w < 4; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = static_cast<std::size_t>(w); i < xs.size(); i += 4)
                out[i] = shared.psi(xs[i]);
        });
    for (auto& t : pool)
        t.join();
    CHECK(out == fresh);
    CHECK(shared.cache_size() == xs.size());
}
