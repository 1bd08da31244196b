#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ppvl/floquet.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace ppvl;
using namespace ppvl::floquet;
using doctest::Approx;

namespace {

std::vector<double> grid(double a, double b, double h)
{
    std::vector<double> g;
    const int n = static_cast<int>(std::floor((b - a) / h + 1e-9));
    for (int i = 0; i <= n; ++i) {
        g.push_back(a + i * h);
    }
    return g;
}

} // namespace

TEST_CASE("eigenvalues of 2x2 matrices")
{
    auto ev = eigenvalues({2.0, 0.0, 0.0, 0.5});
    CHECK(ev[0].real() == Approx(2.0));
    CHECK(ev[1].real() == Approx(0.5));
    ev = eigenvalues({0.0, -1.0, 1.0, 0.0});
    CHECK(std::abs(ev[0]) == Approx(1.0));
    CHECK(std::abs(ev[0].imag()) == Approx(1.0));
    // Nearly singular product: small root accurate through det / big.
    ev = eigenvalues({1e8, 1.0, 0.0, 1e-8});
    CHECK(ev[1].real() == Approx(1e-8).epsilon(1e-12));
}

TEST_CASE("monodromy of the undriven oscillator")
{
    const Excitation ex;
    const Monodromy m = monodromy({0.0, 0.0, 0.5}, ex);
    CHECK(m.m[0] == Approx(-1.0).epsilon(1e-9));
    CHECK(std::abs(m.m[1]) < 1e-9);
    CHECK(std::abs(m.m[2]) < 1e-9);
    CHECK(m.m[3] == Approx(-1.0).epsilon(1e-9));
    CHECK(m.multipliers[0].real() == Approx(-1.0).epsilon(1e-6));
    CHECK(m.multipliers[1].real() == Approx(-1.0).epsilon(1e-6));

    for (double w : {0.3, 0.77, 1.31, 2.2}) {
        const Monodromy u = monodromy({0.0, 0.0, w}, ex);
        CHECK(std::abs(u.multipliers[0]) == Approx(1.0).epsilon(1e-8));
        CHECK(std::abs(u.multipliers[1]) == Approx(1.0).epsilon(1e-8));
        CHECK(is_stable(u));
    }
}

TEST_CASE("Liouville determinant")
{
    const Excitation ex;
    for (double e : {0.0, 0.04, 0.3, 0.8}) {
        const Monodromy m = monodromy({e, 0.05, 0.5}, ex);
        CHECK(std::abs(m.det() / std::exp(-0.05 * std::numbers::pi) - 1.0) < 1e-8);
    }
    CHECK(std::exp(-0.05 * std::numbers::pi) == Approx(0.854636).epsilon(1e-6));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 40; ++i) {
        const DimensionlessParams p{0.9 * u(rng), 0.2 * u(rng), 0.1 + 1.5 * u(rng)};
        const Monodromy m = monodromy(p, ex);
        CHECK(std::abs(m.det() / std::exp(-two_pi * p.beta * p.omega) - 1.0) < 1e-8);
    }
}

TEST_CASE("is_stable examples")
{
    const Excitation ex;
    CHECK(is_stable(monodromy({0.0, 0.05, 0.5}, ex)));
    CHECK_FALSE(is_stable(monodromy({0.04, 0.05, 0.5}, ex)));
    CHECK(is_stable(monodromy({0.2, 0.05, 1.0}, ex)));
}

TEST_CASE("half-cone membership")
{
    const Excitation ex;
    CHECK(halfcone_contains(1, {0.01, 0.0, 0.5}, ex));
    CHECK_FALSE(halfcone_contains(1, {0.03, 0.05, 0.5}, ex));
    for (double w : {0.5, 1.0, 1.5}) {
        CHECK_FALSE(halfcone_contains(2, {0.5, 0.0, w}, ex));
    }
    // A second harmonic opens the second cone.
    const Excitation two({0.5}, {0.0, 0.5});
    CHECK(halfcone_contains(2, {0.2, 0.0, 1.0}, two));

    SUBCASE("agrees with the closed-form first tongue")
    {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 500; ++i) {
            const DimensionlessParams p{0.2 * u(rng), 0.1 * u(rng), 0.4 + 0.2 * u(rng)};
            const Tongue t = first_tongue_interval(p.beta, p.epsilon);
            const bool inside = t.interval && p.omega > t.interval->first && p.omega < t.interval->second;
            CHECK(inside == halfcone_contains(1, p, ex));
        }
    }
}

TEST_CASE("first tongue interval")
{
    Tongue t = first_tongue_interval(0.0, 0.1);
    REQUIRE(t.interval);
    CHECK(t.interval->first == Approx(0.4625));
    CHECK(t.interval->second == Approx(0.5375));

    t = first_tongue_interval(0.05, 0.04);
    REQUIRE(t.interval);
    CHECK(std::abs(t.interval->first - 0.49171) < 1e-5);
    CHECK(std::abs(t.interval->second - 0.50829) < 1e-5);

    CHECK_FALSE(first_tongue_interval(0.05, 0.03).interval);

    for (double e : {0.04, 0.1, 0.3}) {
        const Tongue s = first_tongue_interval(0.05, e);
        REQUIRE(s.interval);
        CHECK(0.5 - s.interval->first == Approx(s.interval->second - 0.5).epsilon(1e-14));
        CHECK(s.interval->first + s.interval->second == Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("stability scan")
{
    const Excitation ex;
    const auto w = grid(0.45, 0.55, 0.01);
    const auto e = grid(0.0, 0.1, 0.02);
    const StabilityGrid g1 = stability_scan(w, e, 0.05, ex, 1, ode::IntegratorConfig::scan());
    const StabilityGrid g3 = stability_scan(w, e, 0.05, ex, 3, ode::IntegratorConfig::scan());
    CHECK(g1.cells == g3.cells);
    for (std::size_t i = 0; i < w.size(); ++i) {
        CHECK(g1.at(i, 0) == CellStability::Stable);
    }
    CHECK(g1.at(5, e.size() - 1) == CellStability::Unstable);
    CHECK_THROWS_AS(stability_scan({0.5, 0.4}, e, 0.05, ex), Error);
    CHECK_THROWS_AS(stability_scan(w, {0.5, 1.2}, 0.05, ex), Error);
}

TEST_CASE("second resonance domain is empty")
{
    const Excitation ex;
    const StabilityGrid g = stability_scan(grid(0.9, 1.1, 0.01), grid(0.0, 0.2, 0.02), 0.05, ex, 2);
    for (const auto c : g.cells) {
        CHECK(c == CellStability::Stable);
    }
}

TEST_CASE("numerical tongue edges approach the first-order cone")
{
    const Excitation ex;
    double previous_gap = 0.0;
    for (double e : {0.04, 0.06, 0.08, 0.10}) {
        const auto num = numerical_tongue(0.5, 0.06, e, 0.05, ex);
        const auto ana = first_tongue_interval(0.05, e).interval;
        REQUIRE(num);
        REQUIRE(ana);
        const double gap = std::max(std::abs(num->first - ana->first), std::abs(num->second - ana->second));
        CHECK(gap <= 0.01);
        if (e == 0.04) {
            CHECK(gap <= 0.005);
        }
        CHECK(gap >= previous_gap - 2e-4);
        previous_gap = gap;
    }
}

TEST_CASE("boundary bisection needs a proper bracket")
{
    const Excitation ex;
    CHECK_THROWS_AS(locate_boundary(0.5, 0.45, 0.04, 0.05, ex), Error);
    const double w = locate_boundary(0.45, 0.5, 0.04, 0.05, ex, 1e-5);
    CHECK(w == Approx(0.4917).epsilon(5e-3));
}
