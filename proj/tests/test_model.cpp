#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ppvl/integrate.hpp"
#include "ppvl/model.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <string>

using namespace ppvl;
using doctest::Approx;

namespace {

const double pi = std::numbers::pi;

// Independent transcriptions of the q-equation and its linearization.
double q_accel(double q, double qd, double tau, double eps, double beta, double omega)
{
    const double phi = std::cos(tau);
    const double phid = -std::sin(tau);
    const double phidd = -std::cos(tau);
    const double len = 1.0 + eps * phi;
    return -beta * omega * qd + eps * (phidd + beta * omega * phid) / len * q - omega * omega * std::sin(q / len);
}

double hill_accel(double q, double qd, double tau, double eps, double beta, double omega)
{
    const double phi = std::cos(tau);
    const double phid = -std::sin(tau);
    const double phidd = -std::cos(tau);
    return -beta * omega * qd - (omega * omega - eps * (phidd + beta * omega * phid)) / (1.0 + eps * phi) * q;
}

} // namespace

TEST_CASE("excitation values and derivatives")
{
    const Excitation c;
    auto v = c(0.0);
    CHECK(v.phi == Approx(1.0));
    CHECK(v.phi_dot == Approx(0.0));
    CHECK(v.phi_ddot == Approx(-1.0));

    v = c(pi / 2);
    CHECK(v.phi == Approx(0.0).epsilon(1e-15));
    CHECK(v.phi_dot == Approx(-1.0));
    CHECK(std::abs(v.phi_ddot) < 1e-15);

    const Excitation second({0.0, 0.5}, {});
    v = eval_excitation(second, 0.0);
    CHECK(v.phi == Approx(0.5));
    CHECK(v.phi_dot == Approx(0.0));
    CHECK(v.phi_ddot == Approx(-2.0));
}

TEST_CASE("excitation derivatives agree with finite differences")
{
    const Excitation ex({0.4, 0.1, -0.2}, {0.1, 0.05, 0.0});
    const double h = 1e-5;
    for (double tau : {0.0, 0.7, 2.1, 4.4, 6.0}) {
        const auto v = ex(tau);
        const double d = (ex(tau + h).phi - ex(tau - h).phi) / (2 * h);
        const double dd = (ex(tau + h).phi_dot - ex(tau - h).phi_dot) / (2 * h);
        CHECK(v.phi_dot == Approx(d).epsilon(1e-8));
        CHECK(v.phi_ddot == Approx(dd).epsilon(1e-8));
    }
}

TEST_CASE("excitation amplitude bound")
{
    CHECK_NOTHROW(Excitation({0.6}, {0.8}));
    CHECK_THROWS_AS(Excitation({0.9}, {0.9}), Error);
    CHECK_THROWS_AS(Excitation({}, {}), Error);
    CHECK(Excitation::sine().peak() == Approx(1.0).epsilon(1e-6));
}

TEST_CASE("fourier coefficients")
{
    const Excitation c;
    CHECK(fourier_coeff(c, 1).a == 1.0);
    CHECK(fourier_coeff(c, 1).b == 0.0);
    CHECK(fourier_coeff(c, 2).a == 0.0);
    CHECK(fourier_coeff(c, 2).b == 0.0);
    CHECK(fourier_coeff(Excitation::sine(), 1).a == 0.0);
    CHECK(fourier_coeff(Excitation::sine(), 1).b == 1.0);
    CHECK_THROWS_AS(fourier_coeff(c, 0), Error);

    SUBCASE("quadrature path reproduces stored series")
    {
        const Excitation ex({0.3, -0.2, 0.1}, {0.25, 0.0, -0.05});
        for (int k = 1; k <= 5; ++k) {
            const FourierPair stored = fourier_coeff(ex, k);
            const FourierPair quad = fourier_coeff([&](double t) { return ex(t).phi; }, k);
            CHECK(std::abs(stored.a - quad.a) < 1e-10);
            CHECK(std::abs(stored.b - quad.b) < 1e-10);
        }
    }
}

TEST_CASE("parameter validation names the invariant")
{
    try {
        DimensionlessParams{1.5, 0.05, 0.5}.validate();
        FAIL("expected rejection");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
        CHECK(std::string(e.what()).find("epsilon < 1") != std::string::npos);
    }
    CHECK_THROWS_AS(DimensionlessParams({0.1, -0.1, 0.5}).validate(), Error);
    CHECK_THROWS_AS(DimensionlessParams({0.1, 0.1, 0.0}).validate(), Error);
    CHECK_NOTHROW(DimensionlessParams({0.0, 0.0, 1.0}).validate());
}

TEST_CASE("rhs_theta")
{
    const Excitation ex;
    const auto eq = rhs_theta({0.0, 0.0, 1.3}, {0.3, 0.1, 0.7}, ex);
    CHECK(eq.first == 0.0);
    CHECK(eq.second == 0.0);

    const auto free = rhs_theta({pi / 2, 0.0, 0.4}, {0.0, 0.0, 0.5}, ex);
    CHECK(free.first == 0.0);
    CHECK(free.second == Approx(-0.25));

    const auto d = rhs_theta({0.1, 0.0, 0.0}, {0.04, 0.05, 0.5}, ex);
    CHECK(d.first == 0.0);
    CHECK(std::abs(d.second - (-0.25 * std::sin(0.1) / 1.04)) < 1e-15);
    CHECK(std::abs(d.second - (-0.024)) < 1e-5);
}

TEST_CASE("rhs_theta is odd and vanishes at the equilibrium")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Excitation ex;
    for (int i = 0; i < 200; ++i) {
        const DimensionlessParams p{0.99 * u(rng), 0.2 * u(rng), 0.05 + 2 * u(rng)};
        const State s{6 * u(rng) - 3, 6 * u(rng) - 3, 20 * u(rng)};
        const auto a = rhs_theta(s, p, ex);
        const auto b = rhs_theta({-s.theta, -s.theta_dot, s.tau}, p, ex);
        CHECK(a.first == -b.first);
        CHECK(a.second == -b.second);
        const auto z = rhs_theta({0.0, 0.0, s.tau}, p, ex);
        CHECK(z.first == 0.0);
        CHECK(z.second == 0.0);
    }
}

TEST_CASE("rhs_q")
{
    const Excitation ex;
    const auto z = rhs_q({0.0, 0.0, 2.0}, {0.2, 0.05, 0.5}, ex);
    CHECK(z.first == 0.0);
    CHECK(z.second == 0.0);

    const DimensionlessParams flat{0.0, 0.05, 0.5};
    for (double q : {-2.0, 0.3, 1.1}) {
        const auto d = rhs_q({q, 0.4, 0.9}, flat, ex);
        CHECK(d.second == Approx(-0.05 * 0.5 * 0.4 - 0.25 * std::sin(q)).epsilon(1e-14));
    }

    const DimensionlessParams p{0.04, 0.05, 0.5};
    const auto d = rhs_q({0.2, 0.0, 0.0}, p, ex);
    CHECK(std::abs(d.second - q_accel(0.2, 0.0, 0.0, 0.04, 0.05, 0.5)) < 1e-10);
    for (double tau : {0.3, 1.7, 3.9, 5.5}) {
        const auto e = rhs_q({0.7, -0.3, tau}, {0.3, 0.1, 0.8}, ex);
        CHECK(std::abs(e.second - q_accel(0.7, -0.3, tau, 0.3, 0.1, 0.8)) < 1e-12);
    }
}

TEST_CASE("rhs_hill_linearized")
{
    const Excitation ex;
    const auto plain = rhs_hill_linearized(0.8, -0.2, 1.0, {0.0, 0.05, 0.5}, ex);
    CHECK(plain.second == Approx(-0.05 * 0.5 * -0.2 - 0.25 * 0.8));

    const auto d = rhs_hill_linearized(1.0, 0.0, 0.0, {0.04, 0.0, 0.5}, ex);
    CHECK(std::abs(d.second - (-(0.25 - 0.04 * -1.0) / 1.04)) < 1e-12);
    CHECK(std::abs(d.second - (-0.27885)) < 1e-5);

    for (double tau : {0.5, 2.5, 4.5}) {
        const auto e = rhs_hill_linearized(-0.4, 0.9, tau, {0.2, 0.07, 0.6}, ex);
        CHECK(std::abs(e.second - hill_accel(-0.4, 0.9, tau, 0.2, 0.07, 0.6)) < 1e-12);
    }
}

TEST_CASE("rhs_variational")
{
    const Excitation ex;
    const DimensionlessParams p{0.3, 0.05, 0.6};

    SUBCASE("about theta = 0")
    {
        for (double tau : {0.0, 1.0, 3.0}) {
            const Tangent t = rhs_variational({0.0, 0.0, tau}, {0.4, -0.7}, p, ex);
            const Derivative h = rhs_hill_linearized(0.4, -0.7, tau, p, ex);
            CHECK(t.d_theta == Approx(h.first));
            // Same linear flow as the Hill equation but in theta coordinates.
            const auto v = ex(tau);
            const double len = 1.0 + p.epsilon * v.phi;
            const double expect =
                -(2 * p.epsilon * v.phi_dot / len + p.beta * p.omega) * -0.7 - p.omega * p.omega / len * 0.4;
            CHECK(t.d_theta_dot == Approx(expect));
        }
    }

    SUBCASE("linear in delta")
    {
        const State s{1.2, -0.4, 2.2};
        const Tangent a = rhs_variational(s, {0.3, 0.1}, p, ex);
        const Tangent b = rhs_variational(s, {-0.6, -0.2}, p, ex);
        CHECK(b.d_theta == Approx(-2 * a.d_theta));
        CHECK(b.d_theta_dot == Approx(-2 * a.d_theta_dot));
    }

    SUBCASE("matches a directional derivative of rhs_theta")
    {
        const State s{0.9, 0.5, 1.4};
        const Tangent dlt{0.6, -0.8};
        const double h = 1e-6;
        const auto fp = rhs_theta({s.theta + h * dlt.d_theta, s.theta_dot + h * dlt.d_theta_dot, s.tau}, p, ex);
        const auto fm = rhs_theta({s.theta - h * dlt.d_theta, s.theta_dot - h * dlt.d_theta_dot, s.tau}, p, ex);
        const Tangent t = rhs_variational(s, dlt, p, ex);
        CHECK(t.d_theta == Approx((fp.first - fm.first) / (2 * h)).epsilon(1e-8));
        CHECK(t.d_theta_dot == Approx((fp.second - fm.second) / (2 * h)).epsilon(1e-8));
    }
}

TEST_CASE("to_dimensionless")
{
    const auto a = to_dimensionless({1.0, 1.0, 0.0, 1.0, 0.0, 1.0});
    CHECK(a.epsilon == 0.0);
    CHECK(a.beta == 0.0);
    CHECK(a.omega == Approx(1.0));

    const auto b = to_dimensionless({1.0, 9.81, 0.3924, 2.0, 0.05, 9.81});
    CHECK(b.epsilon == Approx(0.04));
    CHECK(b.omega == Approx(0.5));
    CHECK(b.beta == Approx(0.05));

    CHECK_THROWS_AS(to_dimensionless({1.0, 1.0, 1.0, 1.0, 0.0, 9.81}), Error);
    CHECK_THROWS_AS(to_dimensionless({0.0, 1.0, 0.1, 1.0, 0.0, 9.81}), Error);
}

TEST_CASE("theta <-> q map")
{
    const Excitation ex;
    CHECK(map_theta_q(0.7, AngleMap::ToQ, 1.0, {0.0, 0.1, 0.5}, ex) == 0.7);
    CHECK(map_theta_q(0.7, AngleMap::ToTheta, 1.0, {0.0, 0.1, 0.5}, ex) == 0.7);
    CHECK(map_theta_q(0.52, AngleMap::ToTheta, 0.0, {0.04, 0.05, 0.5}, ex) == Approx(0.5));

    const DimensionlessParams p{0.3, 0.05, 0.6};
    for (double tau : {0.0, 1.1, 2.9, 5.0}) {
        const State s{0.8, -1.3, tau};
        const State back = to_theta_state(to_q_state(s, p, ex), p, ex);
        CHECK(back.theta == Approx(s.theta).epsilon(1e-14));
        CHECK(back.theta_dot == Approx(s.theta_dot).epsilon(1e-14));
    }
}

TEST_CASE("q-form trajectories satisfy the angle equation")
{
    const Excitation ex;
    const DimensionlessParams p{0.3, 0.05, 0.6};
    const State s0{0.9, 0.2, 0.0};
    const QState q0 = to_q_state(s0, p, ex);
    std::vector<double> taus;
    for (int i = 1; i <= 40; ++i) {
        taus.push_back(0.5 * i);
    }
    const auto traj = ode::integrate_ivp(ode::q_field(p, ex), {q0.q, q0.q_dot, 0.0}, 20.0, taus,
                                         ode::IntegratorConfig::precise());
    for (const State &row : traj.samples) {
        const auto v = ex(row.tau);
        const double len = 1.0 + p.epsilon * v.phi;
        const double qdd = rhs_q({row.theta, row.theta_dot, row.tau}, p, ex).second;
        const double th = row.theta / len;
        const double thd = (row.theta_dot - th * p.epsilon * v.phi_dot) / len;
        const double thdd = (qdd - 2 * thd * p.epsilon * v.phi_dot - th * p.epsilon * v.phi_ddot) / len;
        const double residual =
            thdd + (2 * p.epsilon * v.phi_dot / len + p.beta * p.omega) * thd + p.omega * p.omega * std::sin(th) / len;
        CHECK(std::abs(residual) < 1e-8);
    }
}

TEST_CASE("right-hand sides are deterministic")
{
    const Excitation ex({0.5, 0.2}, {0.1, 0.0});
    const DimensionlessParams p{0.37, 0.03, 0.77};
    const State s{1.234, -0.567, 8.9};
    const auto a = rhs_theta(s, p, ex);
    const auto b = rhs_theta(s, p, ex);
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
}

TEST_CASE("wrap_angle")
{
    CHECK(wrap_angle(pi) == Approx(pi));
    CHECK(wrap_angle(-pi) == Approx(pi));
    CHECK(wrap_angle(3 * pi / 2) == Approx(-pi / 2));
    CHECK(wrap_angle(-7.0) == Approx(-7.0 + 2 * pi));
    CHECK(wrap_angle(0.25) == 0.25);
}
