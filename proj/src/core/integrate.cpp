#include "ppvl/integrate.hpp"

namespace ppvl::ode {

void IntegratorConfig::validate() const
{
    auto check = [](bool ok, const char *what) {
        if (!ok) {
            fail(ErrorCode::InvalidArgument, what);
        }
    };
    check(rel_tol > 0.0 && rel_tol <= 1e-2, "rel_tol must lie in (0, 1e-2]");
    check(abs_tol > 0.0 && abs_tol <= 1e-2, "abs_tol must lie in (0, 1e-2]");
    check(max_step > 0.0 && max_step <= two_pi, "max_step must lie in (0, 2*pi]");
    check(initial_step > 0.0 && initial_step <= max_step, "initial_step must lie in (0, max_step]");
}

TangentFlow integrate_with_tangent(const State &s0, const Tangent &delta0, double tau_end,
                                   const DimensionlessParams &p, const Excitation &ex, const IntegratorConfig &cfg)
{
    cfg.validate();
    if (!(tau_end > s0.tau)) {
        fail(ErrorCode::InvalidArgument, "integrate_with_tangent requires tau_end > tau0");
    }
    const double norm0 = std::hypot(delta0.d_theta, delta0.d_theta_dot);
    if (std::abs(norm0 - 1.0) > 1e-12) {
        fail(ErrorCode::InvalidArgument, "initial tangent must have unit length");
    }

    auto rhs = [&p, &ex](double t, const Vec<4> &y) -> Vec<4> {
        const State s{y[0], y[1], t};
        const Derivative d = rhs_theta(s, p, ex);
        const Tangent dt = rhs_variational(s, {y[2], y[3]}, p, ex);
        return {d.first, d.second, dt.d_theta, dt.d_theta_dot};
    };
    DormandPrince<4, decltype(rhs)> dp(rhs, s0.tau, {s0.theta, s0.theta_dot, delta0.d_theta, delta0.d_theta_dot},
                                       cfg);
    double log_growth = 0.0;
    for (long n = 1;; ++n) {
        const double target = std::min(tau_end, s0.tau + two_pi * static_cast<double>(n));
        dp.advance_to(target);
        Vec<4> y = dp.state();
        const double norm = std::hypot(y[2], y[3]);
        log_growth += std::log(norm);
        y[2] /= norm;
        y[3] /= norm;
        if (target >= tau_end) {
            return {{y[0], y[1], tau_end}, {y[2], y[3]}, log_growth};
        }
        dp.reset(y);
    }
}

} // namespace ppvl::ode
