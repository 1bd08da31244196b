#pragma once

// Adaptive Dormand-Prince 5(4) integration with the 4th-order continuous
// extension, plus the stroboscopic and tangent-flow drivers built on it.

#include "ppvl/error.hpp"
#include "ppvl/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace ppvl::ode {

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-10;
    double max_step = 1.0;
    double initial_step = 1e-2;

    void validate() const;

    // Tolerances for Floquet and response verification.
    static IntegratorConfig precise() { return {}; }
    // Tolerances for grid scans.
    static IntegratorConfig scan() { return {1e-8, 1e-8, 1.0, 1e-2}; }
};

inline constexpr double min_step = 1e-12;

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N, class Rhs>
class DormandPrince {
public:
    DormandPrince(Rhs rhs, double t0, const Vec<N> &y0, const IntegratorConfig &cfg)
        : rhs_(std::move(rhs)), cfg_(cfg), t_(t0), t_prev_(t0), y_(y0), y_prev_(y0), h_(cfg.initial_step)
    {
        k1_ = rhs_(t_, y_);
    }

    double time() const noexcept { return t_; }
    const Vec<N> &state() const noexcept { return y_; }
    long steps() const noexcept { return accepted_; }

    // Replaces the state at the current time, keeping the step size.
    void reset(const Vec<N> &y)
    {
        y_ = y;
        k1_ = rhs_(t_, y_);
        dense_valid_ = false;
    }

    // One accepted step that does not pass t_limit.
    void step(double t_limit)
    {
        for (;;) {
            double h = std::min({h_, cfg_.max_step, t_limit - t_});
            const bool lands = h >= t_limit - t_;
            if (h < min_step) {
                fail(ErrorCode::StepSizeUnderflow,
                     "required step " + std::to_string(h) + " below 1e-12 at tau = " + std::to_string(t_));
            }
            Vec<N> y1;
            Vec<N> err;
            attempt(h, y1, err);
            double sum = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                const double sc = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y_[i]), std::abs(y1[i]));
                const double r = err[i] / sc;
                sum += r * r;
            }
            const double e = std::sqrt(sum / N);
            if (e <= 1.0) {
                const double fac = e == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0);
                prepare_dense(h, y1);
                t_prev_ = t_;
                y_prev_ = y_;
                t_ = lands ? t_limit : t_ + h;
                y_ = y1;
                k1_ = k7_;
                // A truncated landing step says nothing about the natural size.
                if (!lands || fac < 1.0) {
                    h_ = h * fac;
                }
                dense_valid_ = true;
                ++accepted_;
                return;
            }
            // Non-finite error estimates also land here.
            const double fac = std::isfinite(e) ? std::max(0.2, 0.9 * std::pow(e, -0.2)) : 0.2;
            h_ = h * fac;
        }
    }

    // Continuous extension on the last accepted step [t_prev, t].
    Vec<N> interpolate(double t) const
    {
        if (!dense_valid_ || t == t_) {
            return y_;
        }
        const double theta = (t - t_prev_) / (t_ - t_prev_);
        const double theta1 = 1.0 - theta;
        Vec<N> out;
        for (std::size_t i = 0; i < N; ++i) {
            out[i] = y_prev_[i] +
                     theta * (r2_[i] + theta1 * (r3_[i] + theta * (r4_[i] + theta1 * r5_[i])));
        }
        return out;
    }

    void advance_to(double t_end)
    {
        while (t_ < t_end) {
            step(t_end);
        }
    }

    // Integrates to t_end, calling sink(t, y) at each requested time in
    // (t_start, t_end] via dense output. `samples` must be increasing.
    template <class Sink>
    void advance_sampled(double t_end, std::span<const double> samples, Sink &&sink)
    {
        std::size_t next = 0;
        while (next < samples.size() && samples[next] <= t_) {
            ++next;
        }
        while (t_ < t_end) {
            step(t_end);
            while (next < samples.size() && samples[next] <= t_) {
                sink(samples[next], interpolate(samples[next]));
                ++next;
            }
        }
    }

private:
    void attempt(double h, Vec<N> &y1, Vec<N> &err)
    {
        static constexpr double a21 = 1.0 / 5.0;
        static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
        static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
        static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                                a54 = -212.0 / 729.0;
        static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                                a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
        static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                                b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
        static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                                e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

        Vec<N> tmp;
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * a21 * k1_[i];
        k2_ = rhs_(t_ + h / 5.0, tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
        k3_ = rhs_(t_ + 3.0 * h / 10.0, tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
        k4_ = rhs_(t_ + 4.0 * h / 5.0, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
        k5_ = rhs_(t_ + 8.0 * h / 9.0, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i]);
        k6_ = rhs_(t_ + h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            y1[i] = y_[i] + h * (b1 * k1_[i] + b3 * k3_[i] + b4 * k4_[i] + b5 * k5_[i] + b6 * k6_[i]);
        k7_ = rhs_(t_ + h, y1);
        for (std::size_t i = 0; i < N; ++i)
            err[i] = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
    }

    void prepare_dense(double h, const Vec<N> &y1)
    {
        static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                                d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                                d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double diff = y1[i] - y_[i];
            const double bspl = h * k1_[i] - diff;
            r2_[i] = diff;
            r3_[i] = bspl;
            r4_[i] = diff - h * k7_[i] - bspl;
            r5_[i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] + d7 * k7_[i]);
        }
    }

    Rhs rhs_;
    IntegratorConfig cfg_;
    double t_;
    double t_prev_;
    Vec<N> y_;
    Vec<N> y_prev_;
    double h_;
    Vec<N> k1_{}, k2_{}, k3_{}, k4_{}, k5_{}, k6_{}, k7_{};
    Vec<N> r2_{}, r3_{}, r4_{}, r5_{};
    bool dense_valid_ = false;
    long accepted_ = 0;
};

// Ordered samples of a trajectory; the first is the initial condition.
struct Trajectory {
    std::vector<State> samples;
};

namespace detail {

template <class Field>
auto as_vec_rhs(Field &field)
{
    return [&field](double t, const Vec<2> &y) -> Vec<2> {
        const Derivative d = field(t, y[0], y[1]);
        return {d.first, d.second};
    };
}

} // namespace detail

// Solves x'' = g(tau, x, x') written as field(tau, x, v) -> (x', x''),
// sampling at the requested times.
template <class Field>
Trajectory integrate_ivp(Field &&field, const State &s0, double tau_end, std::span<const double> sample_taus,
                         const IntegratorConfig &cfg)
{
    cfg.validate();
    if (!(tau_end > s0.tau)) {
        fail(ErrorCode::InvalidArgument, "integrate_ivp requires tau_end > tau0");
    }
    for (std::size_t i = 0; i < sample_taus.size(); ++i) {
        if (sample_taus[i] < s0.tau || sample_taus[i] > tau_end || (i > 0 && sample_taus[i] <= sample_taus[i - 1])) {
            fail(ErrorCode::InvalidArgument, "sample times must be strictly increasing within [tau0, tau_end]");
        }
    }
    Trajectory out;
    out.samples.reserve(sample_taus.size() + 1);
    out.samples.push_back(s0);
    DormandPrince<2, decltype(detail::as_vec_rhs(field))> dp(detail::as_vec_rhs(field), s0.tau,
                                                             Vec<2>{s0.theta, s0.theta_dot}, cfg);
    dp.advance_sampled(tau_end, sample_taus,
                       [&](double t, const Vec<2> &y) { out.samples.push_back({y[0], y[1], t}); });
    if (sample_taus.empty()) {
        out.samples.push_back({dp.state()[0], dp.state()[1], tau_end});
    }
    return out;
}

// Flow sampled at tau0 + 2*pi*n, n = 0..n_periods.
template <class Field>
std::vector<State> strobe(Field &&field, const State &s0, int n_periods, const IntegratorConfig &cfg)
{
    cfg.validate();
    if (n_periods < 1) {
        fail(ErrorCode::InvalidArgument, "strobe requires n_periods >= 1");
    }
    std::vector<double> taus(static_cast<std::size_t>(n_periods));
    for (int n = 1; n <= n_periods; ++n) {
        taus[n - 1] = s0.tau + two_pi * n;
    }
    std::vector<State> out;
    out.reserve(taus.size() + 1);
    out.push_back(s0);
    DormandPrince<2, decltype(detail::as_vec_rhs(field))> dp(detail::as_vec_rhs(field), s0.tau,
                                                             Vec<2>{s0.theta, s0.theta_dot}, cfg);
    dp.advance_sampled(taus.back(), taus, [&](double t, const Vec<2> &y) { out.push_back({y[0], y[1], t}); });
    return out;
}

inline auto theta_field(const DimensionlessParams &p, const Excitation &ex)
{
    return [p, &ex](double tau, double x, double v) { return rhs_theta({x, v, tau}, p, ex); };
}

inline auto q_field(const DimensionlessParams &p, const Excitation &ex)
{
    return [p, &ex](double tau, double x, double v) { return rhs_q({x, v, tau}, p, ex); };
}

inline auto hill_field(const DimensionlessParams &p, const Excitation &ex)
{
    return [p, &ex](double tau, double x, double v) { return rhs_hill_linearized(x, v, tau, p, ex); };
}

struct TangentFlow {
    State state;
    Tangent tangent;   // unit length
    double log_growth; // ln |delta(tau_end)| for |delta0| = 1
};

// Joint flow of the angle equation and its variational equation. The tangent
// is renormalized every 2*pi of elapsed time; growth is accumulated in log form.
TangentFlow integrate_with_tangent(const State &s0, const Tangent &delta0, double tau_end,
                                   const DimensionlessParams &p, const Excitation &ex, const IntegratorConfig &cfg);

} // namespace ppvl::ode
