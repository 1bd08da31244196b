#include "ppvl/averaging.hpp"

#include "ppvl/error.hpp"
#include "ppvl/floquet.hpp"
#include "ppvl/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ppvl::averaging {

namespace {

constexpr double pi = std::numbers::pi;

void check_rotation_index(int b)
{
    if (b != 1 && b != -1 && b != 2 && b != -2) {
        fail(ErrorCode::InvalidArgument, "rotation index must satisfy b in {-2, -1, 1, 2}");
    }
}

// Signed arcsine argument a with sin(X1_stable) = -a.
double rotation_sine(int b, const DimensionlessParams &p)
{
    const double sign = b > 0 ? 1.0 : -1.0;
    if (p.epsilon == 0.0) {
        return p.beta > 0.0 ? sign * std::numeric_limits<double>::infinity() : 0.0;
    }
    if (std::abs(b) == 1) {
        return sign * 2.0 * p.beta / (3.0 * p.epsilon * p.omega);
    }
    const double e2 = p.epsilon * p.epsilon;
    return 4.0 * b * p.beta / (9.0 * e2 * p.omega) / (1.0 + e2 / 27.0);
}

} // namespace

double small_forcing(double q, double q_dot, double tau, const DimensionlessParams &p, const Excitation &ex) noexcept
{
    const ExcitationValue e = ex(tau);
    const double w2 = p.omega * p.omega;
    const double q3 = q * q * q;
    return p.epsilon * (e.phi_ddot + w2 * e.phi) * q + w2 * (q3 / 6.0 - q3 * q * q / 120.0) -
           p.beta * p.omega * q_dot;
}

SlowRate slow_flow_rhs(const SlowState &s, double tau, const DimensionlessParams &p, const Excitation &ex)
{
    if (s.amplitude == 0.0) {
        fail(ErrorCode::DivisionByZero, "slow phase equation divides by the amplitude a = 0");
    }
    const double angle = 0.5 * tau + s.phase;
    const double c = std::cos(angle);
    const double sn = std::sin(angle);
    const double f = small_forcing(s.amplitude * c, -s.amplitude * p.omega * sn, tau, p, ex);
    return {-sn / p.omega * f, p.omega - 0.5 - c / (s.amplitude * p.omega) * f};
}

SlowRate averaged_slow_flow(const SlowState &s, const DimensionlessParams &p, const Excitation &ex)
{
    // Trapezoid over the 4*pi period; exact for the trigonometric
    // polynomials produced by a low-order Fourier excitation.
    constexpr int nodes = 512;
    SlowRate sum;
    for (int i = 0; i < nodes; ++i) {
        const SlowRate r = slow_flow_rhs(s, 2.0 * two_pi * i / nodes, p, ex);
        sum.amplitude_dot += r.amplitude_dot;
        sum.phase_dot += r.phase_dot;
    }
    return {sum.amplitude_dot / nodes, sum.phase_dot / nodes};
}

double response_residual(double amplitude, const DimensionlessParams &p)
{
    p.validate();
    if (amplitude < 0.0) {
        fail(ErrorCode::InvalidArgument, "response amplitude must satisfy Q >= 0");
    }
    const double q2 = amplitude * amplitude;
    const double q4 = q2 * q2;
    const double w2 = p.omega * p.omega;
    const double d1 = 1.0 - w2 * (1.0 - q2 / 12.0 + q4 / 384.0);
    const double n2 = 0.5 - 2.0 * w2 * (1.0 - q2 / 8.0 + q4 / 192.0);
    const double d2 = 1.0 - w2 * (1.0 - q2 / 6.0 + q4 / 128.0);
    if (std::abs(d1) < 1e-14 || std::abs(d2) < 1e-14) {
        fail(ErrorCode::PoleAtDenominator, "frequency-response denominator vanishes");
    }
    return p.beta * p.beta * w2 / (d1 * d1) + n2 * n2 / (d2 * d2) - p.epsilon * p.epsilon;
}

namespace {

double safe_residual(double q, const DimensionlessParams &p)
{
    try {
        return response_residual(q, p);
    } catch (const Error &) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

std::vector<double> bracketed_roots(const DimensionlessParams &p, double q_lo, double q_hi, int n)
{
    std::vector<double> roots;
    double prev_q = q_lo;
    double prev_r = safe_residual(q_lo, p);
    for (int i = 1; i <= n; ++i) {
        const double q = q_lo + (q_hi - q_lo) * i / n;
        const double r = safe_residual(q, p);
        if (r == 0.0) {
            roots.push_back(q);
        } else if (std::isfinite(prev_r) && std::isfinite(r) && prev_r != 0.0 && (prev_r < 0.0) != (r < 0.0)) {
            double a = prev_q;
            double b = q;
            double ra = prev_r;
            for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
                const double mid = 0.5 * (a + b);
                const double rm = safe_residual(mid, p);
                if (!std::isfinite(rm)) {
                    break;
                }
                if ((rm < 0.0) == (ra < 0.0)) {
                    a = mid;
                    ra = rm;
                } else {
                    b = mid;
                }
            }
            const double root = 0.5 * (a + b);
            const double rr = safe_residual(root, p);
            // Sign changes across a pole do not certify.
            if (std::isfinite(rr) && std::abs(rr) < 1e-10) {
                roots.push_back(root);
            }
        }
        prev_q = q;
        prev_r = r;
    }
    return roots;
}

} // namespace

std::vector<double> response_roots(const DimensionlessParams &p, bool *beyond_pi)
{
    std::vector<double> roots = bracketed_roots(p, 0.0, pi, response_q_grid);
    // The node at Q = 0 is never a nontrivial root.
    std::erase_if(roots, [](double q) { return q <= 0.0; });
    if (beyond_pi) {
        *beyond_pi = !bracketed_roots(p, pi, 2.0 * pi, response_q_grid).empty();
    }
    return roots;
}

ResponsePoint classify_response(double omega, double amplitude, const DimensionlessParams &p)
{
    const Excitation ex = Excitation::cosine();
    auto amp_rate = [&](double psi) { return averaged_slow_flow({amplitude, psi}, p, ex).amplitude_dot; };
    auto phase_rate = [&](double psi) { return averaged_slow_flow({amplitude, psi}, p, ex).phase_dot; };

    // Candidate phases: zeros of the averaged amplitude rate over one period
    // (pi) of the half-frequency ansatz.
    constexpr int scan = 360;
    std::vector<double> candidates;
    double prev = amp_rate(-0.5 * pi);
    for (int i = 1; i <= scan; ++i) {
        const double a0 = -0.5 * pi + pi * (i - 1) / scan;
        const double a1 = -0.5 * pi + pi * i / scan;
        const double cur = amp_rate(a1);
        if ((prev < 0.0) != (cur < 0.0)) {
            double lo = a0;
            double hi = a1;
            double rlo = prev;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double rm = amp_rate(mid);
                if ((rm < 0.0) == (rlo < 0.0)) {
                    lo = mid;
                    rlo = rm;
                } else {
                    hi = mid;
                }
            }
            candidates.push_back(0.5 * (lo + hi));
        }
        prev = cur;
    }
    double best = 0.0;
    if (candidates.empty()) {
        double best_norm = std::numeric_limits<double>::infinity();
        for (int i = 0; i < scan; ++i) {
            const double psi = -0.5 * pi + pi * i / scan;
            const SlowRate r = averaged_slow_flow({amplitude, psi}, p, ex);
            const double norm = std::hypot(r.amplitude_dot, r.phase_dot);
            if (norm < best_norm) {
                best_norm = norm;
                best = psi;
            }
        }
    } else {
        best = candidates.front();
        for (double c : candidates) {
            if (std::abs(phase_rate(c)) < std::abs(phase_rate(best))) {
                best = c;
            }
        }
    }

    constexpr double h = 1e-6;
    const SlowRate da_p = averaged_slow_flow({amplitude + h, best}, p, ex);
    const SlowRate da_m = averaged_slow_flow({amplitude - h, best}, p, ex);
    const SlowRate dp_p = averaged_slow_flow({amplitude, best + h}, p, ex);
    const SlowRate dp_m = averaged_slow_flow({amplitude, best - h}, p, ex);
    const std::array<double, 4> jac = {
        (da_p.amplitude_dot - da_m.amplitude_dot) / (2 * h), (dp_p.amplitude_dot - dp_m.amplitude_dot) / (2 * h),
        (da_p.phase_dot - da_m.phase_dot) / (2 * h), (dp_p.phase_dot - dp_m.phase_dot) / (2 * h)};
    const auto eig = floquet::eigenvalues(jac);
    ResponsePoint pt;
    pt.omega = omega;
    pt.amplitude = amplitude;
    pt.phase = best;
    pt.stable = eig[0].real() < 0.0 && eig[1].real() < 0.0;
    return pt;
}

ResponseCurve response_curve(double omega_lo, double omega_hi, int n_points, double epsilon, double beta,
                             int workers)
{
    if (!(omega_lo > 0.0 && omega_hi < 1.0 && omega_lo <= omega_hi) || n_points < 1) {
        fail(ErrorCode::InvalidArgument, "response curve needs 0 < omega_lo <= omega_hi < 1 and n_points >= 1");
    }
    DimensionlessParams{epsilon, beta, omega_lo}.validate();
    std::vector<std::vector<ResponsePoint>> per_omega(static_cast<std::size_t>(n_points));
    std::vector<char> beyond(static_cast<std::size_t>(n_points), 0);
    parallel_for(per_omega.size(), workers, [&](std::size_t i) {
        const double omega =
            n_points == 1 ? omega_lo : omega_lo + (omega_hi - omega_lo) * static_cast<double>(i) / (n_points - 1);
        const DimensionlessParams p{epsilon, beta, omega};
        bool flag = false;
        for (double q : response_roots(p, &flag)) {
            per_omega[i].push_back(classify_response(omega, q, p));
        }
        beyond[i] = flag;
    });
    ResponseCurve curve;
    for (std::size_t i = 0; i < per_omega.size(); ++i) {
        curve.points.insert(curve.points.end(), per_omega[i].begin(), per_omega[i].end());
        curve.roots_beyond_pi = curve.roots_beyond_pi || beyond[i];
    }
    return curve;
}

double rotation_threshold(int b_abs, double beta, double epsilon)
{
    if (b_abs != 1 && b_abs != 2) {
        fail(ErrorCode::InvalidArgument, "rotation predictors exist for |b| in {1, 2}");
    }
    DimensionlessParams{epsilon, beta, 1.0}.validate();
    if (epsilon == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    if (b_abs == 1) {
        return 2.0 * beta / (3.0 * epsilon);
    }
    const double e2 = epsilon * epsilon;
    return 8.0 * beta / (9.0 * e2) / (1.0 + e2 / 27.0);
}

bool rotation_exists(int b_abs, const DimensionlessParams &p)
{
    if (p.epsilon == 0.0) {
        return false;
    }
    return p.omega >= rotation_threshold(b_abs, p.beta, p.epsilon);
}

RotationSteady rotation_steady(int b, const DimensionlessParams &p)
{
    check_rotation_index(b);
    p.validate();
    if (!rotation_exists(std::abs(b), p)) {
        fail(ErrorCode::NotExists, "no steady rotation below the existence threshold");
    }
    const double s = std::clamp(rotation_sine(b, p), -1.0, 1.0);
    RotationSteady out;
    out.b = b;
    out.exists = true;
    out.x1_stable = wrap_angle(-std::asin(s));
    out.x1_unstable = wrap_angle(pi + std::asin(s));
    return out;
}

double rotation_seed_phase(int b, const DimensionlessParams &p)
{
    check_rotation_index(b);
    return -std::asin(std::clamp(rotation_sine(b, p), -1.0, 1.0));
}

bool rotation_is_stable(double x1) noexcept
{
    return std::cos(x1) > 0.0;
}

RotationSlow averaged_rotation_rhs(int b, const RotationSlow &x, const DimensionlessParams &p)
{
    check_rotation_index(b);
    const double w = p.omega;
    if (std::abs(b) == 1) {
        return {x.x2 - b, -1.5 * p.epsilon * w * w * std::sin(x.x1) - p.beta * w * x.x2};
    }
    const double e2 = p.epsilon * p.epsilon;
    const double slip = x.x2 - 0.5 * b;
    return {slip, -(9.0 * e2 * w * w / 16.0) * (1.0 - slip * slip + e2 / 27.0) * std::sin(x.x1) -
                      0.5 * p.beta * w * x.x2};
}

std::array<double, 4> averaged_rotation_jacobian(int b, const RotationSlow &x, const DimensionlessParams &p)
{
    check_rotation_index(b);
    const double w = p.omega;
    if (std::abs(b) == 1) {
        return {0.0, 1.0, -1.5 * p.epsilon * w * w * std::cos(x.x1), -p.beta * w};
    }
    const double e2 = p.epsilon * p.epsilon;
    const double k = 9.0 * e2 * w * w / 16.0;
    const double slip = x.x2 - 0.5 * b;
    return {0.0, 1.0, -k * (1.0 - slip * slip + e2 / 27.0) * std::cos(x.x1),
            2.0 * k * slip * std::sin(x.x1) - 0.5 * p.beta * w};
}

} // namespace ppvl::averaging
