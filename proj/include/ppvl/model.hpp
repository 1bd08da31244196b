#pragma once

// Equations of motion of the pendulum whose length varies periodically,
// l = l0 + a*phi(Omega*t), in the dimensionless time tau = Omega*t:
//
//   theta'' + (2*eps*phi'/(1 + eps*phi) + beta*omega)*theta' + omega^2*sin(theta)/(1 + eps*phi) = 0
//
// and the same motion in the scaled angle q = theta*(1 + eps*phi).

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace ppvl {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct PhysicalParams {
    double mass = 1.0;            // kg
    double mean_length = 1.0;     // m
    double amplitude = 0.0;       // m, length modulation amplitude
    double drive_frequency = 1.0; // rad/s
    double damping = 0.0;         // kg/s
    double gravity = 9.81;        // m/s^2

    void validate() const;
};

struct DimensionlessParams {
    double epsilon = 0.0; // relative length amplitude, [0, 1)
    double beta = 0.0;    // damping, >= 0
    double omega = 1.0;   // natural-to-drive frequency ratio, > 0

    void validate() const;
};

struct ExcitationValue {
    double phi = 0.0;
    double phi_dot = 0.0;
    double phi_ddot = 0.0;
};

// Zero-mean 2*pi-periodic length law stored as a finite Fourier series
//   phi(tau) = sum_k a_k cos(k tau) + b_k sin(k tau),  k = 1..K.
// The constructor rejects series whose peak magnitude exceeds one, so that
// eps < 1 keeps the length positive.
class Excitation {
public:
    Excitation() : Excitation({1.0}, {0.0}) {}
    Excitation(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs);

    static Excitation cosine() { return {}; }
    static Excitation sine() { return Excitation({0.0}, {1.0}); }

    std::size_t harmonics() const noexcept { return cos_.size(); }
    double cos_coeff(int k) const noexcept;
    double sin_coeff(int k) const noexcept;
    const std::vector<double> &cos_coeffs() const noexcept { return cos_; }
    const std::vector<double> &sin_coeffs() const noexcept { return sin_; }

    // Peak |phi| over a 4096-point grid of one period.
    double peak() const;

    ExcitationValue operator()(double tau) const noexcept
    {
        const double c1 = std::cos(tau);
        const double s1 = std::sin(tau);
        double ck = c1;
        double sk = s1;
        ExcitationValue v;
        for (std::size_t i = 0; i < cos_.size(); ++i) {
            const double k = static_cast<double>(i + 1);
            const double a = cos_[i];
            const double b = sin_[i];
            const double val = a * ck + b * sk;
            v.phi += val;
            v.phi_dot += k * (b * ck - a * sk);
            v.phi_ddot -= k * k * val;
            const double cn = ck * c1 - sk * s1;
            sk = sk * c1 + ck * s1;
            ck = cn;
        }
        return v;
    }

private:
    std::vector<double> cos_;
    std::vector<double> sin_;
};

struct FourierPair {
    double a = 0.0;
    double b = 0.0;
};

// Angle-form state; theta is never wrapped.
struct State {
    double theta = 0.0;
    double theta_dot = 0.0;
    double tau = 0.0;
};

struct QState {
    double q = 0.0;
    double q_dot = 0.0;
    double tau = 0.0;
};

// First-order form of a second-order equation: (x', x'').
struct Derivative {
    double first = 0.0;
    double second = 0.0;
};

// Tangent vector (d theta, d theta_dot).
struct Tangent {
    double d_theta = 0.0;
    double d_theta_dot = 0.0;
};

enum class AngleMap { ToQ, ToTheta };

ExcitationValue eval_excitation(const Excitation &excitation, double tau) noexcept;

// Stored coefficient lookup. k >= 1.
FourierPair fourier_coeff(const Excitation &excitation, int k);

// Coefficients of an arbitrary periodic function by the composite trapezoid
// rule on `points` uniform nodes (exact to rounding for trigonometric
// polynomials of degree < points - k).
FourierPair fourier_coeff(const std::function<double(double)> &phi, int k, int points = 4096);

inline Derivative rhs_theta(const State &s, const DimensionlessParams &p, const Excitation &ex) noexcept
{
    const ExcitationValue e = ex(s.tau);
    const double len = 1.0 + p.epsilon * e.phi;
    const double friction = 2.0 * p.epsilon * e.phi_dot / len + p.beta * p.omega;
    return {s.theta_dot, -friction * s.theta_dot - p.omega * p.omega * std::sin(s.theta) / len};
}

inline Derivative rhs_q(const QState &s, const DimensionlessParams &p, const Excitation &ex) noexcept
{
    const ExcitationValue e = ex(s.tau);
    const double len = 1.0 + p.epsilon * e.phi;
    const double bw = p.beta * p.omega;
    const double pump = p.epsilon * (e.phi_ddot + bw * e.phi_dot) / len;
    return {s.q_dot, -bw * s.q_dot + pump * s.q - p.omega * p.omega * std::sin(s.q / len)};
}

// Linearization of the q-equation about q = 0, kept in exact ratio form.
inline Derivative rhs_hill_linearized(double q, double q_dot, double tau, const DimensionlessParams &p,
                                      const Excitation &ex) noexcept
{
    const ExcitationValue e = ex(tau);
    const double len = 1.0 + p.epsilon * e.phi;
    const double bw = p.beta * p.omega;
    const double stiffness = (p.omega * p.omega - p.epsilon * (e.phi_ddot + bw * e.phi_dot)) / len;
    return {q_dot, -bw * q_dot - stiffness * q};
}

// Jacobian of rhs_theta at `s` applied to `delta`.
inline Tangent rhs_variational(const State &s, const Tangent &delta, const DimensionlessParams &p,
                               const Excitation &ex) noexcept
{
    const ExcitationValue e = ex(s.tau);
    const double len = 1.0 + p.epsilon * e.phi;
    const double friction = 2.0 * p.epsilon * e.phi_dot / len + p.beta * p.omega;
    return {delta.d_theta_dot,
            -friction * delta.d_theta_dot - p.omega * p.omega * std::cos(s.theta) / len * delta.d_theta};
}

DimensionlessParams to_dimensionless(const PhysicalParams &phys);

double map_theta_q(double value, AngleMap direction, double tau, const DimensionlessParams &p,
                   const Excitation &ex) noexcept;

// Full state conversions, including velocities.
QState to_q_state(const State &s, const DimensionlessParams &p, const Excitation &ex) noexcept;
State to_theta_state(const QState &s, const DimensionlessParams &p, const Excitation &ex) noexcept;

// Wraps an angle to (-pi, pi].
inline double wrap_angle(double x) noexcept
{
    double r = std::remainder(x, two_pi);
    if (r <= -std::numbers::pi) {
        r += two_pi;
    }
    return r;
}

} // namespace ppvl
