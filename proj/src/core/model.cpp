#include "ppvl/model.hpp"

#include "ppvl/error.hpp"

#include <algorithm>
#include <sstream>

namespace ppvl {

const char *to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::InvalidArgument:
        return "invalid argument";
    case ErrorCode::StepSizeUnderflow:
        return "step size underflow";
    case ErrorCode::DivisionByZero:
        return "division by zero";
    case ErrorCode::PoleAtDenominator:
        return "pole at denominator";
    case ErrorCode::NotExists:
        return "does not exist";
    case ErrorCode::Io:
        return "i/o error";
    }
    return "unknown error";
}

namespace {

void require(bool ok, const char *what)
{
    if (!ok) {
        fail(ErrorCode::InvalidArgument, what);
    }
}

} // namespace

void PhysicalParams::validate() const
{
    require(std::isfinite(mass) && mass > 0.0, "mass must satisfy m > 0");
    require(std::isfinite(mean_length) && mean_length > 0.0, "mean length must satisfy l0 > 0");
    require(std::isfinite(gravity) && gravity > 0.0, "gravity must satisfy g > 0");
    require(std::isfinite(drive_frequency) && drive_frequency > 0.0, "drive frequency must satisfy Omega > 0");
    require(std::isfinite(amplitude) && amplitude >= 0.0, "amplitude must satisfy a >= 0");
    require(std::isfinite(damping) && damping >= 0.0, "damping must satisfy gamma >= 0");
    require(amplitude < mean_length, "amplitude must satisfy a < l0");
}

void DimensionlessParams::validate() const
{
    require(std::isfinite(epsilon) && epsilon >= 0.0 && epsilon < 1.0, "epsilon must satisfy 0 <= epsilon < 1");
    require(std::isfinite(beta) && beta >= 0.0, "beta must satisfy beta >= 0");
    require(std::isfinite(omega) && omega > 0.0, "omega must satisfy omega > 0");
}

Excitation::Excitation(std::vector<double> cos_coeffs, std::vector<double> sin_coeffs)
    : cos_(std::move(cos_coeffs)), sin_(std::move(sin_coeffs))
{
    const std::size_t k = std::max(cos_.size(), sin_.size());
    require(k >= 1, "excitation needs at least one harmonic");
    cos_.resize(k, 0.0);
    sin_.resize(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        require(std::isfinite(cos_[i]) && std::isfinite(sin_[i]), "excitation coefficients must be finite");
    }
    require(peak() <= 1.0 + 1e-12, "excitation must satisfy max |phi| <= 1");
}

double Excitation::cos_coeff(int k) const noexcept
{
    return k >= 1 && static_cast<std::size_t>(k) <= cos_.size() ? cos_[k - 1] : 0.0;
}

double Excitation::sin_coeff(int k) const noexcept
{
    return k >= 1 && static_cast<std::size_t>(k) <= sin_.size() ? sin_[k - 1] : 0.0;
}

double Excitation::peak() const
{
    constexpr int n = 4096;
    double peak = 0.0;
    for (int i = 0; i < n; ++i) {
        peak = std::max(peak, std::abs((*this)(two_pi * i / n).phi));
    }
    return peak;
}

ExcitationValue eval_excitation(const Excitation &excitation, double tau) noexcept
{
    return excitation(tau);
}

FourierPair fourier_coeff(const Excitation &excitation, int k)
{
    require(k >= 1, "Fourier index must satisfy k >= 1");
    return {excitation.cos_coeff(k), excitation.sin_coeff(k)};
}

FourierPair fourier_coeff(const std::function<double(double)> &phi, int k, int points)
{
    require(k >= 1, "Fourier index must satisfy k >= 1");
    require(points >= 2 * k + 2, "too few quadrature points for the requested harmonic");
    double a = 0.0;
    double b = 0.0;
    const double h = two_pi / points;
    for (int i = 0; i < points; ++i) {
        const double tau = h * i;
        const double v = phi(tau);
        a += v * std::cos(k * tau);
        b += v * std::sin(k * tau);
    }
    // Periodic trapezoid: (1/pi) * h * sum.
    return {a * h / std::numbers::pi, b * h / std::numbers::pi};
}

DimensionlessParams to_dimensionless(const PhysicalParams &phys)
{
    phys.validate();
    const double natural = std::sqrt(phys.gravity / phys.mean_length);
    DimensionlessParams p;
    p.epsilon = phys.amplitude / phys.mean_length;
    p.omega = natural / phys.drive_frequency;
    p.beta = phys.damping / (phys.mass * natural);
    return p;
}

double map_theta_q(double value, AngleMap direction, double tau, const DimensionlessParams &p,
                   const Excitation &ex) noexcept
{
    const double len = 1.0 + p.epsilon * ex(tau).phi;
    return direction == AngleMap::ToQ ? value * len : value / len;
}

QState to_q_state(const State &s, const DimensionlessParams &p, const Excitation &ex) noexcept
{
    const ExcitationValue e = ex(s.tau);
    const double len = 1.0 + p.epsilon * e.phi;
    return {s.theta * len, s.theta_dot * len + s.theta * p.epsilon * e.phi_dot, s.tau};
}

State to_theta_state(const QState &s, const DimensionlessParams &p, const Excitation &ex) noexcept
{
    const ExcitationValue e = ex(s.tau);
    const double len = 1.0 + p.epsilon * e.phi;
    const double theta = s.q / len;
    return {theta, (s.q_dot - theta * p.epsilon * e.phi_dot) / len, s.tau};
}

} // namespace ppvl
