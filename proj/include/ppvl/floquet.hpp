#pragma once

// Stability of the lower vertical position: numerical monodromy of the
// linearized equation and the first-order half-cone approximations of the
// resonance tongues near omega = k/2.

#include "ppvl/integrate.hpp"
#include "ppvl/model.hpp"

#include <array>
#include <complex>
#include <optional>
#include <vector>

namespace ppvl::floquet {

struct Monodromy {
    // Row-major 2x2 fundamental matrix over tau in [0, 2*pi].
    std::array<double, 4> m{};
    std::array<std::complex<double>, 2> multipliers{};

    double trace() const noexcept { return m[0] + m[3]; }
    double det() const noexcept { return m[0] * m[3] - m[1] * m[2]; }
    double spectral_radius() const noexcept;
};

inline constexpr double default_stability_tol = 1e-9;

// Eigenvalues of a real 2x2 matrix, larger modulus first.
std::array<std::complex<double>, 2> eigenvalues(const std::array<double, 4> &m);

Monodromy monodromy(const DimensionlessParams &p, const Excitation &ex,
                    const ode::IntegratorConfig &cfg = ode::IntegratorConfig::precise());

// Neutral multipliers (|mu| = 1, possible only without damping) count as stable.
bool is_stable(const Monodromy &m, double tol = default_stability_tol) noexcept;

// Membership in the k-th first-order half-cone
//   (beta/2)^2 + (2*omega/k - 1)^2 < (a_k^2 + b_k^2) * (3*eps/4)^2.
bool halfcone_contains(int k, const DimensionlessParams &p, const Excitation &ex);

struct Tongue {
    int k = 1;
    std::optional<std::pair<double, double>> interval; // (omega_low, omega_high)
};

// First tongue for phi = cos(tau): omega in (1/2 - d, 1/2 + d) with
// d = sqrt(9 eps^2/16 - beta^2/4) / 2.
Tongue first_tongue_interval(double beta, double epsilon);

enum class CellStability { Stable, Unstable, Failed };

struct StabilityGrid {
    std::vector<double> omega;
    std::vector<double> epsilon;
    double beta = 0.0;
    // Row-major over omega (outer) then epsilon (inner).
    std::vector<CellStability> cells;
    std::vector<double> radius; // spectral radius, NaN where failed

    CellStability at(std::size_t i_omega, std::size_t j_eps) const { return cells[i_omega * epsilon.size() + j_eps]; }
};

StabilityGrid stability_scan(const std::vector<double> &omega_grid, const std::vector<double> &epsilon_grid,
                             double beta, const Excitation &ex, int workers = 1,
                             const ode::IntegratorConfig &cfg = ode::IntegratorConfig::precise());

// Bisection in omega between a stable and an unstable frequency at fixed
// (eps, beta), to the given resolution.
double locate_boundary(double omega_stable, double omega_unstable, double epsilon, double beta, const Excitation &ex,
                       double resolution = 1e-4, const ode::IntegratorConfig &cfg = ode::IntegratorConfig::precise());

// Numerical tongue edges around omega_center: scans [center - half_width,
// center + half_width] with `probe` spacing for an unstable frequency, then
// bisects outward on both sides. Empty when no probe is unstable.
std::optional<std::pair<double, double>>
numerical_tongue(double omega_center, double half_width, double epsilon, double beta, const Excitation &ex,
                 double probe = 1e-3, double resolution = 1e-4,
                 const ode::IntegratorConfig &cfg = ode::IntegratorConfig::precise());

} // namespace ppvl::floquet
