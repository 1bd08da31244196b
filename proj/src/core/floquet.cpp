#include "ppvl/floquet.hpp"

#include "ppvl/parallel.hpp"

#include <cmath>
#include <limits>

namespace ppvl::floquet {

double Monodromy::spectral_radius() const noexcept
{
    return std::max(std::abs(multipliers[0]), std::abs(multipliers[1]));
}

std::array<std::complex<double>, 2> eigenvalues(const std::array<double, 4> &m)
{
    const double half_tr = 0.5 * (m[0] + m[3]);
    const double det = m[0] * m[3] - m[1] * m[2];
    const double disc = half_tr * half_tr - det;
    if (disc >= 0.0) {
        const double r = std::sqrt(disc);
        // Larger-magnitude root first; the other from the product to avoid cancellation.
        const double big = half_tr >= 0.0 ? half_tr + r : half_tr - r;
        const double small = big != 0.0 ? det / big : 0.0;
        return {std::complex<double>(big), std::complex<double>(small)};
    }
    const double im = std::sqrt(-disc);
    return {std::complex<double>(half_tr, im), std::complex<double>(half_tr, -im)};
}

Monodromy monodromy(const DimensionlessParams &p, const Excitation &ex, const ode::IntegratorConfig &cfg)
{
    p.validate();
    cfg.validate();
    // Both fundamental solutions as one system: (q1, q1', q2, q2').
    auto rhs = [&p, &ex](double t, const ode::Vec<4> &y) -> ode::Vec<4> {
        const Derivative c1 = rhs_hill_linearized(y[0], y[1], t, p, ex);
        const Derivative c2 = rhs_hill_linearized(y[2], y[3], t, p, ex);
        return {c1.first, c1.second, c2.first, c2.second};
    };
    ode::DormandPrince<4, decltype(rhs)> dp(rhs, 0.0, {1.0, 0.0, 0.0, 1.0}, cfg);
    dp.advance_to(two_pi);
    const auto &y = dp.state();
    Monodromy out;
    out.m = {y[0], y[2], y[1], y[3]};
    out.multipliers = eigenvalues(out.m);
    return out;
}

bool is_stable(const Monodromy &m, double tol) noexcept
{
    return m.spectral_radius() < 1.0 + tol;
}

bool halfcone_contains(int k, const DimensionlessParams &p, const Excitation &ex)
{
    if (p.beta < 0.0) {
        fail(ErrorCode::InvalidArgument, "beta must satisfy beta >= 0");
    }
    const FourierPair c = fourier_coeff(ex, k);
    const double detune = 2.0 * p.omega / k - 1.0;
    const double drive = 0.75 * p.epsilon;
    return 0.25 * p.beta * p.beta + detune * detune < (c.a * c.a + c.b * c.b) * drive * drive;
}

Tongue first_tongue_interval(double beta, double epsilon)
{
    if (beta < 0.0 || epsilon < 0.0) {
        fail(ErrorCode::InvalidArgument, "first tongue requires beta >= 0 and epsilon >= 0");
    }
    Tongue t;
    t.k = 1;
    const double radicand = 9.0 * epsilon * epsilon / 16.0 - beta * beta / 4.0;
    if (radicand > 0.0) {
        const double d = 0.5 * std::sqrt(radicand);
        t.interval = std::make_pair(0.5 - d, 0.5 + d);
    }
    return t;
}

StabilityGrid stability_scan(const std::vector<double> &omega_grid, const std::vector<double> &epsilon_grid,
                             double beta, const Excitation &ex, int workers, const ode::IntegratorConfig &cfg)
{
    auto monotone = [](const std::vector<double> &g) {
        return !g.empty() && std::is_sorted(g.begin(), g.end());
    };
    if (!monotone(omega_grid) || !monotone(epsilon_grid)) {
        fail(ErrorCode::InvalidArgument, "stability scan grids must be non-empty and monotone");
    }
    DimensionlessParams probe{epsilon_grid.front(), beta, omega_grid.front()};
    probe.validate();
    cfg.validate();

    StabilityGrid grid;
    grid.omega = omega_grid;
    grid.epsilon = epsilon_grid;
    grid.beta = beta;
    grid.cells.assign(omega_grid.size() * epsilon_grid.size(), CellStability::Failed);
    grid.radius.assign(grid.cells.size(), std::numeric_limits<double>::quiet_NaN());
    parallel_for(grid.cells.size(), workers, [&](std::size_t idx) {
        const DimensionlessParams p{epsilon_grid[idx % epsilon_grid.size()], beta,
                                    omega_grid[idx / epsilon_grid.size()]};
        try {
            p.validate();
            const Monodromy m = monodromy(p, ex, cfg);
            grid.radius[idx] = m.spectral_radius();
            grid.cells[idx] = is_stable(m) ? CellStability::Stable : CellStability::Unstable;
        } catch (const Error &e) {
            if (e.code() == ErrorCode::InvalidArgument) {
                throw;
            }
            grid.cells[idx] = CellStability::Failed;
        }
    });
    return grid;
}

double locate_boundary(double omega_stable, double omega_unstable, double epsilon, double beta, const Excitation &ex,
                       double resolution, const ode::IntegratorConfig &cfg)
{
    auto stable_at = [&](double omega) { return is_stable(monodromy({epsilon, beta, omega}, ex, cfg)); };
    if (!stable_at(omega_stable) || stable_at(omega_unstable)) {
        fail(ErrorCode::InvalidArgument, "boundary bisection needs a stable and an unstable bracket end");
    }
    double s = omega_stable;
    double u = omega_unstable;
    while (std::abs(u - s) > resolution) {
        const double mid = 0.5 * (s + u);
        (stable_at(mid) ? s : u) = mid;
    }
    return 0.5 * (s + u);
}

std::optional<std::pair<double, double>> numerical_tongue(double omega_center, double half_width, double epsilon,
                                                          double beta, const Excitation &ex, double probe,
                                                          double resolution, const ode::IntegratorConfig &cfg)
{
    const double lo = omega_center - half_width;
    const int n = static_cast<int>(std::floor(2.0 * half_width / probe + 1e-9));
    int first = -1;
    int last = -1;
    for (int i = 0; i <= n; ++i) {
        if (!is_stable(monodromy({epsilon, beta, lo + i * probe}, ex, cfg))) {
            if (first < 0) {
                first = i;
            }
            last = i;
        }
    }
    if (first < 0) {
        return std::nullopt;
    }
    const double w_first = lo + first * probe;
    const double w_last = lo + last * probe;
    const double low = first == 0 ? w_first : locate_boundary(w_first - probe, w_first, epsilon, beta, ex, resolution, cfg);
    const double high = last == n ? w_last : locate_boundary(w_last + probe, w_last, epsilon, beta, ex, resolution, cfg);
    return std::make_pair(low, high);
}

} // namespace ppvl::floquet
