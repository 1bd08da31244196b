#pragma once

// Long-run characterization of trajectories: rotation numbers, maximal
// Lyapunov exponents, stroboscopic (Poincare) sections, attractor
// classification, and the parameter, bifurcation, and basin scans built on
// them.

#include "ppvl/integrate.hpp"
#include "ppvl/model.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ppvl::diag {

struct Rational {
    int num = 0;
    int den = 1;

    double value() const noexcept { return static_cast<double>(num) / den; }
    bool is_integer() const noexcept { return den == 1; }
    std::string str() const;
    friend bool operator==(const Rational &, const Rational &) = default;
};

// Nearest p/q with q <= max_den when within tol, reduced, den > 0.
std::optional<Rational> snap_rational(double x, int max_den = 4, double tol = 1e-3);

enum class AttractorKind { Equilibrium, Oscillation, Rotation, OscillationRotation, Chaotic, Unresolved };

struct AttractorClass {
    AttractorKind kind = AttractorKind::Unresolved;
    int period = 0;     // stroboscopic period (Oscillation k; informative for rotations)
    Rational winding{}; // b for Rotation / OscillationRotation

    static AttractorClass equilibrium() { return {AttractorKind::Equilibrium, 1, {}}; }
    static AttractorClass oscillation(int k) { return {AttractorKind::Oscillation, k, {}}; }
    static AttractorClass rotation(int b, int period = 1) { return {AttractorKind::Rotation, period, {b, 1}}; }
    static AttractorClass oscillation_rotation(Rational b, int period)
    {
        return {AttractorKind::OscillationRotation, period, b};
    }
    static AttractorClass chaotic() { return {AttractorKind::Chaotic, 0, {}}; }
    static AttractorClass unresolved() { return {AttractorKind::Unresolved, 0, {}}; }

    // Class label without the stroboscopic period of rotations, e.g.
    // "equilibrium", "oscillation(2)", "rotation(-1)",
    // "oscillation-rotation(+1/2)", "chaotic", "unresolved".
    std::string label() const;
    // Same class, ignoring the period of rotations.
    bool same_class(const AttractorClass &o) const noexcept { return label() == o.label(); }
};

struct Budget {
    int transient_periods = 300;
    int window_periods = 500;
    int lyapunov_periods = 2000;
    ode::IntegratorConfig integrator = ode::IntegratorConfig::scan();

    void validate() const;
};

inline constexpr double chaos_threshold = 0.005;
inline constexpr double equilibrium_tol = 1e-6;
inline constexpr double closure_tol = 1e-5;
inline constexpr int max_poincare_period = 8;

// Mean angular velocity in drive-frequency units, (theta_end - theta_start)
// / (2 pi n) over the window after the transient.
double mean_rotation(const DimensionlessParams &p, const Excitation &ex, const State &s0, int window_periods,
                     int transient_periods, const ode::IntegratorConfig &cfg = ode::IntegratorConfig::scan());

// Mean rotation snapped to p/q with q <= 4 when within 1e-3; none otherwise.
std::optional<Rational> rotation_number(const DimensionlessParams &p, const Excitation &ex, const State &s0,
                                        int window_periods = 500, int transient_periods = 300,
                                        const ode::IntegratorConfig &cfg = ode::IntegratorConfig::scan());

struct LyapunovResult {
    double lambda_max = 0.0; // per unit tau
    int n_periods = 0;
    int transient_periods = 0;
};

// Benettin estimate on the stroboscopic map: tangent renormalized every
// period, lambda = sum(ln growth) / (2 pi n).
LyapunovResult max_lyapunov(const DimensionlessParams &p, const Excitation &ex, const State &s0, int n_periods = 2000,
                            int transient_periods = 300,
                            const ode::IntegratorConfig &cfg = ode::IntegratorConfig::scan());

struct SectionPoint {
    double theta = 0.0; // wrapped to (-pi, pi]
    double theta_dot = 0.0;
};

std::vector<SectionPoint> poincare_map(const DimensionlessParams &p, const Excitation &ex, const State &s0,
                                       int n_points, int transient_periods = 300,
                                       const ode::IntegratorConfig &cfg = ode::IntegratorConfig::scan());

// Smallest q <= max_period with |P_n - P_{n-q}| < tol over the tail of an
// unwrapped stroboscopic sequence (angles compared modulo 2 pi); 0 if none.
int section_period(const std::vector<State> &strobe_samples, double tol = closure_tol,
                   int max_period = max_poincare_period);

struct Characterization {
    AttractorClass cls;
    double mean_rotation = 0.0;
    std::optional<Rational> rotation;
    int section_period = 0;
    std::array<double, 2> centroid{}; // of the periodic section cycle (wrapped theta, theta_dot)
    std::optional<double> lambda_max; // computed only when the cascade reaches it
    State final_state;
    std::vector<State> window; // stroboscopic samples of the measurement window
};

// Full decision cascade: equilibrium, integer rotation, fractional rotation,
// periodic oscillation, then the Lyapunov test for chaos.
Characterization characterize(const DimensionlessParams &p, const Excitation &ex, const State &s0,
                              const Budget &budget = {});

AttractorClass classify_attractor(const DimensionlessParams &p, const Excitation &ex, const State &s0,
                                  const Budget &budget = {});

enum class MapMetric { Rotation, Lyapunov };

struct IcPolicy {
    // Rotation metric: seed the predicted stable rotations for |b| in {1, 2}
    // where they exist, plus `random_ics` draws from a fixed seed.
    bool seed_predicted = true;
    int random_ics = 8;
    std::uint64_t seed = 20091;
    double random_speed = 2.0; // theta_dot drawn from [-v, v]
    // Lyapunov metric: one generic initial condition.
    State generic{2.0, 0.5, 0.0};
};

// Averaged rotation state (X1_stable(b), b) placed in the instantaneous frame
// at tau = pi, where the rod is shortest: theta = X1 + b pi and the velocity
// scaled by the conserved x2 x3^2 of the averaged flow,
// theta_dot = b (1 - eps^2)^(3/2) / (1 - eps)^2. Uses the clamped seed phase.
State predicted_rotation_ic(int b, const DimensionlessParams &p);

// Initial conditions the rotation metric tries for one cell.
std::vector<State> rotation_map_ics(const DimensionlessParams &p, const IcPolicy &policy);

struct ParameterMap {
    MapMetric metric = MapMetric::Rotation;
    std::vector<double> omega;
    std::vector<double> epsilon;
    double beta = 0.0;
    std::vector<double> values; // row-major: omega outer, epsilon inner
    std::vector<char> failed;

    double at(std::size_t i_omega, std::size_t j_eps) const { return values[i_omega * epsilon.size() + j_eps]; }
};

// Rotation metric: max |b| over the initial conditions that lock (0 when
// none). Lyapunov metric: lambda_max from the generic initial condition.
double map_cell(MapMetric metric, const DimensionlessParams &p, const Excitation &ex, const IcPolicy &policy,
                const Budget &budget);

ParameterMap parameter_map(MapMetric metric, const std::vector<double> &omega_grid,
                           const std::vector<double> &epsilon_grid, double beta, const Excitation &ex,
                           const IcPolicy &policy = {}, const Budget &budget = {}, int workers = 1);

struct BifurcationStep {
    double epsilon = 0.0;
    std::vector<double> theta_dot; // stroboscopic samples after the transient
    AttractorClass cls;
    bool failed = false;
    bool from_perturbation = false; // branch picked up by the fresh small IC
};

inline constexpr int bifurcation_samples = 64;

// Continuation in increasing eps at fixed omega. When the continued state
// sits on the equilibrium, a fresh small perturbation is also tried so that
// branches born at the loss of stability are not missed.
std::vector<BifurcationStep> bifurcation_sweep(double omega, const std::vector<double> &epsilon_grid, double beta,
                                               const Excitation &ex, const Budget &budget = {},
                                               const State &start = {0.01, 0.0, 0.0});

struct AttractorInfo {
    int id = 0;
    std::string key;
    AttractorClass cls;
    std::array<double, 2> centroid{};
    int cells = 0;
};

struct BasinCell {
    AttractorClass cls;
    int attractor = -1; // index into BasinGrid::attractors
};

struct BasinGrid {
    DimensionlessParams params;
    std::vector<double> theta;     // columns
    std::vector<double> theta_dot; // rows
    std::vector<BasinCell> cells;  // row-major: theta_dot outer, theta inner
    std::vector<AttractorInfo> attractors;
    int unresolved = 0;

    const BasinCell &at(std::size_t row, std::size_t col) const { return cells[row * theta.size() + col]; }
};

// Identity key: class label plus the section-cycle centroid rounded to 1e-2.
std::string attractor_key(const Characterization &c);

BasinGrid basin_scan(const DimensionlessParams &p, const Excitation &ex, const std::vector<double> &theta_grid,
                     const std::vector<double> &theta_dot_grid, const Budget &budget = {}, int workers = 1);

} // namespace ppvl::diag
