#pragma once

// Averaging-method predictions: the slow flow of the half-frequency
// oscillation ansatz q = a cos(tau/2 + psi), the transcendental
// frequency-response relation for its amplitude Q, and the averaged
// rotation systems for |b| = 1 and |b| = 2 with their steady phases.

#include "ppvl/model.hpp"

#include <array>
#include <vector>

namespace ppvl::averaging {

struct SlowState {
    double amplitude = 0.0; // a (or averaged Q), >= 0
    double phase = 0.0;     // psi (or averaged Psi)
};

struct SlowRate {
    double amplitude_dot = 0.0;
    double phase_dot = 0.0;
};

// Small forcing of the quasi-linear q-equation q'' + omega^2 q = f.
double small_forcing(double q, double q_dot, double tau, const DimensionlessParams &p, const Excitation &ex) noexcept;

// Non-averaged slow-variable equations; throws DivisionByZero when a = 0.
SlowRate slow_flow_rhs(const SlowState &s, double tau, const DimensionlessParams &p,
                       const Excitation &ex = Excitation::cosine());

// slow_flow_rhs averaged over tau in [0, 4*pi] with the slow state frozen.
SlowRate averaged_slow_flow(const SlowState &s, const DimensionlessParams &p,
                            const Excitation &ex = Excitation::cosine());

// LHS(Q, omega, beta) - eps^2 of the frequency-response relation. Throws
// PoleAtDenominator when a denominator vanishes (|d| < 1e-14).
double response_residual(double amplitude, const DimensionlessParams &p);

struct ResponsePoint {
    double omega = 0.0;
    double amplitude = 0.0; // Q
    bool stable = false;
    double phase = 0.0; // steady Psi used for the stability test
};

struct ResponseCurve {
    std::vector<ResponsePoint> points;
    // Set when a residual sign change exists beyond Q = pi (outside the
    // truncation's validity; such roots are discarded).
    bool roots_beyond_pi = false;
};

inline constexpr int response_q_grid = 400;

// Nontrivial roots Q in (0, pi] at one frequency, bracketed on a 400-point
// grid and refined by bisection.
std::vector<double> response_roots(const DimensionlessParams &p, bool *beyond_pi = nullptr);

// Steady phase of the averaged slow flow at amplitude Q and the sign of its
// Jacobian's eigenvalues (central differences, h = 1e-6).
ResponsePoint classify_response(double omega, double amplitude, const DimensionlessParams &p);

// Roots for n_points frequencies evenly spaced over [omega_lo, omega_hi].
ResponseCurve response_curve(double omega_lo, double omega_hi, int n_points, double epsilon, double beta,
                             int workers = 1);

// Existence threshold in omega for rotations with |b| in {1, 2}:
// |b| = 1: 2 beta / (3 eps); |b| = 2: 8 beta / (9 eps^2) / (1 + eps^2/27).
double rotation_threshold(int b_abs, double beta, double epsilon);

bool rotation_exists(int b_abs, const DimensionlessParams &p);

struct RotationSteady {
    int b = 0;
    double x1_stable = 0.0;   // wrapped to (-pi, pi]
    double x1_unstable = 0.0; // wrapped to (-pi, pi]
    bool exists = false;
};

// Principal-branch steady phase mismatches; throws NotExists below threshold.
RotationSteady rotation_steady(int b, const DimensionlessParams &p);

// Stable phase with the arcsine argument clamped to [-1, 1]; usable as a seed
// on both sides of the existence boundary.
double rotation_seed_phase(int b, const DimensionlessParams &p);

bool rotation_is_stable(double x1) noexcept;

struct RotationSlow {
    double x1 = 0.0; // phase mismatch theta - b tau
    double x2 = 0.0; // velocity in the fast time s = |b| tau
};

RotationSlow averaged_rotation_rhs(int b, const RotationSlow &x, const DimensionlessParams &p);

// Jacobian (row-major) of averaged_rotation_rhs, analytic.
std::array<double, 4> averaged_rotation_jacobian(int b, const RotationSlow &x, const DimensionlessParams &p);

} // namespace ppvl::averaging
