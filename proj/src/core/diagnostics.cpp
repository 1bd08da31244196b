#include "ppvl/diagnostics.hpp"

#include "ppvl/averaging.hpp"
#include "ppvl/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>

namespace ppvl::diag {

std::string Rational::str() const
{
    std::string s = num > 0 ? "+" : (num < 0 ? "-" : "");
    s += std::to_string(std::abs(num));
    if (den != 1) {
        s += "/" + std::to_string(den);
    }
    return s;
}

std::optional<Rational> snap_rational(double x, int max_den, double tol)
{
    if (!std::isfinite(x)) {
        return std::nullopt;
    }
    std::optional<Rational> best;
    double best_err = tol;
    for (int den = 1; den <= max_den; ++den) {
        const double num = std::round(x * den);
        const double err = std::abs(x - num / den);
        if (err < best_err) {
            const int n = static_cast<int>(num);
            const int g = std::gcd(std::abs(n), den);
            best = Rational{n / (g == 0 ? 1 : g), den / (g == 0 ? 1 : g)};
            best_err = err;
        }
    }
    if (best && best->num == 0) {
        best->den = 1;
    }
    return best;
}

std::string AttractorClass::label() const
{
    switch (kind) {
    case AttractorKind::Equilibrium:
        return "equilibrium";
    case AttractorKind::Oscillation:
        return "oscillation(" + std::to_string(period) + ")";
    case AttractorKind::Rotation:
        return "rotation(" + winding.str() + ")";
    case AttractorKind::OscillationRotation:
        return "oscillation-rotation(" + winding.str() + ")";
    case AttractorKind::Chaotic:
        return "chaotic";
    case AttractorKind::Unresolved:
        return "unresolved";
    }
    return "unresolved";
}

void Budget::validate() const
{
    if (transient_periods < 0 || window_periods < 1 || lyapunov_periods < 1) {
        fail(ErrorCode::InvalidArgument, "budget periods must be positive");
    }
    integrator.validate();
}

namespace {

std::vector<State> run_strobe(const DimensionlessParams &p, const Excitation &ex, const State &s0, int periods,
                              const ode::IntegratorConfig &cfg)
{
    return ode::strobe(ode::theta_field(p, ex), s0, periods, cfg);
}

bool near_equilibrium(const State &s) noexcept
{
    return std::abs(wrap_angle(s.theta)) < equilibrium_tol && std::abs(s.theta_dot) < equilibrium_tol;
}

} // namespace

double mean_rotation(const DimensionlessParams &p, const Excitation &ex, const State &s0, int window_periods,
                     int transient_periods, const ode::IntegratorConfig &cfg)
{
    p.validate();
    if (window_periods < 1 || transient_periods < 0) {
        fail(ErrorCode::InvalidArgument, "rotation measurement needs window >= 1 and transient >= 0");
    }
    const auto s = run_strobe(p, ex, s0, transient_periods + window_periods, cfg);
    return (s.back().theta - s[static_cast<std::size_t>(transient_periods)].theta) / (two_pi * window_periods);
}

std::optional<Rational> rotation_number(const DimensionlessParams &p, const Excitation &ex, const State &s0,
                                        int window_periods, int transient_periods, const ode::IntegratorConfig &cfg)
{
    if (window_periods < 200 || transient_periods < 300) {
        fail(ErrorCode::InvalidArgument, "rotation number needs window >= 200 and transient >= 300 periods");
    }
    return snap_rational(mean_rotation(p, ex, s0, window_periods, transient_periods, cfg));
}

LyapunovResult max_lyapunov(const DimensionlessParams &p, const Excitation &ex, const State &s0, int n_periods,
                            int transient_periods, const ode::IntegratorConfig &cfg)
{
    p.validate();
    cfg.validate();
    if (n_periods < 500 || transient_periods < 0) {
        fail(ErrorCode::InvalidArgument, "Lyapunov estimate needs n_periods >= 500 and transient >= 0");
    }
    State start = s0;
    if (transient_periods > 0) {
        start = run_strobe(p, ex, s0, transient_periods, cfg).back();
    }
    const double r = std::sqrt(0.5);
    const auto flow = ode::integrate_with_tangent(start, {r, r}, start.tau + two_pi * n_periods, p, ex, cfg);
    return {flow.log_growth / (two_pi * n_periods), n_periods, transient_periods};
}

std::vector<SectionPoint> poincare_map(const DimensionlessParams &p, const Excitation &ex, const State &s0,
                                       int n_points, int transient_periods, const ode::IntegratorConfig &cfg)
{
    p.validate();
    if (n_points < 1 || transient_periods < 0) {
        fail(ErrorCode::InvalidArgument, "Poincare map needs n_points >= 1 and transient >= 0");
    }
    const int total = transient_periods + n_points - 1;
    std::vector<State> s = total > 0 ? run_strobe(p, ex, s0, total, cfg) : std::vector<State>{s0};
    std::vector<SectionPoint> out;
    out.reserve(static_cast<std::size_t>(n_points));
    for (std::size_t i = static_cast<std::size_t>(transient_periods); i < s.size(); ++i) {
        out.push_back({wrap_angle(s[i].theta), s[i].theta_dot});
    }
    return out;
}

int section_period(const std::vector<State> &s, double tol, int max_period)
{
    const int n = static_cast<int>(s.size());
    const int tail = 3 * max_period;
    for (int q = 1; q <= max_period; ++q) {
        if (n < q + tail) {
            break;
        }
        bool closed = true;
        for (int i = n - tail; i < n && closed; ++i) {
            const double dth = wrap_angle(s[i].theta - s[i - q].theta);
            const double dv = s[i].theta_dot - s[i - q].theta_dot;
            closed = std::abs(dth) < tol && std::abs(dv) < tol;
        }
        if (closed) {
            return q;
        }
    }
    return 0;
}

Characterization characterize(const DimensionlessParams &p, const Excitation &ex, const State &s0,
                              const Budget &budget)
{
    p.validate();
    budget.validate();
    const int total = budget.transient_periods + budget.window_periods;
    std::vector<State> s = run_strobe(p, ex, s0, total, budget.integrator);

    Characterization c;
    c.final_state = s.back();
    c.window.assign(s.begin() + budget.transient_periods, s.end());
    c.mean_rotation = (c.window.back().theta - c.window.front().theta) / (two_pi * budget.window_periods);
    c.rotation = snap_rational(c.mean_rotation);
    c.section_period = section_period(c.window);
    if (c.section_period > 0) {
        double th = 0.0;
        double v = 0.0;
        for (int i = 0; i < c.section_period; ++i) {
            const State &x = c.window[c.window.size() - 1 - static_cast<std::size_t>(i)];
            th += wrap_angle(x.theta);
            v += x.theta_dot;
        }
        c.centroid = {th / c.section_period, v / c.section_period};
    }

    const std::size_t tail = std::min<std::size_t>(8, c.window.size());
    const bool at_rest = std::all_of(c.window.end() - static_cast<std::ptrdiff_t>(tail), c.window.end(), near_equilibrium);
    if (at_rest) {
        c.cls = AttractorClass::equilibrium();
        c.centroid = {0.0, 0.0};
        return c;
    }
    if (c.rotation && c.section_period > 0) {
        if (c.rotation->num != 0 && c.rotation->is_integer()) {
            c.cls = AttractorClass::rotation(c.rotation->num, c.section_period);
            return c;
        }
        if (!c.rotation->is_integer()) {
            c.cls = AttractorClass::oscillation_rotation(*c.rotation, c.section_period);
            return c;
        }
        c.cls = AttractorClass::oscillation(c.section_period);
        return c;
    }
    const auto ly = max_lyapunov(p, ex, c.final_state, budget.lyapunov_periods, 0, budget.integrator);
    c.lambda_max = ly.lambda_max;
    c.cls = ly.lambda_max > chaos_threshold ? AttractorClass::chaotic() : AttractorClass::unresolved();
    return c;
}

AttractorClass classify_attractor(const DimensionlessParams &p, const Excitation &ex, const State &s0,
                                  const Budget &budget)
{
    return characterize(p, ex, s0, budget).cls;
}

State predicted_rotation_ic(int b, const DimensionlessParams &p)
{
    if (b == 0) {
        fail(ErrorCode::InvalidArgument, "rotation seed needs b != 0");
    }
    p.validate();
    const double e = p.epsilon;
    const double pi = std::numbers::pi;
    const double speed = std::pow(1.0 - e * e, 1.5) / ((1.0 - e) * (1.0 - e));
    return {averaging::rotation_seed_phase(b, p) + b * pi, b * speed, pi};
}

std::vector<State> rotation_map_ics(const DimensionlessParams &p, const IcPolicy &policy)
{
    std::vector<State> ics;
    if (policy.seed_predicted) {
        for (int b : {1, -1, 2, -2}) {
            if (averaging::rotation_exists(std::abs(b), p)) {
                ics.push_back(predicted_rotation_ic(b, p));
            }
        }
    }
    std::mt19937_64 rng(policy.seed);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> speed(-policy.random_speed, policy.random_speed);
    for (int i = 0; i < policy.random_ics; ++i) {
        const double th = angle(rng);
        const double v = speed(rng);
        ics.push_back({th, v, 0.0});
    }
    return ics;
}

double map_cell(MapMetric metric, const DimensionlessParams &p, const Excitation &ex, const IcPolicy &policy,
                const Budget &budget)
{
    if (metric == MapMetric::Lyapunov) {
        return max_lyapunov(p, ex, policy.generic, std::max(500, budget.lyapunov_periods), budget.transient_periods,
                            budget.integrator)
            .lambda_max;
    }
    double best = 0.0;
    for (const State &ic : rotation_map_ics(p, policy)) {
        const auto b = snap_rational(
            mean_rotation(p, ex, ic, budget.window_periods, budget.transient_periods, budget.integrator));
        if (b) {
            best = std::max(best, std::abs(b->value()));
        }
    }
    return best;
}

ParameterMap parameter_map(MapMetric metric, const std::vector<double> &omega_grid,
                           const std::vector<double> &epsilon_grid, double beta, const Excitation &ex,
                           const IcPolicy &policy, const Budget &budget, int workers)
{
    if (omega_grid.empty() || epsilon_grid.empty() || !std::is_sorted(omega_grid.begin(), omega_grid.end()) ||
        !std::is_sorted(epsilon_grid.begin(), epsilon_grid.end())) {
        fail(ErrorCode::InvalidArgument, "parameter map grids must be non-empty and monotone");
    }
    budget.validate();
    ParameterMap map;
    map.metric = metric;
    map.omega = omega_grid;
    map.epsilon = epsilon_grid;
    map.beta = beta;
    const std::size_t n = omega_grid.size() * epsilon_grid.size();
    map.values.assign(n, std::numeric_limits<double>::quiet_NaN());
    map.failed.assign(n, 0);
    for (double w : omega_grid) {
        for (double e : epsilon_grid) {
            DimensionlessParams{e, beta, w}.validate();
        }
    }
    parallel_for(n, workers, [&](std::size_t idx) {
        const DimensionlessParams p{epsilon_grid[idx % epsilon_grid.size()], beta,
                                    omega_grid[idx / epsilon_grid.size()]};
        try {
            map.values[idx] = map_cell(metric, p, ex, policy, budget);
        } catch (const Error &e) {
            if (!is_numerical(e.code())) {
                throw;
            }
            map.failed[idx] = 1;
        }
    });
    return map;
}

std::vector<BifurcationStep> bifurcation_sweep(double omega, const std::vector<double> &epsilon_grid, double beta,
                                               const Excitation &ex, const Budget &budget, const State &start)
{
    if (epsilon_grid.empty() || !std::is_sorted(epsilon_grid.begin(), epsilon_grid.end())) {
        fail(ErrorCode::InvalidArgument, "bifurcation sweep needs a monotone increasing epsilon grid");
    }
    budget.validate();
    if (budget.window_periods < bifurcation_samples) {
        fail(ErrorCode::InvalidArgument, "bifurcation sweep needs a window of at least 64 periods");
    }
    std::vector<BifurcationStep> out;
    State ic = start;
    for (double eps : epsilon_grid) {
        const DimensionlessParams p{eps, beta, omega};
        p.validate();
        BifurcationStep step;
        step.epsilon = eps;
        try {
            Characterization c = characterize(p, ex, ic, budget);
            if (c.cls.kind == AttractorKind::Equilibrium) {
                Characterization fresh = characterize(p, ex, start, budget);
                if (fresh.cls.kind != AttractorKind::Equilibrium) {
                    c = std::move(fresh);
                    step.from_perturbation = true;
                }
            }
            step.cls = c.cls;
            for (std::size_t i = c.window.size() - bifurcation_samples; i < c.window.size(); ++i) {
                step.theta_dot.push_back(c.window[i].theta_dot);
            }
            // The drive is 2*pi periodic, so the end state restarts at tau = 0.
            ic = {wrap_angle(c.final_state.theta), c.final_state.theta_dot, 0.0};
        } catch (const Error &e) {
            if (!is_numerical(e.code())) {
                throw;
            }
            step.failed = true;
            step.cls = AttractorClass::unresolved();
            ic = start;
        }
        out.push_back(std::move(step));
    }
    return out;
}

std::string attractor_key(const Characterization &c)
{
    const std::string label = c.cls.label();
    if (c.cls.kind == AttractorKind::Equilibrium || c.cls.kind == AttractorKind::Chaotic ||
        c.cls.kind == AttractorKind::Unresolved) {
        return label;
    }
    auto rounded = [](double x) {
        const double r = std::round(x * 100.0) / 100.0;
        return r == 0.0 ? 0.0 : r; // no "-0.00"
    };
    char buf[64];
    std::snprintf(buf, sizeof buf, "@(%.2f,%.2f)", rounded(c.centroid[0]), rounded(c.centroid[1]));
    return label + buf;
}

BasinGrid basin_scan(const DimensionlessParams &p, const Excitation &ex, const std::vector<double> &theta_grid,
                     const std::vector<double> &theta_dot_grid, const Budget &budget, int workers)
{
    p.validate();
    budget.validate();
    if (theta_grid.empty() || theta_dot_grid.empty() || !std::is_sorted(theta_grid.begin(), theta_grid.end()) ||
        !std::is_sorted(theta_dot_grid.begin(), theta_dot_grid.end())) {
        fail(ErrorCode::InvalidArgument, "basin grids must be non-empty and monotone");
    }
    if (theta_grid.front() <= -std::numbers::pi || theta_grid.back() > std::numbers::pi) {
        fail(ErrorCode::InvalidArgument, "basin theta grid must lie within (-pi, pi]");
    }
    BasinGrid grid;
    grid.params = p;
    grid.theta = theta_grid;
    grid.theta_dot = theta_dot_grid;
    const std::size_t n = theta_grid.size() * theta_dot_grid.size();
    grid.cells.resize(n);
    std::vector<std::string> keys(n);
    std::vector<std::array<double, 2>> centroids(n);
    parallel_for(n, workers, [&](std::size_t idx) {
        const State ic{theta_grid[idx % theta_grid.size()], theta_dot_grid[idx / theta_grid.size()], 0.0};
        try {
            const Characterization c = characterize(p, ex, ic, budget);
            grid.cells[idx].cls = c.cls;
            keys[idx] = attractor_key(c);
            centroids[idx] = c.centroid;
        } catch (const Error &e) {
            if (!is_numerical(e.code())) {
                throw;
            }
            grid.cells[idx].cls = AttractorClass::unresolved();
            keys[idx] = "unresolved";
        }
    });
    // Identities in row-major first-seen order.
    std::map<std::string, int> ids;
    for (std::size_t idx = 0; idx < n; ++idx) {
        BasinCell &cell = grid.cells[idx];
        if (cell.cls.kind == AttractorKind::Unresolved) {
            ++grid.unresolved;
            continue;
        }
        auto [it, inserted] = ids.emplace(keys[idx], static_cast<int>(grid.attractors.size()));
        if (inserted) {
            grid.attractors.push_back({it->second, keys[idx], cell.cls, centroids[idx], 0});
        }
        cell.attractor = it->second;
        ++grid.attractors[static_cast<std::size_t>(it->second)].cells;
    }
    return grid;
}

} // namespace ppvl::diag
