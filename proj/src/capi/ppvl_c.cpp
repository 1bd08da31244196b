#include "ppvl/ppvl.h"

#include "ppvl/averaging.hpp"
#include "ppvl/diagnostics.hpp"
#include "ppvl/floquet.hpp"
#include "ppvl/integrate.hpp"
#include "ppvl/model.hpp"
#include "ppvl/parallel.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <unistd.h>
#include <variant>
#include <vector>

#ifndef PPVL_VERSION_STRING
#define PPVL_VERSION_STRING "0.0.0"
#endif

struct ppvl_options {
    int workers = 1;
    std::optional<ppvl::ode::IntegratorConfig> tolerances;
    ppvl::diag::Budget budget;
    ppvl::Excitation excitation;
    ppvl::diag::IcPolicy policy;

    ppvl::ode::IntegratorConfig scan() const { return tolerances.value_or(ppvl::ode::IntegratorConfig::scan()); }
    ppvl::ode::IntegratorConfig precise() const
    {
        return tolerances.value_or(ppvl::ode::IntegratorConfig::precise());
    }
    ppvl::diag::Budget long_run() const
    {
        ppvl::diag::Budget b = budget;
        b.integrator = scan();
        return b;
    }
};

struct ppvl_table {
    using Cell = std::variant<double, std::string>;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    nlohmann::json metadata = nlohmann::json::object();

    mutable std::deque<std::string> text_cache;
    mutable std::string metadata_cache;
};

namespace {

thread_local std::string last_error;

const ppvl_options default_options{};

ppvl_status to_status(ppvl::ErrorCode code)
{
    switch (code) {
    case ppvl::ErrorCode::InvalidArgument:
        return PPVL_ERR_INVALID_ARGUMENT;
    case ppvl::ErrorCode::StepSizeUnderflow:
        return PPVL_ERR_STEP_UNDERFLOW;
    case ppvl::ErrorCode::DivisionByZero:
        return PPVL_ERR_DIVISION_BY_ZERO;
    case ppvl::ErrorCode::PoleAtDenominator:
        return PPVL_ERR_POLE;
    case ppvl::ErrorCode::NotExists:
        return PPVL_ERR_NOT_EXISTS;
    case ppvl::ErrorCode::Io:
        return PPVL_ERR_IO;
    }
    return PPVL_ERR_INTERNAL;
}

ppvl_status set_error(ppvl_status status, std::string message)
{
    last_error = std::move(message);
    return status;
}

template <class F>
ppvl_status guarded(F &&body)
{
    try {
        body();
        return PPVL_OK;
    } catch (const ppvl::Error &e) {
        return set_error(to_status(e.code()), e.what());
    } catch (const std::bad_alloc &) {
        return set_error(PPVL_ERR_INTERNAL, "out of memory");
    } catch (const std::exception &e) {
        return set_error(PPVL_ERR_INTERNAL, e.what());
    }
}

void require(bool ok, const char *what)
{
    if (!ok) {
        ppvl::fail(ppvl::ErrorCode::InvalidArgument, what);
    }
}

const ppvl_options &resolve(const ppvl_options *opts)
{
    return opts ? *opts : default_options;
}

std::vector<double> as_vector(const double *data, size_t n, const char *what)
{
    require(data != nullptr && n > 0, what);
    return {data, data + n};
}

std::string format_number(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string cell_text(const ppvl_table::Cell &cell)
{
    if (const double *v = std::get_if<double>(&cell)) {
        return format_number(*v);
    }
    return std::get<std::string>(cell);
}

std::string csv_field(const std::string &s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

void write_atomic(const std::string &path, const std::string &contents)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) {
            ppvl::fail(ppvl::ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
        }
        os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        os.flush();
        if (!os) {
            std::error_code ignored;
            fs::remove(tmp, ignored);
            ppvl::fail(ppvl::ErrorCode::Io, "write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        ppvl::fail(ppvl::ErrorCode::Io, "cannot rename into " + target.string());
    }
}

ppvl_status emit(ppvl_table **out, ppvl_table &&table)
{
    *out = new ppvl_table(std::move(table));
    return PPVL_OK;
}

double nan()
{
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace

extern "C" {

const char *ppvl_version(void)
{
    return PPVL_VERSION_STRING;
}

const char *ppvl_last_error(void)
{
    return last_error.c_str();
}

const char *ppvl_status_name(ppvl_status status)
{
    switch (status) {
    case PPVL_OK:
        return "ok";
    case PPVL_ERR_INVALID_ARGUMENT:
        return "invalid argument";
    case PPVL_ERR_STEP_UNDERFLOW:
        return "step size underflow";
    case PPVL_ERR_DIVISION_BY_ZERO:
        return "division by zero";
    case PPVL_ERR_POLE:
        return "pole at denominator";
    case PPVL_ERR_NOT_EXISTS:
        return "does not exist";
    case PPVL_ERR_IO:
        return "i/o error";
    case PPVL_ERR_INTERNAL:
        return "internal error";
    }
    return "unknown status";
}

int ppvl_status_is_numerical(ppvl_status status)
{
    return status == PPVL_ERR_STEP_UNDERFLOW || status == PPVL_ERR_DIVISION_BY_ZERO || status == PPVL_ERR_POLE;
}

ppvl_status ppvl_options_create(ppvl_options **out)
{
    if (!out) {
        return set_error(PPVL_ERR_INVALID_ARGUMENT, "null output pointer");
    }
    return guarded([&] { *out = new ppvl_options(); });
}

void ppvl_options_destroy(ppvl_options *opts)
{
    delete opts;
}

ppvl_status ppvl_options_set_workers(ppvl_options *opts, int workers)
{
    return guarded([&] {
        require(opts != nullptr, "null options handle");
        require(workers >= 1, "workers must be >= 1");
        opts->workers = workers;
    });
}

ppvl_status ppvl_options_set_tolerances(ppvl_options *opts, double rel_tol, double abs_tol)
{
    return guarded([&] {
        require(opts != nullptr, "null options handle");
        ppvl::ode::IntegratorConfig cfg;
        cfg.rel_tol = rel_tol;
        cfg.abs_tol = abs_tol;
        cfg.validate();
        opts->tolerances = cfg;
    });
}

ppvl_status ppvl_options_set_budget(ppvl_options *opts, int transient_periods, int window_periods,
                                    int lyapunov_periods)
{
    return guarded([&] {
        require(opts != nullptr, "null options handle");
        ppvl::diag::Budget b = opts->budget;
        b.transient_periods = transient_periods;
        b.window_periods = window_periods;
        b.lyapunov_periods = lyapunov_periods;
        b.validate();
        opts->budget = b;
    });
}

ppvl_status ppvl_options_set_excitation(ppvl_options *opts, const double *cos_coeffs, size_t n_cos,
                                        const double *sin_coeffs, size_t n_sin)
{
    return guarded([&] {
        require(opts != nullptr, "null options handle");
        require((n_cos == 0 || cos_coeffs) && (n_sin == 0 || sin_coeffs), "null coefficient array");
        std::vector<double> c(cos_coeffs, cos_coeffs + n_cos);
        std::vector<double> s(sin_coeffs, sin_coeffs + n_sin);
        opts->excitation = ppvl::Excitation(std::move(c), std::move(s));
    });
}

ppvl_status ppvl_options_set_random_ics(ppvl_options *opts, int count, uint64_t seed)
{
    return guarded([&] {
        require(opts != nullptr, "null options handle");
        require(count >= 0, "random initial condition count must be >= 0");
        opts->policy.random_ics = count;
        opts->policy.seed = seed;
    });
}

void ppvl_table_destroy(ppvl_table *table)
{
    delete table;
}

size_t ppvl_table_rows(const ppvl_table *table)
{
    return table ? table->rows.size() : 0;
}

size_t ppvl_table_columns(const ppvl_table *table)
{
    return table ? table->columns.size() : 0;
}

const char *ppvl_table_column_name(const ppvl_table *table, size_t col)
{
    if (!table || col >= table->columns.size()) {
        return nullptr;
    }
    return table->columns[col].c_str();
}

ppvl_status ppvl_table_number(const ppvl_table *table, size_t row, size_t col, double *out)
{
    return guarded([&] {
        require(table && out, "null table or output pointer");
        require(row < table->rows.size() && col < table->columns.size(), "cell index out of range");
        const double *v = std::get_if<double>(&table->rows[row][col]);
        require(v != nullptr, "cell is not numeric");
        *out = *v;
    });
}

const char *ppvl_table_text(const ppvl_table *table, size_t row, size_t col)
{
    if (!table || row >= table->rows.size() || col >= table->columns.size()) {
        return nullptr;
    }
    table->text_cache.push_back(cell_text(table->rows[row][col]));
    if (table->text_cache.size() > 64) {
        table->text_cache.pop_front();
    }
    return table->text_cache.back().c_str();
}

const char *ppvl_table_metadata(const ppvl_table *table)
{
    if (!table) {
        return nullptr;
    }
    table->metadata_cache = table->metadata.dump();
    return table->metadata_cache.c_str();
}

ppvl_status ppvl_table_write_csv(const ppvl_table *table, const char *path)
{
    return guarded([&] {
        require(table && path, "null table or path");
        std::string out;
        for (size_t j = 0; j < table->columns.size(); ++j) {
            out += (j ? "," : "") + csv_field(table->columns[j]);
        }
        out += '\n';
        for (const auto &row : table->rows) {
            for (size_t j = 0; j < row.size(); ++j) {
                out += (j ? "," : "") + csv_field(cell_text(row[j]));
            }
            out += '\n';
        }
        write_atomic(path, out);
    });
}

ppvl_status ppvl_write_file_atomic(const char *path, const char *contents, size_t size)
{
    return guarded([&] {
        require(path && (contents || size == 0), "null path or contents");
        write_atomic(path, std::string(contents, size));
    });
}

ppvl_status ppvl_monodromy(const ppvl_options *opts, double eps, double beta, double omega, double matrix[4],
                           double multipliers_re[2], double multipliers_im[2])
{
    return guarded([&] {
        const ppvl_options &o = resolve(opts);
        const auto m = ppvl::floquet::monodromy({eps, beta, omega}, o.excitation, o.precise());
        for (int i = 0; i < 4 && matrix; ++i) {
            matrix[i] = m.m[i];
        }
        for (int i = 0; i < 2; ++i) {
            if (multipliers_re) {
                multipliers_re[i] = m.multipliers[i].real();
            }
            if (multipliers_im) {
                multipliers_im[i] = m.multipliers[i].imag();
            }
        }
    });
}

ppvl_status ppvl_first_tongue(double beta, double eps, int *exists, double *lo, double *hi)
{
    return guarded([&] {
        require(exists != nullptr, "null output pointer");
        const auto t = ppvl::floquet::first_tongue_interval(beta, eps);
        *exists = t.interval.has_value();
        if (t.interval) {
            if (lo) {
                *lo = t.interval->first;
            }
            if (hi) {
                *hi = t.interval->second;
            }
        }
    });
}

ppvl_status ppvl_locate_boundary(const ppvl_options *opts, double omega_stable, double omega_unstable, double eps,
                                 double beta, double resolution, double *omega)
{
    return guarded([&] {
        require(omega != nullptr, "null output pointer");
        require(resolution > 0.0, "resolution must be > 0");
        const ppvl_options &o = resolve(opts);
        *omega = ppvl::floquet::locate_boundary(omega_stable, omega_unstable, eps, beta, o.excitation, resolution,
                                                o.precise());
    });
}

ppvl_status ppvl_response_residual(double eps, double beta, double omega, double amplitude, double *residual)
{
    return guarded([&] {
        require(residual != nullptr, "null output pointer");
        *residual = ppvl::averaging::response_residual(amplitude, {eps, beta, omega});
    });
}

ppvl_status ppvl_rotation_threshold(int b_abs, double beta, double eps, double *omega)
{
    return guarded([&] {
        require(omega != nullptr, "null output pointer");
        *omega = ppvl::averaging::rotation_threshold(b_abs, beta, eps);
    });
}

ppvl_status ppvl_rotation_steady(int b, double eps, double beta, double omega, double *x1_stable,
                                 double *x1_unstable)
{
    return guarded([&] {
        const auto r = ppvl::averaging::rotation_steady(b, {eps, beta, omega});
        if (x1_stable) {
            *x1_stable = r.x1_stable;
        }
        if (x1_unstable) {
            *x1_unstable = r.x1_unstable;
        }
    });
}

ppvl_status ppvl_rotation_number(const ppvl_options *opts, double eps, double beta, double omega, double theta0,
                                 double theta_dot0, double tau0, int *found, int *num, int *den, double *mean)
{
    return guarded([&] {
        require(found && num && den, "null output pointer");
        const ppvl_options &o = resolve(opts);
        const ppvl::diag::Budget b = o.long_run();
        const double m = ppvl::diag::mean_rotation({eps, beta, omega}, o.excitation, {theta0, theta_dot0, tau0},
                                                   b.window_periods, b.transient_periods, b.integrator);
        const auto r = ppvl::diag::snap_rational(m);
        *found = r.has_value();
        *num = r ? r->num : 0;
        *den = r ? r->den : 1;
        if (mean) {
            *mean = m;
        }
    });
}

ppvl_status ppvl_lyapunov(const ppvl_options *opts, double eps, double beta, double omega, double theta0,
                          double theta_dot0, double tau0, double *lambda_max)
{
    return guarded([&] {
        require(lambda_max != nullptr, "null output pointer");
        const ppvl_options &o = resolve(opts);
        const ppvl::diag::Budget b = o.long_run();
        *lambda_max = ppvl::diag::max_lyapunov({eps, beta, omega}, o.excitation, {theta0, theta_dot0, tau0},
                                               b.lyapunov_periods, b.transient_periods, b.integrator)
                          .lambda_max;
    });
}

ppvl_status ppvl_classify(const ppvl_options *opts, double eps, double beta, double omega, double theta0,
                          double theta_dot0, double tau0, char *label, size_t label_size, double *mean_rotation,
                          double *lambda_max)
{
    return guarded([&] {
        const ppvl_options &o = resolve(opts);
        const auto c = ppvl::diag::characterize({eps, beta, omega}, o.excitation, {theta0, theta_dot0, tau0},
                                                o.long_run());
        if (label && label_size > 0) {
            const std::string l = c.cls.label();
            const size_t n = std::min(l.size(), label_size - 1);
            std::memcpy(label, l.data(), n);
            label[n] = '\0';
        }
        if (mean_rotation) {
            *mean_rotation = c.mean_rotation;
        }
        if (lambda_max) {
            *lambda_max = c.lambda_max.value_or(nan());
        }
    });
}

ppvl_status ppvl_predicted_rotation_ic(int b, double eps, double beta, double omega, double *theta0,
                                       double *theta_dot0, double *tau0)
{
    return guarded([&] {
        require(theta0 && theta_dot0 && tau0, "null output pointer");
        require(std::abs(b) == 1 || std::abs(b) == 2, "predicted rotations exist for |b| in {1, 2}");
        const ppvl::State s = ppvl::diag::predicted_rotation_ic(b, {eps, beta, omega});
        *theta0 = s.theta;
        *theta_dot0 = s.theta_dot;
        *tau0 = s.tau;
    });
}

ppvl_status ppvl_simulate(const ppvl_options *opts, double eps, double beta, double omega, double theta0,
                          double theta_dot0, double tau0, int periods, int samples_per_period, ppvl_table **out)
{
    return guarded([&] {
        require(out != nullptr, "null output pointer");
        require(periods >= 2, "periods must be >= 2");
        require(samples_per_period >= 1, "samples per period must be >= 1");
        const ppvl_options &o = resolve(opts);
        const ppvl::DimensionlessParams p{eps, beta, omega};
        p.validate();
        const ppvl::State s0{theta0, theta_dot0, tau0};
        const int n = periods * samples_per_period;
        std::vector<double> taus(static_cast<size_t>(n));
        for (int k = 1; k <= n; ++k) {
            taus[k - 1] = tau0 + ppvl::two_pi * k / samples_per_period;
        }
        const auto traj =
            ppvl::ode::integrate_ivp(ppvl::ode::theta_field(p, o.excitation), s0, taus.back(), taus, o.precise());

        const int half = periods / 2;
        const double winding = (traj.samples.back().theta - traj.samples[half * samples_per_period].theta) /
                               (ppvl::two_pi * (periods - half));
        const auto snapped = ppvl::diag::snap_rational(winding);
        const double rotation = snapped ? snapped->value() : winding;

        ppvl_table t;
        t.columns = {"tau", "theta", "theta_dot", "q", "rotation_number"};
        t.rows.reserve(traj.samples.size());
        for (const auto &s : traj.samples) {
            const double q = ppvl::map_theta_q(s.theta, ppvl::AngleMap::ToQ, s.tau, p, o.excitation);
            t.rows.push_back({s.tau, s.theta, s.theta_dot, q, rotation});
        }
        t.metadata["rotation_number"] = snapped ? nlohmann::json(snapped->str()) : nlohmann::json(nullptr);
        t.metadata["mean_rotation"] = winding;
        t.metadata["rotation_window_periods"] = periods - half;
        emit(out, std::move(t));
    });
}

ppvl_status ppvl_floquet_scan(const ppvl_options *opts, double beta, const double *omega, size_t n_omega,
                              const double *eps, size_t n_eps, ppvl_table **out)
{
    return guarded([&] {
        require(out != nullptr, "null output pointer");
        const ppvl_options &o = resolve(opts);
        const auto grid = ppvl::floquet::stability_scan(as_vector(omega, n_omega, "empty omega grid"),
                                                        as_vector(eps, n_eps, "empty epsilon grid"), beta,
                                                        o.excitation, o.workers, o.precise());
        ppvl_table t;
        t.columns = {"omega", "epsilon", "stable", "spectral_radius"};
        size_t failed = 0;
        for (size_t i = 0; i < grid.omega.size(); ++i) {
            for (size_t j = 0; j < grid.epsilon.size(); ++j) {
                const size_t idx = i * grid.epsilon.size() + j;
                const auto c = grid.cells[idx];
                failed += c == ppvl::floquet::CellStability::Failed;
                const double stable = c == ppvl::floquet::CellStability::Failed ? nan()
                                      : c == ppvl::floquet::CellStability::Stable ? 1.0
                                                                                    : 0.0;
                t.rows.push_back({grid.omega[i], grid.epsilon[j], stable, grid.radius[idx]});
            }
        }
        t.metadata["failed_cells"] = failed;
        emit(out, std::move(t));
    });
}

ppvl_status ppvl_response(const ppvl_options *opts, double eps, double beta, double omega_lo, double omega_hi,
                          int n_points, ppvl_table **out)
{
    return guarded([&] {
        require(out != nullptr, "null output pointer");
        const ppvl_options &o = resolve(opts);
        const auto curve = ppvl::averaging::response_curve(omega_lo, omega_hi, n_points, eps, beta, o.workers);
        ppvl_table t;
        t.columns = {"omega", "Q", "stable", "psi"};
        for (const auto &pt : curve.points) {
            t.rows.push_back({pt.omega, pt.amplitude, pt.stable ? 1.0 : 0.0, pt.phase});
        }
        t.metadata["roots_beyond_pi"] = curve.roots_beyond_pi;
        emit(out, std::move(t));
    });
}

ppvl_status ppvl_rotations(double eps, double beta, const double *omega, size_t n_omega, ppvl_table **out)
{
    return guarded([&] {
        require(out != nullptr, "null output pointer");
        const auto grid = as_vector(omega, n_omega, "empty omega grid");
        ppvl_table t;
        t.columns = {"omega", "b", "threshold", "exists", "x1_stable", "x1_unstable"};
        for (double w : grid) {
            const ppvl::DimensionlessParams p{eps, beta, w};
            p.validate();
            for (int b : {1, -1, 2, -2}) {
                const double threshold = ppvl::averaging::rotation_threshold(std::abs(b), beta, eps);
                if (ppvl::averaging::rotation_exists(std::abs(b), p)) {
                    const auto r = ppvl::averaging::rotation_steady(b, p);
                    t.rows.push_back({w, static_cast<double>(b), threshold, 1.0, r.x1_stable, r.x1_unstable});
                } else {
                    t.rows.push_back({w, static_cast<double>(b), threshold, 0.0, nan(), nan()});
                }
            }
        }
        emit(out, std::move(t));
    });
}

ppvl_status ppvl_param_map(const ppvl_options *opts, ppvl_map_metric metric, double beta, const double *omega,
                           size_t n_omega, const double *eps, size_t n_eps, ppvl_table **out)
{
    return guarded([&] {
        require(out != nullptr, "null output pointer");
        require(metric == PPVL_METRIC_ROTATION || metric == PPVL_METRIC_LYAPUNOV, "unknown map metric");
        const ppvl_options &o = resolve(opts);
        const auto m = metric == PPVL_METRIC_ROTATION ? ppvl::diag::MapMetric::Rotation
                                                      : ppvl::diag::MapMetric::Lyapunov;
        const auto map = ppvl::diag::parameter_map(m, as_vector(omega, n_omega, "empty omega grid"),
                                                   as_vector(eps, n_eps, "empty epsilon grid"), beta, o.excitation,
                                                   o.policy, o.long_run(), o.workers);
        ppvl_table t;
        t.columns = {"omega", "epsilon", "value", "failed"};
        size_t failed = 0;
        for (size_t i = 0; i < map.omega.size(); ++i) {
            for (size_t j = 0; j < map.epsilon.size(); ++j) {
                const size_t idx = i * map.epsilon.size() + j;
                failed += map.failed[idx] != 0;
                t.rows.push_back({map.omega[i], map.epsilon[j], map.values[idx], map.failed[idx] ? 1.0 : 0.0});
            }
        }
        t.metadata["failed_cells"] = failed;
        t.metadata["metric"] = metric == PPVL_METRIC_ROTATION ? "rotation" : "lyapunov";
        emit(out, std::move(t));
    });
}

ppvl_status ppvl_bifurcation(const ppvl_options *opts, const double *omega, size_t n_omega, double beta,
                             const double *eps, size_t n_eps, ppvl_table **out)
{
    return guarded([&] {
        require(out != nullptr, "null output pointer");
        const ppvl_options &o = resolve(opts);
        const auto omegas = as_vector(omega, n_omega, "empty omega list");
        const auto grid = as_vector(eps, n_eps, "empty epsilon grid");
        const ppvl::diag::Budget budget = o.long_run();
        std::vector<std::vector<ppvl::diag::BifurcationStep>> sweeps(omegas.size());
        ppvl::parallel_for(omegas.size(), o.workers, [&](size_t i) {
            sweeps[i] = ppvl::diag::bifurcation_sweep(omegas[i], grid, beta, o.excitation, budget);
        });
        ppvl_table t;
        t.columns = {"omega", "epsilon", "sample_index", "theta_dot", "class"};
        size_t failed = 0;
        for (size_t i = 0; i < omegas.size(); ++i) {
            for (const auto &step : sweeps[i]) {
                if (step.failed) {
                    ++failed;
                    t.rows.push_back({omegas[i], step.epsilon, nan(), nan(), std::string("failed")});
                    continue;
                }
                const std::string label = step.cls.label();
                for (size_t k = 0; k < step.theta_dot.size(); ++k) {
                    t.rows.push_back({omegas[i], step.epsilon, static_cast<double>(k), step.theta_dot[k], label});
                }
            }
        }
        t.metadata["failed_steps"] = failed;
        emit(out, std::move(t));
    });
}

ppvl_status ppvl_basins(const ppvl_options *opts, double eps, double beta, double omega, const double *theta,
                        size_t n_theta, const double *theta_dot, size_t n_theta_dot, ppvl_table **out)
{
    return guarded([&] {
        require(out != nullptr, "null output pointer");
        const ppvl_options &o = resolve(opts);
        const auto grid = ppvl::diag::basin_scan({eps, beta, omega}, o.excitation,
                                                 as_vector(theta, n_theta, "empty theta grid"),
                                                 as_vector(theta_dot, n_theta_dot, "empty theta_dot grid"),
                                                 o.long_run(), o.workers);
        ppvl_table t;
        t.columns = {"theta0", "theta_dot0", "class", "attractor_key"};
        for (size_t r = 0; r < grid.theta_dot.size(); ++r) {
            for (size_t c = 0; c < grid.theta.size(); ++c) {
                const auto &cell = grid.at(r, c);
                const std::string key = cell.attractor >= 0 ? grid.attractors[cell.attractor].key : "";
                t.rows.push_back({grid.theta[c], grid.theta_dot[r], cell.cls.label(), key});
            }
        }
        nlohmann::json legend = nlohmann::json::array();
        for (const auto &a : grid.attractors) {
            legend.push_back({{"id", a.id},
                              {"key", a.key},
                              {"class", a.cls.label()},
                              {"centroid", {a.centroid[0], a.centroid[1]}},
                              {"cells", a.cells}});
        }
        t.metadata["attractors"] = legend;
        t.metadata["unresolved_cells"] = grid.unresolved;
        t.metadata["total_cells"] = grid.cells.size();
        emit(out, std::move(t));
    });
}

} // extern "C"
