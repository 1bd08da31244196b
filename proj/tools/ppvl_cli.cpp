// ppvl command-line front end. Links only the C interface.

#include "ppvl/ppvl.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_io = 1;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Kind { Number, Integer, Grid, Text, Flag };

struct Field {
    std::string name;
    Kind kind;
    json fallback; // null: required
    std::string help;
};

const std::vector<Field> &common_fields()
{
    static const std::vector<Field> f = {
        {"out", Kind::Text, nullptr, "output CSV path"},
        {"workers", Kind::Integer, 1, "worker threads (PPVL_WORKERS overrides the config file)"},
        {"rtol", Kind::Number, nullptr, "integrator relative tolerance (default per analysis)"},
        {"atol", Kind::Number, nullptr, "integrator absolute tolerance (default per analysis)"},
        {"transient", Kind::Integer, 300, "transient periods discarded"},
        {"window", Kind::Integer, 500, "measurement window in periods"},
        {"lyapunov-periods", Kind::Integer, 2000, "periods accumulated for lambda_max"},
        {"excitation-cos", Kind::Grid, "1", "cosine harmonics of phi, comma list"},
        {"excitation-sin", Kind::Grid, "", "sine harmonics of phi, comma list"},
        {"max-failed-fraction", Kind::Number, 0.01, "tolerated fraction of failed cells before exit 3"},
    };
    return f;
}

const std::map<std::string, std::vector<Field>> &command_fields()
{
    static const std::map<std::string, std::vector<Field>> f = {
        {"simulate",
         {{"eps", Kind::Number, nullptr, "excitation amplitude epsilon"},
          {"omega", Kind::Number, nullptr, "natural-to-drive frequency ratio"},
          {"beta", Kind::Number, nullptr, "damping"},
          {"theta0", Kind::Number, 0.0, "initial angle"},
          {"thetadot0", Kind::Number, 0.0, "initial angular velocity"},
          {"tau0", Kind::Number, 0.0, "initial time"},
          {"periods", Kind::Integer, 200, "drive periods to integrate"},
          {"samples-per-period", Kind::Integer, 32, "output samples per period"}}},
        {"floquet-scan",
         {{"beta", Kind::Number, nullptr, "damping"},
          {"omega", Kind::Grid, nullptr, "omega grid, start:stop:step or list"},
          {"eps", Kind::Grid, nullptr, "epsilon grid"}}},
        {"response",
         {{"eps", Kind::Number, nullptr, "excitation amplitude epsilon"},
          {"beta", Kind::Number, nullptr, "damping"},
          {"omega", Kind::Grid, nullptr, "omega grid (uniform)"}}},
        {"rotations",
         {{"eps", Kind::Number, nullptr, "excitation amplitude epsilon"},
          {"beta", Kind::Number, nullptr, "damping"},
          {"omega", Kind::Grid, nullptr, "omega grid"}}},
        {"param-map",
         {{"metric", Kind::Text, "rotation", "rotation or lyapunov"},
          {"beta", Kind::Number, nullptr, "damping"},
          {"omega", Kind::Grid, nullptr, "omega grid"},
          {"eps", Kind::Grid, nullptr, "epsilon grid"},
          {"random-ics", Kind::Integer, 8, "random initial conditions per cell (rotation metric)"},
          {"seed", Kind::Integer, 20091, "seed for the random initial conditions"},
          {"clamp-lyapunov", Kind::Flag, false, "report negative lambda_max as 0"}}},
        {"bifurcation",
         {{"omega", Kind::Grid, nullptr, "one or more frequencies"},
          {"beta", Kind::Number, nullptr, "damping"},
          {"eps", Kind::Grid, nullptr, "increasing epsilon grid"}}},
        {"basins",
         {{"eps", Kind::Number, nullptr, "excitation amplitude epsilon"},
          {"omega", Kind::Number, nullptr, "natural-to-drive frequency ratio"},
          {"beta", Kind::Number, nullptr, "damping"},
          {"grid", Kind::Integer, 101, "cells per axis"},
          {"vmax", Kind::Number, 2.0, "theta_dot0 range is [-vmax, vmax]"}}},
    };
    return f;
}

double parse_number(const std::string &name, const json &v)
{
    if (v.is_number()) {
        return v.get<double>();
    }
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        try {
            size_t used = 0;
            const double x = std::stod(s, &used);
            if (used == s.size()) {
                return x;
            }
        } catch (const std::exception &) {
        }
    }
    throw ConfigError(name + " must be a number (got " + v.dump() + ")");
}

long long parse_integer(const std::string &name, const json &v)
{
    const double x = parse_number(name, v);
    if (!std::isfinite(x) || x != std::floor(x) || std::abs(x) > 9e15) {
        throw ConfigError(name + " must be an integer (got " + v.dump() + ")");
    }
    return static_cast<long long>(x);
}

// start:stop:step (stop included when within 1e-9 of a step), a comma list,
// or a single value.
std::vector<double> parse_grid(const std::string &name, const json &v)
{
    if (v.is_number()) {
        return {v.get<double>()};
    }
    if (v.is_array()) {
        std::vector<double> out;
        for (const auto &x : v) {
            out.push_back(parse_number(name, x));
        }
        return out;
    }
    if (!v.is_string()) {
        throw ConfigError(name + " must be a range, list or number");
    }
    const std::string s = v.get<std::string>();
    std::vector<std::string> parts;
    const char sep = s.find(':') != std::string::npos ? ':' : ',';
    size_t start = 0;
    while (true) {
        const size_t pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
        if (pos == std::string::npos) {
            break;
        }
        start = pos + 1;
    }
    if (s.empty()) {
        return {};
    }
    if (sep == ',') {
        std::vector<double> out;
        for (const auto &p : parts) {
            out.push_back(parse_number(name, p));
        }
        return out;
    }
    if (parts.size() != 3) {
        throw ConfigError(name + " range must read start:stop:step (got \"" + s + "\")");
    }
    const double a = parse_number(name, parts[0]);
    const double b = parse_number(name, parts[1]);
    const double h = parse_number(name, parts[2]);
    if (!(h > 0.0) || !(b >= a)) {
        throw ConfigError(name + " range needs step > 0 and stop >= start");
    }
    const double span = (b - a) / h;
    if (span > 1e7) {
        throw ConfigError(name + " range has too many points");
    }
    const auto n = static_cast<long long>(std::floor(span + 1e-9));
    std::vector<double> out;
    out.reserve(static_cast<size_t>(n + 1));
    for (long long i = 0; i <= n; ++i) {
        out.push_back(a + static_cast<double>(i) * h);
    }
    return out;
}

class Config {
public:
    Config(std::string command, json values) : command_(std::move(command)), values_(std::move(values)) {}

    const std::string &command() const { return command_; }
    const json &values() const { return values_; }

    double number(const std::string &k) const { return parse_number(k, at(k)); }
    long long integer(const std::string &k) const { return parse_integer(k, at(k)); }
    std::vector<double> grid(const std::string &k) const { return parse_grid(k, at(k)); }
    std::string text(const std::string &k) const
    {
        const json &v = at(k);
        return v.is_string() ? v.get<std::string>() : v.dump();
    }
    bool flag(const std::string &k) const
    {
        const json &v = at(k);
        if (v.is_boolean()) {
            return v.get<bool>();
        }
        throw ConfigError(k + " must be true or false");
    }
    bool has(const std::string &k) const { return values_.contains(k) && !values_[k].is_null(); }

private:
    const json &at(const std::string &k) const
    {
        if (!has(k)) {
            throw ConfigError("missing required setting --" + k);
        }
        return values_.at(k);
    }

    std::string command_;
    json values_;
};

// Holds a C handle and releases it on scope exit.
template <class T, void (*Destroy)(T *)>
struct Handle {
    T *ptr = nullptr;
    Handle() = default;
    Handle(const Handle &) = delete;
    Handle &operator=(const Handle &) = delete;
    ~Handle() { Destroy(ptr); }
};

using Options = Handle<ppvl_options, ppvl_options_destroy>;
using Table = Handle<ppvl_table, ppvl_table_destroy>;

void check(ppvl_status st)
{
    if (st == PPVL_OK) {
        return;
    }
    const std::string msg = ppvl_last_error();
    if (st == PPVL_ERR_INVALID_ARGUMENT || st == PPVL_ERR_NOT_EXISTS) {
        throw ConfigError(msg);
    }
    if (st == PPVL_ERR_IO) {
        throw IoError(msg);
    }
    throw NumericalError(std::string(ppvl_status_name(st)) + ": " + msg);
}

void require_eps(double e)
{
    if (!(e >= 0.0 && e < 1.0)) {
        throw ConfigError("epsilon must satisfy 0 <= epsilon < 1 (got " + json(e).dump() + ")");
    }
}

void require_positive(const char *name, double x)
{
    if (!(x > 0.0)) {
        throw ConfigError(std::string(name) + " must satisfy " + name + " > 0 (got " + json(x).dump() + ")");
    }
}

void require_nonnegative(const char *name, double x)
{
    if (!(x >= 0.0)) {
        throw ConfigError(std::string(name) + " must satisfy " + name + " >= 0 (got " + json(x).dump() + ")");
    }
}

void require_monotone(const char *name, const std::vector<double> &g)
{
    if (g.empty()) {
        throw ConfigError(std::string(name) + " grid is empty");
    }
    for (size_t i = 1; i < g.size(); ++i) {
        if (!(g[i] > g[i - 1])) {
            throw ConfigError(std::string(name) + " grid must be strictly increasing");
        }
    }
}

int resolve_workers(const Config &cfg, bool from_command_line)
{
    long long w = cfg.integer("workers");
    if (!from_command_line) {
        if (const char *env = std::getenv("PPVL_WORKERS"); env && *env) {
            w = parse_integer("PPVL_WORKERS", std::string(env));
        }
    }
    if (w < 1 || w > 1024) {
        throw ConfigError("workers must satisfy 1 <= workers <= 1024");
    }
    return static_cast<int>(w);
}

void configure(const Options &opts, const Config &cfg, int workers)
{
    check(ppvl_options_set_workers(opts.ptr, workers));
    if (cfg.has("rtol") || cfg.has("atol")) {
        const double r = cfg.has("rtol") ? cfg.number("rtol") : cfg.number("atol");
        const double a = cfg.has("atol") ? cfg.number("atol") : r;
        check(ppvl_options_set_tolerances(opts.ptr, r, a));
    }
    const long long tr = cfg.integer("transient");
    const long long win = cfg.integer("window");
    const long long ly = cfg.integer("lyapunov-periods");
    if (tr < 0 || win < 1 || ly < 1 || tr > 1000000 || win > 1000000 || ly > 1000000) {
        throw ConfigError("budgets must satisfy transient >= 0, window >= 1, lyapunov-periods >= 1");
    }
    check(ppvl_options_set_budget(opts.ptr, static_cast<int>(tr), static_cast<int>(win), static_cast<int>(ly)));
    const auto c = cfg.grid("excitation-cos");
    const auto s = cfg.grid("excitation-sin");
    check(ppvl_options_set_excitation(opts.ptr, c.data(), c.size(), s.data(), s.size()));
}

struct Outcome {
    Table table;
    json extra = json::object();
    size_t cells = 0;
    size_t failed = 0;
};

void run_simulate(const Config &cfg, const Options &opts, Outcome &out)
{
    const double e = cfg.number("eps");
    require_eps(e);
    const long long periods = cfg.integer("periods");
    const long long spp = cfg.integer("samples-per-period");
    if (periods < 2 || spp < 1 || periods * spp > 50000000) {
        throw ConfigError("periods must be >= 2 and samples-per-period >= 1");
    }
    check(ppvl_simulate(opts.ptr, e, cfg.number("beta"), cfg.number("omega"), cfg.number("theta0"),
                        cfg.number("thetadot0"), cfg.number("tau0"), static_cast<int>(periods),
                        static_cast<int>(spp), &out.table.ptr));
}

void run_floquet(const Config &cfg, const Options &opts, Outcome &out)
{
    const auto w = cfg.grid("omega");
    const auto e = cfg.grid("eps");
    require_monotone("omega", w);
    require_monotone("eps", e);
    for (double x : e) {
        require_eps(x);
    }
    for (double x : w) {
        require_positive("omega", x);
    }
    check(ppvl_floquet_scan(opts.ptr, cfg.number("beta"), w.data(), w.size(), e.data(), e.size(),
                            &out.table.ptr));
    out.cells = w.size() * e.size();
}

void run_response(const Config &cfg, const Options &opts, Outcome &out)
{
    const double e = cfg.number("eps");
    require_eps(e);
    const auto w = cfg.grid("omega");
    require_monotone("omega", w);
    for (double x : w) {
        require_positive("omega", x);
    }
    check(ppvl_response(opts.ptr, e, cfg.number("beta"), w.front(), w.back(), static_cast<int>(w.size()),
                        &out.table.ptr));
}

void run_rotations(const Config &cfg, const Options &, Outcome &out)
{
    const double e = cfg.number("eps");
    require_eps(e);
    const auto w = cfg.grid("omega");
    require_monotone("omega", w);
    check(ppvl_rotations(e, cfg.number("beta"), w.data(), w.size(), &out.table.ptr));
    json records = json::array();
    const size_t rows = ppvl_table_rows(out.table.ptr);
    for (size_t i = 0; i < rows; ++i) {
        double omega = 0, b = 0, threshold = 0, exists = 0, xs = 0, xu = 0;
        check(ppvl_table_number(out.table.ptr, i, 0, &omega));
        check(ppvl_table_number(out.table.ptr, i, 1, &b));
        check(ppvl_table_number(out.table.ptr, i, 2, &threshold));
        check(ppvl_table_number(out.table.ptr, i, 3, &exists));
        check(ppvl_table_number(out.table.ptr, i, 4, &xs));
        check(ppvl_table_number(out.table.ptr, i, 5, &xu));
        json r = {{"omega", omega}, {"b", static_cast<int>(b)}, {"threshold", threshold}, {"exists", exists != 0}};
        r["x1_stable"] = exists != 0 ? json(xs) : json(nullptr);
        r["x1_unstable"] = exists != 0 ? json(xu) : json(nullptr);
        records.push_back(r);
    }
    out.extra["records"] = records;
}

void run_param_map(const Config &cfg, const Options &opts, Outcome &out)
{
    const std::string metric = cfg.text("metric");
    if (metric != "rotation" && metric != "lyapunov") {
        throw ConfigError("metric must be rotation or lyapunov");
    }
    const auto w = cfg.grid("omega");
    const auto e = cfg.grid("eps");
    require_monotone("omega", w);
    require_monotone("eps", e);
    for (double x : e) {
        require_eps(x);
    }
    const long long n_random = cfg.integer("random-ics");
    const long long seed = cfg.integer("seed");
    if (n_random < 0 || n_random > 10000 || seed < 0) {
        throw ConfigError("random-ics must lie in [0, 10000] and seed must be >= 0");
    }
    check(ppvl_options_set_random_ics(opts.ptr, static_cast<int>(n_random), static_cast<uint64_t>(seed)));
    const auto m = metric == "rotation" ? PPVL_METRIC_ROTATION : PPVL_METRIC_LYAPUNOV;
    Table raw;
    check(ppvl_param_map(opts.ptr, m, cfg.number("beta"), w.data(), w.size(), e.data(), e.size(), &raw.ptr));
    std::swap(raw.ptr, out.table.ptr);
    out.cells = w.size() * e.size();
    out.failed = static_cast<size_t>(json::parse(ppvl_table_metadata(out.table.ptr)).value("failed_cells", 0));
    out.extra["clamped"] = metric == "lyapunov" && cfg.flag("clamp-lyapunov");
}

void run_bifurcation(const Config &cfg, const Options &opts, Outcome &out)
{
    const auto w = cfg.grid("omega");
    const auto e = cfg.grid("eps");
    require_monotone("eps", e);
    for (double x : e) {
        require_eps(x);
    }
    for (double x : w) {
        require_positive("omega", x);
    }
    check(ppvl_bifurcation(opts.ptr, w.data(), w.size(), cfg.number("beta"), e.data(), e.size(), &out.table.ptr));
    out.cells = w.size() * e.size();
    out.failed = static_cast<size_t>(json::parse(ppvl_table_metadata(out.table.ptr)).value("failed_steps", 0));
}

void run_basins(const Config &cfg, const Options &opts, Outcome &out)
{
    const double e = cfg.number("eps");
    require_eps(e);
    const long long n = cfg.integer("grid");
    const double vmax = cfg.number("vmax");
    if (n < 2 || n > 4001) {
        throw ConfigError("grid must satisfy 2 <= grid <= 4001");
    }
    require_positive("vmax", vmax);
    std::vector<double> theta(static_cast<size_t>(n));
    std::vector<double> theta_dot(static_cast<size_t>(n));
    const double pi = std::acos(-1.0);
    for (long long i = 0; i < n; ++i) {
        // (-pi, pi]: the left end is excluded, the right end included.
        theta[i] = -pi + 2.0 * pi * static_cast<double>(i + 1) / static_cast<double>(n);
        theta_dot[i] = -vmax + 2.0 * vmax * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    check(ppvl_basins(opts.ptr, e, cfg.number("beta"), cfg.number("omega"), theta.data(), theta.size(),
                      theta_dot.data(), theta_dot.size(), &out.table.ptr));
    out.extra["legend"] = json::parse(ppvl_table_metadata(out.table.ptr)).value("attractors", json::array());
}

using Runner = void (*)(const Config &, const Options &, Outcome &);

const std::map<std::string, Runner> &runners()
{
    static const std::map<std::string, Runner> r = {
        {"simulate", run_simulate},   {"floquet-scan", run_floquet}, {"response", run_response},
        {"rotations", run_rotations}, {"param-map", run_param_map},  {"bifurcation", run_bifurcation},
        {"basins", run_basins},
    };
    return r;
}

std::string sidecar(const std::string &out, const char *suffix)
{
    const auto dot = out.rfind('.');
    const auto slash = out.find_last_of('/');
    const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
    return (has_ext ? out.substr(0, dot) : out) + suffix;
}

void write_text(const std::string &path, const std::string &text)
{
    check(ppvl_write_file_atomic(path.c_str(), text.data(), text.size()));
}

// The lyapunov display clamp rewrites the value column of a param-map table.
void write_table(const Outcome &o, const std::string &path)
{
    if (!o.extra.value("clamped", false)) {
        check(ppvl_table_write_csv(o.table.ptr, path.c_str()));
        return;
    }
    std::string text = "omega,epsilon,value,failed\n";
    const size_t rows = ppvl_table_rows(o.table.ptr);
    for (size_t i = 0; i < rows; ++i) {
        double v = 0.0;
        check(ppvl_table_number(o.table.ptr, i, 2, &v));
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.9g", v < 0.0 ? 0.0 : v);
        text += std::string(ppvl_table_text(o.table.ptr, i, 0)) + "," + ppvl_table_text(o.table.ptr, i, 1) + "," +
                (std::isnan(v) ? std::string("nan") : std::string(buf)) + "," + ppvl_table_text(o.table.ptr, i, 3) +
                "\n";
    }
    write_text(path, text);
}

int execute(const Config &cfg, bool workers_from_command_line)
{
    const auto t0 = std::chrono::steady_clock::now();
    const int workers = resolve_workers(cfg, workers_from_command_line);
    Options opts;
    check(ppvl_options_create(&opts.ptr));
    configure(opts, cfg, workers);
    const std::string out_path = cfg.has("out") ? cfg.text("out") : cfg.command() + ".csv";

    if (cfg.has("beta")) {
        require_nonnegative("beta", cfg.number("beta"));
    }
    if (cfg.has("omega") && cfg.values()["omega"].is_number()) {
        require_positive("omega", cfg.number("omega"));
    }

    Outcome o;
    runners().at(cfg.command())(cfg, opts, o);
    write_table(o, out_path);

    json config = cfg.values();
    config["command"] = cfg.command();
    config["out"] = out_path;
    write_text(sidecar(out_path, ".config.json"), config.dump(2) + "\n");

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json meta = {{"command", cfg.command()},
                 {"version", ppvl_version()},
                 {"config", config},
                 {"workers", workers},
                 {"wall_time_s", wall},
                 {"rows", ppvl_table_rows(o.table.ptr)},
                 {"details", json::parse(ppvl_table_metadata(o.table.ptr))}};
    for (auto it = o.extra.begin(); it != o.extra.end(); ++it) {
        meta[it.key()] = it.value();
    }
    write_text(sidecar(out_path, ".meta.json"), meta.dump(2) + "\n");

    if (o.cells > 0 && o.failed > 0) {
        const double frac = static_cast<double>(o.failed) / static_cast<double>(o.cells);
        if (frac > cfg.number("max-failed-fraction")) {
            throw NumericalError(std::to_string(o.failed) + " of " + std::to_string(o.cells) +
                                 " cells failed, above max-failed-fraction");
        }
    }
    return exit_ok;
}

json load_config_file(const std::string &path)
{
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("cannot read config file " + path);
    }
    try {
        json j = json::parse(is);
        if (!j.is_object()) {
            throw ConfigError("config file must hold a JSON object");
        }
        return j;
    } catch (const json::parse_error &e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Pendulum with periodically varying length: stability, response, rotations, chaos"};
    app.set_version_flag("--version", std::string(ppvl_version()));
    std::string config_path;
    app.add_option("--config", config_path, "JSON config; command-line flags take precedence");
    app.require_subcommand(0, 1);

    std::map<std::string, std::map<std::string, std::string>> raw;
    std::map<std::string, std::map<std::string, bool>> flags;
    std::map<std::string, std::map<std::string, CLI::Option *>> handles;
    for (const auto &[name, fields] : command_fields()) {
        static const std::map<std::string, std::string> about = {
            {"simulate", "trajectory CSV with the measured rotation number"},
            {"floquet-scan", "stability of the lower vertical position over an (omega, eps) grid"},
            {"response", "averaged limit-cycle amplitude Q against omega"},
            {"rotations", "existence thresholds and steady phases of |b| = 1, 2 rotations"},
            {"param-map", "rotation or Lyapunov map over an (omega, eps) grid"},
            {"bifurcation", "stroboscopic theta_dot against increasing eps"},
            {"basins", "attractor labels over a grid of initial conditions"},
        };
        CLI::App *sub = app.add_subcommand(name, about.at(name));
        sub->add_option("--config", config_path, "JSON config; command-line flags take precedence");
        std::vector<Field> all = common_fields();
        all.insert(all.end(), fields.begin(), fields.end());
        for (const Field &f : all) {
            std::string help = f.help;
            if (!f.fallback.is_null() && f.kind != Kind::Flag) {
                help += " [" + (f.fallback.is_string() ? f.fallback.get<std::string>() : f.fallback.dump()) + "]";
            }
            if (f.kind == Kind::Flag) {
                handles[name][f.name] = sub->add_flag("--" + f.name, flags[name][f.name], help);
            } else {
                handles[name][f.name] = sub->add_option("--" + f.name, raw[name][f.name], help);
            }
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        json file = config_path.empty() ? json::object() : load_config_file(config_path);
        std::string command;
        if (!app.get_subcommands().empty()) {
            command = app.get_subcommands().front()->get_name();
        } else if (file.contains("command") && file["command"].is_string()) {
            command = file["command"].get<std::string>();
        } else {
            std::cerr << app.help();
            return exit_config;
        }
        if (!command_fields().contains(command)) {
            throw ConfigError("unknown command " + command);
        }
        if (file.contains("command") && file["command"] != command) {
            throw ConfigError("config file is for command " + file["command"].dump() + ", not " + command);
        }

        std::vector<Field> all = common_fields();
        const auto &own = command_fields().at(command);
        all.insert(all.end(), own.begin(), own.end());
        json values = json::object();
        for (const Field &f : all) {
            values[f.name] = f.fallback;
        }
        for (auto it = file.begin(); it != file.end(); ++it) {
            if (it.key() == "command") {
                continue;
            }
            if (!values.contains(it.key())) {
                throw ConfigError("unknown setting \"" + it.key() + "\" for " + command);
            }
            values[it.key()] = it.value();
        }
        bool workers_on_command_line = false;
        for (const Field &f : all) {
            CLI::Option *opt = handles[command][f.name];
            if (opt->count() == 0) {
                continue;
            }
            workers_on_command_line |= f.name == "workers";
            values[f.name] = f.kind == Kind::Flag ? json(flags[command][f.name]) : json(raw[command][f.name]);
        }
        // Canonical types so the config sidecar round-trips exactly.
        for (const Field &f : all) {
            json &v = values[f.name];
            if (v.is_null()) {
                continue;
            }
            if (f.kind == Kind::Number) {
                v = parse_number(f.name, v);
            } else if (f.kind == Kind::Integer) {
                v = parse_integer(f.name, v);
            }
        }
        return execute(Config(command, values), workers_on_command_line);
    } catch (const ConfigError &e) {
        std::cerr << "ppvl: config error: " << e.what() << "\n";
        return exit_config;
    } catch (const NumericalError &e) {
        std::cerr << "ppvl: numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const IoError &e) {
        std::cerr << "ppvl: " << e.what() << "\n";
        return exit_io;
    } catch (const std::exception &e) {
        std::cerr << "ppvl: " << e.what() << "\n";
        return exit_io;
    }
}
