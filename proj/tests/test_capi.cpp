#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ppvl/ppvl.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

using doctest::Approx;

namespace {

struct OptionsDeleter {
    void operator()(ppvl_options *o) const { ppvl_options_destroy(o); }
};
struct TableDeleter {
    void operator()(ppvl_table *t) const { ppvl_table_destroy(t); }
};
using Options = std::unique_ptr<ppvl_options, OptionsDeleter>;
using Table = std::unique_ptr<ppvl_table, TableDeleter>;

Options make_options()
{
    ppvl_options *o = nullptr;
    REQUIRE(ppvl_options_create(&o) == PPVL_OK);
    return Options(o);
}

std::string slurp(const std::filesystem::path &p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double number(const ppvl_table *t, size_t row, size_t col)
{
    double v = 0.0;
    REQUIRE(ppvl_table_number(t, row, col, &v) == PPVL_OK);
    return v;
}

} // namespace

TEST_CASE("library basics")
{
    CHECK(std::string(ppvl_version()).size() > 0);
    CHECK(std::string(ppvl_status_name(PPVL_ERR_POLE)).size() > 0);
    CHECK(ppvl_status_is_numerical(PPVL_ERR_STEP_UNDERFLOW));
    CHECK_FALSE(ppvl_status_is_numerical(PPVL_ERR_INVALID_ARGUMENT));
    CHECK(ppvl_options_create(nullptr) == PPVL_ERR_INVALID_ARGUMENT);
    ppvl_options_destroy(nullptr);
    ppvl_table_destroy(nullptr);
}

TEST_CASE("options validation")
{
    Options o = make_options();
    CHECK(ppvl_options_set_workers(o.get(), 0) == PPVL_ERR_INVALID_ARGUMENT);
    CHECK(ppvl_options_set_workers(o.get(), 4) == PPVL_OK);
    CHECK(ppvl_options_set_tolerances(o.get(), -1.0, 1e-8) == PPVL_ERR_INVALID_ARGUMENT);
    CHECK(ppvl_options_set_budget(o.get(), 300, 0, 2000) == PPVL_ERR_INVALID_ARGUMENT);
    const double too_big[] = {0.8, 0.8};
    CHECK(ppvl_options_set_excitation(o.get(), too_big, 2, nullptr, 0) == PPVL_ERR_INVALID_ARGUMENT);
    CHECK(std::string(ppvl_last_error()).find("|phi|") != std::string::npos);
    const double ok[] = {0.5, 0.5};
    CHECK(ppvl_options_set_excitation(o.get(), ok, 2, nullptr, 0) == PPVL_OK);
}

TEST_CASE("point computations")
{
    Options o = make_options();
    double m[4], re[2], im[2];
    REQUIRE(ppvl_monodromy(o.get(), 0.0, 0.05, 0.5, m, re, im) == PPVL_OK);
    CHECK(m[0] * m[3] - m[1] * m[2] == Approx(std::exp(-0.05 * M_PI)).epsilon(1e-9));

    int exists = 0;
    double lo = 0.0, hi = 0.0;
    REQUIRE(ppvl_first_tongue(0.05, 0.04, &exists, &lo, &hi) == PPVL_OK);
    CHECK(exists == 1);
    CHECK(lo == Approx(0.491709).epsilon(1e-5));
    CHECK(hi == Approx(0.508291).epsilon(1e-5));

    double x1s = 0.0, x1u = 0.0;
    REQUIRE(ppvl_rotation_steady(-1, 0.28, 0.05, 0.5, &x1s, &x1u) == PPVL_OK);
    CHECK(x1s == Approx(0.240404).epsilon(1e-5));
    CHECK(ppvl_rotation_steady(1, 0.05, 0.05, 0.5, &x1s, &x1u) == PPVL_ERR_NOT_EXISTS);
    CHECK(std::string(ppvl_last_error()).size() > 0);

    double r = 0.0;
    CHECK(ppvl_response_residual(0.04, 0.0, 0.5, 0.0, &r) == PPVL_OK);
    CHECK(r == Approx(-0.0016));
    CHECK(ppvl_response_residual(0.04, 0.05, 1.0, 0.0, &r) == PPVL_ERR_POLE);
    CHECK(ppvl_response_residual(1.5, 0.05, 0.5, 0.0, &r) == PPVL_ERR_INVALID_ARGUMENT);
    CHECK(std::string(ppvl_last_error()).find("epsilon < 1") != std::string::npos);

    double th = 0.0, thd = 0.0, tau = 0.0;
    REQUIRE(ppvl_predicted_rotation_ic(-1, 0.28, 0.05, 0.5, &th, &thd, &tau) == PPVL_OK);
    int found = 0, num = 0, den = 0;
    double mean = 0.0;
    REQUIRE(ppvl_rotation_number(o.get(), 0.28, 0.05, 0.5, th, thd, tau, &found, &num, &den, &mean) == PPVL_OK);
    CHECK(found == 1);
    CHECK(num == -1);
    CHECK(den == 1);

    char label[64];
    double lam = 0.0;
    REQUIRE(ppvl_classify(o.get(), 0.04, 0.05, 0.5, 0.5, 0.0, 0.0, label, sizeof label, &mean, &lam) == PPVL_OK);
    CHECK(std::string(label) == "oscillation(2)");
    CHECK(std::isnan(lam));
    char tiny[5];
    REQUIRE(ppvl_classify(o.get(), 0.04, 0.05, 0.5, 0.5, 0.0, 0.0, tiny, sizeof tiny, &mean, &lam) == PPVL_OK);
    CHECK(std::string(tiny) == "osci");
}

TEST_CASE("tables")
{
    Options o = make_options();
    ppvl_table *raw = nullptr;
    const double w[] = {0.45, 0.5, 0.55};
    const double e[] = {0.0, 0.1};
    REQUIRE(ppvl_floquet_scan(o.get(), 0.05, w, 3, e, 2, &raw) == PPVL_OK);
    Table t(raw);
    CHECK(ppvl_table_rows(t.get()) == 6);
    REQUIRE(ppvl_table_columns(t.get()) == 4);
    CHECK(std::string(ppvl_table_column_name(t.get(), 2)) == "stable");
    CHECK(ppvl_table_column_name(t.get(), 9) == nullptr);
    CHECK(number(t.get(), 0, 2) == 1.0);
    CHECK(number(t.get(), 3, 2) == 0.0); // omega 0.5, eps 0.1
    CHECK(std::string(ppvl_table_text(t.get(), 1, 1)) == "0.1");
    double v = 0.0;
    CHECK(ppvl_table_number(t.get(), 99, 0, &v) == PPVL_ERR_INVALID_ARGUMENT);

    // Text pointers survive a burst of later calls.
    const char *first = ppvl_table_text(t.get(), 0, 0);
    const std::string copy = first;
    for (int i = 0; i < 60; ++i) {
        (void)ppvl_table_text(t.get(), 5, 3);
    }
    CHECK(std::string(first) == copy);

    const auto dir = std::filesystem::temp_directory_path() / "ppvl_capi_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "scan.csv";
    REQUIRE(ppvl_table_write_csv(t.get(), path.c_str()) == PPVL_OK);
    const std::string csv = slurp(path);
    CHECK(csv.rfind("omega,epsilon,stable,spectral_radius\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
    for (const auto &entry : std::filesystem::directory_iterator(dir)) {
        CHECK(entry.path().filename().string().find(".tmp") == std::string::npos);
    }
    CHECK(ppvl_table_write_csv(t.get(), "/nonexistent-dir/x.csv") == PPVL_ERR_IO);
    std::filesystem::remove_all(dir);
}

TEST_CASE("rotation predictor table")
{
    ppvl_table *raw = nullptr;
    const double w[] = {0.1, 0.5};
    REQUIRE(ppvl_rotations(0.28, 0.05, w, 2, &raw) == PPVL_OK);
    Table t(raw);
    CHECK(ppvl_table_rows(t.get()) == 8);
    // omega 0.1 is below the |b| = 1 threshold 0.119.
    CHECK(number(t.get(), 0, 3) == 0.0);
    CHECK(std::isnan(number(t.get(), 0, 4)));
    CHECK(number(t.get(), 4, 3) == 1.0);
    CHECK(number(t.get(), 4, 4) == Approx(-0.240404).epsilon(1e-5));
}

TEST_CASE("simulate reports the rotation number")
{
    Options o = make_options();
    double th = 0.0, thd = 0.0, tau = 0.0;
    REQUIRE(ppvl_predicted_rotation_ic(-1, 0.28, 0.05, 0.5, &th, &thd, &tau) == PPVL_OK);
    ppvl_table *raw = nullptr;
    REQUIRE(ppvl_simulate(o.get(), 0.28, 0.05, 0.5, th, thd, tau, 200, 8, &raw) == PPVL_OK);
    Table t(raw);
    CHECK(ppvl_table_rows(t.get()) == 200 * 8 + 1);
    CHECK(std::string(ppvl_table_text(t.get(), 10, 4)) == "-1");
    CHECK(number(t.get(), 0, 0) == Approx(tau));
    const std::string meta = ppvl_table_metadata(t.get());
    CHECK(meta.find("\"rotation_number\":\"-1\"") != std::string::npos);
    CHECK(ppvl_simulate(o.get(), 1.5, 0.05, 0.5, 0.0, 0.0, 0.0, 10, 8, &raw) == PPVL_ERR_INVALID_ARGUMENT);
}

TEST_CASE("basins table and legend")
{
    Options o = make_options();
    REQUIRE(ppvl_options_set_budget(o.get(), 200, 200, 500) == PPVL_OK);
    const double th[] = {-1.0, 0.0, 1.0};
    const double v[] = {-0.5, 0.5};
    ppvl_table *raw = nullptr;
    REQUIRE(ppvl_basins(o.get(), 0.05, 0.05, 0.67, th, 3, v, 2, &raw) == PPVL_OK);
    Table t(raw);
    CHECK(ppvl_table_rows(t.get()) == 6);
    CHECK(std::string(ppvl_table_column_name(t.get(), 3)) == "attractor_key");
    const std::string meta = ppvl_table_metadata(t.get());
    CHECK(meta.find("\"attractors\"") != std::string::npos);
    CHECK(meta.find("\"total_cells\":6") != std::string::npos);
}

TEST_CASE("worker count does not change results")
{
    const double w[] = {0.48, 0.5, 0.52, 0.6};
    const double e[] = {0.05, 0.1};
    std::string text[2];
    for (int k = 0; k < 2; ++k) {
        Options o = make_options();
        REQUIRE(ppvl_options_set_workers(o.get(), k == 0 ? 1 : 4) == PPVL_OK);
        REQUIRE(ppvl_options_set_budget(o.get(), 100, 100, 500) == PPVL_OK);
        REQUIRE(ppvl_options_set_random_ics(o.get(), 2, 7) == PPVL_OK);
        ppvl_table *raw = nullptr;
        REQUIRE(ppvl_param_map(o.get(), PPVL_METRIC_ROTATION, 0.05, w, 4, e, 2, &raw) == PPVL_OK);
        Table t(raw);
        for (size_t r = 0; r < ppvl_table_rows(t.get()); ++r) {
            for (size_t c = 0; c < ppvl_table_columns(t.get()); ++c) {
                text[k] += ppvl_table_text(t.get(), r, c);
                text[k] += ',';
            }
        }
    }
    CHECK(text[0] == text[1]);
}
