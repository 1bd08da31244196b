#ifndef PPVL_PPVL_H
#define PPVL_PPVL_H

/* C interface to the ppvl library: pendulum with periodically varying length.
 *
 * Every call returns a ppvl_status; on failure the message for the calling
 * thread is available from ppvl_last_error() until the next failing call.
 * Parameters are dimensionless (eps, beta, omega). Grid results come back as
 * ppvl_table handles owned by the caller. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PPVL_BUILDING)
#    define PPVL_API __declspec(dllexport)
#  else
#    define PPVL_API __declspec(dllimport)
#  endif
#else
#  define PPVL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ppvl_status {
    PPVL_OK = 0,
    PPVL_ERR_INVALID_ARGUMENT = 1,
    PPVL_ERR_STEP_UNDERFLOW = 2,
    PPVL_ERR_DIVISION_BY_ZERO = 3,
    PPVL_ERR_POLE = 4,
    PPVL_ERR_NOT_EXISTS = 5,
    PPVL_ERR_IO = 6,
    PPVL_ERR_INTERNAL = 99
} ppvl_status;

typedef enum ppvl_map_metric { PPVL_METRIC_ROTATION = 0, PPVL_METRIC_LYAPUNOV = 1 } ppvl_map_metric;

typedef struct ppvl_options ppvl_options;
typedef struct ppvl_table ppvl_table;

PPVL_API const char *ppvl_version(void);
PPVL_API const char *ppvl_last_error(void);
PPVL_API const char *ppvl_status_name(ppvl_status status);
/* Nonzero for integration and algebraic failures (as opposed to bad input). */
PPVL_API int ppvl_status_is_numerical(ppvl_status status);

/* Options: worker count, integrator tolerances, long-run budgets, excitation.
 * Defaults: 1 worker, rel = abs = 1e-8 for scans (1e-10 is always used for
 * monodromy and response checks unless overridden), budgets 300/500/2000
 * periods, phi = cos(tau). */
PPVL_API ppvl_status ppvl_options_create(ppvl_options **out);
PPVL_API void ppvl_options_destroy(ppvl_options *opts);
PPVL_API ppvl_status ppvl_options_set_workers(ppvl_options *opts, int workers);
PPVL_API ppvl_status ppvl_options_set_tolerances(ppvl_options *opts, double rel_tol, double abs_tol);
PPVL_API ppvl_status ppvl_options_set_budget(ppvl_options *opts, int transient_periods, int window_periods,
                                             int lyapunov_periods);
/* phi(tau) = sum_k cos_coeffs[k-1] cos(k tau) + sin_coeffs[k-1] sin(k tau); max |phi| <= 1. */
PPVL_API ppvl_status ppvl_options_set_excitation(ppvl_options *opts, const double *cos_coeffs, size_t n_cos,
                                                 const double *sin_coeffs, size_t n_sin);
/* Rotation map: number of random initial conditions and their seed. */
PPVL_API ppvl_status ppvl_options_set_random_ics(ppvl_options *opts, int count, uint64_t seed);

/* Tables: rectangular, named columns, cells numeric or text. */
PPVL_API void ppvl_table_destroy(ppvl_table *table);
PPVL_API size_t ppvl_table_rows(const ppvl_table *table);
PPVL_API size_t ppvl_table_columns(const ppvl_table *table);
PPVL_API const char *ppvl_table_column_name(const ppvl_table *table, size_t col);
/* PPVL_ERR_INVALID_ARGUMENT for text cells or out-of-range indices. */
PPVL_API ppvl_status ppvl_table_number(const ppvl_table *table, size_t row, size_t col, double *out);
/* Cell as printed in CSV (numbers with 9 significant digits). The pointer
 * stays valid for the next 63 calls on the same table. */
PPVL_API const char *ppvl_table_text(const ppvl_table *table, size_t row, size_t col);
/* JSON object with run-specific details (e.g. the basin attractor legend). */
PPVL_API const char *ppvl_table_metadata(const ppvl_table *table);
/* Header plus rows, written to a temporary file and renamed into place. */
PPVL_API ppvl_status ppvl_table_write_csv(const ppvl_table *table, const char *path);
PPVL_API ppvl_status ppvl_write_file_atomic(const char *path, const char *contents, size_t size);

/* Point computations. */
PPVL_API ppvl_status ppvl_monodromy(const ppvl_options *opts, double eps, double beta, double omega,
                                    double matrix[4], double multipliers_re[2], double multipliers_im[2]);
/* exists = 0 when the radicand is not positive; lo/hi untouched then. */
PPVL_API ppvl_status ppvl_first_tongue(double beta, double eps, int *exists, double *lo, double *hi);
PPVL_API ppvl_status ppvl_locate_boundary(const ppvl_options *opts, double omega_stable, double omega_unstable,
                                          double eps, double beta, double resolution, double *omega);
PPVL_API ppvl_status ppvl_response_residual(double eps, double beta, double omega, double amplitude,
                                            double *residual);
PPVL_API ppvl_status ppvl_rotation_threshold(int b_abs, double beta, double eps, double *omega);
/* Stable and unstable steady phase mismatch; PPVL_ERR_NOT_EXISTS below threshold. */
PPVL_API ppvl_status ppvl_rotation_steady(int b, double eps, double beta, double omega, double *x1_stable,
                                          double *x1_unstable);
/* Rotation number over window after transient; found = 0 when it does not
 * snap to p/q with q <= 4. mean receives the raw mean in any case. */
PPVL_API ppvl_status ppvl_rotation_number(const ppvl_options *opts, double eps, double beta, double omega,
                                          double theta0, double theta_dot0, double tau0, int *found, int *num,
                                          int *den, double *mean);
PPVL_API ppvl_status ppvl_lyapunov(const ppvl_options *opts, double eps, double beta, double omega, double theta0,
                                   double theta_dot0, double tau0, double *lambda_max);
/* Attractor label such as "oscillation(2)" or "rotation(-1)", copied into
 * buf (truncated to size - 1). lambda_max is NaN when not computed. */
PPVL_API ppvl_status ppvl_classify(const ppvl_options *opts, double eps, double beta, double omega, double theta0,
                                   double theta_dot0, double tau0, char *label, size_t label_size,
                                   double *mean_rotation, double *lambda_max);
/* Seed state for the predicted stable rotation b (|b| in {1, 2}). */
PPVL_API ppvl_status ppvl_predicted_rotation_ic(int b, double eps, double beta, double omega, double *theta0,
                                                double *theta_dot0, double *tau0);

/* Table producers. */

/* columns: tau, theta, theta_dot, q, rotation_number. samples_per_period
 * points per drive period; rotation_number is the same in every row: the
 * mean winding over the second half of the run, snapped when possible. */
PPVL_API ppvl_status ppvl_simulate(const ppvl_options *opts, double eps, double beta, double omega, double theta0,
                                   double theta_dot0, double tau0, int periods, int samples_per_period,
                                   ppvl_table **out);
/* columns: omega, epsilon, stable (1/0, NaN failed), spectral_radius. */
PPVL_API ppvl_status ppvl_floquet_scan(const ppvl_options *opts, double beta, const double *omega, size_t n_omega,
                                       const double *eps, size_t n_eps, ppvl_table **out);
/* columns: omega, Q, stable, psi. One row per root. */
PPVL_API ppvl_status ppvl_response(const ppvl_options *opts, double eps, double beta, double omega_lo,
                                   double omega_hi, int n_points, ppvl_table **out);
/* columns: omega, b, threshold, exists, x1_stable, x1_unstable. */
PPVL_API ppvl_status ppvl_rotations(double eps, double beta, const double *omega, size_t n_omega,
                                    ppvl_table **out);
/* columns: omega, epsilon, value, failed. */
PPVL_API ppvl_status ppvl_param_map(const ppvl_options *opts, ppvl_map_metric metric, double beta,
                                    const double *omega, size_t n_omega, const double *eps, size_t n_eps,
                                    ppvl_table **out);
/* columns: omega, epsilon, sample_index, theta_dot, class. */
PPVL_API ppvl_status ppvl_bifurcation(const ppvl_options *opts, const double *omega, size_t n_omega, double beta,
                                      const double *eps, size_t n_eps, ppvl_table **out);
/* columns: theta0, theta_dot0, class, attractor_key. Metadata carries the
 * attractor legend and the unresolved count. */
PPVL_API ppvl_status ppvl_basins(const ppvl_options *opts, double eps, double beta, double omega,
                                 const double *theta, size_t n_theta, const double *theta_dot, size_t n_theta_dot,
                                 ppvl_table **out);

#ifdef __cplusplus
}
#endif

#endif
