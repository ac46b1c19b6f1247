/* SPDX-License-Identifier: Apache-2.0 */

#ifndef LAYERFLOW_H
#define LAYERFLOW_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(LAYERFLOW_BUILDING)
#define LF_API __attribute__((visibility("default")))
#else
#define LF_API
#endif

typedef enum lf_status {
  LF_OK = 0,
  LF_ERR_INVALID_ARGUMENT = 1,
  LF_ERR_GRID_MISMATCH = 2,
  LF_ERR_SINGULAR = 3,
  LF_ERR_DEGENERATE = 4,
  LF_ERR_DIVERGED = 5,
  LF_ERR_CONFIG = 6,
  LF_ERR_IO = 7,
  LF_ERR_INTERNAL = 99
} lf_status;

typedef struct lf_config lf_config;
typedef struct lf_grid lf_grid;

/* Message of the last failed call on this thread; empty after success. */
LF_API const char* lf_last_error(void);
LF_API const char* lf_version(void);

/* Run configuration: flat `key = value` text. */
LF_API lf_status lf_config_parse(const char* text, lf_config** out);
LF_API lf_status lf_config_load(const char* path, lf_config** out);
LF_API lf_status lf_config_set_seed(lf_config* cfg, uint64_t seed);
LF_API void lf_config_free(lf_config* cfg);

/* Scenarios write CSV files and summary.txt into out_dir. all_passed is set
   to 1 when every check passed, else 0. */
LF_API int lf_scenario_count(void);
LF_API const char* lf_scenario_name(int index);
LF_API lf_status lf_run_scenario(const char* subcommand, const lf_config* cfg, const char* out_dir,
                                 int* all_passed);

/* Closed-form residue integrals of e^{ias}/(s^2+k^2) and is e^{ias}/(s^2+k^2). */
LF_API lf_status lf_residue_kernel_pair(double a, double xi_mag, double* even, double* odd);
LF_API lf_status lf_layer_harmonic_kernel(int branch, double x, double y, double xi_mag,
                                          double depth, double* out);
LF_API lf_status lf_smallness_gate(double c0, double m4, double* delta0, double* eps0);
LF_API lf_status lf_decay_fit(const double* times, const double* values, size_t n, double burn_in,
                              double* rate, double* r_squared);

/* Grids and nodal fields. A field with c components holds c * sample_count
   doubles, component-major, then horizontal point, then vertical node. */
LF_API lf_status lf_grid_create(int dim, double depth, double period, int n_horizontal,
                                int n_vertical, lf_grid** out);
LF_API void lf_grid_free(lf_grid* grid);
LF_API lf_status lf_grid_sample_count(const lf_grid* grid, size_t* count);
/* dim coordinates per sample, horizontal first, vertical last. */
LF_API lf_status lf_grid_coordinates(const lf_grid* grid, double* coords);
/* Weak Dirichlet-Neumann potential u of a vector field f (dim components). */
LF_API lf_status lf_solve_weak_dn(const lf_grid* grid, const double* f, double* u);
LF_API lf_status lf_helmholtz_project(const lf_grid* grid, const double* f, double* solenoidal,
                                      double* potential);

#ifdef __cplusplus
}
#endif

#endif
