/* SPDX-License-Identifier: Apache-2.0 */
#ifndef LAPKIT_LAPKIT_H
#define LAPKIT_LAPKIT_H

#include <stddef.h>

#if defined(LAPKIT_BUILDING)
#define LAPKIT_API __attribute__((visibility("default")))
#else
#define LAPKIT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes; the message of the last failure on this thread is kept. */
typedef enum lapkit_status {
  LAPKIT_OK = 0,
  LAPKIT_INVALID_ARGUMENT = 1,
  LAPKIT_PARSE_ERROR = 2,
  LAPKIT_GEOMETRY_ERROR = 3,
  LAPKIT_NUMERICAL_ERROR = 4,
  LAPKIT_SOLVER_FAILED = 5,
  LAPKIT_IO_ERROR = 6,
  LAPKIT_INTERNAL_ERROR = 7
} lapkit_status;

typedef struct lapkit_config lapkit_config;
typedef struct lapkit_solution lapkit_solution;

LAPKIT_API const char *lapkit_version(void);
LAPKIT_API const char *lapkit_last_error(void);

/* Configuration: parse text or a file, apply "section.key=value" overrides. */
LAPKIT_API lapkit_status lapkit_config_parse(const char *text, lapkit_config **out);
LAPKIT_API lapkit_status lapkit_config_load(const char *path, lapkit_config **out);
LAPKIT_API lapkit_status lapkit_config_override(lapkit_config *cfg, const char *assignment);
LAPKIT_API lapkit_status lapkit_config_get(const lapkit_config *cfg, const char *key, char *buf,
                                           size_t cap, size_t *needed);
/* Canonical echo; with buf == NULL only *needed is set (including the NUL). */
LAPKIT_API lapkit_status lapkit_config_echo(const lapkit_config *cfg, char *buf, size_t cap,
                                            size_t *needed);
LAPKIT_API void lapkit_config_free(lapkit_config *cfg);

/* Runs a command (validate, solve, sweep, identities, norms, oracle-compare,
 * eig-probe). *exit_code receives the process exit code of the CLI; the
 * command log goes to log_path when non-NULL, else it is discarded. */
LAPKIT_API lapkit_status lapkit_run(const char *command, const lapkit_config *cfg,
                                    const char *out_dir, const char *log_path, int *exit_code);
LAPKIT_API size_t lapkit_command_count(void);
LAPKIT_API const char *lapkit_command_name(size_t i);

/* One solve of the configured problem at problem.lambda, problem.eps. */
typedef struct lapkit_solve_info {
  int iterations;
  int converged;
  double rel_residual;
  size_t unknowns;
  double h;
} lapkit_solve_info;

typedef struct lapkit_norms {
  double X, Y, Ystar_f, gradY, tangL2, w3half, Q;
} lapkit_norms;

LAPKIT_API lapkit_status lapkit_solve(const lapkit_config *cfg, lapkit_solution **out);
LAPKIT_API lapkit_status lapkit_solution_info(const lapkit_solution *s, lapkit_solve_info *info);
LAPKIT_API lapkit_status lapkit_solution_norms(const lapkit_solution *s, lapkit_norms *out);
/* Trilinear interpolation of the solution at x. */
LAPKIT_API lapkit_status lapkit_solution_eval(const lapkit_solution *s, const double x[3],
                                              double *re, double *im);
LAPKIT_API void lapkit_solution_free(lapkit_solution *s);

/* Coefficient evaluation for a library description, e.g. "coulomb(1,1)". */
LAPKIT_API lapkit_status lapkit_potential_c(const char *electric, const double x[3], double *c);

#ifdef __cplusplus
}
#endif

#endif
