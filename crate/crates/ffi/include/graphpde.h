#ifndef GRAPHPDE_H
#define GRAPHPDE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum GpEikonalSign {
  GP_EIKONAL_SIGN_PLUS = 0,
  GP_EIKONAL_SIGN_MINUS = 1,
} GpEikonalSign;

typedef enum GpScheme {
  GP_SCHEME_FIXED_POINT = 0,
  GP_SCHEME_GAUSS_SEIDEL = 1,
  GP_SCHEME_EIKONAL = 2,
} GpScheme;

typedef enum GpSolveStatus {
  GP_SOLVE_STATUS_CONVERGED = 0,
  GP_SOLVE_STATUS_MAX_ITER = 1,
  GP_SOLVE_STATUS_STAGNATED = 2,
  GP_SOLVE_STATUS_INFEASIBLE_DETECTED = 3,
} GpSolveStatus;

typedef enum GpStatus {
  GP_STATUS_OK = 0,
  GP_STATUS_NULL_POINTER = 1,
  GP_STATUS_INVALID_UTF8 = 2,
  GP_STATUS_PARSE = 3,
  GP_STATUS_INVALID_GRAPH = 4,
  GP_STATUS_INVALID_OPERATOR = 5,
  GP_STATUS_INVALID_ARGUMENT = 6,
  GP_STATUS_SOLVER = 7,
  GP_STATUS_IO = 8,
  GP_STATUS_PANIC = 9,
} GpStatus;

/**
 * A graph and its boundary data.
 */
typedef struct GpGraph GpGraph;

/**
 * An operator bound to a particular graph.
 */
typedef struct GpOperator GpOperator;

typedef struct GpReport GpReport;

/**
 * Plain-data solver settings. Start from [`gp_solver_config_default`].
 */
typedef struct GpSolverConfig {
  double tolerance;
  size_t max_iterations;
  double damping;
  size_t stagnation_window;
  enum GpScheme scheme;
} GpSolverConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *gp_version(void);

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next `gp_` call on the same thread.
 */
const char *gp_last_error_message(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from a `gp_` function that hands out owned strings.
 */
void gp_string_free(char *s);

/**
 * Parses graph JSON (vertices with optional boundary data `g`, weighted edges).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum GpStatus gp_graph_from_json(const char *json, struct GpGraph **out);

/**
 * Serializes the graph with its boundary data. Free with [`gp_string_free`].
 *
 * # Safety
 * `graph` must be a live handle or null.
 */
char *gp_graph_to_json(const struct GpGraph *graph);

/**
 * # Safety
 * `graph` must come from [`gp_graph_from_json`] and not be used afterwards.
 */
void gp_graph_free(struct GpGraph *graph);

/**
 * Vertex count, or 0 for a null handle.
 *
 * # Safety
 * `graph` must be a live handle or null.
 */
size_t gp_graph_vertex_count(const struct GpGraph *graph);

/**
 * Index of the vertex named `id`. Indices follow the JSON vertex order.
 *
 * # Safety
 * Pointers must be valid; `id` NUL-terminated.
 */
enum GpStatus gp_graph_vertex_index(const struct GpGraph *graph, const char *id, size_t *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum GpStatus gp_graph_is_boundary(const struct GpGraph *graph, size_t vertex, bool *out);

/**
 * Copies the boundary data (0 at interior vertices unless given) into `out`.
 *
 * # Safety
 * `out` must hold `len` doubles.
 */
enum GpStatus gp_graph_boundary_data(const struct GpGraph *graph, double *out, size_t len);

/**
 * Shortest path length from `from` to `to` with edge lengths `1/w`.
 * When `to` is unreachable, `*reachable` is false and `*out` is +inf.
 *
 * # Safety
 * Pointers must be valid.
 */
enum GpStatus gp_path_distance(const struct GpGraph *graph,
                               size_t from,
                               size_t to,
                               double *out,
                               bool *reachable);

/**
 * Parses an operator spec and binds it to `graph`.
 *
 * # Safety
 * Pointers must be valid; `json` NUL-terminated.
 */
enum GpStatus gp_operator_from_json(const struct GpGraph *graph,
                                    const char *json,
                                    struct GpOperator **out);

/**
 * # Safety
 * `op` must come from [`gp_operator_from_json`] and not be used afterwards.
 */
void gp_operator_free(struct GpOperator *op);

/**
 * Evaluates the operator at every interior vertex and `u - g` on the boundary.
 *
 * # Safety
 * `u` and `out` must each hold `len` doubles.
 */
enum GpStatus gp_evaluate(const struct GpOperator *op,
                          const struct GpGraph *graph,
                          const double *u,
                          double *out,
                          size_t len);

struct GpSolverConfig gp_solver_config_default(void);

/**
 * Solves the Dirichlet problem `op(u) = 0` inside, `u = g` on the boundary.
 * `cfg` may be null for defaults. `initial` may be null for the midrange
 * start; otherwise it holds `len` doubles. A run that ends without
 * converging still returns `GP_STATUS_OK`; inspect the report status.
 *
 * # Safety
 * Pointers must be valid.
 */
enum GpStatus gp_solve(const struct GpOperator *op,
                       const struct GpGraph *graph,
                       const struct GpSolverConfig *cfg,
                       const double *initial,
                       size_t len,
                       struct GpReport **out);

/**
 * Exact eikonal solve with positive source `h` (`len` doubles, boundary
 * entries ignored) and the graph's boundary data.
 *
 * # Safety
 * Pointers must be valid.
 */
enum GpStatus gp_solve_eikonal(const struct GpGraph *graph,
                               const double *h,
                               size_t len,
                               enum GpEikonalSign sign,
                               struct GpReport **out);

/**
 * # Safety
 * `report` must be a live handle.
 */
enum GpStatus gp_report_status(const struct GpReport *report, enum GpSolveStatus *out);

/**
 * Iteration count, or 0 for a null handle.
 *
 * # Safety
 * `report` must be a live handle or null.
 */
size_t gp_report_iterations(const struct GpReport *report);

/**
 * Interior residual sup-norm of the returned solution, NaN for null.
 *
 * # Safety
 * `report` must be a live handle or null.
 */
double gp_report_residual(const struct GpReport *report);

/**
 * # Safety
 * `out` must hold `len` doubles.
 */
enum GpStatus gp_report_solution(const struct GpReport *report, double *out, size_t len);

/**
 * # Safety
 * `report` must come from a solve call and not be used afterwards.
 */
void gp_report_free(struct GpReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRAPHPDE_H */
