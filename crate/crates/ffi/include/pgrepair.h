#ifndef PGREPAIR_H
#define PGREPAIR_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum PgrSolver {
  PGR_SOLVER_ILP = 0,
  PGR_SOLVER_GREEDY = 1,
  PGR_SOLVER_LP_GREEDY = 2,
  PGR_SOLVER_ILP_EXPLICIT = 3,
} PgrSolver;

// Result code of every fallible call.
typedef enum PgrStatus {
  PGR_STATUS_OK = 0,
  PGR_STATUS_NULL_POINTER = 1,
  PGR_STATUS_INVALID_UTF8 = 2,
  PGR_STATUS_INVALID_GRAPH = 3,
  PGR_STATUS_INVALID_CONSTRAINTS = 4,
  PGR_STATUS_INVALID_OPTIONS = 5,
  PGR_STATUS_LIMIT_EXCEEDED = 6,
  PGR_STATUS_SOLVER_FAILED = 7,
  PGR_STATUS_PANIC = 8,
} PgrStatus;

// A parsed list of constraints.
typedef struct PgrConstraints PgrConstraints;

// A property graph.
typedef struct PgrGraph PgrGraph;

// The outcome of a repair run.
typedef struct PgrReport PgrReport;

// Pipeline options. Obtain defaults from [`pgr_options_default`].
typedef struct PgrOptions {
  bool label_mode;
  // 0 disables neighbourhood errors.
  size_t neighbourhood_k;
  // 0 disables sampled errors.
  size_t sample_k;
  enum PgrSolver solver;
  bool approximate;
  uint64_t seed;
  // Value of NOW() as seconds since the Unix epoch.
  int64_t now_unix_seconds;
  // Numeric property holding deletion costs, or NULL.
  const char *custom_weight_key;
  // 0 keeps the library default.
  size_t max_matches;
  // 0 keeps the library default.
  size_t max_nodes;
} PgrOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or NULL. Valid until
// the next failing call on the same thread.
const char *pgr_last_error(void);

// Static description of a status code.
const char *pgr_status_str(enum PgrStatus status);

struct PgrOptions pgr_options_default(void);

// Parses a graph from its JSON encoding.
//
// # Safety
// `json` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
enum PgrStatus pgr_graph_from_json(const char *json, struct PgrGraph **out);

// Serialises a graph to JSON. Free the result with [`pgr_string_free`].
//
// # Safety
// `graph` must be NULL or a live handle; `out` must be NULL or writable.
enum PgrStatus pgr_graph_to_json(const struct PgrGraph *graph, char **out);

// # Safety
// `graph` must be NULL or a handle not yet freed.
void pgr_graph_free(struct PgrGraph *graph);

// Parses constraint text.
//
// # Safety
// `source` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
enum PgrStatus pgr_constraints_parse(const char *source, struct PgrConstraints **out);

// Number of constraints in the list, or 0 for NULL.
//
// # Safety
// `constraints` must be NULL or a live handle.
size_t pgr_constraints_len(const struct PgrConstraints *constraints);

// # Safety
// `constraints` must be NULL or a handle not yet freed.
void pgr_constraints_free(struct PgrConstraints *constraints);

// Runs detection and repair. `options` may be NULL for defaults.
//
// # Safety
// Handles must be NULL or live; `options` must be NULL or point to a valid
// struct; `out` must be NULL or writable.
enum PgrStatus pgr_repair(const struct PgrGraph *graph,
                          const struct PgrConstraints *constraints,
                          const struct PgrOptions *options,
                          struct PgrReport **out);

// The report as JSON. Owned by the report.
//
// # Safety
// `report` must be NULL or a live handle.
const char *pgr_report_json(const struct PgrReport *report);

// The repaired graph as JSON. Owned by the report.
//
// # Safety
// `report` must be NULL or a live handle.
const char *pgr_report_graph_json(const struct PgrReport *report);

// Total weight of the deletions.
//
// # Safety
// `report` must be NULL or a live handle.
double pgr_report_total_weight(const struct PgrReport *report);

// True when the repair satisfies every constraint, is not approximate and
// was not found to be non-maximal.
//
// # Safety
// `report` must be NULL or a live handle.
bool pgr_report_is_exact(const struct PgrReport *report);

// # Safety
// `report` must be NULL or a handle not yet freed.
void pgr_report_free(struct PgrReport *report);

// Releases a string returned by [`pgr_graph_to_json`].
//
// # Safety
// `s` must be NULL or a string from this library not yet freed.
void pgr_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PGREPAIR_H */
