#ifndef WEDCS_H
#define WEDCS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum WedcsStatus {
  WEDCS_STATUS_OK = 0,
  WEDCS_STATUS_NULL_POINTER = 1,
  WEDCS_STATUS_INVALID_ARGUMENT = 2,
  WEDCS_STATUS_PARSE = 3,
  /**
   * Input violates a documented precondition (e.g. too many parallel edges).
   */
  WEDCS_STATUS_PRECONDITION = 4,
  /**
   * The exact oracle ran out of its node budget.
   */
  WEDCS_STATUS_ORACLE_BUDGET = 5,
  WEDCS_STATUS_IO = 6,
  /**
   * A Rust panic was caught at the boundary.
   */
  WEDCS_STATUS_PANIC = 7,
} WedcsStatus;

/**
 * A multigraph together with its vertex capacities.
 */
typedef struct WedcsGraph WedcsGraph;

/**
 * An edge subset of a graph, with its weighted degrees.
 */
typedef struct WedcsSubgraph WedcsSubgraph;

/**
 * Sparsifier parameters; epsilon is `epsilon_num / epsilon_den`.
 */
typedef struct WedcsParams {
  uint32_t w_cap;
  int64_t epsilon_num;
  int64_t epsilon_den;
  uint64_t beta;
  uint64_t beta_minus;
} WedcsParams;

/**
 * Summary of one stream run.
 */
typedef struct WedcsStreamResult {
  uint64_t result_weight;
  size_t h_size;
  size_t underfull_collected;
  size_t phase1_edges_consumed;
  size_t peak_stored_edges;
  uint64_t replacements;
  /**
   * 0 none, 1 small output, 2 alpha zero.
   */
  uint32_t fallback;
  /**
   * 0 exact, 1 greedy.
   */
  uint32_t extraction;
} WedcsStreamResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *wedcs_version(void);

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call into the library from the same thread.
 */
const char *wedcs_last_error(void);

/**
 * Parses a graph in the text format (`g n m W`, `b v b_v`, `e u v w`).
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum WedcsStatus wedcs_graph_parse(const char *text, struct WedcsGraph **out);

/**
 * Reads a graph file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum WedcsStatus wedcs_graph_load(const char *path, struct WedcsGraph **out);

/**
 * Builds a graph from parallel arrays of endpoints and weights. `caps` may
 * be null for unit capacities, otherwise it holds `n` entries.
 *
 * # Safety
 * Each non-null array must hold the stated number of elements.
 */
enum WedcsStatus wedcs_graph_from_edges(size_t n,
                                        uint32_t w_cap,
                                        const uint32_t *us,
                                        const uint32_t *vs,
                                        const uint32_t *ws,
                                        size_t m,
                                        const uint32_t *caps,
                                        struct WedcsGraph **out);

/**
 * Releases a graph. Null is ignored.
 *
 * # Safety
 * `graph` must come from this library and not be used afterwards.
 */
void wedcs_graph_free(struct WedcsGraph *graph);

/**
 * Number of vertices, 0 for null.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t wedcs_graph_vertex_count(const struct WedcsGraph *graph);

/**
 * Number of edges, 0 for null.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t wedcs_graph_edge_count(const struct WedcsGraph *graph);

/**
 * Builds a sparsifier by local search from the empty subgraph.
 *
 * # Safety
 * `graph` and `params` must be live, `out` a valid pointer.
 */
enum WedcsStatus wedcs_build_edcs(const struct WedcsGraph *graph,
                                  const struct WedcsParams *params,
                                  struct WedcsSubgraph **out);

/**
 * Number of edges in a subgraph, 0 for null.
 *
 * # Safety
 * `sub` must be null or a live handle.
 */
size_t wedcs_subgraph_edge_count(const struct WedcsSubgraph *sub);

/**
 * Total weight of a subgraph, 0 for null.
 *
 * # Safety
 * `sub` must be null or a live handle.
 */
uint64_t wedcs_subgraph_weight(const struct WedcsSubgraph *sub);

/**
 * Copies up to `cap` edge ids, ascending, into `buf`; `written` receives the
 * number copied. Fails with `InvalidArgument` if `cap` is too small.
 *
 * # Safety
 * `buf` must have room for `cap` ids; `written` must be valid.
 */
enum WedcsStatus wedcs_subgraph_edges(const struct WedcsSubgraph *sub,
                                      uint32_t *buf,
                                      size_t cap,
                                      size_t *written);

/**
 * Weighted degree of vertex `v` inside the subgraph.
 *
 * # Safety
 * `sub` must be live and `out` valid.
 */
enum WedcsStatus wedcs_subgraph_weighted_degree(const struct WedcsSubgraph *sub,
                                                size_t v,
                                                uint64_t *out);

/**
 * Releases a subgraph. Null is ignored.
 *
 * # Safety
 * `sub` must come from this library and not be used afterwards.
 */
void wedcs_subgraph_free(struct WedcsSubgraph *sub);

/**
 * Counts the edges of `ids` breaking the upper bound and the edges outside
 * breaking the lower bound.
 *
 * # Safety
 * `ids` must hold `len` entries; the other pointers must be valid.
 */
enum WedcsStatus wedcs_validate(const struct WedcsGraph *graph,
                                const uint32_t *ids,
                                size_t len,
                                const struct WedcsParams *params,
                                size_t *upper_violations,
                                size_t *lower_violations);

/**
 * Exact maximum-weight b-matching. Fails with `OracleBudget` when the
 * search exceeds `budget` nodes.
 *
 * # Safety
 * `graph` must be live, `out` valid.
 */
enum WedcsStatus wedcs_max_weight_b_matching(const struct WedcsGraph *graph,
                                             uint64_t budget,
                                             struct WedcsSubgraph **out);

/**
 * One seeded stream run. `variant` is 1 or 3; `controller` non-zero runs
 * behind the small-output fallback.
 *
 * # Safety
 * `graph`, `params` and `out` must be valid.
 */
enum WedcsStatus wedcs_stream_run(const struct WedcsGraph *graph,
                                  const struct WedcsParams *params,
                                  uint64_t seed,
                                  uint32_t variant,
                                  int32_t controller,
                                  uint64_t budget,
                                  struct WedcsStreamResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WEDCS_H */
