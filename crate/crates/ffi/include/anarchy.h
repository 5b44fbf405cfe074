#ifndef ANARCHY_H
#define ANARCHY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AnarchyStatus {
  ANARCHY_STATUS_OK = 0,
  ANARCHY_STATUS_NULL_POINTER = 1,
  ANARCHY_STATUS_STRUCTURAL = 2,
  ANARCHY_STATUS_INFEASIBLE = 3,
  ANARCHY_STATUS_PRECONDITION = 4,
  ANARCHY_STATUS_SIZE_GUARD = 5,
  ANARCHY_STATUS_PARSE = 6,
  ANARCHY_STATUS_IO = 7,
  ANARCHY_STATUS_BUFFER_TOO_SMALL = 8,
  ANARCHY_STATUS_PANIC = 9,
} AnarchyStatus;

/**
 * Capacitated flow instance handle.
 */
typedef struct AnarchyFlow AnarchyFlow;

/**
 * Complete digraph handle for max-TSP.
 */
typedef struct AnarchyGraph AnarchyGraph;

/**
 * Packing instance handle.
 */
typedef struct AnarchyPacking AnarchyPacking;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *anarchy_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void anarchy_string_free(char *s);

/**
 * `max(1, mu) / lambda` for rationals given as `"p/q"`.
 *
 * # Safety
 * Inputs must be nul-terminated strings; `out` must be writable.
 */
enum AnarchyStatus anarchy_poa_from_smoothness(const char *lambda, const char *mu, char **out);

/**
 * Half-value smoothness after an `alpha`-approximate oblivious rounding;
 * writes the composed lambda and mu.
 *
 * # Safety
 * Inputs must be nul-terminated strings; outputs must be writable.
 */
enum AnarchyStatus anarchy_compose_smoothness(const char *lambda,
                                              const char *mu,
                                              const char *alpha,
                                              char **lambda_out,
                                              char **mu_out);

/**
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum AnarchyStatus anarchy_packing_from_json(const char *json, struct AnarchyPacking **out);

/**
 * # Safety
 * `h` must be null or a handle from `anarchy_packing_from_json`.
 */
void anarchy_packing_free(struct AnarchyPacking *h);

/**
 * Fractional optimum `W^v(c)` at truthful bids.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum AnarchyStatus anarchy_packing_lp_welfare(const struct AnarchyPacking *h, char **out);

/**
 * Social-cost bound at truthful bids with `x-bar` the LP optimum; writes 1
 * to `holds` when it holds and 0 otherwise.
 *
 * # Safety
 * `h` must be a live handle; `holds` must be writable.
 */
enum AnarchyStatus anarchy_packing_check_social_cost(const struct AnarchyPacking *h,
                                                     int32_t *holds);

/**
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum AnarchyStatus anarchy_graph_from_json(const char *json, struct AnarchyGraph **out);

/**
 * # Safety
 * `h` must be null or a handle from `anarchy_graph_from_json`.
 */
void anarchy_graph_free(struct AnarchyGraph *h);

/**
 * # Safety
 * `h` must be null or a live handle.
 */
size_t anarchy_graph_vertices(const struct AnarchyGraph *h);

/**
 * Maximum-weight cycle cover: writes `succ` (n entries) and the weight.
 *
 * # Safety
 * `h` must be a live handle; `succ` must hold `len` entries; `weight` must
 * be writable.
 */
enum AnarchyStatus anarchy_graph_cycle_cover(const struct AnarchyGraph *h,
                                             size_t *succ,
                                             size_t len,
                                             char **weight);

/**
 * Random-drop rounding of the cycle cover `succ` into a tour written to
 * `order` (n entries). Never reads edge weights.
 *
 * # Safety
 * `succ` must hold `n` entries and `order` must hold `len` entries.
 */
enum AnarchyStatus anarchy_fisher_round(const size_t *succ,
                                        size_t n,
                                        uint64_t seed,
                                        size_t *order,
                                        size_t len);

/**
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum AnarchyStatus anarchy_flow_from_json(const char *json, struct AnarchyFlow **out);

/**
 * # Safety
 * `h` must be null or a handle from `anarchy_flow_from_json`.
 */
void anarchy_flow_free(struct AnarchyFlow *h);

/**
 * Greedy fractional flow welfare at truthful bids.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum AnarchyStatus anarchy_flow_greedy_welfare(const struct AnarchyFlow *h, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANARCHY_H */
