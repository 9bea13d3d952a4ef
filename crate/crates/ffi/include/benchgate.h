#ifndef BENCHGATE_H
#define BENCHGATE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BgStatus {
  BG_STATUS_OK = 0,
  BG_STATUS_NULL_POINTER = 1,
  BG_STATUS_INVALID_UTF8 = 2,
  BG_STATUS_IO = 3,
  BG_STATUS_PARSE = 4,
  BG_STATUS_VALIDATION = 5,
  BG_STATUS_INVALID_ARGUMENT = 6,
  BG_STATUS_PANIC = 7,
} BgStatus;

typedef enum BgGraphFormat {
  // Edge CSV for a `.csv` extension, JSON otherwise.
  BG_GRAPH_FORMAT_AUTO = 0,
  BG_GRAPH_FORMAT_JSON = 1,
  BG_GRAPH_FORMAT_EDGE_CSV = 2,
} BgGraphFormat;

// A validated call graph.
typedef struct BgCallGraph BgCallGraph;

// An optimized benchmark suite.
typedef struct BgSuite BgSuite;

// Bootstrap result for one base/variation pair. All values are percent.
typedef struct BgChangeInterval {
  double median_change_pct;
  double ci_low_pct;
  double ci_high_pct;
  // Width of the interval.
  double instability_pct;
  // True when the interval excludes zero.
  bool excludes_zero;
} BgChangeInterval;

// Parameters of the dynamic detection threshold.
typedef struct BgThresholdParams {
  double threshold_factor;
  double min_threshold_pct;
  // Number of trailing instabilities averaged.
  size_t instability_window;
} BgThresholdParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *bg_version(void);

// Message of the last failed call on this thread, or null after a
// successful call.
//
// The pointer stays valid until the next library call on the same thread.
const char *bg_last_error_message(void);

// Loads a call graph from `path`.
//
// # Safety
//
// `path` must be a NUL-terminated string and `out` a valid pointer. On
// success `*out` owns a graph that must be released with
// [`bg_callgraph_free`].
enum BgStatus bg_callgraph_load(const char *path,
                                enum BgGraphFormat format,
                                struct BgCallGraph **out);

// # Safety
//
// `graph` must come from [`bg_callgraph_load`] and not be freed already.
// Null is ignored.
void bg_callgraph_free(struct BgCallGraph *graph);

// # Safety
//
// `graph` must be a live handle and `out` a valid pointer.
enum BgStatus bg_callgraph_node_count(const struct BgCallGraph *graph, size_t *out);

// Writes whether `graph` is an application graph.
//
// # Safety
//
// `graph` must be a live handle and `out` a valid pointer.
enum BgStatus bg_callgraph_is_application(const struct BgCallGraph *graph, bool *out);

// Summed application duration, in seconds, of the nodes `micro` covers.
//
// # Safety
//
// Both graphs must be live handles and `out` a valid pointer.
enum BgStatus bg_reference_impact(const struct BgCallGraph *app,
                                  const struct BgCallGraph *micro,
                                  double *out);

// Greedy suite selection over `n_micros` microbenchmark graphs.
// `top_k` of 0 means no limit.
//
// # Safety
//
// `app` must be a live handle, `micros` must point to `n_micros` live
// handles and `out` must be a valid pointer. On success `*out` owns a suite
// that must be released with [`bg_suite_free`].
enum BgStatus bg_optimize(const struct BgCallGraph *app,
                          const struct BgCallGraph *const *micros,
                          size_t n_micros,
                          size_t min_gain,
                          size_t top_k,
                          struct BgSuite **out);

// # Safety
//
// `suite` must come from [`bg_optimize`] and not be freed already. Null is
// ignored.
void bg_suite_free(struct BgSuite *suite);

// Number of selected benchmarks, or 0 for a null handle.
//
// # Safety
//
// `suite` must be null or a live handle.
size_t bg_suite_len(const struct BgSuite *suite);

// Id of the `index`-th selected benchmark, or null when out of range.
//
// # Safety
//
// `suite` must be null or a live handle. The string is owned by the suite.
const char *bg_suite_benchmark(const struct BgSuite *suite, size_t index);

// Newly covered application nodes of the `index`-th selection step.
//
// # Safety
//
// `suite` must be a live handle and `out` a valid pointer.
enum BgStatus bg_suite_gain(const struct BgSuite *suite, size_t index, size_t *out);

// Fraction of application nodes covered by the selection.
//
// # Safety
//
// `suite` must be a live handle and `out` a valid pointer.
enum BgStatus bg_suite_practical_relevance(const struct BgSuite *suite, double *out);

// Serializes the suite as JSON.
//
// # Safety
//
// `suite` must be a live handle and `out` a valid pointer. The string
// written to `*out` must be released with [`bg_string_free`].
enum BgStatus bg_suite_to_json(const struct BgSuite *suite, char **out);

// # Safety
//
// `s` must be a string returned by this library and not freed already.
// Null is ignored.
void bg_string_free(char *s);

// Percent change of the variation median relative to the base median.
//
// # Safety
//
// `base` and `variation` must point to `n_base` and `n_variation` doubles
// and `out` must be a valid pointer.
enum BgStatus bg_median_change(const double *base,
                               size_t n_base,
                               const double *variation,
                               size_t n_variation,
                               double *out);

// Bootstrap interval of the median change over flat latency lists.
//
// # Safety
//
// `base` and `variation` must point to `n_base` and `n_variation` doubles
// and `out` must be a valid pointer.
enum BgStatus bg_bootstrap_flat(const double *base,
                                size_t n_base,
                                const double *variation,
                                size_t n_variation,
                                size_t samples,
                                double alpha,
                                uint64_t seed,
                                struct BgChangeInterval *out);

// Detection threshold for the next commit given earlier instabilities.
// With no history `initial_pct` applies, never below the minimum.
//
// # Safety
//
// `history` must point to `n_history` doubles and `params` and `out` must
// be valid pointers.
enum BgStatus bg_dynamic_threshold(const double *history,
                                   size_t n_history,
                                   const struct BgThresholdParams *params,
                                   double initial_pct,
                                   double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BENCHGATE_H */
