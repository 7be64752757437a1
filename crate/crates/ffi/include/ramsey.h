#ifndef RAMSEY_H
#define RAMSEY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum RamseyStatus {
  RAMSEY_STATUS_OK = 0,
  RAMSEY_STATUS_NULL_POINTER = 1,
  RAMSEY_STATUS_INVALID_ARGUMENT = 2,
  RAMSEY_STATUS_PARSE = 3,
  RAMSEY_STATUS_UNKNOWN_POINT = 4,
  RAMSEY_STATUS_OUT_OF_RANGE = 5,
  RAMSEY_STATUS_IO = 6,
  // A check in an evaluation report failed.
  RAMSEY_STATUS_CHECK_FAILED = 7,
  RAMSEY_STATUS_INTERNAL = 8,
} RamseyStatus;

typedef struct RamseyMetric RamseyMetric;

typedef struct RamseyOracle RamseyOracle;

typedef struct RamseyRanking RamseyRanking;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static nul-terminated string.
const char *ramsey_version(void);

// Message of the last failed call on this thread, or null. Valid until the
// next call into the library on the same thread.
const char *ramsey_last_error(void);

// # Safety
// `s` is null or a string returned by this library, not yet freed.
void ramsey_string_free(char *s);

// Generates a metric; `kind` is `euclidean[:dim]`, `graph[:density]`,
// `equilateral` or `uniform`.
//
// # Safety
// `kind` is a nul-terminated string and `out` is writable.
enum RamseyStatus ramsey_metric_generate(const char *kind,
                                         size_t n,
                                         uint64_t seed,
                                         struct RamseyMetric **out_metric);

// Builds a metric from a row-major `n × n` matrix, validating it.
//
// # Safety
// `dist` points to `n * n` readable doubles and `out` is writable.
enum RamseyStatus ramsey_metric_from_matrix(size_t n,
                                            const double *dist,
                                            struct RamseyMetric **out_metric);

// Parses a metric in the text file format.
//
// # Safety
// `src` is a nul-terminated string and `out` is writable.
enum RamseyStatus ramsey_metric_parse(const char *src, struct RamseyMetric **out_metric);

// Number of points, or 0 for a null handle.
//
// # Safety
// `m` is null or a live metric handle.
size_t ramsey_metric_len(const struct RamseyMetric *m);

// # Safety
// `m` is a live metric handle and `out` is writable.
enum RamseyStatus ramsey_metric_distance(const struct RamseyMetric *m,
                                         size_t x,
                                         size_t y,
                                         double *out_d);

// Serializes a metric; release the result with [`ramsey_string_free`].
//
// # Safety
// `m` is a live metric handle and `out` is writable.
enum RamseyStatus ramsey_metric_to_text(const struct RamseyMetric *m, char **out_text);

// # Safety
// `m` is null or a metric handle not yet freed.
void ramsey_metric_free(struct RamseyMetric *m);

// Builds a distance oracle with stretch at most `128k`; `k > 1`.
//
// # Safety
// `m` is a live metric handle and `out` is writable.
enum RamseyStatus ramsey_oracle_build(const struct RamseyMetric *m,
                                      double k,
                                      uint64_t seed,
                                      struct RamseyOracle **out_oracle);

// Distance estimate `E` with `d <= E <= 128k·d`. When `out_accesses` is
// non-null it receives the number of stored cells the query read.
//
// # Safety
// `o` is a live oracle handle, `out_e` is writable and `out_accesses` is
// null or writable.
enum RamseyStatus ramsey_oracle_query(const struct RamseyOracle *o,
                                      size_t x,
                                      size_t y,
                                      double *out_e,
                                      uint32_t *out_accesses);

// # Safety
// `o` is null or a live oracle handle.
size_t ramsey_oracle_len(const struct RamseyOracle *o);

// # Safety
// `o` is a live oracle handle and `out` is writable.
enum RamseyStatus ramsey_oracle_to_text(const struct RamseyOracle *o, char **out_text);

// # Safety
// `src` is a nul-terminated string and `out` is writable.
enum RamseyStatus ramsey_oracle_parse(const char *src, struct RamseyOracle **out_oracle);

// # Safety
// `o` is null or an oracle handle not yet freed.
void ramsey_oracle_free(struct RamseyOracle *o);

// Builds a proximity ranking index; `k > 1`.
//
// # Safety
// `m` is a live metric handle and `out` is writable.
enum RamseyStatus ramsey_ranking_build(const struct RamseyMetric *m,
                                       double k,
                                       uint64_t seed,
                                       struct RamseyRanking **out_ranking);

// The point at 1-based position `i` of `x`'s ranking.
//
// # Safety
// `r` is a live ranking handle and `out` is writable.
enum RamseyStatus ramsey_ranking_access(const struct RamseyRanking *r,
                                        size_t x,
                                        size_t i,
                                        size_t *out_y);

// The 1-based position of `y` in `x`'s ranking.
//
// # Safety
// `r` is a live ranking handle and `out` is writable.
enum RamseyStatus ramsey_ranking_rank(const struct RamseyRanking *r,
                                      size_t x,
                                      size_t y,
                                      size_t *out_i);

// # Safety
// `r` is null or a live ranking handle.
size_t ramsey_ranking_len(const struct RamseyRanking *r);

// # Safety
// `r` is a live ranking handle and `out` is writable.
enum RamseyStatus ramsey_ranking_to_text(const struct RamseyRanking *r, char **out_text);

// # Safety
// `src` is a nul-terminated string and `out` is writable.
enum RamseyStatus ramsey_ranking_parse(const char *src, struct RamseyRanking **out_ranking);

// # Safety
// `r` is null or a ranking handle not yet freed.
void ramsey_ranking_free(struct RamseyRanking *r);

// Runs an evaluation suite (`all` for every suite). `n`, `k` and
// `trials` override the suite defaults when positive. The report is
// written to `out_report` even when a check fails, in which case the
// status is `CheckFailed`.
//
// # Safety
// `suite` is a nul-terminated string and `out_report` is writable.
enum RamseyStatus ramsey_eval(const char *suite,
                              uint64_t seed,
                              size_t n,
                              double k,
                              size_t trials,
                              char **out_report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RAMSEY_H */
