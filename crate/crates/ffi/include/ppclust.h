#ifndef PPCLUST_H
#define PPCLUST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes shared by every function.
typedef enum PpclustStatus {
  PPCLUST_STATUS_OK = 0,
  PPCLUST_STATUS_NULL_POINTER = 1,
  PPCLUST_STATUS_INVALID_ARGUMENT = 2,
  PPCLUST_STATUS_PARSE = 3,
  PPCLUST_STATUS_UNSUPPORTED = 4,
  PPCLUST_STATUS_NUMERIC = 5,
  PPCLUST_STATUS_IO = 6,
  PPCLUST_STATUS_BUFFER_TOO_SMALL = 7,
  PPCLUST_STATUS_PANIC = 8,
} PpclustStatus;

// Outcome of a convex-order check.
typedef enum PpclustCxVerdict {
  PPCLUST_CX_VERDICT_HOLDS = 0,
  PPCLUST_CX_VERDICT_FAILS = 1,
  PPCLUST_CX_VERDICT_MEANS_DIFFER = 2,
} PpclustCxVerdict;

typedef struct PpclustGenerator PpclustGenerator;

typedef struct PpclustGraph PpclustGraph;

typedef struct PpclustPattern PpclustPattern;

typedef struct PpclustWindow PpclustWindow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread; never null. The
// pointer stays valid until the next failing call on the same thread.
const char *ppclust_last_error(void);

// Library version as a static NUL-terminated string.
const char *ppclust_version(void);

// Axis-aligned box `[lower, upper)` of dimension `dim`; `periodic` != 0
// selects the torus metric.
//
// # Safety
// `lower` and `upper` must point to `dim` doubles; `out` must be writable.
enum PpclustStatus ppclust_window_new(size_t dim,
                                      const double *lower,
                                      const double *upper,
                                      int periodic,
                                      struct PpclustWindow **out);

// # Safety
// `w` must come from `ppclust_window_new` (or be null) and not be used afterwards.
void ppclust_window_free(struct PpclustWindow *w);

// Parses a generator description such as `poisson(intensity=1)`.
//
// # Safety
// `spec` must be a NUL-terminated string; `out` must be writable.
enum PpclustStatus ppclust_generator_parse(const char *spec, struct PpclustGenerator **out);

// Expected points per unit volume.
//
// # Safety
// `g` must be a live generator handle and `w` a live window handle.
enum PpclustStatus ppclust_generator_intensity(const struct PpclustGenerator *g,
                                               const struct PpclustWindow *w,
                                               double *out);

// # Safety
// `g` must come from `ppclust_generator_parse` (or be null) and not be used afterwards.
void ppclust_generator_free(struct PpclustGenerator *g);

// Draws one pattern; identical `(generator, window, seed)` give identical patterns.
//
// # Safety
// Handles must be live; `out` must be writable.
enum PpclustStatus ppclust_sample(const struct PpclustGenerator *g,
                                  const struct PpclustWindow *w,
                                  uint64_t seed,
                                  struct PpclustPattern **out);

// Builds a pattern from `n` points stored row-major in `coords` (`n * dim` doubles).
//
// # Safety
// `w` must be live; `coords` must point to `n * dim` doubles; `out` writable.
enum PpclustStatus ppclust_pattern_new(const struct PpclustWindow *w,
                                       const double *coords,
                                       size_t n,
                                       struct PpclustPattern **out);

// Number of points.
//
// # Safety
// `p` must be a live pattern handle.
enum PpclustStatus ppclust_pattern_len(const struct PpclustPattern *p, size_t *out);

// Copies the coordinates (row-major, `len * dim` doubles) into `buf`.
// `*written` receives the number of doubles needed; when `capacity` is too
// small nothing is copied and `BufferTooSmall` is returned.
//
// # Safety
// `p` must be live; `buf` must have room for `capacity` doubles; `written` writable.
enum PpclustStatus ppclust_pattern_coords(const struct PpclustPattern *p,
                                          double *buf,
                                          size_t capacity,
                                          size_t *written);

// # Safety
// `p` must come from this library (or be null) and not be used afterwards.
void ppclust_pattern_free(struct PpclustPattern *p);

// Gilbert graph: points within distance `2 r` are joined.
//
// # Safety
// `p` must be live; `out` writable.
enum PpclustStatus ppclust_gilbert_graph(const struct PpclustPattern *p,
                                         double r,
                                         struct PpclustGraph **out);

// Vertex and edge counts.
//
// # Safety
// `g` must be live; both outputs writable.
enum PpclustStatus ppclust_graph_size(const struct PpclustGraph *g,
                                      size_t *vertices,
                                      size_t *edges);

// Copies the sorted edge list as `2 * edges` vertex indices (`i < j` pairs).
//
// # Safety
// `g` must be live; `buf` must have room for `capacity` values; `written` writable.
enum PpclustStatus ppclust_graph_edges(const struct PpclustGraph *g,
                                       uint32_t *buf,
                                       size_t capacity,
                                       size_t *written);

// # Safety
// `g` must come from this library (or be null) and not be used afterwards.
void ppclust_graph_free(struct PpclustGraph *g);

// Monte Carlo left-right crossing probability at radius `r`.
//
// # Safety
// Handles must be live; outputs writable.
enum PpclustStatus ppclust_crossing_probability(const struct PpclustGenerator *g,
                                                const struct PpclustWindow *w,
                                                double r,
                                                size_t replications,
                                                uint64_t seed,
                                                double *value,
                                                double *std_error);

// Ripley's K at each of `n` increasing radii (periodic windows only).
//
// # Safety
// Handles must be live; `radii`, `values` and `std_errors` must hold `n` doubles.
enum PpclustStatus ppclust_ripley_k(const struct PpclustGenerator *g,
                                    const struct PpclustWindow *w,
                                    const double *radii,
                                    size_t n,
                                    size_t replications,
                                    uint64_t seed,
                                    double *values,
                                    double *std_errors);

// Convex-order check `d1 <=cx d2` for two count laws given as text, e.g.
// `binomial(n=4, p=0.25)` and `poisson(lambda=1)`. `detail` receives the
// minimum slack, the failing threshold, or the first mean.
//
// # Safety
// Strings must be NUL-terminated; outputs writable.
enum PpclustStatus ppclust_check_cx(const char *d1,
                                    const char *d2,
                                    enum PpclustCxVerdict *verdict,
                                    double *detail);

// Betti numbers of the Čech complex at radius `r` built to `max_dim`.
// `*written` receives the count of numbers; `BufferTooSmall` if it exceeds `capacity`.
//
// # Safety
// `p` must be live; `buf` must have room for `capacity` values; `written` writable.
enum PpclustStatus ppclust_cech_betti(const struct PpclustPattern *p,
                                      double r,
                                      size_t max_dim,
                                      uint64_t *buf,
                                      size_t capacity,
                                      size_t *written);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PPCLUST_H */
