#ifndef BOOLPERC_H
#define BOOLPERC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BpStatus {
  BP_STATUS_OK = 0,
  BP_STATUS_NULL_POINTER = 1,
  BP_STATUS_INVALID_UTF8 = 2,
  BP_STATUS_PARSE = 3,
  BP_STATUS_DOMAIN = 4,
  BP_STATUS_CONFIG = 5,
  BP_STATUS_SAMPLING = 6,
  BP_STATUS_GEOMETRY = 7,
  BP_STATUS_INTERNAL = 8,
} BpStatus;

typedef struct BpLaw BpLaw;

typedef struct BpSample BpSample;

typedef struct BpSpace BpSpace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread; empty after a success.
 The pointer stays valid until the next `bp_*` call on the same thread.
 */
const char *bp_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *bp_version(void);

/*
 # Safety
 `s` must be null or a string returned by this library.
 */
void bp_string_free(char *s);

/*
 Builds a space from a JSON descriptor such as `{"kind":"dyadic"}`.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum BpStatus bp_space_from_json(const char *json, struct BpSpace **out_space);

/*
 # Safety
 `space` must be null or a handle from `bp_space_from_json`.
 */
void bp_space_free(struct BpSpace *space);

/*
 Writes the descriptor (`kind`, `s`, `c_v`, `sigma`, ...) as JSON.

 # Safety
 Pointers must be valid; the returned string is freed with `bp_string_free`.
 */
enum BpStatus bp_space_descriptor(const struct BpSpace *space, char **out_json);

/*
 JSON of the space's reference point.

 # Safety
 Pointers must be valid; the returned string is freed with `bp_string_free`.
 */
enum BpStatus bp_space_origin(const struct BpSpace *space, char **out_json);

/*
 Distance between two JSON points.

 # Safety
 Pointers must be valid.
 */
enum BpStatus bp_space_distance(const struct BpSpace *space,
                                const char *p_json,
                                const char *q_json,
                                double *out_distance);

/*
 Certified interval `[lower, upper]` for `μ(B(x, r))`.

 # Safety
 Pointers must be valid.
 */
enum BpStatus bp_space_ball_measure(const struct BpSpace *space,
                                    const char *x_json,
                                    double r,
                                    double *out_lower,
                                    double *out_upper);

/*
 Builds a radius law from JSON such as `{"kind":"pareto","a":3}`.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum BpStatus bp_law_from_json(const char *json, struct BpLaw **out_law);

/*
 # Safety
 `law` must be null or a handle from `bp_law_from_json`.
 */
void bp_law_free(struct BpLaw *law);

/*
 `∫_{(r,∞)} R^s ρ(dR)`; `INFINITY` when it diverges.

 # Safety
 Pointers must be valid.
 */
enum BpStatus bp_law_tail_moment(const struct BpLaw *law, double s, double r, double *out_value);

/*
 One realization around the origin with window radius `w` and halo
 `halo_factor · w`, drawn from stream `(seed, 0)`.

 # Safety
 Pointers must be valid.
 */
enum BpStatus bp_sample_new(const struct BpSpace *space,
                            const struct BpLaw *law,
                            double lambda,
                            double window_radius,
                            double halo_factor,
                            uint64_t seed,
                            struct BpSample **out_sample);

/*
 Reads a sample written by `bp_sample_to_json`.

 # Safety
 Pointers must be valid.
 */
enum BpStatus bp_sample_from_json(const char *json, struct BpSample **out_sample);

/*
 # Safety
 `sample` must be null or a handle from this library.
 */
void bp_sample_free(struct BpSample *sample);

/*
 # Safety
 Pointers must be valid.
 */
enum BpStatus bp_sample_germ_count(const struct BpSample *sample, size_t *out_count);

/*
 # Safety
 Pointers must be valid; the returned string is freed with `bp_string_free`.
 */
enum BpStatus bp_sample_to_json(const struct BpSample *sample, char **out_json);

/*
 Cluster report of `anchor` as JSON (`m_value`, `censored`, ...).

 # Safety
 Pointers must be valid; the returned string is freed with `bp_string_free`.
 */
enum BpStatus bp_sample_cluster_report(const struct BpSample *sample,
                                       const char *anchor_json,
                                       char **out_json);

/*
 `1 - exp(-λ ∫_{(r,∞)} μ(B(x,R)) ρ(dR))` on an ultrametric space.

 # Safety
 Pointers must be valid.
 */
enum BpStatus bp_ultrametric_tail(const struct BpSpace *space,
                                  const struct BpLaw *law,
                                  double lambda,
                                  double r,
                                  double *out_value);

/*
 Subcritical threshold for net constant `c1`; writes 0 when the
 `s`-moment diverges and no subcritical phase exists.

 # Safety
 Pointers must be valid.
 */
enum BpStatus bp_lambda0(const struct BpSpace *space,
                         const struct BpLaw *law,
                         double c1,
                         double *out_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BOOLPERC_H */
