#ifndef OPLAB_H
#define OPLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OplabStatus {
  OPLAB_STATUS_OK = 0,
  OPLAB_STATUS_NULL_POINTER = 1,
  OPLAB_STATUS_INVALID_ARGUMENT = 2,
  OPLAB_STATUS_SINGULAR_TRANSFORMATION = 3,
  OPLAB_STATUS_THEOREM_VIOLATION = 4,
  OPLAB_STATUS_PARSE = 5,
  OPLAB_STATUS_INTERNAL = 6,
} OplabStatus;

// A map on atom indices.
typedef struct OplabMap OplabMap;

// An N-function.
typedef struct OplabOrlicz OplabOrlicz;

// The result of `oplab_analyze`, with its JSON rendering cached.
typedef struct OplabReport OplabReport;

// An atomic measure space with exact rational weights.
typedef struct OplabSpace OplabSpace;

// Scalar summary of a report. Tri-state fields use -1 for "not available"
// (the transformation is singular).
typedef struct OplabFlags {
  bool nonsingular;
  bool measure_preserving;
  bool expansive;
  int8_t injective;
  int8_t essentially_surjective;
  int64_t kernel_dimension;
  int64_t ascent;
} OplabFlags;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *oplab_last_error_message(void);

// Builds a space with weights `numerators[i] / denominators[i]`.
//
// # Safety
// Both arrays must hold `len` elements; `out` must be writable.
enum OplabStatus oplab_space_new(const int64_t *numerators,
                                 const uint64_t *denominators,
                                 size_t len,
                                 struct OplabSpace **out);

// # Safety
// `space` must come from `oplab_space_new` or be NULL.
void oplab_space_free(struct OplabSpace *space);

// Number of atoms, or 0 for NULL.
//
// # Safety
// `space` must be a live handle or NULL.
size_t oplab_space_len(const struct OplabSpace *space);

// Builds the map sending atom `i` to atom `images[i]`.
//
// # Safety
// `images` must hold `len` elements; `out` must be writable.
enum OplabStatus oplab_map_new(const size_t *images, size_t len, struct OplabMap **out);

// # Safety
// `map` must come from `oplab_map_new` or be NULL.
void oplab_map_free(struct OplabMap *map);

// # Safety
// `out` must be writable.
enum OplabStatus oplab_orlicz_power(double p, struct OplabOrlicz **out);

// # Safety
// `out` must be writable.
enum OplabStatus oplab_orlicz_power_log(double p, struct OplabOrlicz **out);

// # Safety
// `out` must be writable.
enum OplabStatus oplab_orlicz_exp_minus(struct OplabOrlicz **out);

// # Safety
// `phi` must come from an `oplab_orlicz_*` constructor or be NULL.
void oplab_orlicz_free(struct OplabOrlicz *phi);

// Luxemburg norm of `values` against sample `weights`.
//
// # Safety
// `values` and `weights` must hold `len` elements; `out` must be writable.
enum OplabStatus oplab_luxemburg_norm(const struct OplabOrlicz *phi,
                                      const double *values,
                                      const double *weights,
                                      size_t len,
                                      double tol,
                                      double *out);

// Luxemburg norm of `values` over the atoms of `space`.
//
// # Safety
// `values` must hold one element per atom; `out` must be writable.
enum OplabStatus oplab_luxemburg_norm_atomic(const struct OplabOrlicz *phi,
                                             const struct OplabSpace *space,
                                             const double *values,
                                             size_t len,
                                             double tol,
                                             double *out);

// Runs the full analysis of `map` on `space`.
//
// # Safety
// Handles must be live; `out` must be writable.
enum OplabStatus oplab_analyze(const struct OplabMap *map,
                               const struct OplabSpace *space,
                               struct OplabReport **out);

// # Safety
// `report` must be live; `out` must be writable.
enum OplabStatus oplab_report_flags(const struct OplabReport *report, struct OplabFlags *out);

// JSON report (schema 1). Owned by `report`; valid until it is freed.
//
// # Safety
// `report` must be live or NULL.
const char *oplab_report_json(const struct OplabReport *report);

// # Safety
// `report` must come from `oplab_analyze` or be NULL.
void oplab_report_free(struct OplabReport *report);

// Parses an atomic scenario document and writes its JSON report to `*out`.
// Release the string with `oplab_string_free`.
//
// # Safety
// `scenario_json` must be a NUL-terminated string; `out` must be writable.
enum OplabStatus oplab_analyze_scenario_json(const char *scenario_json, char **out);

// # Safety
// `s` must come from this library or be NULL.
void oplab_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPLAB_H */
