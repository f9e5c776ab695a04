#ifndef HEADLAND_SMOOTH_H
#define HEADLAND_SMOOTH_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Vertex roles, matching the plan labels.
typedef enum hs_label {
  HS_LABEL_HEADLAND = 0,
  HS_LABEL_LANE = 1,
  HS_LABEL_TRANSITION = 2,
} hs_label;

// Result codes.
typedef enum hs_status {
  HS_STATUS_OK = 0,
  // A required pointer was null.
  HS_STATUS_NULL_POINTER = 1,
  // Invalid input: bad geometry, unknown key, non-UTF-8 text or bad value.
  HS_STATUS_INPUT = 2,
  // File system failure.
  HS_STATUS_IO = 3,
  // A smoothing or solver step failed.
  HS_STATUS_SOLVER = 4,
  // The output buffer is too small; the required size was written.
  HS_STATUS_BUFFER_TOO_SMALL = 5,
  // An internal panic was caught.
  HS_STATUS_PANIC = 6,
} hs_status;

// Opaque run configuration.
typedef struct hs_config hs_config;

// Opaque result of a full pipeline run.
typedef struct hs_run hs_run;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`) and returns the full message length without the NUL.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
uintptr_t hs_last_error(char *buf, uintptr_t len);

// New configuration with the default vehicle and field parameters.
// Release with [`hs_config_free`].
struct hs_config *hs_config_new(void);

// # Safety
// `cfg` must be null or a handle from [`hs_config_new`] not yet freed.
void hs_config_free(struct hs_config *cfg);

// Sets one key, e.g. `"r_dubins_m"` to `"7"`, in user units.
//
// # Safety
// `cfg` must be a live handle; `key` and `value` must be NUL-terminated.
enum hs_status hs_config_set(struct hs_config *cfg, const char *key, const char *value);

// Writes the minimum turning radius in metres to `out`.
//
// # Safety
// `cfg` must be a live handle and `out` writable.
enum hs_status hs_min_turning_radius(const struct hs_config *cfg, double *out);

// Envelope radius of a full-lock turn sampled every `sample_time_s`,
// starting from steering `delta0_rad`.
//
// # Safety
// `cfg` must be a live handle and `out` writable.
enum hs_status hs_envelope_radius(const struct hs_config *cfg,
                                  double sample_time_s,
                                  double delta0_rad,
                                  double *out);

// Runs the full pipeline on a GeoJSON field or CSV contour file and stores
// a new run handle in `*out`. Release it with [`hs_run_free`]. Per-instance
// failures do not fail the call; see [`hs_run_failures`].
//
// # Safety
// `cfg` must be a live handle, `path` NUL-terminated and `out` writable.
enum hs_status hs_run_field_file(const struct hs_config *cfg,
                                 const char *path,
                                 struct hs_run **out);

// Runs the full pipeline on a contour given as `n` interleaved `x, y`
// pairs in metres; headland and lanes are synthesised.
//
// # Safety
// `cfg` must be a live handle, `xy` must point to `2 * n` doubles and `out`
// must be writable.
enum hs_status hs_run_contour(const struct hs_config *cfg,
                              const double *xy,
                              uintptr_t n,
                              struct hs_run **out);

// # Safety
// `run` must be null or a handle from `hs_run_*` not yet freed.
void hs_run_free(struct hs_run *run);

// Number of smoothing instances, or 0 for a null handle.
//
// # Safety
// `run` must be null or a live handle.
uintptr_t hs_run_instances(const struct hs_run *run);

// Number of failed instances, or 0 for a null handle.
//
// # Safety
// `run` must be null or a live handle.
uintptr_t hs_run_failures(const struct hs_run *run);

// Copies the smoothed plan. `*len` holds the capacity of `xy` (in points,
// so `2 * len` doubles) and of `labels` on entry and the plan length on
// return. With too little capacity nothing is copied and
// [`HsStatus::BufferTooSmall`] is returned; passing null buffers is a size
// query. `labels` may be null when not wanted.
//
// # Safety
// `run` must be a live handle and `len` writable; non-null `xy` and
// `labels` must hold the stated capacity.
enum hs_status hs_run_plan(const struct hs_run *run,
                           double *xy,
                           enum hs_label *labels,
                           uintptr_t *len);

// Writes the plan, report, figure and coverage files into `dir`.
//
// # Safety
// `run` must be a live handle and `dir` NUL-terminated.
enum hs_status hs_run_emit(const struct hs_run *run, const char *dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEADLAND_SMOOTH_H */
