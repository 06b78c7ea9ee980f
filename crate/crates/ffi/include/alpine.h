/* SPDX-License-Identifier: Apache-2.0 */

#ifndef ALPINE_H
#define ALPINE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AlpineStatus {
  ALPINE_STATUS_OK = 0,
  ALPINE_STATUS_NULL_POINTER = 1,
  ALPINE_STATUS_INVALID_ARGUMENT = 2,
  ALPINE_STATUS_PARSE = 3,
  ALPINE_STATUS_IO = 4,
  ALPINE_STATUS_INTERNAL = 5,
  ALPINE_STATUS_PANIC = 6,
} AlpineStatus;

/*
 Class table and clustering parameters.
 */
typedef struct AlpineConfig AlpineConfig;

/*
 Accumulates panoptic statistics over scans.
 */
typedef struct AlpineEvaluator AlpineEvaluator;

/*
 Minimum-area box. `length >= width`; `yaw` in `[0, pi)` is the
 direction of the long side.
 */
typedef struct AlpineBox {
  double center_x;
  double center_y;
  double length;
  double width;
  double yaw;
} AlpineBox;

/*
 Aggregate scores as fractions in `[0, 1]`; NaN when undefined.
 */
typedef struct AlpineSummary {
  double pq;
  double pq_dagger;
  double sq;
  double rq;
  double miou;
  double pq_things;
  double pq_stuff;
} AlpineSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null after a
 successful call. Valid until the next call on the same thread.
 */
const char *alpine_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *alpine_version(void);

/*
 Built-in SemanticKITTI table.

 # Safety
 `out` must be valid for one write.
 */
enum AlpineStatus alpine_config_semantickitti(struct AlpineConfig **out);

/*
 Built-in nuScenes table.

 # Safety
 `out` must be valid for one write.
 */
enum AlpineStatus alpine_config_nuscenes(struct AlpineConfig **out);

/*
 Parses a configuration from text.

 # Safety
 `text` must be a NUL-terminated string; `out` valid for one write.
 */
enum AlpineStatus alpine_config_parse(const char *text, struct AlpineConfig **out);

/*
 Loads a configuration file.

 # Safety
 `path` must be a NUL-terminated string; `out` valid for one write.
 */
enum AlpineStatus alpine_config_from_file(const char *path, struct AlpineConfig **out);

/*
 Overrides the neighbor count, split margin and dichotomy floor.

 # Safety
 `config` must be a live handle.
 */
enum AlpineStatus alpine_config_set_params(struct AlpineConfig *config,
                                           size_t k,
                                           double margin,
                                           double epsilon);

/*
 Maps `n` raw dataset labels to class ids through the table's remap.

 # Safety
 `raw` and `out` must be valid for `n` elements.
 */
enum AlpineStatus alpine_config_map_labels(const struct AlpineConfig *config,
                                           const uint32_t *raw,
                                           size_t n,
                                           uint32_t *out);

/*
 # Safety
 `config` must be null or a handle not yet freed.
 */
void alpine_config_free(struct AlpineConfig *config);

/*
 Clusters one scan. `xyz` holds `3 * n` floats, `semantic` and
 `instance_out` hold `n` labels. Stuff points get instance 0.

 # Safety
 Pointers must be valid for the stated lengths.
 */
enum AlpineStatus alpine_cluster_scan(const struct AlpineConfig *config,
                                      const float *xyz,
                                      const uint32_t *semantic,
                                      size_t n,
                                      int enable_split,
                                      uint32_t *instance_out);

/*
 Minimum-area oriented box of `n` points given as `2 * n` doubles.

 # Safety
 `xy` must be valid for `2 * n` reads and `out` for one write.
 */
enum AlpineStatus alpine_fit_min_area_box(const double *xy, size_t n, struct AlpineBox *out);

/*
 New evaluator holding a copy of `config`.

 # Safety
 `config` must be a live handle; `out` valid for one write.
 */
enum AlpineStatus alpine_evaluator_new(const struct AlpineConfig *config,
                                       struct AlpineEvaluator **out);

/*
 Adds one scan of `n` points.

 # Safety
 `evaluator` must be a live handle and the arrays valid for `n` reads.
 */
enum AlpineStatus alpine_evaluator_add(struct AlpineEvaluator *evaluator,
                                       const uint32_t *pred_semantic,
                                       const uint32_t *pred_instance,
                                       const uint32_t *gt_semantic,
                                       const uint32_t *gt_instance,
                                       size_t n);

/*
 Aggregate scores over every scan added so far.

 # Safety
 `evaluator` must be a live handle; `out` valid for one write.
 */
enum AlpineStatus alpine_evaluator_summary(const struct AlpineEvaluator *evaluator,
                                           struct AlpineSummary *out);

/*
 # Safety
 `evaluator` must be null or a handle not yet freed.
 */
void alpine_evaluator_free(struct AlpineEvaluator *evaluator);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ALPINE_H */
