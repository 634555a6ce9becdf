#ifndef HYPERPATH_H
#define HYPERPATH_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Status codes; the nonzero values below 5 match the CLI exit codes.
typedef enum HpStatus {
  HP_STATUS_OK = 0,
  HP_STATUS_PARSE = 1,
  HP_STATUS_HYPOTHESIS = 2,
  HP_STATUS_VERIFY = 3,
  HP_STATUS_BUDGET = 4,
  HP_STATUS_NULL_ARGUMENT = 5,
  HP_STATUS_INTERNAL = 6,
} HpStatus;

// Opaque routing instance.
typedef struct HpInstance HpInstance;

// Opaque routing result.
typedef struct HpResult HpResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after success.
// Valid until the next call on the same thread.
const char *hp_last_error_message(void);

// Static name of a status code.
const char *hp_status_name(enum HpStatus status);

// Build an instance from label arrays. `sources` and `sinks` hold `k`
// labels each.
//
// # Safety
// Array pointers must be valid for their lengths; `out` must be writable.
enum HpStatus hp_instance_new(uint32_t n,
                              const uint32_t *faults,
                              size_t fault_count,
                              const uint32_t *sources,
                              const uint32_t *sinks,
                              size_t k,
                              struct HpInstance **out);

// Parse an instance document (JSON with fields n, k, faults, sources,
// sinks).
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum HpStatus hp_instance_from_json(const char *json, struct HpInstance **out);

// Serialize an instance; free the string with [`hp_string_free`].
//
// # Safety
// `inst` must be a live handle or null.
char *hp_instance_to_json(const struct HpInstance *inst);

// # Safety
// `inst` must come from this library and not be freed twice.
void hp_instance_free(struct HpInstance *inst);

// Route an instance. Zero for `node_limit` or `max_base_dim` selects the
// default.
//
// # Safety
// `inst` must be a live handle; `out` must be writable.
enum HpStatus hp_route(const struct HpInstance *inst,
                       uint64_t node_limit,
                       uint32_t max_base_dim,
                       struct HpResult **out);

// # Safety
// `res` must be a live handle or null.
size_t hp_result_path_count(const struct HpResult *res);

// Vertex count of path `i`, or 0 when out of range.
//
// # Safety
// `res` must be a live handle or null.
size_t hp_result_path_len(const struct HpResult *res, size_t i);

// Copy up to `cap` labels of path `i` into `buf`; returns the full length.
//
// # Safety
// `buf` must be writable for `cap` elements.
size_t hp_result_path(const struct HpResult *res, size_t i, uint32_t *buf, size_t cap);

// # Safety
// `res` must be a live handle or null.
size_t hp_result_coverage(const struct HpResult *res);

// # Safety
// `res` must be a live handle or null.
size_t hp_result_bound(const struct HpResult *res);

// # Safety
// `res` must be a live handle or null.
bool hp_result_verified(const struct HpResult *res);

// Result document as JSON; free with [`hp_string_free`].
//
// # Safety
// `res` must be a live handle or null.
char *hp_result_to_json(const struct HpResult *res);

// # Safety
// `res` must come from this library and not be freed twice.
void hp_result_free(struct HpResult *res);

// Check `count` paths given back to back in `labels`, path `i` having
// `lens[i]` labels. Returns `HP_STATUS_OK` when the system passes every
// check and `HP_STATUS_VERIFY` otherwise.
//
// # Safety
// `labels` must hold the sum of `lens`; `lens` must hold `count` entries.
enum HpStatus hp_verify(const struct HpInstance *inst,
                        const uint32_t *labels,
                        const size_t *lens,
                        size_t count);

// # Safety
// `s` must come from this library and not be freed twice.
void hp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERPATH_H */
