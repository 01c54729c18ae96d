#ifndef CLONELAB_H
#define CLONELAB_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum ClStatus {
  CL_STATUS_OK = 0,
  CL_STATUS_NULL_POINTER = 1,
  CL_STATUS_INVALID_UTF8 = 2,
  CL_STATUS_INVALID_INPUT = 3,
  CL_STATUS_BUDGET_EXCEEDED = 4,
  CL_STATUS_NO_WITNESS = 5,
  CL_STATUS_UNSUPPORTED = 6,
  CL_STATUS_BUFFER_TOO_SMALL = 7,
  CL_STATUS_INTERNAL = 8,
} ClStatus;

typedef struct ClAutomorphism ClAutomorphism;

typedef struct ClFragment ClFragment;

typedef struct ClReport ClReport;

/**
 * Knobs for [`cl_report_run`]. Zero selects the default for the
 * optional fields.
 */
typedef struct ClRunOptions {
  uint64_t seed;
  uint64_t window_k;
  size_t max_size;
  size_t max_arity;
  size_t trials;
  size_t count;
} ClRunOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *cl_version(void);

/**
 * Message for the last failed call on this thread; empty after a
 * successful call. Valid until the next call on the same thread.
 */
const char *cl_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void cl_string_free(char *s);

struct ClRunOptions cl_run_options_default(void);

/**
 * Runs an experiment by command name (as on the command line) with an
 * optional inline JSON input document. Failed checks still produce a
 * report; inspect it with [`cl_report_passed`].
 *
 * # Safety
 * `command` must be a NUL-terminated string, `input_json` null or a
 * NUL-terminated string, `options` null or valid, and `out` writable.
 */
enum ClStatus cl_report_run(const char *command,
                            const char *input_json,
                            const struct ClRunOptions *options,
                            struct ClReport **out_report);

/**
 * # Safety
 * `report` must be a live handle and `out` writable.
 */
enum ClStatus cl_report_passed(const struct ClReport *report, bool *out_passed);

/**
 * Number of failed checks.
 *
 * # Safety
 * `report` must be a live handle and `out` writable.
 */
enum ClStatus cl_report_failure_count(const struct ClReport *report, size_t *out_count);

/**
 * # Safety
 * `report` must be a live handle and `out` writable. The string is
 * released with [`cl_string_free`].
 */
enum ClStatus cl_report_to_json(const struct ClReport *report, char **out_json);

/**
 * # Safety
 * As for [`cl_report_to_json`].
 */
enum ClStatus cl_report_to_csv(const struct ClReport *report, char **out_csv);

/**
 * # Safety
 * `report` must be null or a live handle; it is invalid afterwards.
 */
void cl_report_free(struct ClReport *report);

/**
 * Closes the generators of a fragment document such as
 * `{"carrier":2,"generators":["NOT","AND"]}`. `max_arity` of zero uses
 * the document's bound or the library default.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum ClStatus cl_fragment_from_json(const char *json,
                                    size_t max_arity,
                                    struct ClFragment **out_fragment);

/**
 * Number of operations of each arity `1..=max_arity`. Writes the
 * required length to `out_len`; fails with `BufferTooSmall` when
 * `capacity` is short.
 *
 * # Safety
 * `fragment` must be a live handle, `out_len` writable and `buf` valid
 * for `capacity` writes (it may be null when `capacity` is zero).
 */
enum ClStatus cl_fragment_profile(const struct ClFragment *fragment,
                                  size_t *buf,
                                  size_t capacity,
                                  size_t *out_len);

/**
 * # Safety
 * `fragment` must be null or a live handle; it is invalid afterwards.
 */
void cl_fragment_free(struct ClFragment *fragment);

/**
 * Automorphism of `"rationals-order"` or `"rado"` extending a finite
 * partial isomorphism given as JSON pairs, e.g. `[["0","1/2"]]` or
 * `[[0,1],[1,2]]`.
 *
 * # Safety
 * `structure` and `seed_json` must be NUL-terminated strings and `out`
 * writable.
 */
enum ClStatus cl_automorphism_new(const char *structure,
                                  const char *seed_json,
                                  struct ClAutomorphism **out_aut);

/**
 * Image of a point, written as a decimal integer (Rado) or a reduced
 * fraction (rationals).
 *
 * # Safety
 * `aut` must be a live handle, `point` a NUL-terminated string and
 * `out` writable. The string is released with [`cl_string_free`].
 */
enum ClStatus cl_automorphism_apply(struct ClAutomorphism *aut,
                                    const char *point,
                                    char **out_image);

/**
 * # Safety
 * As for [`cl_automorphism_apply`].
 */
enum ClStatus cl_automorphism_unapply(struct ClAutomorphism *aut,
                                      const char *point,
                                      char **out_preimage);

/**
 * Queries made so far, as JSON.
 *
 * # Safety
 * `aut` must be a live handle and `out` writable. The string is released
 * with [`cl_string_free`].
 */
enum ClStatus cl_automorphism_transcript(const struct ClAutomorphism *aut, char **out_json);

/**
 * # Safety
 * `aut` must be null or a live handle; it is invalid afterwards.
 */
void cl_automorphism_free(struct ClAutomorphism *aut);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CLONELAB_H */
