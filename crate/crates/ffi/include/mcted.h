#ifndef MCTED_H
#define MCTED_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MctedStatus {
  MCTED_STATUS_OK = 0,
  MCTED_STATUS_NULL_POINTER = 1,
  MCTED_STATUS_INVALID_UTF8 = 2,
  MCTED_STATUS_IO = 3,
  MCTED_STATUS_PARSE = 4,
  MCTED_STATUS_INVALID = 5,
  MCTED_STATUS_RUNTIME = 6,
  MCTED_STATUS_PANIC = 7,
} MctedStatus;

/*
 Opaque trained model.
 */
typedef struct MctedModel MctedModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Loads a checkpoint written by `mcted train`.

 # Safety
 `path` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum MctedStatus mcted_model_load(const char *path, struct MctedModel **out);

/*
 Releases a model. NULL is ignored.

 # Safety
 `model` must come from `mcted_model_load` and not be used afterwards.
 */
void mcted_model_free(struct MctedModel *model);

/*
 Labels every token of a sentence file; `out` receives the same file with
 the LABEL column replaced by predictions.

 # Safety
 `model` must be a live handle, `sentences` a NUL-terminated string and
 `out` a valid pointer.
 */
enum MctedStatus mcted_predict(const struct MctedModel *model, const char *sentences, char **out);

/*
 Scores a gold-labelled sentence file; `out` receives the report as JSON.

 # Safety
 Same contract as `mcted_predict`.
 */
enum MctedStatus mcted_evaluate(const struct MctedModel *model, const char *sentences, char **out);

/*
 Generates a seeded synthetic corpus in sentence-file format.

 # Safety
 `out` must be a valid pointer.
 */
enum MctedStatus mcted_generate_synthetic(size_t sentences, uint64_t seed, char **out);

/*
 Releases a string returned by this library. NULL is ignored.

 # Safety
 `s` must come from this library and not be used afterwards.
 */
void mcted_string_free(char *s);

/*
 Message for the last failed call on this thread, or NULL. The pointer
 stays valid until the next call into the library from this thread.
 */
const char *mcted_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *mcted_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MCTED_H */
