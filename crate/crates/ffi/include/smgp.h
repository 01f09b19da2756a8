#ifndef SMGP_H
#define SMGP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum SmgpStatus {
  SMGP_STATUS_OK = 0,
  SMGP_STATUS_NULL_POINTER = 1,
  SMGP_STATUS_INVALID_ARGUMENT = 2,
  SMGP_STATUS_DIMENSION_MISMATCH = 3,
  SMGP_STATUS_NUMERICAL = 4,
  SMGP_STATUS_TRAINING_FAILED = 5,
  SMGP_STATUS_PARSE = 6,
  SMGP_STATUS_IO = 7,
  SMGP_STATUS_PANIC = 8,
  SMGP_STATUS_UNSUPPORTED = 9,
} SmgpStatus;

// A kernel specification.
typedef struct SmgpKernel SmgpKernel;

// A fitted 1-D model together with its training data.
typedef struct SmgpModel SmgpModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or an empty string.
// The pointer stays valid until the next failing call on this thread.
const char *smgp_last_error(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must come from this library or be null.
void smgp_string_free(char *s);

// Parses a kernel from the `key = value` text format.
//
// # Safety
// `source` must be a NUL-terminated string; `out` must be writable.
enum SmgpStatus smgp_kernel_parse(const char *source, struct SmgpKernel **out);

// Serializes a kernel; free the result with [`smgp_string_free`].
//
// # Safety
// `kernel` must be a live handle; `out` must be writable.
enum SmgpStatus smgp_kernel_to_text(const struct SmgpKernel *kernel, char **out);

// `k(x, x2)` for two points of dimension `dim`.
//
// # Safety
// `x` and `x2` must hold `dim` values; `out` must be writable.
enum SmgpStatus smgp_kernel_eval(const struct SmgpKernel *kernel,
                                 const double *x,
                                 const double *x2,
                                 size_t dim,
                                 double *out);

// Spectral density at frequency vector `s` of dimension `dim`.
//
// # Safety
// `s` must hold `dim` values; `out` must be writable.
enum SmgpStatus smgp_kernel_spectral_density(const struct SmgpKernel *kernel,
                                             const double *s,
                                             size_t dim,
                                             double *out);

// # Safety
// `kernel` must come from this library or be null, and is invalid afterwards.
void smgp_kernel_free(struct SmgpKernel *kernel);

// Conditions a GP with fixed hyperparameters on `n` 1-D points.
//
// # Safety
// `x` and `y` must hold `n` values; `out` must be writable.
enum SmgpStatus smgp_model_fit(const struct SmgpKernel *kernel,
                               double noise_variance,
                               const double *x,
                               const double *y,
                               size_t n,
                               struct SmgpModel **out);

// Learns hyperparameters by maximizing the marginal likelihood.
//
// `family` is one of `SM`, `SE`, `MA`, `RQ`, `PE`; `components` is used by
// `SM` only. `restarts = 0` selects the default count for the family.
//
// # Safety
// `family` must be NUL-terminated; `x` and `y` must hold `n` values; `out`
// must be writable.
enum SmgpStatus smgp_model_train(const char *family,
                                 size_t components,
                                 const double *x,
                                 const double *y,
                                 size_t n,
                                 uint64_t seed,
                                 size_t restarts,
                                 struct SmgpModel **out);

// Predictive mean and variance at `n` 1-D test inputs.
//
// # Safety
// `xstar`, `mean` and `variance` must hold `n` values.
enum SmgpStatus smgp_model_predict(const struct SmgpModel *model,
                                   const double *xstar,
                                   size_t n,
                                   bool include_noise,
                                   double *mean,
                                   double *variance);

// Log marginal likelihood of the training data.
//
// # Safety
// `out` must be writable.
enum SmgpStatus smgp_model_log_marginal_likelihood(const struct SmgpModel *model, double *out);

// Noise variance of the model.
//
// # Safety
// `out` must be writable.
enum SmgpStatus smgp_model_noise_variance(const struct SmgpModel *model, double *out);

// Copies the model's kernel into a new handle.
//
// # Safety
// `out` must be writable.
enum SmgpStatus smgp_model_kernel(const struct SmgpModel *model, struct SmgpKernel **out);

// Writes the model file at `path`, replacing it atomically.
//
// # Safety
// `path` must be NUL-terminated.
enum SmgpStatus smgp_model_save(const struct SmgpModel *model, const char *path);

// Reads a model file written by [`smgp_model_save`] or the CLI.
//
// # Safety
// `path` must be NUL-terminated; `out` must be writable.
enum SmgpStatus smgp_model_load(const char *path, struct SmgpModel **out);

// # Safety
// `model` must come from this library or be null, and is invalid afterwards.
void smgp_model_free(struct SmgpModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SMGP_H */
