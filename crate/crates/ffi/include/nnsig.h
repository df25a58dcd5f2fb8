#ifndef NNSIG_H
#define NNSIG_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NnsigActivation {
  NNSIG_ACTIVATION_RELU = 0,
  NNSIG_ACTIVATION_TANH = 1,
  NNSIG_ACTIVATION_SIGMOID = 2,
} NnsigActivation;

// Result code of every fallible call.
typedef enum NnsigStatus {
  NNSIG_STATUS_OK = 0,
  NNSIG_STATUS_NULL_POINTER = 1,
  // Length mismatch, size overflow or non-UTF-8 string.
  NNSIG_STATUS_INVALID_ARGUMENT = 2,
  NNSIG_STATUS_CONFIG = 3,
  NNSIG_STATUS_INPUT = 4,
  NNSIG_STATUS_FORMAT = 5,
  NNSIG_STATUS_DATA = 6,
  NNSIG_STATUS_NUMERICAL = 7,
  NNSIG_STATUS_DIVERGENCE = 8,
  NNSIG_STATUS_IO = 9,
  NNSIG_STATUS_PANIC = 10,
} NnsigStatus;

// Opaque dataset handle.
typedef struct NnsigDataset NnsigDataset;

// Opaque network handle.
typedef struct NnsigNetwork NnsigNetwork;

// Architecture of a fitted network. `width = 0` selects the automatic schedule.
typedef struct NnsigArchSpec {
  size_t depth;
  size_t width;
  enum NnsigActivation activation;
  double width_c;
  double width_exponent;
} NnsigArchSpec;

typedef struct NnsigTrainConfig {
  size_t epochs;
  size_t batch_size;
  double learning_rate;
  double lr_decay;
  uint64_t seed;
  double tolerance;
  double max_grad_norm;
} NnsigTrainConfig;

typedef struct NnsigNullConfig {
  size_t m;
  size_t n_p;
  double lambda_shrink;
  double alpha_adapt;
  size_t m_max;
  double adapt_tol;
  // false: plain Gram matrix; true: scaled by 4σ̂².
  bool four_sigma2;
  uint64_t seed;
  size_t threads;
} NnsigNullConfig;

// `rate = false` divides by 1; otherwise the rate constants are used.
typedef struct NnsigStatConfig {
  bool rate;
  double width;
  double lipschitz;
  uint32_t depth;
  double s_over_d;
} NnsigStatConfig;

typedef struct NnsigTestOutcome {
  double observed_raw;
  double observed_normalized;
  double p_value;
  size_t m_final;
  double jitter_used;
} NnsigTestOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *nnsig_last_error(void);

// Library version as a static NUL-terminated string.
const char *nnsig_version(void);

struct NnsigArchSpec nnsig_arch_spec_default(void);

struct NnsigTrainConfig nnsig_train_config_default(void);

struct NnsigNullConfig nnsig_null_config_default(void);

struct NnsigStatConfig nnsig_stat_config_default(void);

// Truncated-Glorot network with layer widths `dims[0..n_dims]`.
//
// # Safety
// `dims` must point to `n_dims` values and `out` must be writable.
enum NnsigStatus nnsig_network_glorot(const size_t *dims,
                                      size_t n_dims,
                                      enum NnsigActivation activation,
                                      uint64_t seed,
                                      struct NnsigNetwork **out);

// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum NnsigStatus nnsig_network_load(const char *path, struct NnsigNetwork **out);

// # Safety
// `net` must be a live handle and `path` a NUL-terminated string.
enum NnsigStatus nnsig_network_save(const struct NnsigNetwork *net, const char *path);

// Input dimension, or 0 for a null handle.
//
// # Safety
// `net` must be null or a live handle.
size_t nnsig_network_input_dim(const struct NnsigNetwork *net);

// `f(x)` for one point of length `d`.
//
// # Safety
// `x` must point to `d` values and `out` be writable.
enum NnsigStatus nnsig_network_eval(const struct NnsigNetwork *net,
                                    const double *x,
                                    size_t d,
                                    double *out);

// `∂f/∂x` at one point; `grad` receives `d` values.
//
// # Safety
// `x` and `grad` must each hold `d` values.
enum NnsigStatus nnsig_network_gradient(const struct NnsigNetwork *net,
                                        const double *x,
                                        size_t d,
                                        double *grad);

// # Safety
// `net` must be null or a handle not freed before.
void nnsig_network_free(struct NnsigNetwork *net);

// Synthetic data; `spec_json` is a target description such as
// `{"kind":"linear","beta":[1,0],"intercept":0,"noise_sigma":0.1}`.
//
// # Safety
// `spec_json` must be a NUL-terminated string and `out` writable.
enum NnsigStatus nnsig_dataset_generate(const char *spec_json,
                                        size_t n,
                                        size_t d,
                                        uint64_t seed,
                                        struct NnsigDataset **out);

// Row-major `n × d` covariates in `[-1, 1]` and `n` responses, copied.
//
// # Safety
// `x` must hold `n·d` values and `y` `n` values.
enum NnsigStatus nnsig_dataset_from_arrays(const double *x,
                                           const double *y,
                                           size_t n,
                                           size_t d,
                                           struct NnsigDataset **out);

// # Safety
// `path` and `target` must be NUL-terminated strings and `out` writable.
enum NnsigStatus nnsig_dataset_load_csv(const char *path,
                                        const char *target,
                                        struct NnsigDataset **out);

// Number of rows, or 0 for a null handle.
//
// # Safety
// `ds` must be null or a live handle.
size_t nnsig_dataset_n(const struct NnsigDataset *ds);

// Number of covariates, or 0 for a null handle.
//
// # Safety
// `ds` must be null or a live handle.
size_t nnsig_dataset_d(const struct NnsigDataset *ds);

// # Safety
// `ds` must be null or a handle not freed before.
void nnsig_dataset_free(struct NnsigDataset *ds);

// Least-squares fit. `final_risk` may be null.
//
// # Safety
// Handles and configs must be live; `out` writable.
enum NnsigStatus nnsig_fit(const struct NnsigDataset *ds,
                           const struct NnsigArchSpec *arch,
                           const struct NnsigTrainConfig *cfg,
                           struct NnsigNetwork **out,
                           double *final_risk);

// Raw statistics `(1/n) Σ (∂f/∂x_j)²` for every variable; `out` holds `d` values.
//
// # Safety
// Handles must be live and `out` must hold `d` values.
enum NnsigStatus nnsig_statistics(const struct NnsigNetwork *net,
                                  const struct NnsigDataset *ds,
                                  double *out,
                                  size_t d);

// Significance test of variable `j`. When `null_samples` is non-null it
// receives the `n_p` null draws; `null_len` must then equal `cfg->n_p`.
//
// # Safety
// Handles and configs must be live; `outcome` writable; `null_samples`
// null or holding `null_len` values.
enum NnsigStatus nnsig_significance_test(const struct NnsigNetwork *net,
                                         const struct NnsigDataset *ds,
                                         size_t j,
                                         const struct NnsigNullConfig *cfg,
                                         const struct NnsigStatConfig *stat,
                                         struct NnsigTestOutcome *outcome,
                                         double *null_samples,
                                         size_t null_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NNSIG_H */
