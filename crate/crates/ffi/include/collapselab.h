/* C interface for collapselab. Generated by cbindgen; do not edit. */

#ifndef COLLAPSELAB_H
#define COLLAPSELAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Elementwise activation selector.
 */
typedef enum ClabActivation {
  CLAB_ACTIVATION_RELU = 0,
  CLAB_ACTIVATION_SELU = 1,
  CLAB_ACTIVATION_IDENTITY = 2,
} ClabActivation;

/**
 * Collapse classification outcome.
 */
typedef enum ClabCollapseKind {
  CLAB_COLLAPSE_KIND_FITTED = 0,
  CLAB_COLLAPSE_KIND_FULL_COLLAPSE = 1,
  CLAB_COLLAPSE_KIND_PARTIAL_COLLAPSE = 2,
  CLAB_COLLAPSE_KIND_OTHER = 3,
} ClabCollapseKind;

/**
 * Loss selector.
 */
typedef enum ClabLoss {
  CLAB_LOSS_MSE = 0,
  CLAB_LOSS_MAE = 1,
} ClabLoss;

/**
 * Weight-initialization scheme selector.
 */
typedef enum ClabScheme {
  CLAB_SCHEME_HE_NORMAL = 0,
  CLAB_SCHEME_LECUN_NORMAL = 1,
  CLAB_SCHEME_GLOROT_UNIFORM = 2,
  CLAB_SCHEME_SYMMETRIC_UNIFORM = 3,
  CLAB_SCHEME_RADEMACHER = 4,
  CLAB_SCHEME_ORTHOGONAL = 5,
  CLAB_SCHEME_LSUV = 6,
} ClabScheme;

/**
 * Result of every fallible call.
 */
typedef enum ClabStatus {
  CLAB_STATUS_OK = 0,
  CLAB_STATUS_NULL_POINTER = 1,
  CLAB_STATUS_INVALID_ARGUMENT = 2,
  CLAB_STATUS_UNSUPPORTED = 3,
  CLAB_STATUS_NUMERICAL_FAILURE = 4,
  CLAB_STATUS_PARSE_ERROR = 5,
  CLAB_STATUS_IO_ERROR = 6,
  CLAB_STATUS_BUFFER_TOO_SMALL = 7,
  CLAB_STATUS_PANIC = 8,
} ClabStatus;

/**
 * Built-in analytic target selector.
 */
typedef enum ClabTarget {
  CLAB_TARGET_ABS1D = 0,
  CLAB_TARGET_XSIN5X = 1,
  CLAB_TARGET_STEPSIN = 2,
  CLAB_TARGET_ABS2D = 3,
} ClabTarget;

/**
 * Opaque handle to an immutable network.
 */
typedef struct ClabNetwork ClabNetwork;

/**
 * A Monte Carlo estimate with its 95% confidence interval.
 */
typedef struct ClabEstimate {
  double p_hat;
  double ci_low;
  double ci_high;
  uint64_t n;
  uint64_t seed;
} ClabEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version string of the underlying library; static, do not free.
 */
const char *clab_version(void);

/**
 * Identity of the random generator algorithm; static, do not free.
 */
const char *clab_generator_id(void);

/**
 * Message for the most recent error on this thread; valid until the next
 * failing call on the same thread. Do not free.
 */
const char *clab_last_error_message(void);

/**
 * Exact probability that a bias-free width-2 scalar-input chain of
 * `depth` layers is a constant function at initialization.
 *
 * # Safety
 * `out_probability` must point to a writable f64.
 */
enum ClabStatus clab_exact_constant_probability(size_t depth,
                                                bool last_layer_relu,
                                                double *out_probability);

/**
 * Writes the exact probability as a decimal rational string "num/den"
 * into `buf` (NUL-terminated). `written` receives the full length
 * including the terminator; if `buf_len` is too small the status is
 * `CLAB_STATUS_BUFFER_TOO_SMALL` and `written` still holds the required
 * length.
 *
 * # Safety
 * `buf` must point to `buf_len` writable bytes; `written` must be
 * writable.
 */
enum ClabStatus clab_exact_constant_probability_rational(size_t depth,
                                                         bool last_layer_relu,
                                                         char *buf,
                                                         size_t buf_len,
                                                         size_t *written);

/**
 * Closed-form probability that a symmetric zero-bias (or nonzero-bias)
 * initialization maps a fixed nonzero input to a constant output.
 *
 * # Safety
 * `widths` must point to `widths_len` readable entries; `out` must be
 * writable.
 */
enum ClabStatus clab_collapse_probability_bound(const size_t *widths,
                                                size_t widths_len,
                                                bool last_layer_relu,
                                                bool biases_nonzero,
                                                double *out);

/**
 * Largest depth keeping the zero-bias collapse bound below `p` at the
 * given width.
 *
 * # Safety
 * `out_depth` must point to a writable u64.
 */
enum ClabStatus clab_max_safe_depth(size_t width, double p, uint64_t *out_depth);

/**
 * Expected squared-length trajectory; `out` receives `depth` values.
 * When `converged` is non-null it reports whether doubling the
 * quadrature order moved any layer by more than 1e-10 (always true for
 * the ReLU closed form).
 *
 * # Safety
 * `out` must point to `depth` writable f64s; `converged` may be null.
 */
enum ClabStatus clab_length_map(double sigma_w_sq,
                                double sigma_b_sq,
                                double q0,
                                size_t depth,
                                enum ClabActivation activation,
                                double *out,
                                bool *converged);

/**
 * Monte Carlo estimate of the zero-function probability of a bias-free
 * constant-width chain with ReLU on every layer.
 *
 * # Safety
 * `out` must point to a writable [`ClabEstimate`].
 */
enum ClabStatus clab_mc_zero_function(size_t width,
                                      size_t depth,
                                      enum ClabScheme scheme,
                                      uint64_t samples,
                                      uint64_t seed,
                                      struct ClabEstimate *out);

/**
 * Loads a network from its JSON document; returns null on error (consult
 * `clab_last_error_message`).
 *
 * # Safety
 * `json` must be a NUL-terminated UTF-8 string.
 */
struct ClabNetwork *clab_network_from_json(const char *json);

/**
 * Builds the exact minimal representation of `abs1d` or `abs2d`; null
 * for targets without one.
 */
struct ClabNetwork *clab_network_reference(enum ClabTarget target);

/**
 * Releases a network handle; null is a no-op.
 *
 * # Safety
 * `net` must have come from this library and not be freed twice.
 */
void clab_network_free(struct ClabNetwork *net);

/**
 * Input dimension of a network; 0 when the handle is null.
 *
 * # Safety
 * `net` must be a live handle or null.
 */
size_t clab_network_input_dim(const struct ClabNetwork *net);

/**
 * Output dimension of a network; 0 when the handle is null.
 *
 * # Safety
 * `net` must be a live handle or null.
 */
size_t clab_network_output_dim(const struct ClabNetwork *net);

/**
 * Evaluates the network at one input point.
 *
 * # Safety
 * `input` must hold `input_len` readable f64s matching the input
 * dimension; `output` must hold `output_len` writable f64s matching the
 * output dimension.
 */
enum ClabStatus clab_network_forward(const struct ClabNetwork *net,
                                     const double *input,
                                     size_t input_len,
                                     double *output,
                                     size_t output_len);

/**
 * Classifies a network against a target. `tolerance <= 0` selects the
 * default (2e-2 of the target's output range). `out_constant`, when
 * non-null with `constant_len` equal to the output dimension, receives
 * the collapse constant (NaN-filled unless fully collapsed).
 * `out_zero_layer` receives the 1-based dead layer index or -1.
 *
 * # Safety
 * Pointer arguments must be null or valid as described.
 */
enum ClabStatus clab_classify(const struct ClabNetwork *net,
                              enum ClabTarget target,
                              enum ClabLoss loss,
                              double tolerance,
                              enum ClabCollapseKind *out_kind,
                              double *out_constant,
                              size_t constant_len,
                              int64_t *out_zero_layer);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COLLAPSELAB_H */
