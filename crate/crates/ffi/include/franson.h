#ifndef FRANSON_H
#define FRANSON_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FransonCommand {
  FRANSON_COMMAND_LEVELS = 0,
  FRANSON_COMMAND_RATE = 1,
  FRANSON_COMMAND_SWEEP = 2,
  FRANSON_COMMAND_MC = 3,
  FRANSON_COMMAND_CHSH = 4,
} FransonCommand;

typedef enum FransonFormat {
  FRANSON_FORMAT_CSV = 0,
  FRANSON_FORMAT_JSON = 1,
} FransonFormat;

typedef enum FransonStatus {
  FRANSON_STATUS_OK = 0,
  FRANSON_STATUS_NULL_POINTER = 1,
  FRANSON_STATUS_INVALID_ARGUMENT = 2,
  FRANSON_STATUS_VALIDATION_FAILED = 3,
  FRANSON_STATUS_NON_PERTURBATIVE = 4,
  FRANSON_STATUS_UNDEFINED_CORRELATION = 5,
  FRANSON_STATUS_IO = 6,
  FRANSON_STATUS_MALFORMED_CONFIG = 7,
  FRANSON_STATUS_INTERNAL = 8,
} FransonStatus;

typedef enum FransonSystemKind {
  FRANSON_SYSTEM_KIND_HARMONIC_OSCILLATOR = 0,
  FRANSON_SYSTEM_KIND_INFINITE_WELL = 1,
} FransonSystemKind;

/**
 * Analytic coincidence-rate model.
 */
typedef struct FransonModel FransonModel;

typedef struct FransonComplex {
  double re;
  double im;
} FransonComplex;

typedef struct FransonPhaseParams {
  double delta_e;
  double delta_e_p;
  double beta;
  double hbar;
} FransonPhaseParams;

typedef struct FransonCascade {
  double e1;
  double e2;
  double e3;
  double tau1;
  double tau2;
  double tau3;
} FransonCascade;

typedef struct FransonPhase {
  double phi1_prime;
  double phi2_prime;
  double total;
} FransonPhase;

typedef struct FransonChshSettings {
  double a;
  double a_prime;
  double b;
  double b_prime;
} FransonChshSettings;

typedef struct FransonChshResult {
  double s_value;
  struct FransonChshSettings settings;
  /**
   * E(a,b), E(a,b′), E(a′,b), E(a′,b′).
   */
  double correlations[4];
} FransonChshResult;

typedef struct FransonInterferometer {
  double delta_t;
  double phi1;
  double phi2;
  double eta1;
  double eta2;
  double window;
} FransonInterferometer;

typedef struct FransonCountRecord {
  uint64_t n_pairs;
  uint64_t n_coincident;
  uint64_t n_accidental;
  uint64_t n_cross_rejected;
  uint64_t n_late;
  uint64_t n_singles;
  double rate_estimate;
  double std_error;
  uint64_t seed;
} FransonCountRecord;

/**
 * `param` is ω for the oscillator and the width L for the well.
 */
typedef struct FransonSystem {
  enum FransonSystemKind kind;
  double mass;
  double param;
} FransonSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or NULL. Valid until the
 * next call into this library from the same thread.
 */
const char *franson_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *franson_version(void);

/**
 * Creates a model with zero interferometer phases and full visibility.
 *
 * # Safety
 * `c` and `c_prime` must point to `n_modes` elements; `out` must be writable.
 */
enum FransonStatus franson_model_new(const struct FransonComplex *c,
                                     const struct FransonComplex *c_prime,
                                     size_t n_modes,
                                     const struct FransonPhaseParams *phase,
                                     double delta_t,
                                     struct FransonModel **out);

/**
 * # Safety
 * `model` must come from [`franson_model_new`] and not be used afterwards.
 */
void franson_model_free(struct FransonModel *model);

/**
 * Applies the finite-linewidth visibility exp(−ΔT·(1/τ1 + 1/τ3)).
 *
 * # Safety
 * `model` and `cascade` must be valid pointers.
 */
enum FransonStatus franson_model_set_damping(struct FransonModel *model,
                                             const struct FransonCascade *cascade);

/**
 * Coincidence rate at phases (φ1, φ2).
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
enum FransonStatus franson_model_rate(const struct FransonModel *model,
                                      double phi1,
                                      double phi2,
                                      double *out);

/**
 * Phase decomposition at phases (φ1, φ2).
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
enum FransonStatus franson_model_phase(const struct FransonModel *model,
                                       double phi1,
                                       double phi2,
                                       struct FransonPhase *out);

/**
 * Fringe shift βΔE_pΔT/ℏ.
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
enum FransonStatus franson_model_fringe_shift(const struct FransonModel *model, double *out);

/**
 * CHSH value at fixed settings.
 *
 * # Safety
 * All pointers must be valid.
 */
enum FransonStatus franson_model_chsh(const struct FransonModel *model,
                                      const struct FransonChshSettings *settings,
                                      struct FransonChshResult *out);

/**
 * Maximum CHSH value over all settings. `resolution` = 0 selects the defaults.
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
enum FransonStatus franson_model_max_chsh(const struct FransonModel *model,
                                          size_t resolution,
                                          size_t refinements,
                                          struct FransonChshResult *out);

/**
 * Event-level simulation of `n_pairs` pairs.
 *
 * # Safety
 * Struct pointers must be valid; `c` and `c_prime` must hold `n_modes` elements.
 */
enum FransonStatus franson_simulate_pairs(uint64_t n_pairs,
                                          const struct FransonCascade *cascade,
                                          const struct FransonInterferometer *interferometer,
                                          const struct FransonPhaseParams *phase,
                                          const struct FransonComplex *c,
                                          const struct FransonComplex *c_prime,
                                          size_t n_modes,
                                          uint64_t seed,
                                          struct FransonCountRecord *out);

/**
 * Share of coincidences from distinguishable paths.
 */
double franson_accidental_fraction(struct FransonCountRecord record);

/**
 * Unperturbed level energy.
 *
 * # Safety
 * `out` must be writable.
 */
enum FransonStatus franson_unperturbed_energy(struct FransonSystem system,
                                              uint32_t n,
                                              double hbar,
                                              double *out);

/**
 * First-order coefficient ⟨n|p⁴|n⟩/m of the level shift.
 *
 * # Safety
 * `out` must be writable.
 */
enum FransonStatus franson_perturbation_energy(struct FransonSystem system,
                                               uint32_t n,
                                               double hbar,
                                               double *out);

/**
 * ΔE = E(n1) − E(n3) and ΔE_p for a cascade n1 → n2 → n3.
 *
 * # Safety
 * `delta_e` and `delta_e_p` must be writable.
 */
enum FransonStatus franson_cascade_deltas(struct FransonSystem system,
                                          uint32_t n1,
                                          uint32_t n2,
                                          uint32_t n3,
                                          double hbar,
                                          double *delta_e,
                                          double *delta_e_p);

/**
 * Runs a subcommand on a TOML configuration file and returns the encoded
 * result envelope in `*out`, to be released with [`franson_string_free`].
 * A configuration that fails validation yields `ValidationFailed` with the
 * envelope still written unless `override_validation` is non-zero.
 *
 * # Safety
 * `config_path` must be a NUL-terminated UTF-8 path; `out` must be writable.
 */
enum FransonStatus franson_run_config(const char *config_path,
                                      enum FransonCommand command,
                                      enum FransonFormat format,
                                      int32_t override_validation,
                                      char **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void franson_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRANSON_H */
