#ifndef KICKBACK_H
#define KICKBACK_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Estimator flags for [`kb_expectation_estimate`].
 */
#define KB_EEA_STAGE1_LOG 1

#define KB_EEA_SUPPRESS_OVERLAP 2

/**
 * Result of every fallible call.
 */
typedef enum {
  KB_STATUS_OK = 0,
  KB_STATUS_NULL_POINTER = 1,
  KB_STATUS_INVALID_OPERAND = 2,
  KB_STATUS_INFEASIBLE = 3,
  KB_STATUS_RESOURCE_LIMIT = 4,
  KB_STATUS_INTERNAL = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  KB_STATUS_PANIC = 6,
} KbStatus;

typedef enum {
  /**
   * `param` is the largest deviation from the mean.
   */
  KB_TAIL_KIND_BOUNDED = 0,
  /**
   * `param` is the decay scale.
   */
  KB_TAIL_KIND_EXPONENTIAL = 1,
  /**
   * `param` is the extra exponent β, `coefficient` the prefactor κ.
   */
  KB_TAIL_KIND_POLYNOMIAL = 2,
  /**
   * `param` is the variance.
   */
  KB_TAIL_KIND_VARIANCE = 3,
  /**
   * The state is an eigenstate; `param` is ignored.
   */
  KB_TAIL_KIND_POINT = 4,
} KbTailKind;

typedef struct KbHamiltonian KbHamiltonian;

typedef struct KbRng KbRng;

typedef struct KbState KbState;

typedef struct KbUnitary KbUnitary;

/**
 * Resources charged to one estimate.
 */
typedef struct {
  uint64_t state_preps;
  uint64_t evolution_uses;
  double total_time;
  uint64_t u_uses;
  uint64_t depth;
} KbLedger;

typedef struct {
  /**
   * Estimated eigenphase in `[0, 2π)`.
   */
  double phase;
  uint32_t n_bits;
  KbLedger ledger;
} KbPhaseResult;

typedef struct {
  /**
   * Estimate of `|⟨ψ|U|ψ⟩|`.
   */
  double amplitude;
  KbLedger ledger;
} KbAmplitudeResult;

typedef struct {
  double re;
  double im;
  KbLedger ledger;
} KbOverlapResult;

/**
 * Spectral tail of the input state, plus a bound `b` on `|⟨A⟩|`.
 */
typedef struct {
  KbTailKind kind;
  double param;
  double coefficient;
  double b;
} KbTail;

typedef struct {
  double value;
  /**
   * Nonzero when stage I alone met the precision.
   */
  uint8_t stage2_skipped;
  KbLedger ledger;
} KbExpectationResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failed call on this thread, or an empty
 * string. The pointer stays valid until the next `kb_*` call on this thread.
 */
const char *kb_last_error(void);

/**
 * Creates a unitary oracle from a row-major `2^n × 2^n` matrix.
 * `im` may be null for a real matrix.
 *
 * # Safety
 * `re` (and `im` when non-null) must point to `4^num_qubits` doubles;
 * `out` must be writable.
 */
KbStatus kb_unitary_new(uint32_t num_qubits, const double *re, const double *im, KbUnitary **out);

/**
 * # Safety
 * `u` must be null or a pointer from [`kb_unitary_new`] not yet freed.
 */
void kb_unitary_free(KbUnitary *u);

/**
 * Creates a state preparation for a normalized `2^n` amplitude vector.
 * `im` may be null for real amplitudes.
 *
 * # Safety
 * `re` (and `im` when non-null) must point to `2^num_qubits` doubles;
 * `out` must be writable.
 */
KbStatus kb_state_new(uint32_t num_qubits, const double *re, const double *im, KbState **out);

/**
 * # Safety
 * `s` must be null or a pointer from [`kb_state_new`] not yet freed.
 */
void kb_state_free(KbState *s);

/**
 * Creates an evolution oracle `t ↦ e^{-iAt}` from a Hermitian row-major matrix.
 *
 * # Safety
 * As for [`kb_unitary_new`].
 */
KbStatus kb_hamiltonian_new(uint32_t num_qubits,
                            const double *re,
                            const double *im,
                            KbHamiltonian **out);

/**
 * # Safety
 * `h` must be null or a pointer from [`kb_hamiltonian_new`] not yet freed.
 */
void kb_hamiltonian_free(KbHamiltonian *h);

/**
 * Creates a seeded generator; equal seeds give equal estimates.
 *
 * The returned pointer is never null. Release it with [`kb_rng_free`].
 */
KbRng *kb_rng_new(uint64_t seed);

/**
 * # Safety
 * `r` must be null or a pointer from [`kb_rng_new`] not yet freed.
 */
void kb_rng_free(KbRng *r);

/**
 * Phase estimation of `w` on `state` to precision `p` (in turns).
 *
 * `c == 0` runs the single-shot bitwise estimator; `c` in `(0, 1)` runs the
 * repeated-measurement estimator with confidence `c`.
 *
 * # Safety
 * All pointers must be valid handles of the right kind; `out` must be writable.
 */
KbStatus kb_phase_estimate(const KbUnitary *w,
                           const KbState *state,
                           double p,
                           double c,
                           KbRng *rng,
                           KbPhaseResult *out);

/**
 * Estimates `|⟨ψ|U|ψ⟩|` to precision `p`; `c == 0` skips repetition.
 *
 * # Safety
 * As for [`kb_phase_estimate`].
 */
KbStatus kb_amplitude_estimate(const KbUnitary *u,
                               const KbState *state,
                               double p,
                               double c,
                               KbRng *rng,
                               KbAmplitudeResult *out);

/**
 * Estimates `⟨ψ|U|ψ⟩` to precision `p` in hemisphere distance; `c == 0`
 * skips repetition.
 *
 * # Safety
 * As for [`kb_phase_estimate`].
 */
KbStatus kb_overlap_estimate(const KbUnitary *u,
                             const KbState *state,
                             double p,
                             double c,
                             KbRng *rng,
                             KbOverlapResult *out);

/**
 * Estimates `⟨ψ|A|ψ⟩` to additive precision `p` with confidence `c`.
 *
 * `k == 0` picks the series order from `p`. `flags` is a bitwise OR of
 * `KB_EEA_*` constants.
 *
 * # Safety
 * As for [`kb_phase_estimate`]; `tail` must point to a readable [`KbTail`].
 */
KbStatus kb_expectation_estimate(const KbHamiltonian *h,
                                 const KbState *state,
                                 const KbTail *tail,
                                 double p,
                                 double c,
                                 uint32_t k,
                                 uint32_t flags,
                                 KbRng *rng,
                                 KbExpectationResult *out);

/**
 * Exact `⟨ψ|A|ψ⟩`, for checking estimates.
 *
 * # Safety
 * As for [`kb_phase_estimate`]; `out` must be writable.
 */
KbStatus kb_expectation_exact(const KbHamiltonian *h, const KbState *state, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KICKBACK_H */
