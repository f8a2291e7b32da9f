#ifndef NCOSC_H
#define NCOSC_H

/* Generated by cbindgen from the ncosc-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible call.
typedef enum {
  NCOSC_STATUS_OK = 0,
  // A required pointer argument was null.
  NCOSC_STATUS_NULL_POINTER = 1,
  // A parameter violated its domain (negative θ, non-positive mass, ...).
  NCOSC_STATUS_INVALID_ARGUMENT = 2,
  // A numerical routine failed (eigensolver, truncation guard, ...).
  NCOSC_STATUS_NUMERICAL_FAILURE = 3,
  // The caller-provided buffer cannot hold the requested output.
  NCOSC_STATUS_BUFFER_TOO_SMALL = 4,
  // An internal invariant was violated.
  NCOSC_STATUS_INTERNAL_ERROR = 5,
} NcoscStatus;

// Which constant multiplies the angular coupling κ(N_g − N_d).
typedef enum {
  // c = 1, the bare closed form.
  NCOSC_CONVENTION_BARE = 0,
  // c = ħ, the convention matching the direct Hamiltonian.
  NCOSC_CONVENTION_HBAR_SCALED = 1,
} NcoscConvention;

// Opaque handle: oscillator and noncommutativity parameters plus the
// truncated basis. Create with `ncosc_system_new`, release with
// `ncosc_system_free`.
typedef struct NcoscSystem NcoscSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Create a system handle.
//
// On success `*out` owns the handle and must be released with
// `ncosc_system_free`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one pointer.
NcoscStatus ncosc_system_new(double m,
                             double omega,
                             double theta,
                             double theta_bar,
                             double hbar,
                             uintptr_t n_max,
                             NcoscSystem **out);

// Release a handle created by `ncosc_system_new`. Null is a no-op.
//
// # Safety
// `sys` must be null or a pointer previously returned by `ncosc_system_new`
// that has not been freed yet.
void ncosc_system_free(NcoscSystem *sys);

// Effective parameters (M, Ω, κ) of the reduced oscillator.
//
// # Safety
// `sys` must be a live handle; the out pointers must be valid for writes.
NcoscStatus ncosc_effective_params(const NcoscSystem *sys,
                                   double *mass_eff,
                                   double *omega_eff,
                                   double *kappa);

// Closed-form energy E(n_g, n_d) = ħΩ(n_g + n_d + 1) − c·κ(n_g − n_d).
//
// # Safety
// `sys` must be a live handle; `out` must be valid for one f64 write.
NcoscStatus ncosc_energy_closed_form(const NcoscSystem *sys,
                                     uintptr_t n_g,
                                     uintptr_t n_d,
                                     NcoscConvention convention,
                                     double *out);

// Energy shift per unit of angular momentum (c·κ); adjacent sublevels of a
// multiplet are spaced by twice this value.
//
// # Safety
// `sys` must be a live handle; `out` must be valid for one f64 write.
NcoscStatus ncosc_level_splitting(const NcoscSystem *sys, NcoscConvention convention, double *out);

// Lowest `n_levels` eigenvalues of the Bopp-shifted Hamiltonian over the
// truncated basis, ascending. Writes at most `cap` values into `out` and
// stores the count written in `written`.
//
// # Safety
// `sys` must be a live handle, `out` valid for `cap` f64 writes, and
// `written` valid for one usize write.
NcoscStatus ncosc_spectrum_numerical(const NcoscSystem *sys,
                                     uintptr_t n_levels,
                                     double *out,
                                     uintptr_t cap,
                                     uintptr_t *written);

// Library version as a static NUL-terminated string.
const char *ncosc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NCOSC_H */
