#ifndef RABISPEC_H
#define RABISPEC_H

/* Generated by cbindgen from the rabispec-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RabiStatus {
  RABI_STATUS_OK = 0,
  RABI_STATUS_NULL_POINTER = 1,
  RABI_STATUS_INVALID_ARGUMENT = 2,
  RABI_STATUS_COMPUTATION_FAILED = 3,
  RABI_STATUS_BUFFER_TOO_SMALL = 4,
  RABI_STATUS_PANIC = 5,
} RabiStatus;

typedef enum RabiPointKind {
  RABI_POINT_KIND_GENERIC = 0,
  RABI_POINT_KIND_JUDDIAN = 1,
  RABI_POINT_KIND_DEGENERATE = 2,
  RABI_POINT_KIND_DOUBLY_DEGENERATE = 3,
} RabiPointKind;

/**
 * Opaque spectrum handle.
 */
typedef struct RabiSpectrum RabiSpectrum;

/**
 * One spectral point. `parity` is +1 or -1 when known, 0 otherwise.
 */
typedef struct RabiPoint {
  double x;
  double energy;
  enum RabiPointKind kind;
  uint32_t multiplicity;
  int32_t parity;
} RabiPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Spectrum of `a†a + μσ_z + λσ_x(a + a†) + εσ_x` with `x = E + λ²` in `[x_lo, x_hi]`.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum RabiStatus rabi_spectrum_eps(double lambda,
                                  double mu,
                                  double eps,
                                  double x_lo,
                                  double x_hi,
                                  struct RabiSpectrum **out);

/**
 * Spectrum of `(ω + U/2 σ_z)a†a + ω₀/2 σ_z + gσ_x(a + a†)` with E in `[e_lo, e_hi]`.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum RabiStatus rabi_spectrum_nl(double omega,
                                 double omega0,
                                 double g,
                                 double u,
                                 double e_lo,
                                 double e_hi,
                                 struct RabiSpectrum **out);

/**
 * Number of distinct points.
 *
 * # Safety
 * `spectrum` must come from this library; `len` must be valid for writing.
 */
enum RabiStatus rabi_spectrum_len(const struct RabiSpectrum *spectrum, size_t *len);

/**
 * Point `index` in order of increasing energy.
 *
 * # Safety
 * `spectrum` must come from this library; `point` must be valid for writing.
 */
enum RabiStatus rabi_spectrum_point(const struct RabiSpectrum *spectrum,
                                    size_t index,
                                    struct RabiPoint *point);

/**
 * Number of diagnostics (skipped poles, failed evaluations) recorded during the scan.
 *
 * # Safety
 * `spectrum` must come from this library; `len` must be valid for writing.
 */
enum RabiStatus rabi_spectrum_diagnostic_count(const struct RabiSpectrum *spectrum, size_t *len);

/**
 * Releases a spectrum handle; null is ignored.
 *
 * # Safety
 * `spectrum` must be null or a handle not yet freed.
 */
void rabi_spectrum_free(struct RabiSpectrum *spectrum);

/**
 * Spectral function of the first model at `x`.
 *
 * # Safety
 * `out` must be valid for writing.
 */
enum RabiStatus rabi_wronskian_eps(double x, double lambda, double mu, double eps, double *out);

/**
 * Spectral function of the second model at energy `e`.
 *
 * # Safety
 * `out` must be valid for writing.
 */
enum RabiStatus rabi_wronskian_nl(double e,
                                  double omega,
                                  double omega0,
                                  double g,
                                  double u,
                                  double *out);

/**
 * Lowest `k` eigenvalues of the first model in a basis truncated at `n` photons.
 *
 * # Safety
 * `out` must be valid for writing `capacity` doubles.
 */
enum RabiStatus rabi_oracle_eps(double lambda,
                                double mu,
                                double eps,
                                size_t n,
                                size_t k,
                                double *out,
                                size_t capacity);

/**
 * Lowest `k` eigenvalues of the second model in a basis truncated at `n` photons.
 *
 * # Safety
 * `out` must be valid for writing `capacity` doubles.
 */
enum RabiStatus rabi_oracle_nl(double omega,
                               double omega0,
                               double g,
                               double u,
                               size_t n,
                               size_t k,
                               double *out,
                               size_t capacity);

/**
 * Copies the last error message of this thread, NUL-terminated and
 * truncated to `capacity`. Returns the full message length without the NUL.
 *
 * # Safety
 * `buf` must be null or valid for writing `capacity` bytes.
 */
size_t rabi_last_error_message(char *buf, size_t capacity);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rabi_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RABISPEC_H */
