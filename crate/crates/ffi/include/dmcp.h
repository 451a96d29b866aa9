#ifndef DMCP_H
#define DMCP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum DmcpStatus {
  DMCP_STATUS_OK = 0,
  DMCP_STATUS_NULL_POINTER = 1,
  DMCP_STATUS_INVALID_INPUT = 2,
  DMCP_STATUS_NO_CONVERGENCE = 3,
  DMCP_STATUS_OUT_OF_RANGE = 4,
  DMCP_STATUS_DEGENERATE = 5,
  DMCP_STATUS_CALIBRATION = 6,
  DMCP_STATUS_BUFFER_TOO_SMALL = 7,
  DMCP_STATUS_PANIC = 8,
} DmcpStatus;

// Opaque composite pulse sequence.
typedef struct DmcpSequence DmcpSequence;

typedef struct DmcpComplex {
  double re;
  double im;
} DmcpComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null.
//
// The pointer stays valid until the next failing call on the same thread.
const char *dmcp_last_error(void);

// Library version as a static NUL-terminated string.
const char *dmcp_version(void);

// Looks up a built-in table row such as `"pi-n4-o1"`.
//
// # Safety
// `name` must be a NUL-terminated string; `out` a writable pointer slot.
enum DmcpStatus dmcp_sequence_from_table(const char *name, struct DmcpSequence **out);

// Sequence of unit-coupling segments of area π with the given ratios.
//
// # Safety
// `ratios` must point to `len` doubles; `out` must be a writable pointer slot.
enum DmcpStatus dmcp_sequence_from_ratios(const double *ratios,
                                          size_t len,
                                          double theta,
                                          uint8_t order,
                                          bool universal,
                                          struct DmcpSequence **out);

// Solves for a universal sequence of `n` pieces from the starting ratios
// `init` (`n/2` values) and verifies it at tolerance 10⁻³.
//
// # Safety
// `init` must point to `init_len` doubles; `out` must be a writable pointer slot.
enum DmcpStatus dmcp_derive(double theta,
                            size_t n,
                            uint8_t order,
                            const double *init,
                            size_t init_len,
                            struct DmcpSequence **out);

// Releases a handle; null is ignored.
//
// # Safety
// `seq` must be null or a handle not yet freed.
void dmcp_sequence_free(struct DmcpSequence *seq);

// Number of segments, or 0 for a null handle.
//
// # Safety
// `seq` must be null or a live handle.
size_t dmcp_sequence_len(const struct DmcpSequence *seq);

// Copies the detuning ratios into `buf`.
//
// `written` receives the segment count even when `cap` is too small.
//
// # Safety
// `buf` must have room for `cap` doubles; `written` may be null.
enum DmcpStatus dmcp_sequence_ratios(const struct DmcpSequence *seq,
                                     double *buf,
                                     size_t cap,
                                     size_t *written);

// Propagator under uniform errors, row-major into `out[4]`.
//
// # Safety
// `out` must point to 4 writable `DmcpComplex` values.
enum DmcpStatus dmcp_compose(const struct DmcpSequence *seq,
                             double area_error,
                             double coupling_error,
                             double detuning_error,
                             double gamma,
                             struct DmcpComplex *out);

// `1 − |tr(U†V)|/2` between the propagator at the given area error and the target.
//
// # Safety
// `out` must be a writable double.
enum DmcpStatus dmcp_gate_distance(const struct DmcpSequence *seq, double area_error, double *out);

// Largest area error keeping `1 − F ≤ threshold` from `|0⟩`.
//
// # Safety
// `out` must be a writable double.
enum DmcpStatus dmcp_robustness_radius(const struct DmcpSequence *seq,
                                       double threshold,
                                       double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DMCP_H */
