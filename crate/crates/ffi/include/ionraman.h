#ifndef IONRAMAN_H
#define IONRAMAN_H

/* Generated by cbindgen from the ionraman-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IrStatus {
  IR_STATUS_OK = 0,
  IR_STATUS_INVALID_ARGUMENT = 1,
  IR_STATUS_SINGULARITY = 2,
  IR_STATUS_NUMERICAL = 3,
  IR_STATUS_PRECONDITION = 4,
  IR_STATUS_TRUNCATION = 5,
  IR_STATUS_DATA = 6,
  IR_STATUS_IO = 7,
  IR_STATUS_JSON = 8,
  IR_STATUS_NULL_POINTER = 9,
  IR_STATUS_PANIC = 10,
} IrStatus;

typedef enum IrPowerMode {
  IR_POWER_MODE_SINGLE_LASER_V = 0,
  IR_POWER_MODE_RAMAN_V = 1,
  IR_POWER_MODE_RAMAN_U = 2,
  IR_POWER_MODE_SATURATION = 3,
} IrPowerMode;

typedef enum IrPulseKind {
  IR_PULSE_KIND_V = 0,
  IR_PULSE_KIND_U = 1,
} IrPulseKind;

// Opaque axial mode system.
typedef struct IrModes IrModes;

// Opaque register state.
typedef struct IrState IrState;

typedef struct IrComplex {
  double re;
  double im;
} IrComplex;

// SI units, angular frequencies in rad/s. Unused fields are NaN (or 0 for
// `n_ions`).
typedef struct IrPowerScenario {
  enum IrPowerMode mode;
  double rabi;
  double detuning;
  double wavelength;
  double lifetime;
  double diameter;
  double eta;
  size_t n_ions;
} IrPowerScenario;

// Pulse parameters; `theta`, `phase`, `chi` and `common_phase` in radians.
typedef struct IrPulse {
  enum IrPulseKind kind;
  double theta;
  double phase;
  double chi;
  double common_phase;
  // Internal level paired with |0⟩ (1 for the qubit).
  uint8_t excited_level;
} IrPulse;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Length in bytes of the last error message of this thread, excluding the
// terminating NUL; 0 when there is none.
size_t ir_last_error_length(void);

// Copies the last error message into `buf` (NUL-terminated, truncated to
// `len`). Returns the full message length excluding the NUL.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t ir_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *ir_version(void);

// Wigner 3j symbol; all arguments are twice the angular momentum.
//
// # Safety
// `result` must be valid for writes.
enum IrStatus ir_wigner3j(int32_t two_j1,
                          int32_t two_j2,
                          int32_t two_j3,
                          int32_t two_m1,
                          int32_t two_m2,
                          int32_t two_m3,
                          double *result);

// Generalised Laguerre polynomial L^a_n(x).
double ir_laguerre(uint32_t a, uint32_t n, double x);

// ⟨m| exp[iξ(a† + a)] |n⟩.
//
// # Safety
// `result` must be valid for writes.
enum IrStatus ir_displacement_element(uint32_t m, uint32_t n, double xi, struct IrComplex *result);

// Laser power (W) for a scenario.
//
// # Safety
// `scenario` must be readable and `result` writable.
enum IrStatus ir_required_power(const struct IrPowerScenario *scenario, double *result);

// Minimum axial frequency (rad/s) for sideband cooling to `nbar`.
//
// # Safety
// `result` must be valid for writes.
enum IrStatus ir_sideband_bound(size_t n_ions,
                                double nbar,
                                double wavelength,
                                double mass,
                                double *result);

// Ground-state Zeeman splitting (rad/s) at `gauss`.
//
// # Safety
// `result` must be valid for writes.
enum IrStatus ir_zeeman_splitting(double gauss, double *result);

// Two-level propagator of a pulse, row-major into `matrix[4]`.
//
// # Safety
// `pulse` must be readable and `matrix` writable for four elements.
enum IrStatus ir_two_level_propagator(const struct IrPulse *pulse, struct IrComplex *matrix);

// Axial modes of an `n_ions` chain.
//
// # Safety
// `modes` must be valid for writes.
enum IrStatus ir_modes_new(size_t n_ions, struct IrModes **modes);

// # Safety
// `modes` must be null or a handle from [`ir_modes_new`] not yet freed.
void ir_modes_free(struct IrModes *modes);

// # Safety
// `modes` must be null or a live handle.
size_t ir_modes_count(const struct IrModes *modes);

// μ_p, the squared frequency of mode `mode` in units of ω_x².
//
// # Safety
// `modes` must be a live handle and `result` writable.
enum IrStatus ir_modes_eigenvalue(const struct IrModes *modes, size_t mode, double *result);

// Component b^(p)_s of the normalised eigenvector of mode p at ion s.
//
// # Safety
// `modes` must be a live handle and `result` writable.
enum IrStatus ir_modes_vector(const struct IrModes *modes, size_t mode, size_t ion, double *result);

// Computational basis state with every mode in the vacuum. `bits` holds
// one internal level per ion.
//
// # Safety
// `bits` must be readable for `n_ions` bytes and `state` writable.
enum IrStatus ir_state_computational(const uint8_t *bits,
                                     size_t n_ions,
                                     uint32_t n_max,
                                     uint8_t levels,
                                     struct IrState **state);

// Parses a state from its JSON representation.
//
// # Safety
// `json` must be a NUL-terminated string and `state` writable.
enum IrStatus ir_state_from_json(const char *json, struct IrState **state);

// Writes the JSON representation into `buf` (NUL-terminated, truncated to
// `len`) and its full length excluding the NUL into `needed`.
//
// # Safety
// `state` must be a live handle, `buf` null or valid for `len` bytes,
// `needed` null or writable.
enum IrStatus ir_state_to_json(const struct IrState *state, char *buf, size_t len, size_t *needed);

// # Safety
// `state` must be null or a handle not yet freed.
void ir_state_free(struct IrState *state);

// # Safety
// `state` must be null or a live handle.
size_t ir_state_dim(const struct IrState *state);

// # Safety
// `state` must be null or a live handle.
double ir_state_norm(const struct IrState *state);

// Copies the amplitudes (ordered with ion 0 and mode 0 most significant)
// into `buf`, which must hold [`ir_state_dim`] elements.
//
// # Safety
// `state` must be a live handle and `buf` writable for `len` elements.
enum IrStatus ir_state_amplitudes(const struct IrState *state, struct IrComplex *buf, size_t len);

// Applies a pulse to ion `ion` in place. With a finite `eta` each pair
// rotates at its phonon-dependent rate; NaN gives the ideal pulse.
//
// # Safety
// `state` must be a live handle and `pulse` readable.
enum IrStatus ir_state_apply_pulse(struct IrState *state,
                                   const struct IrPulse *pulse,
                                   size_t ion,
                                   double eta);

// Controlled-phase gate between `control` and `target` in place, using
// internal level `aux_level` of the target.
//
// # Safety
// `state` must be a live handle.
enum IrStatus ir_state_cz(struct IrState *state,
                          size_t control,
                          size_t target,
                          uint8_t aux_level,
                          double eta);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IONRAMAN_H */
