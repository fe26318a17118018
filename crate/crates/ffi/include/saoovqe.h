#ifndef SAOOVQE_H
#define SAOOVQE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum SaoovqeStatus {
  SAOOVQE_STATUS_OK = 0,
  SAOOVQE_STATUS_NULL_POINTER = 1,
  SAOOVQE_STATUS_PARSE = 2,
  SAOOVQE_STATUS_LOAD = 3,
  SAOOVQE_STATUS_DIMENSION = 4,
  SAOOVQE_STATUS_INVALID = 5,
  SAOOVQE_STATUS_NUMERICAL = 6,
  SAOOVQE_STATUS_IO = 7,
  SAOOVQE_STATUS_BUFFER_TOO_SMALL = 8,
  SAOOVQE_STATUS_PANIC = 9,
} SaoovqeStatus;

/**
 * Integrals and starting orbitals.
 */
typedef struct SaoovqeFixture SaoovqeFixture;

/**
 * Result of one SA-OO-VQE calculation.
 */
typedef struct SaoovqeRun SaoovqeRun;

/**
 * Run parameters; fill with [`saoovqe_run_options_default`].
 */
typedef struct SaoovqeRunOptions {
  uintptr_t n_active_elec;
  uintptr_t n_active_orb;
  double weight_a;
  double weight_b;
  double global_tol;
  uintptr_t max_cycles;
  /**
   * Nonzero to add the averaged variance to the cost.
   */
  int32_t use_variance;
  /**
   * Nonzero to skip orbital optimization.
   */
  int32_t no_oo;
} SaoovqeRunOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *saoovqe_last_error(void);

/**
 * Loads an AOINT file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SaoovqeStatus saoovqe_fixture_load_aoint(const char *path, struct SaoovqeFixture **out);

/**
 * Loads an FCIDUMP file; its orbitals become the starting MOs.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SaoovqeStatus saoovqe_fixture_load_fcidump(const char *path, struct SaoovqeFixture **out);

/**
 * # Safety
 * `fixture` must come from a load function and not be used afterwards.
 */
void saoovqe_fixture_free(struct SaoovqeFixture *fixture);

/**
 * Number of MOs and electrons.
 *
 * # Safety
 * All pointers must be valid.
 */
enum SaoovqeStatus saoovqe_fixture_dims(const struct SaoovqeFixture *fixture,
                                        uintptr_t *n_mo,
                                        uintptr_t *n_elec);

struct SaoovqeRunOptions saoovqe_run_options_default(void);

/**
 * Runs SA-OO-VQE with a contiguous active space.
 *
 * # Safety
 * All pointers must be valid.
 */
enum SaoovqeStatus saoovqe_run(const struct SaoovqeFixture *fixture,
                               const struct SaoovqeRunOptions *options,
                               struct SaoovqeRun **out);

/**
 * # Safety
 * `run` must come from [`saoovqe_run`] and not be used afterwards.
 */
void saoovqe_run_free(struct SaoovqeRun *run);

/**
 * Final state energies and outer-loop statistics.
 *
 * # Safety
 * All pointers must be valid.
 */
enum SaoovqeStatus saoovqe_run_energies(const struct SaoovqeRun *run,
                                        double *e_a,
                                        double *e_b,
                                        double *e_sa,
                                        uintptr_t *n_cycles,
                                        int32_t *converged);

/**
 * Copies the optimized circuit parameters. `len` receives the parameter
 * count; the call fails with `BufferTooSmall` if `capacity` is less.
 *
 * # Safety
 * `buf` must hold `capacity` doubles; `len` must be valid.
 */
enum SaoovqeStatus saoovqe_run_theta(const struct SaoovqeRun *run,
                                     double *buf,
                                     uintptr_t capacity,
                                     uintptr_t *len);

/**
 * Lowest CASCI energies of the fixture in its stored orbitals.
 *
 * # Safety
 * `energies` must hold `n_states` doubles; `count` must be valid.
 */
enum SaoovqeStatus saoovqe_casci(const struct SaoovqeFixture *fixture,
                                 uintptr_t n_active_elec,
                                 uintptr_t n_active_orb,
                                 uintptr_t n_states,
                                 int32_t singlets_only,
                                 double *energies,
                                 uintptr_t *count);

/**
 * Gate counts of the compiled ansatz over `n_active_orb` orbitals.
 *
 * # Safety
 * Output pointers must be valid.
 */
enum SaoovqeStatus saoovqe_gate_count(uintptr_t n_active_orb,
                                      uintptr_t *total,
                                      uintptr_t *single_qubit,
                                      uintptr_t *two_qubit);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SAOOVQE_H */
