#ifndef IRDECO_H
#define IRDECO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IrdecoStatus {
  IRDECO_STATUS_OK = 0,
  IRDECO_STATUS_NULL_POINTER = 1,
  IRDECO_STATUS_DOMAIN = 2,
  IRDECO_STATUS_CONTRACT = 3,
  IRDECO_STATUS_TRUNCATION = 4,
  IRDECO_STATUS_CONFIG = 5,
  IRDECO_STATUS_IO = 6,
  IRDECO_STATUS_PANIC = 7,
} IrdecoStatus;

typedef struct IrdecoBranchSet IrdecoBranchSet;

typedef struct IrdecoDensity IrdecoDensity;

typedef struct IrdecoEvent IrdecoEvent;

typedef struct IrdecoModel IrdecoModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or an empty string.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *irdeco_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *irdeco_version(void);

/**
 * Builds an elastic c.m.s. event; energies and masses in units of `m_e`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum IrdecoStatus irdeco_event_new(double sqrt_s,
                                   double theta,
                                   double phi,
                                   double m_e,
                                   double m_nu,
                                   struct IrdecoEvent **out);

/**
 * # Safety
 * `event` must be null or a handle from [`irdeco_event_new`] not yet freed.
 */
void irdeco_event_free(struct IrdecoEvent *event);

/**
 * Radiation model with the given quadrature and fine-structure constant.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum IrdecoStatus irdeco_model_new(size_t energy_nodes_per_decade,
                                   size_t polar_nodes,
                                   size_t azimuth_nodes,
                                   double alpha,
                                   struct IrdecoModel **out);

/**
 * # Safety
 * `model` must be null or a handle from [`irdeco_model_new`] not yet freed.
 */
void irdeco_model_free(struct IrdecoModel *model);

/**
 * `N̄` of `event` over `[k_min, k_max]`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum IrdecoStatus irdeco_mean_photon_number(const struct IrdecoModel *model,
                                            const struct IrdecoEvent *event,
                                            double k_min,
                                            double k_max,
                                            double *out);

/**
 * `exp(−V)`, the no-emission amplitude of `event`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum IrdecoStatus irdeco_vacuum_persistence(const struct IrdecoModel *model,
                                            const struct IrdecoEvent *event,
                                            double k_min,
                                            double k_max,
                                            double *out);

/**
 * `⟨γ^m|γ^l⟩` as real and imaginary parts.
 *
 * # Safety
 * Handles must be live; `out_re` and `out_im` must be writable.
 */
enum IrdecoStatus irdeco_branch_overlap(const struct IrdecoModel *model,
                                        const struct IrdecoEvent *event_l,
                                        const struct IrdecoEvent *event_m,
                                        double k_min,
                                        double k_max,
                                        double *out_re,
                                        double *out_im);

/**
 * Branch ensemble on a `polar × azimuth` c.m.s. grid with all-left
 * helicities, plus the unscattered branch of weight `m0_weight`.
 *
 * # Safety
 * `model` must be live; `out` must be writable.
 */
enum IrdecoStatus irdeco_branch_set_new(const struct IrdecoModel *model,
                                        double sqrt_s,
                                        double m_e,
                                        double m_nu,
                                        size_t polar_nodes,
                                        size_t azimuth_nodes,
                                        double m0_weight,
                                        double coupling,
                                        struct IrdecoBranchSet **out);

/**
 * Number of branches, including the unscattered one; 0 for null.
 *
 * # Safety
 * `set` must be null or live.
 */
size_t irdeco_branch_set_len(const struct IrdecoBranchSet *set);

/**
 * # Safety
 * `set` must be null or a handle from [`irdeco_branch_set_new`] not yet freed.
 */
void irdeco_branch_set_free(struct IrdecoBranchSet *set);

/**
 * Reduced density matrix of `set` at `[k_min, k_max]`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum IrdecoStatus irdeco_density_new(const struct IrdecoBranchSet *set,
                                     const struct IrdecoModel *model,
                                     double k_min,
                                     double k_max,
                                     struct IrdecoDensity **out);

/**
 * Matrix dimension; 0 for null.
 *
 * # Safety
 * `rho` must be null or live.
 */
size_t irdeco_density_dim(const struct IrdecoDensity *rho);

/**
 * `tr ρ²`.
 *
 * # Safety
 * `rho` must be live; `out` must be writable.
 */
enum IrdecoStatus irdeco_density_purity(const struct IrdecoDensity *rho, double *out);

/**
 * Element `ρ_lm`.
 *
 * # Safety
 * `rho` must be live; `out_re` and `out_im` must be writable.
 */
enum IrdecoStatus irdeco_density_get(const struct IrdecoDensity *rho,
                                     size_t l,
                                     size_t m,
                                     double *out_re,
                                     double *out_im);

/**
 * # Safety
 * `rho` must be null or a handle from [`irdeco_density_new`] not yet freed.
 */
void irdeco_density_free(struct IrdecoDensity *rho);

/**
 * `σ_R/σ_L` for the incoming electron at the given c.m.s. energy. Zero
 * up to rounding when `m_nu` is zero.
 *
 * # Safety
 * `out` must be writable.
 */
enum IrdecoStatus irdeco_helicity_ratio(double sqrt_s,
                                        double m_e,
                                        double m_nu,
                                        double coupling,
                                        double *out);

/**
 * Isotropic restoration frequency within `epsilon` and its binomial error.
 *
 * # Safety
 * `out_p` and `out_sigma` must be writable.
 */
enum IrdecoStatus irdeco_restoration_mc(double sqrt_s,
                                        double epsilon,
                                        uint64_t samples,
                                        uint64_t seed,
                                        double *out_p,
                                        double *out_sigma);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IRDECO_H */
