#ifndef LENGTHLOGD_H
#define LENGTHLOGD_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LlStatus {
  LL_STATUS_OK = 0,
  LL_STATUS_NULL_POINTER = 1,
  LL_STATUS_INVALID_UTF8 = 2,
  LL_STATUS_INVALID_ARGUMENT = 3,
  LL_STATUS_PARSE_ERROR = 4,
  LL_STATUS_IO_ERROR = 5,
  LL_STATUS_MODEL_ERROR = 6,
  LL_STATUS_PREDICT_ERROR = 7,
  LL_STATUS_BUFFER_TOO_SMALL = 8,
  LL_STATUS_PANIC = 99,
} LlStatus;

typedef enum LlCategory {
  LL_CATEGORY_SHORT = 0,
  LL_CATEGORY_MEDIUM = 1,
  LL_CATEGORY_LONG = 2,
} LlCategory;

/**
 * Ensemble selector for [`ll_model_predict`].
 */
typedef enum LlMode {
  /**
   * The mode chosen for the routed category at training time.
   */
  LL_MODE_ACTIVE = 0,
  LL_MODE_STACKING = 1,
  LL_MODE_FIXED = 2,
} LlMode;

/**
 * Opaque trained model.
 */
typedef struct LlModel LlModel;

/**
 * Opaque parsed molecule.
 */
typedef struct LlMolecule LlMolecule;

typedef struct LlPrediction {
  /**
   * An `LlCategory` value.
   */
  int32_t category;
  /**
   * `LL_MODE_STACKING` or `LL_MODE_FIXED`.
   */
  int32_t mode;
  size_t smiles_length;
  double logd;
  double y_lr;
  double y_rf;
  double y_xgb;
} LlPrediction;

typedef struct LlDescriptors {
  size_t atom_count;
  size_t bond_count;
  size_t ring_count;
  size_t smiles_length;
  double mol_wt;
  double exact_mol_wt;
  size_t num_h_donors;
  size_t num_h_acceptors;
  size_t num_rotatable_bonds;
  double fraction_csp3;
  uint64_t wiener;
  double chi0;
  double chi1;
  double kappa1;
  double kappa2;
  double kappa3;
  double balaban_j;
} LlDescriptors;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ll_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated to
 * `len` bytes, always NUL-terminated when `len > 0`). Returns the size
 * needed for the whole message including the NUL, or 0 when there is none.
 *
 * # Safety
 * `buf` must be NULL or point to `len` writable bytes.
 */
size_t ll_last_error_message(char *buf, size_t len);

/**
 * Loads a model artifact from a JSON file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum LlStatus ll_model_load(const char *path, struct LlModel **out);

/**
 * Releases a model. NULL is ignored.
 *
 * # Safety
 * `model` must come from [`ll_model_load`] and not be used afterwards.
 */
void ll_model_free(struct LlModel *model);

/**
 * Number of external descriptor columns the model expects.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum LlStatus ll_model_external_count(const struct LlModel *model, size_t *out);

/**
 * Name of external column `index`, copied into `buf`. `needed` (optional)
 * receives the buffer size required.
 *
 * # Safety
 * `model` must be a live handle; `buf` NULL or `len` writable bytes;
 * `needed` NULL or writable.
 */
enum LlStatus ll_model_external_name(const struct LlModel *model,
                                     size_t index,
                                     char *buf,
                                     size_t len,
                                     size_t *needed);

/**
 * Predicts logD for one SMILES. `names`/`values` hold `n_external` external
 * descriptor values (both may be NULL when `n_external` is 0). `mode` is an
 * `LlMode` value.
 *
 * # Safety
 * `model` must be a live handle, `smiles` a NUL-terminated string, `names`
 * and `values` arrays of `n_external` elements, `out` writable.
 */
enum LlStatus ll_model_predict(const struct LlModel *model,
                               const char *smiles,
                               const char *const *names,
                               const double *values,
                               size_t n_external,
                               int32_t mode,
                               struct LlPrediction *out);

/**
 * Character length of a SMILES string as used for routing.
 *
 * # Safety
 * `smiles` must be NUL-terminated; `out` writable.
 */
enum LlStatus ll_smiles_length(const char *smiles, size_t *out);

/**
 * Routes a SMILES length given the two percentile cut points.
 *
 * # Safety
 * `out` must be writable.
 */
enum LlStatus ll_categorize(size_t length, double q33, double q66, enum LlCategory *out);

/**
 * Parses a SMILES string into a molecule handle.
 *
 * # Safety
 * `smiles` must be NUL-terminated; `out` writable.
 */
enum LlStatus ll_molecule_parse(const char *smiles, struct LlMolecule **out);

/**
 * Releases a molecule. NULL is ignored.
 *
 * # Safety
 * `mol` must come from [`ll_molecule_parse`] and not be used afterwards.
 */
void ll_molecule_free(struct LlMolecule *mol);

/**
 * Scalar topological and physicochemical descriptors of a molecule.
 *
 * # Safety
 * `mol` must be a live handle; `out` writable.
 */
enum LlStatus ll_molecule_descriptors(const struct LlMolecule *mol, struct LlDescriptors *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LENGTHLOGD_H */
