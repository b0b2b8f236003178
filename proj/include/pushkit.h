/* C interface to the pushkit forward-model library.
 *
 * All functions returning int use 0 for success and a pk_error code
 * otherwise; when err/err_len are provided a human-readable message is
 * copied into the buffer on failure. Handles are opaque and must be
 * released with the matching *_free function.
 */
#ifndef PUSHKIT_H
#define PUSHKIT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum pk_error {
  PK_OK = 0,
  PK_ERR_UNKNOWN = 1,
  PK_ERR_TOO_FEW_POINTS,
  PK_ERR_DEGENERATE_NEIGHBORHOOD,
  PK_ERR_DEGENERATE_CLOUD,
  PK_ERR_NON_POSITIVE_BANDWIDTH,
  PK_ERR_NON_UNIT_QUATERNION,
  PK_ERR_KIND_MISMATCH,
  PK_ERR_NON_FINITE_SCORE,
  PK_ERR_NO_CONTACT,
  PK_ERR_EMPTY_MODEL,
  PK_ERR_EMPTY_FEATURES,
  PK_ERR_LOST_CONTACT,
  PK_ERR_UNSUPPORTED_CONDITION,
  PK_ERR_ALL_VETOED,
  PK_ERR_UNKNOWN_SHAPE,
  PK_ERR_NO_CONTACT_DURING_PUSH,
  PK_ERR_IO,
  PK_ERR_CONFIG,
};

const char* pk_error_name(int code);

typedef struct pk_config pk_config;
typedef struct pk_bundle pk_bundle;
typedef struct pk_report pk_report;

/* Configuration ---------------------------------------------------------- */

/* scale: "desk" or "paper". Returns NULL on unknown scale. */
pk_config* pk_config_preset(const char* scale);
void pk_config_free(pk_config* cfg);

/* Apply key=value overrides from a config file. */
int pk_config_load(pk_config* cfg, const char* path,
                   char* err, size_t err_len);
/* Set a single override, same keys as the config file. */
int pk_config_set(pk_config* cfg, const char* key, const char* value,
                  char* err, size_t err_len);

/* Shapes ----------------------------------------------------------------- */

/* Sample a surface cloud of a named shape and write it as PLY.
 * kind: cube | cuboid | triangular-prism | rounded-prism | cylinder | box.
 */
int pk_gen_shape(const char* kind, const double* dims, int n_dims,
                 double sampling_density, const char* ply_path,
                 char* err, size_t err_len);

/* Training and models ---------------------------------------------------- */

int pk_train(const pk_config* cfg, pk_bundle** out,
             char* err, size_t err_len);
int pk_bundle_save(const pk_bundle* bundle, const char* dir,
                   char* err, size_t err_len);
int pk_bundle_load(const char* dir, pk_bundle** out,
                   char* err, size_t err_len);
/* Deterministic thinning of the motion models to n_pushes training pushes. */
int pk_bundle_subset(const pk_bundle* bundle, int n_pushes, pk_bundle** out,
                     char* err, size_t err_len);
int pk_bundle_total_pushes(const pk_bundle* bundle);
void pk_bundle_free(pk_bundle* bundle);

/* Query and prediction --------------------------------------------------- */

/* Build a query density for a serialized contact model on a point cloud
 * (PLY or CSV), write the density plus n_samples sampled link poses as
 * JSON to out_path. */
int pk_query(const char* contact_model_path, const char* cloud_path,
             int k_q, int n_samples, uint64_t seed, const char* out_path,
             char* err, size_t err_len);

/* Predict the ranked motion list for a novel object cloud.
 * link: "front" | "side"; action: e.g. "linear", "ang-10";
 * predictor: "ro" | "ro3oe" | "ro5oe". Writes JSON to out_path. */
int pk_predict(const pk_config* cfg, const pk_bundle* bundle,
               const char* cloud_path, const char* link, const char* action,
               const char* predictor, uint64_t seed, const char* out_path,
               char* err, size_t err_len);

/* Evaluation ------------------------------------------------------------- */

int pk_evaluate(const pk_config* cfg, const pk_bundle* bundle,
                pk_report** out, char* err, size_t err_len);
int pk_report_write(const pk_report* report, const char* dir,
                    char* err, size_t err_len);
int pk_report_load(const char* csv_path, pk_report** out,
                   char* err, size_t err_len);
/* Mean normalized error for (object, predictor); object may be "total".
 * Returns PK_ERR_CONFIG when the cell does not exist. */
int pk_report_mean(const pk_report* report, const char* object,
                   const char* predictor, double* mean_d_norm,
                   int* count, char* err, size_t err_len);
void pk_report_free(pk_report* report);

#ifdef __cplusplus
}
#endif

#endif /* PUSHKIT_H */
