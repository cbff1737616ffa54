/* adarnn: adaptive forecasting for non-stationary time series.
 *
 * C interface to the shared library. Every entry point takes a session
 * handle, returns a status code, and leaves a human-readable message in
 * the session on failure. Strings returned through out-parameters are
 * heap-allocated and must be released with ada_string_free().
 */
#ifndef ADARNN_H
#define ADARNN_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes; the CLI reuses them as exit codes. */
enum {
    ADA_OK = 0,
    ADA_ERR_CONFIG = 2,   /* invalid configuration, flags or shapes */
    ADA_ERR_DATA = 3,     /* unreadable or unusable data */
    ADA_ERR_NUMERIC = 4,  /* non-finite values in a computation */
    ADA_ERR_DIVERGED = 5  /* training loss became non-finite */
};

typedef struct ada_session ada_session;
typedef struct ada_model ada_model;

ada_session *ada_session_new(void);
void ada_session_free(ada_session *session);

/* Message for the most recent failure on this session; empty on success. */
const char *ada_last_error(const ada_session *session);

void ada_string_free(char *text);

/* Synthetic series with per-regime mean shift `delta`; writes the CSV and,
 * when truth_json_path is non-null, the ground-truth boundary document. */
int ada_synth(ada_session *session, int regimes, int64_t steps_per_regime, int features,
              double delta, uint64_t seed, const char *csv_path, const char *truth_json_path);

/* Characterizes the training range of the configured data into maximally
 * distribution-diverse periods. Returns the split document; also writes
 * it to the configured out.split path when set. */
int ada_split(ada_session *session, const char *config_json, char **split_json_out);

/* Trains the configured model: characterization (inline or from
 * split_json), pre-training, then distribution-matched epochs with
 * boosted step weights. Writes the model and history files named by the
 * configuration and returns a summary document. */
int ada_train(ada_session *session, const char *config_json, const char *split_json,
              char **summary_json_out);

int ada_model_open(ada_session *session, const char *path, ada_model **model_out);
void ada_model_close(ada_model *model);
int ada_model_info(ada_session *session, const ada_model *model, char **info_json_out);

/* Predictions over one chronological range: "train", "valid", "test" or
 * "all". Non-null paths receive the prediction CSV and the aligned truth
 * CSV; a non-null csv_out receives the prediction CSV text. */
int ada_predict(ada_session *session, const ada_model *model, const char *config_json,
                const char *range, const char *pred_csv_path, const char *truth_csv_path,
                char **csv_out);

/* Metrics for aligned prediction/truth files under "regression" or
 * "classification"; returns a flat JSON object. */
int ada_evaluate(ada_session *session, const char *pred_csv_path, const char *truth_csv_path,
                 const char *task, char **metrics_json_out);

#ifdef __cplusplus
}
#endif

#endif /* ADARNN_H */
