/* C interface to the eegfb toolkit. Every function returns a status; on
 * failure eegfb_last_error() describes the problem for the calling thread.
 * Handles are opaque and owned by the caller until the matching _free. */
#ifndef EEGFB_H
#define EEGFB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define EEGFB_API __declspec(dllexport)
#else
#define EEGFB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum eegfb_status {
  EEGFB_OK = 0,
  EEGFB_ERR_CONFIG = 2,   /* invalid parameters or configuration */
  EEGFB_ERR_DATA = 3,     /* malformed, missing or inconsistent input */
  EEGFB_ERR_INTERNAL = 4, /* bug or environment failure */
  EEGFB_ERR_TRAINING = 5, /* a model cannot be fitted on the data */
  EEGFB_ERR_ARGUMENT = 6  /* null pointer or buffer too small */
} eegfb_status;

typedef struct eegfb_segment eegfb_segment;
typedef struct eegfb_model eegfb_model;
typedef struct eegfb_ranker eegfb_ranker;

EEGFB_API const char* eegfb_version(void);

/* Message for the last failed call on this thread; empty after success. */
EEGFB_API const char* eegfb_last_error(void);

/* Process exit code for a status: 0, 2 config, 3 data or training, 4 otherwise. */
EEGFB_API int eegfb_exit_code(eegfb_status status);

/* Frees strings returned through char** out-parameters. */
EEGFB_API void eegfb_string_free(char* s);

/* ---- segments ---- */

EEGFB_API eegfb_status eegfb_segment_load(const char* dir, eegfb_segment** out);
EEGFB_API eegfb_status eegfb_segment_save(const eegfb_segment* segment, const char* dir);

/* samples is channel-major: n_channels rows of n_samples volts. */
EEGFB_API eegfb_status eegfb_segment_create(const char* const* channel_labels, size_t n_channels, double sample_rate_hz,
                                            const double* samples, size_t n_samples, eegfb_segment** out);
EEGFB_API void eegfb_segment_free(eegfb_segment* segment);

EEGFB_API size_t eegfb_segment_channels(const eegfb_segment* segment);
EEGFB_API size_t eegfb_segment_samples(const eegfb_segment* segment);
EEGFB_API double eegfb_segment_rate(const eegfb_segment* segment);

/* Copies channel `channel` into out, which must hold eegfb_segment_samples() values. */
EEGFB_API eegfb_status eegfb_segment_row(const eegfb_segment* segment, size_t channel, double* out, size_t capacity);

/* config_json is a run configuration document (NULL for defaults). */
EEGFB_API eegfb_status eegfb_segment_preprocess(const eegfb_segment* segment, const char* config_json,
                                                eegfb_segment** out);

/* Number of features the configuration yields for n_channels. */
EEGFB_API eegfb_status eegfb_feature_count(const char* config_json, size_t n_channels, size_t* out);

/* Writes the feature vector into out; *written receives its length. */
EEGFB_API eegfb_status eegfb_segment_extract(const eegfb_segment* segment, const char* config_json, double* out,
                                             size_t capacity, size_t* written);

/* ---- models ---- */

EEGFB_API eegfb_status eegfb_model_load(const char* path, eegfb_model** out);
EEGFB_API void eegfb_model_free(eegfb_model* model);
EEGFB_API size_t eegfb_model_input_dims(const eegfb_model* model);

/* Standardises raw features and scores them; *satisfied is 1 or 0. Either output may be NULL. */
EEGFB_API eegfb_status eegfb_model_predict(const eegfb_model* model, const double* features, size_t n,
                                           double* decision, int* satisfied);

/* ---- re-ranking ---- */

/* labels_json is a task label file; the pool is the file's or a selected one of pool_size. */
EEGFB_API eegfb_status eegfb_ranker_create(const char* labels_json, size_t pool_size, eegfb_ranker** out);
EEGFB_API void eegfb_ranker_free(eegfb_ranker* ranker);

/* Shows the best remaining judgment; *done is 1 (and *judgment untouched) when none remain. */
EEGFB_API eegfb_status eegfb_ranker_next(eegfb_ranker* ranker, int64_t* judgment, int* done);

/* blame: 0 = weight times relevance, 1 = weight only. */
EEGFB_API eegfb_status eegfb_ranker_feedback(eegfb_ranker* ranker, int64_t judgment, int satisfied, size_t top_t,
                                             int blame);

EEGFB_API eegfb_status eegfb_ranker_weights(const eegfb_ranker* ranker, double* out, size_t capacity, size_t* n);

/* Remaining judgments in current rank order. */
EEGFB_API eegfb_status eegfb_ranker_remaining(const eegfb_ranker* ranker, int64_t* out, size_t capacity, size_t* n);

/* ---- commands ---- */

/* Runs preprocess, extract, train, predict, simulate, report, rerank or synth.
 * overrides_json may set "seed", "data", "out" and "mode" over the config;
 * rerank also needs "labels" and "feedback" paths there. On success
 * *result_json (free with eegfb_string_free) lists outputs and warnings. */
EEGFB_API eegfb_status eegfb_run_command(const char* command, const char* config_json, const char* overrides_json,
                                         char** result_json);

#ifdef __cplusplus
}
#endif

#endif /* EEGFB_H */
