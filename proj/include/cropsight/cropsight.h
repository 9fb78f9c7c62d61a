/* C interface to the cropsight leaf-disease pipeline.
 *
 * All functions return a cs_status; CS_OK is 0. On failure the message of
 * the last error on the calling thread is available from cs_last_error().
 * Objects are opaque and released with the matching *_free function.
 * Strings returned through `const char**` stay valid until the owning
 * object is freed.
 */
#ifndef CROPSIGHT_H
#define CROPSIGHT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CS_API __declspec(dllexport)
#else
#define CS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cs_status {
  CS_OK = 0,
  CS_DECODE_ERROR = 1,
  CS_UNSUPPORTED_FORMAT = 2,
  CS_EMPTY_IMAGE = 3,
  CS_INVALID_PARAMS = 4,
  CS_INVALID_BIN_COUNT = 5,
  CS_DEGENERATE_HISTOGRAM = 6,
  CS_DIMENSION_MISMATCH = 7,
  CS_SINGLE_CLASS_DATASET = 8,
  CS_EMPTY_DATASET = 9,
  CS_NO_SPOTS = 10,
  CS_CORRUPT_MODEL = 11,
  CS_PLACEMENT_FAILURE = 12,
  CS_IO_ERROR = 13,
  CS_CYCLE_DETECTED = 14,
  CS_DANGLING_CHILD = 15,
  CS_LEAF_WITHOUT_ENTRY = 16,
  CS_UNKNOWN_NODE = 17,
  CS_INVALID_PATH = 18,
  CS_NOT_FOUND = 19,
  CS_UNDIAGNOSABLE = 20,
  CS_INVALID_TAXONOMY = 21,
  CS_INVALID_CONFIG = 22,
  CS_PAYLOAD_TOO_LARGE = 23,
  CS_INTERNAL = 24
} cs_status;

typedef struct cs_config cs_config;
typedef struct cs_model cs_model;
typedef struct cs_diagnosis cs_diagnosis;
typedef struct cs_report cs_report;
typedef struct cs_server cs_server;

typedef enum cs_class { CS_LEAF_BLAST = 0, CS_BROWN_SPOT = 1 } cs_class;

typedef struct cs_train_options {
  double learning_rate;
  int epochs;
  int batch_size;
  int hidden1;
  int hidden2;
  double l2;
  uint64_t seed;
} cs_train_options;

CS_API const char* cs_version(void);
CS_API const char* cs_last_error(void);
CS_API const char* cs_status_name(cs_status status);

/* Defaults for every field. */
CS_API void cs_train_options_default(cs_train_options* out);

/* Config. cs_config_new gives the built-in defaults. */
CS_API cs_status cs_config_new(cs_config** out);
CS_API cs_status cs_config_load(const char* path, cs_config** out);
CS_API cs_status cs_config_set(cs_config* cfg, const char* key, const char* value);
CS_API void cs_config_free(cs_config* cfg);

/* Synthetic corpus. Writes images, truth masks and manifest.csv. */
CS_API cs_status cs_corpus_generate(int train_per_class, int test_per_class, uint64_t seed, const char* out_dir,
                                    size_t* files_written);

/* Model. `cfg` may be NULL for defaults. */
CS_API cs_status cs_model_train(const char* corpus_dir, const cs_config* cfg, const cs_train_options* opts,
                                cs_model** out);
CS_API cs_status cs_model_load(const char* path, cs_model** out);
CS_API cs_status cs_model_save(const cs_model* model, const char* path);
CS_API void cs_model_free(cs_model* model);

/* Diagnosis. CS_UNDIAGNOSABLE when no spot is found. */
CS_API cs_status cs_diagnose_file(const cs_model* model, const cs_config* cfg, const char* path,
                                  cs_diagnosis** out);
CS_API cs_status cs_diagnose_bytes(const cs_model* model, const cs_config* cfg, const uint8_t* data, size_t len,
                                   const char* image_id, cs_diagnosis** out);
CS_API cs_class cs_diagnosis_class(const cs_diagnosis* d);
CS_API const char* cs_diagnosis_class_name(const cs_diagnosis* d);
CS_API double cs_diagnosis_confidence(const cs_diagnosis* d);
CS_API size_t cs_diagnosis_spot_count(const cs_diagnosis* d);
CS_API const char* cs_diagnosis_json(const cs_diagnosis* d);
CS_API void cs_diagnosis_free(cs_diagnosis* d);

/* Evaluation over the corpus test split. */
CS_API cs_status cs_evaluate(const cs_model* model, const char* corpus_dir, const cs_config* cfg, cs_report** out);
CS_API double cs_report_image_accuracy(const cs_report* r);
CS_API double cs_report_spot_accuracy(const cs_report* r);
CS_API const char* cs_report_text(const cs_report* r);
CS_API const char* cs_report_csv(const cs_report* r);
CS_API void cs_report_free(cs_report* r);

/* HTTP gateway. cs_server_run blocks until cs_server_stop. */
CS_API cs_status cs_server_create(const cs_config* cfg, cs_server** out);
CS_API cs_status cs_server_bind(cs_server* s, int* port);
CS_API cs_status cs_server_run(cs_server* s);
CS_API void cs_server_stop(cs_server* s);
CS_API void cs_server_free(cs_server* s);

#ifdef __cplusplus
}
#endif

#endif
