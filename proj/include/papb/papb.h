// Copyright 2026 The papb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

/* C interface to the papb sequence-training library. Every function returns
 * a papb_status; on failure papb_last_error() describes the problem for the
 * calling thread. Objects are opaque and released with their _free call. */

#ifndef PAPB_PAPB_H_
#define PAPB_PAPB_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PAPB_API __declspec(dllexport)
#else
#define PAPB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum papb_status {
  PAPB_OK = 0,
  PAPB_ERR_ARGUMENT = 1,
  PAPB_ERR_CONFIG = 2,
  PAPB_ERR_PARSE = 3,
  PAPB_ERR_DATA = 4,
  PAPB_ERR_IO = 5,
  PAPB_ERR_NUMERIC = 6,
  PAPB_ERR_RUNTIME = 7
} papb_status;

typedef struct papb_config papb_config;
typedef struct papb_model papb_model;
typedef struct papb_dataset papb_dataset;

typedef struct papb_epoch_metrics {
  int epoch;
  double train_loss;
  double dev_cer;
  double dev_wer;
  double lr_used;
  double wall_seconds;
} papb_epoch_metrics;

typedef void (*papb_epoch_callback)(const papb_epoch_metrics *metrics, void *user);

typedef struct papb_train_summary {
  int epochs;
  int best_epoch;
  double best_dev_cer;
  double last_dev_cer;
} papb_train_summary;

typedef struct papb_score_result {
  double cer;
  double wer;
  size_t scored;
  size_t unscored_refs;
} papb_score_result;

typedef struct papb_gradcheck_result {
  double max_rel_error;
  size_t num_params;
  size_t num_utterances;
  double analytic_at_worst;
  double numeric_at_worst;
  int passed;
  char worst_block[64];
} papb_gradcheck_result;

typedef struct papb_synth_params {
  int vocab_size;
  int len_min;
  int len_max;
  int n;
  int dev_n;
  double noise_sigma;
  int frames_per_char;
  int feat_dim;
  uint64_t seed;
} papb_synth_params;

/* Library version string. */
PAPB_API const char *papb_version(void);

/* Message of the last failed call on this thread ("" if none). */
PAPB_API const char *papb_last_error(void);

/* Process exit code for a status: 0 success, 2 usage or configuration
 * problem (argument, config, parse, missing file), 1 runtime failure. */
PAPB_API int papb_status_exit_code(papb_status status);

/* Releases strings returned by this library. */
PAPB_API void papb_string_free(char *s);

/* Run configuration. `objective` (CE, MBR, SM or PAPB) overrides the
 * document's loss.objective when non-NULL. */
PAPB_API papb_status papb_config_load(const char *path, const char *objective,
                                      papb_config **out);
PAPB_API papb_status papb_config_parse(const char *json_text, const char *objective,
                                       papb_config **out);
PAPB_API void papb_config_free(papb_config *config);
/* Fully materialized configuration as JSON; free with papb_string_free. */
PAPB_API papb_status papb_config_effective_json(const papb_config *config, char **out);

/* Trains and writes effective_config.json, metrics.csv, best.ckpt and
 * last.ckpt to the configured output dir. `init_path` may be NULL;
 * `callback` may be NULL; `summary` may be NULL. */
PAPB_API papb_status papb_train(const papb_config *config, const char *init_path,
                                papb_epoch_callback callback, void *user,
                                papb_train_summary *summary);

PAPB_API papb_status papb_model_load(const char *checkpoint_path, papb_model **out);
PAPB_API void papb_model_free(papb_model *model);
PAPB_API size_t papb_model_num_params(const papb_model *model);

/* Loads line-delimited records. The vocabulary comes from `vocab_path`, or
 * from `model`'s checkpoint when `vocab_path` is NULL. */
PAPB_API papb_status papb_dataset_load(const char *jsonl_path, const char *vocab_path,
                                       const papb_model *model, papb_dataset **out);
PAPB_API void papb_dataset_free(papb_dataset *dataset);
PAPB_API size_t papb_dataset_size(const papb_dataset *dataset);

/* Beam-decodes every utterance into `out_path`, one record per line.
 * `written` (may be NULL) receives the record count. */
PAPB_API papb_status papb_decode(const papb_model *model, const papb_dataset *dataset,
                                 int beam_size, const char *out_path, size_t *written);

/* Aggregate CER% and WER% of top-1 beam outputs. */
PAPB_API papb_status papb_evaluate(const papb_model *model, const papb_dataset *dataset,
                                   int beam_size, double *cer, double *wer);

/* Scores decode records against references by id; `breakdown_path` may be
 * NULL. A hypothesis id missing from the references is PAPB_ERR_CONFIG. */
PAPB_API papb_status papb_score(const char *ref_path, const char *hyp_path,
                                const char *breakdown_path, papb_score_result *out);

/* Finite-difference check of `objective` on a seeded micro-model built from
 * the config. `lambda` < 0 keeps the configured value. A nonzero `corrupt`
 * doubles the analytic gradient. The check itself failing is reported via
 * out->passed, not the status. */
PAPB_API papb_status papb_gradcheck(const papb_config *config, const char *objective,
                                    double eps, double lambda, int corrupt,
                                    papb_gradcheck_result *out);

/* Trains one model per n_tr entry (or reuses a matching run) and evaluates
 * each against every n_de entry on the dev set. `wer` and `cer` (either may
 * be NULL) receive n_tr_count * n_de_count values, row-major by n_tr.
 * Writes sweep.csv to the output dir. */
PAPB_API papb_status papb_sweep(const papb_config *config, const char *init_path,
                                const int *n_tr, size_t n_tr_count, const int *n_de,
                                size_t n_de_count, double *wer, double *cer);

/* Default synthetic task parameters. */
PAPB_API void papb_synth_defaults(papb_synth_params *params);

/* Writes train.jsonl, dev.jsonl, vocab.txt and synth.json into out_dir. */
PAPB_API papb_status papb_synth(const papb_synth_params *params, const char *out_dir);

#ifdef __cplusplus
}
#endif

#endif  /* PAPB_PAPB_H_ */
