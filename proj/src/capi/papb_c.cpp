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

#include "papb/papb.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <optional>
#include <exception>
#include <new>
#include <string>

#include "json.hpp"
#include "papb/cli/commands.hpp"
#include "papb/error.hpp"
#include "papb/model/checkpoint.hpp"

struct papb_config {
  papb::cli::RunConfig run;
};

struct papb_model {
  papb::model::Seq2Seq net;
};

struct papb_dataset {
  papb::data::Dataset data;
};

namespace {

thread_local std::string g_last_error;

papb_status status_of(papb::ErrorKind kind) {
  using papb::ErrorKind;
  switch (kind) {
    case ErrorKind::kArgument: return PAPB_ERR_ARGUMENT;
    case ErrorKind::kConfig: return PAPB_ERR_CONFIG;
    case ErrorKind::kParse: return PAPB_ERR_PARSE;
    case ErrorKind::kData: return PAPB_ERR_DATA;
    case ErrorKind::kIo: return PAPB_ERR_IO;
    case ErrorKind::kNumeric: return PAPB_ERR_NUMERIC;
    case ErrorKind::kRuntime: return PAPB_ERR_RUNTIME;
  }
  return PAPB_ERR_RUNTIME;
}

// Runs `body`, translating exceptions into a status and the thread's last
// error message.
template <class F>
papb_status guarded(F &&body) {
  try {
    body();
    g_last_error.clear();
    return PAPB_OK;
  } catch (const papb::Error &e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const nlohmann::json::exception &e) {
    g_last_error = e.what();
    return PAPB_ERR_CONFIG;
  } catch (const std::bad_alloc &) {
    g_last_error = "out of memory";
    return PAPB_ERR_RUNTIME;
  } catch (const std::exception &e) {
    g_last_error = e.what();
    return PAPB_ERR_RUNTIME;
  } catch (...) {
    g_last_error = "unknown error";
    return PAPB_ERR_RUNTIME;
  }
}

void require(const void *p, const char *what) {
  if (p == nullptr) throw papb::ArgumentError(std::string(what) + " must not be NULL");
}

std::optional<papb::loss::Objective> objective_arg(const char *objective) {
  if (objective == nullptr) return std::nullopt;
  return papb::loss::parse_objective(objective);
}

std::string str_or_empty(const char *s) { return s == nullptr ? std::string() : s; }

}  // namespace

extern "C" {

const char *papb_version(void) { return "1.0.0"; }

const char *papb_last_error(void) { return g_last_error.c_str(); }

int papb_status_exit_code(papb_status status) {
  switch (status) {
    case PAPB_OK: return 0;
    case PAPB_ERR_ARGUMENT:
    case PAPB_ERR_CONFIG:
    case PAPB_ERR_PARSE:
    case PAPB_ERR_IO: return 2;
    default: return 1;
  }
}

void papb_string_free(char *s) { delete[] s; }

papb_status papb_config_load(const char *path, const char *objective, papb_config **out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    auto cfg = std::make_unique<papb_config>();
    cfg->run = papb::cli::load_run_config(path, objective_arg(objective));
    *out = cfg.release();
  });
}

papb_status papb_config_parse(const char *json_text, const char *objective, papb_config **out) {
  return guarded([&] {
    require(json_text, "json_text");
    require(out, "out");
    *out = nullptr;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error &e) {
      throw papb::ParseError(std::string("config: ") + e.what());
    }
    auto cfg = std::make_unique<papb_config>();
    cfg->run = papb::cli::parse_run_config(doc, objective_arg(objective));
    *out = cfg.release();
  });
}

void papb_config_free(papb_config *config) { delete config; }

papb_status papb_config_effective_json(const papb_config *config, char **out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    const std::string text = papb::cli::to_json(config->run).dump(2);
    char *buf = new char[text.size() + 1];
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out = buf;
  });
}

papb_status papb_train(const papb_config *config, const char *init_path,
                       papb_epoch_callback callback, void *user, papb_train_summary *summary) {
  return guarded([&] {
    require(config, "config");
    auto on_epoch = [&](const papb::train::EpochMetrics &m) {
      if (!callback) return;
      const papb_epoch_metrics cm{m.epoch,   m.train_loss, m.dev_cer,
                                  m.dev_wer, m.lr_used,    m.wall_seconds};
      callback(&cm, user);
    };
    const papb::cli::TrainOutcome r =
        papb::cli::run_train(config->run, str_or_empty(init_path), on_epoch);
    if (summary) {
      summary->epochs = r.epochs;
      summary->best_epoch = r.best_epoch;
      summary->best_dev_cer = r.best_dev_cer;
      summary->last_dev_cer = r.metrics.empty() ? 0.0 : r.metrics.back().dev_cer;
    }
  });
}

papb_status papb_model_load(const char *checkpoint_path, papb_model **out) {
  return guarded([&] {
    require(checkpoint_path, "checkpoint_path");
    require(out, "out");
    *out = nullptr;
    auto m = std::make_unique<papb_model>();
    m->net = papb::model::load_checkpoint(checkpoint_path);
    *out = m.release();
  });
}

void papb_model_free(papb_model *model) { delete model; }

size_t papb_model_num_params(const papb_model *model) {
  return model == nullptr ? 0 : model->net.num_params();
}

papb_status papb_dataset_load(const char *jsonl_path, const char *vocab_path,
                              const papb_model *model, papb_dataset **out) {
  return guarded([&] {
    require(jsonl_path, "jsonl_path");
    require(out, "out");
    *out = nullptr;
    auto d = std::make_unique<papb_dataset>();
    d->data = papb::cli::load_dataset_for(jsonl_path, str_or_empty(vocab_path),
                                          model ? &model->net : nullptr);
    *out = d.release();
  });
}

void papb_dataset_free(papb_dataset *dataset) { delete dataset; }

size_t papb_dataset_size(const papb_dataset *dataset) {
  return dataset == nullptr ? 0 : dataset->data.utterances.size();
}

papb_status papb_decode(const papb_model *model, const papb_dataset *dataset, int beam_size,
                        const char *out_path, size_t *written) {
  return guarded([&] {
    require(model, "model");
    require(dataset, "dataset");
    require(out_path, "out_path");
    const std::size_t n = papb::cli::run_decode(model->net, dataset->data, beam_size, out_path);
    if (written) *written = n;
  });
}

papb_status papb_evaluate(const papb_model *model, const papb_dataset *dataset, int beam_size,
                          double *cer, double *wer) {
  return guarded([&] {
    require(model, "model");
    require(dataset, "dataset");
    if (beam_size < 1) throw papb::ArgumentError("evaluate: beam must be >= 1");
    const papb::train::EvalResult r = papb::train::evaluate(model->net, dataset->data, beam_size);
    if (cer) *cer = r.cer;
    if (wer) *wer = r.wer;
  });
}

papb_status papb_score(const char *ref_path, const char *hyp_path, const char *breakdown_path,
                       papb_score_result *out) {
  return guarded([&] {
    require(ref_path, "ref_path");
    require(hyp_path, "hyp_path");
    require(out, "out");
    const papb::cli::ScoreOutcome r =
        papb::cli::run_score(ref_path, hyp_path, str_or_empty(breakdown_path));
    *out = papb_score_result{r.cer, r.wer, r.scored, r.unscored_refs};
  });
}

papb_status papb_gradcheck(const papb_config *config, const char *objective, double eps,
                           double lambda, int corrupt, papb_gradcheck_result *out) {
  return guarded([&] {
    require(config, "config");
    require(objective, "objective");
    require(out, "out");
    std::optional<double> lam;
    if (lambda >= 0.0) lam = lambda;
    const papb::cli::GradcheckOutcome r = papb::cli::run_gradcheck(
        config->run, papb::loss::parse_objective(objective), eps, lam, corrupt != 0);
    *out = papb_gradcheck_result{};
    out->max_rel_error = r.max_rel_error;
    out->num_params = r.num_params;
    out->num_utterances = r.num_utterances;
    out->analytic_at_worst = r.analytic_at_worst;
    out->numeric_at_worst = r.numeric_at_worst;
    out->passed = r.passed ? 1 : 0;
    std::strncpy(out->worst_block, r.worst_block.c_str(), sizeof out->worst_block - 1);
  });
}

papb_status papb_sweep(const papb_config *config, const char *init_path, const int *n_tr,
                       size_t n_tr_count, const int *n_de, size_t n_de_count, double *wer,
                       double *cer) {
  return guarded([&] {
    require(config, "config");
    require(n_tr, "n_tr");
    require(n_de, "n_de");
    const std::vector<int> ntr(n_tr, n_tr + n_tr_count);
    const std::vector<int> nde(n_de, n_de + n_de_count);
    const papb::train::SweepResult r =
        papb::cli::run_sweep(config->run, str_or_empty(init_path), ntr, nde);
    for (std::size_t i = 0; i < ntr.size(); ++i)
      for (std::size_t j = 0; j < nde.size(); ++j) {
        if (wer) wer[i * nde.size() + j] = r.wer[i][j];
        if (cer) cer[i * nde.size() + j] = r.cer[i][j];
      }
  });
}

void papb_synth_defaults(papb_synth_params *params) {
  if (params == nullptr) return;
  const papb::cli::SynthSpec s;
  *params = papb_synth_params{s.params.vocab_size, s.params.len_min,        s.params.len_max,
                              s.params.n,          s.dev_n,                 s.params.noise_sigma,
                              s.params.frames_per_char, s.params.feat_dim, s.params.seed};
}

papb_status papb_synth(const papb_synth_params *params, const char *out_dir) {
  return guarded([&] {
    require(params, "params");
    require(out_dir, "out_dir");
    papb::cli::SynthSpec s;
    s.params.vocab_size = params->vocab_size;
    s.params.len_min = params->len_min;
    s.params.len_max = params->len_max;
    s.params.n = params->n;
    s.dev_n = params->dev_n;
    s.params.noise_sigma = params->noise_sigma;
    s.params.frames_per_char = params->frames_per_char;
    s.params.feat_dim = params->feat_dim;
    s.params.seed = params->seed;
    papb::cli::run_synth(s, out_dir);
  });
}

}  // extern "C"
