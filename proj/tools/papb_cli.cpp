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

// Command-line front end. Links only the C interface.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "papb/papb.h"

namespace {

int fail(papb_status st) {
  std::fprintf(stderr, "error: %s\n", papb_last_error());
  return papb_status_exit_code(st);
}

// Owns a C handle and calls its release function.
template <class T, void (*Free)(T *)>
struct Handle {
  T *p = nullptr;
  ~Handle() { Free(p); }
};

using Config = Handle<papb_config, papb_config_free>;
using Model = Handle<papb_model, papb_model_free>;
using Dataset = Handle<papb_dataset, papb_dataset_free>;

const char *opt(const std::string &s) { return s.empty() ? nullptr : s.c_str(); }

void print_epoch(const papb_epoch_metrics *m, void *) {
  std::fprintf(stderr, "epoch %3d  loss %.4f  dev_cer %6.2f%%  dev_wer %6.2f%%  lr %.4g  %.1fs\n",
               m->epoch, m->train_loss, m->dev_cer, m->dev_wer, m->lr_used, m->wall_seconds);
}

void print_matrix(const char *title, const std::vector<int> &ntr, const std::vector<int> &nde,
                  const std::vector<double> &cells) {
  std::printf("%-10s", title);
  for (int d : nde) std::printf("  %8s", ("N_de=" + std::to_string(d)).c_str());
  std::printf("\n");
  for (std::size_t i = 0; i < ntr.size(); ++i) {
    std::printf("%-10s", ("N_tr=" + std::to_string(ntr[i])).c_str());
    for (std::size_t j = 0; j < nde.size(); ++j) std::printf("  %8.2f", cells[i * nde.size() + j]);
    std::printf("\n");
  }
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"papb: attention encoder-decoder training with beam-search objectives"};
  app.require_subcommand(1);
  app.set_version_flag("--version", papb_version());

  // synth
  papb_synth_params sp;
  papb_synth_defaults(&sp);
  std::string synth_out;
  auto *synth = app.add_subcommand("synth", "Generate a synthetic transduction corpus");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--vocab-size", sp.vocab_size, "Number of characters")->capture_default_str();
  synth->add_option("--len-min", sp.len_min, "Shortest string")->capture_default_str();
  synth->add_option("--len-max", sp.len_max, "Longest string")->capture_default_str();
  synth->add_option("--n", sp.n, "Training utterances")->capture_default_str();
  synth->add_option("--dev-n", sp.dev_n, "Dev utterances")->capture_default_str();
  synth->add_option("--sigma", sp.noise_sigma, "Feature noise scale")->capture_default_str();
  synth->add_option("--frames-per-char", sp.frames_per_char, "Frames per character")
      ->capture_default_str();
  synth->add_option("--feat-dim", sp.feat_dim, "Feature dimension")->capture_default_str();
  synth->add_option("--seed", sp.seed, "Random seed")->capture_default_str();

  // train
  std::string train_cfg, train_init, train_obj;
  auto *train = app.add_subcommand("train", "Train a model from a run config");
  train->add_option("config", train_cfg, "Run config (JSON)")->required();
  train->add_option("--init", train_init, "Warm-start checkpoint");
  train->add_option("--objective", train_obj, "CE, MBR, SM or PAPB");

  // decode
  std::string dec_ckpt, dec_data, dec_vocab, dec_out;
  int dec_beam = 10;
  auto *decode = app.add_subcommand("decode", "Beam-decode a dataset");
  decode->add_option("checkpoint", dec_ckpt, "Model checkpoint")->required();
  decode->add_option("dataset", dec_data, "Dataset (line-delimited records)")->required();
  decode->add_option("--vocab", dec_vocab, "Vocabulary file (default: checkpoint symbols)");
  decode->add_option("--beam", dec_beam, "Beam size")->capture_default_str();
  decode->add_option("--out", dec_out, "Decode record output")->required();

  // evaluate
  std::string ev_ckpt, ev_data, ev_vocab;
  int ev_beam = 10;
  auto *evaluate = app.add_subcommand("evaluate", "Print CER/WER of a checkpoint on a dataset");
  evaluate->add_option("checkpoint", ev_ckpt, "Model checkpoint")->required();
  evaluate->add_option("dataset", ev_data, "Dataset (line-delimited records)")->required();
  evaluate->add_option("--vocab", ev_vocab, "Vocabulary file (default: checkpoint symbols)");
  evaluate->add_option("--beam", ev_beam, "Beam size")->capture_default_str();

  // score
  std::string sc_ref, sc_hyp, sc_breakdown;
  auto *score = app.add_subcommand("score", "Score decode records against references");
  score->add_option("ref", sc_ref, "Reference dataset")->required();
  score->add_option("hyp", sc_hyp, "Decode records")->required();
  score->add_option("--breakdown", sc_breakdown,
                    "Per-utterance CSV (default: <hyp>.breakdown.csv)");

  // gradcheck
  std::string gc_cfg, gc_obj;
  double gc_eps = 1e-4;
  double gc_lambda = -1.0;
  bool gc_corrupt = false;
  auto *gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  gradcheck->add_option("config", gc_cfg, "Run config with a tiny model")->required();
  gradcheck->add_option("--objective", gc_obj, "CE, MBR, SM or PAPB")->required();
  gradcheck->add_option("--eps", gc_eps, "Central-difference step")->capture_default_str();
  gradcheck->add_option("--lambda", gc_lambda, "CE weight added to sequence objectives");
  gradcheck->add_flag("--corrupt-gradient", gc_corrupt, "Double the analytic gradient");

  // sweep
  std::string sw_cfg, sw_init;
  std::vector<int> sw_ntr{2, 5, 10}, sw_nde{2, 5, 10};
  auto *sweep = app.add_subcommand("sweep", "Train/decode beam-size grid");
  sweep->add_option("config", sw_cfg, "Run config")->required();
  sweep->add_option("--init", sw_init, "Warm-start checkpoint");
  sweep->add_option("--ntr", sw_ntr, "Training beam sizes")->delimiter(',')->capture_default_str();
  sweep->add_option("--nde", sw_nde, "Decoding beam sizes")->delimiter(',')->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  if (*synth) {
    papb_status st = papb_synth(&sp, synth_out.c_str());
    if (st != PAPB_OK) return fail(st);
    std::printf("wrote %s/{train.jsonl,dev.jsonl,vocab.txt}\n", synth_out.c_str());
    return 0;
  }

  if (*train) {
    Config cfg;
    papb_status st = papb_config_load(train_cfg.c_str(), opt(train_obj), &cfg.p);
    if (st != PAPB_OK) return fail(st);
    papb_train_summary sum{};
    st = papb_train(cfg.p, opt(train_init), print_epoch, nullptr, &sum);
    if (st != PAPB_OK) return fail(st);
    std::printf("trained %d epochs; best dev CER %.2f%% at epoch %d\n", sum.epochs,
                sum.best_dev_cer, sum.best_epoch);
    return 0;
  }

  if (*decode || *evaluate) {
    const std::string &ckpt = *decode ? dec_ckpt : ev_ckpt;
    const std::string &data = *decode ? dec_data : ev_data;
    const std::string &vocab = *decode ? dec_vocab : ev_vocab;
    Model model;
    papb_status st = papb_model_load(ckpt.c_str(), &model.p);
    if (st != PAPB_OK) return fail(st);
    Dataset ds;
    st = papb_dataset_load(data.c_str(), opt(vocab), model.p, &ds.p);
    if (st != PAPB_OK) return fail(st);
    if (*decode) {
      std::size_t n = 0;
      st = papb_decode(model.p, ds.p, dec_beam, dec_out.c_str(), &n);
      if (st != PAPB_OK) return fail(st);
      std::printf("decoded %zu utterances into %s\n", n, dec_out.c_str());
    } else {
      double cer = 0.0, wer = 0.0;
      st = papb_evaluate(model.p, ds.p, ev_beam, &cer, &wer);
      if (st != PAPB_OK) return fail(st);
      std::printf("CER %.2f%%  WER %.2f%%\n", cer, wer);
    }
    return 0;
  }

  if (*score) {
    if (sc_breakdown.empty()) sc_breakdown = sc_hyp + ".breakdown.csv";
    papb_score_result r{};
    papb_status st = papb_score(sc_ref.c_str(), sc_hyp.c_str(), sc_breakdown.c_str(), &r);
    if (st != PAPB_OK) return fail(st);
    if (r.unscored_refs > 0)
      std::fprintf(stderr, "warning: %zu reference(s) have no hypothesis\n", r.unscored_refs);
    std::printf("CER %.2f%%  WER %.2f%%  (%zu utterances)\n", r.cer, r.wer, r.scored);
    return 0;
  }

  if (*gradcheck) {
    Config cfg;
    papb_status st = papb_config_load(gc_cfg.c_str(), nullptr, &cfg.p);
    if (st != PAPB_OK) return fail(st);
    papb_gradcheck_result r{};
    st = papb_gradcheck(cfg.p, gc_obj.c_str(), gc_eps, gc_lambda, gc_corrupt ? 1 : 0, &r);
    if (st != PAPB_OK) return fail(st);
    std::printf("max_rel_error %.3e  params %zu  utterances %zu  worst %s (analytic %.6e, "
                "numeric %.6e)  %s\n",
                r.max_rel_error, r.num_params, r.num_utterances, r.worst_block,
                r.analytic_at_worst, r.numeric_at_worst, r.passed ? "PASS" : "FAIL");
    return r.passed ? 0 : 1;
  }

  if (*sweep) {
    Config cfg;
    papb_status st = papb_config_load(sw_cfg.c_str(), nullptr, &cfg.p);
    if (st != PAPB_OK) return fail(st);
    std::vector<double> wer(sw_ntr.size() * sw_nde.size()), cer(wer.size());
    st = papb_sweep(cfg.p, opt(sw_init), sw_ntr.data(), sw_ntr.size(), sw_nde.data(),
                    sw_nde.size(), wer.data(), cer.data());
    if (st != PAPB_OK) return fail(st);
    print_matrix("WER%", sw_ntr, sw_nde, wer);
    std::printf("\n");
    print_matrix("CER%", sw_ntr, sw_nde, cer);
    return 0;
  }
  return 2;
}
