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

#include "papb/cli/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "papb/autodiff/gradcheck.hpp"
#include "papb/error.hpp"
#include "papb/model/checkpoint.hpp"
#include "papb/textmetrics/edit_distance.hpp"

namespace papb::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_file(const fs::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void ensure_dir(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

std::string csv_quote(const std::string &s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// id -> text for every record of a line-delimited file.
std::vector<std::pair<std::string, std::string>> read_id_text(const std::string &path) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(read_file(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      out.emplace_back(j.at("id").get<std::string>(), j.at("text").get<std::string>());
    } catch (const json::exception &e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

double loss_mean(const model::Seq2Seq &m, const data::Dataset &ds,
                 const loss::UtteranceOptions &base, std::uint64_t seed) {
  double total = 0.0;
  for (std::size_t i = 0; i < ds.utterances.size(); ++i) {
    loss::UtteranceOptions opts = base;
    opts.seed = train::utterance_seed(seed, 0, i);
    total += loss::utterance_loss_value(m, ds.utterances[i].feats, ds.utterances[i].target,
                                        opts);
  }
  return total / static_cast<double>(ds.utterances.size());
}

}  // namespace

std::string format_metrics_row(const train::EpochMetrics &m) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d,%.6f,%.4f,%.4f,%.10g,%.3f", m.epoch, m.train_loss,
                m.dev_cer, m.dev_wer, m.lr_used, m.wall_seconds);
  return buf;
}

TrainOutcome run_train(RunConfig config, const std::string &init_path,
                       const train::EpochCallback &on_epoch) {
  if (!init_path.empty()) config.init = init_path;
  // Checked before anything is written so a rejected run leaves the output
  // dir untouched.
  if (config.loss.objective != loss::Objective::kCE && config.init.empty())
    throw ConfigError("objective " + loss::objective_name(config.loss.objective) +
                      " requires a CE-trained initial checkpoint (warm start)");
  LoadedData data = load_data(config.data);

  std::optional<model::Seq2Seq> init;
  if (!config.init.empty()) {
    init = model::load_checkpoint(config.init);
    // The warm-start architecture wins; record it as the effective one.
    const model::ModelConfig &ic = init->config();
    config.model = ic;
    config.model.symbols.clear();
    config.model.vocab_size = 0;
  }
  config.model.input_dim = data.train.feat_dim;

  const fs::path dir(config.output_dir);
  ensure_dir(dir);
  write_file(dir / "effective_config.json", to_json(config).dump(2) + "\n");

  std::string csv = std::string(kMetricsHeader) + "\n";
  write_file(dir / "metrics.csv", csv);
  auto record = [&](const train::EpochMetrics &m) {
    csv += format_metrics_row(m) + "\n";
    write_file(dir / "metrics.csv", csv);
    if (on_epoch) on_epoch(m);
  };
  train::TrainResult result = train::train(config.model, config.train, config.loss, data.train,
                                           data.dev, init ? &*init : nullptr, record);

  model::save_checkpoint(result.best, (dir / "best.ckpt").string());
  model::save_checkpoint(result.last, (dir / "last.ckpt").string());

  TrainOutcome out;
  out.epochs = static_cast<int>(result.metrics.size());
  out.best_epoch = result.best_epoch;
  out.best_dev_cer = result.metrics.at(static_cast<std::size_t>(result.best_epoch - 1)).dev_cer;
  out.metrics = std::move(result.metrics);
  return out;
}

data::Dataset load_dataset_for(const std::string &jsonl_path, const std::string &vocab_path,
                               const model::Seq2Seq *model) {
  if (!vocab_path.empty()) return data::load_jsonl(jsonl_path, vocab_path);
  if (model == nullptr || model->config().symbols.empty())
    throw ConfigError("no vocabulary given and the checkpoint carries no symbol table");
  const data::Vocab vocab(model->config().symbols);
  return data::parse_jsonl(read_file(jsonl_path), vocab);
}

std::size_t run_decode(const model::Seq2Seq &model, const data::Dataset &dataset,
                       int beam_size, const std::string &out_path) {
  if (beam_size < 1) throw ArgumentError("decode: beam must be >= 1");
  if (!dataset.utterances.empty() && dataset.feat_dim != model.config().input_dim)
    throw ConfigError("decode: dataset feature dim differs from the model input_dim");
  if (dataset.vocab.size() != model.config().vocab_size)
    throw ConfigError("decode: vocabulary size differs from the model output size");
  std::string out;
  for (const auto &u : dataset.utterances) {
    const train::UtteranceResult r = train::decode_utterance(model, u, dataset.vocab, beam_size);
    json nbest = json::array();
    for (const auto &[text, logp] : r.nbest) nbest.push_back({{"text", text}, {"logp_sum", logp}});
    json rec = {{"id", r.id}, {"text", r.hyp_text}, {"logp_sum", r.logp_sum}, {"nbest", nbest}};
    out += rec.dump() + "\n";
  }
  const fs::path path(out_path);
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  write_file(path, out);
  return dataset.utterances.size();
}

ScoreOutcome run_score(const std::string &ref_path, const std::string &hyp_path,
                       const std::string &breakdown_path) {
  const auto refs = read_id_text(ref_path);
  const auto hyps = read_id_text(hyp_path);
  std::map<std::string, std::string> ref_text;
  for (const auto &[id, text] : refs) ref_text[id] = text;

  train::EvalResult eval;
  std::map<std::string, bool> used;
  for (const auto &[id, hyp] : hyps) {
    auto it = ref_text.find(id);
    if (it == ref_text.end()) throw ConfigError("hypothesis id '" + id + "' has no reference");
    used[id] = true;
    const auto rc = data::utf8_chars(it->second);
    const auto hc = data::utf8_chars(hyp);
    train::UtteranceResult r;
    r.id = id;
    r.ref_text = it->second;
    r.hyp_text = hyp;
    r.char_edits = text::edit_distance<std::string>(rc, hc).total;
    r.ref_chars = static_cast<int>(rc.size());
    r.word_edits = text::word_edits(it->second, hyp).total;
    r.ref_words = static_cast<int>(text::split_words(it->second).size());
    eval.utterances.push_back(std::move(r));
  }
  train::aggregate(eval);

  ScoreOutcome out;
  out.cer = eval.cer;
  out.wer = eval.wer;
  out.scored = eval.utterances.size();
  out.unscored_refs = ref_text.size() - used.size();
  if (!breakdown_path.empty()) {
    std::string csv = "id,char_edits,ref_chars,word_edits,ref_words,ref,hyp\n";
    for (const auto &r : eval.utterances)
      csv += csv_quote(r.id) + "," + std::to_string(r.char_edits) + "," +
             std::to_string(r.ref_chars) + "," + std::to_string(r.word_edits) + "," +
             std::to_string(r.ref_words) + "," + csv_quote(r.ref_text) + "," +
             csv_quote(r.hyp_text) + "\n";
    write_file(breakdown_path, csv);
  }
  return out;
}

SynthSpec gradcheck_micro_data(int feat_dim, std::uint64_t seed) {
  SynthSpec s;
  s.params.vocab_size = 2;
  s.params.len_min = 1;
  s.params.len_max = 2;
  s.params.n = 2;
  s.params.noise_sigma = 0.3;
  s.params.frames_per_char = 3;
  s.params.feat_dim = feat_dim;
  s.params.seed = seed;
  s.dev_n = 1;
  return s;
}

GradcheckOutcome run_gradcheck(RunConfig config, loss::Objective objective, double eps,
                               std::optional<double> lambda, bool corrupt) {
  if (!(eps > 0.0)) throw ArgumentError("gradcheck: eps must be positive");
  config.loss.objective = objective;
  if (lambda) config.loss.lambda = *lambda;
  config.loss.validate();
  const bool has_paths = !config.data.train.empty() || !config.data.dev.empty();
  if (!config.data.synth && !has_paths)
    config.data.synth = gradcheck_micro_data(config.model.input_dim, config.train.seed);
  const data::Dataset ds = load_data(config.data).train;
  if (ds.utterances.empty()) throw ConfigError("gradcheck: micro-batch is empty");

  model::ModelConfig mc = config.model;
  mc.input_dim = ds.feat_dim;
  mc.vocab_size = ds.vocab.size();
  mc.symbols = ds.vocab.symbols();
  mc.validate();
  model::Seq2Seq net = model::Seq2Seq::initialize(mc, config.train.seed);
  if (net.num_params() > kGradcheckMaxParams)
    throw ConfigError("gradcheck: model has " + std::to_string(net.num_params()) +
                      " parameters, above the limit of " +
                      std::to_string(kGradcheckMaxParams));

  loss::UtteranceOptions base;
  base.loss = config.loss;
  base.beam_size = config.train.n_tr;
  base.max_len = config.train.max_len;

  std::vector<std::size_t> order(ds.utterances.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const loss::LossValue lv =
      train::batch_gradient(net, ds, order, base, config.train.seed, 0);
  std::vector<double> analytic;
  analytic.reserve(net.num_params());
  for (const auto &g : lv.grads) analytic.insert(analytic.end(), g.data(), g.data() + g.size());
  if (corrupt)
    for (double &a : analytic) a *= 2.0;

  const std::vector<double> theta = net.flatten();
  model::Seq2Seq probe = net;
  auto f = [&](std::span<const double> x) {
    probe.unflatten(x);
    return loss_mean(probe, ds, base, config.train.seed);
  };
  const ad::GradCheckResult gc = ad::finite_diff_check(f, theta, analytic, eps, kGradcheckFloor);

  GradcheckOutcome out;
  out.max_rel_error = gc.max_rel_error;
  out.num_params = net.num_params();
  out.num_utterances = ds.utterances.size();
  out.analytic_at_worst = gc.analytic_at_worst;
  out.numeric_at_worst = gc.numeric_at_worst;
  std::size_t off = 0;
  for (const auto &p : net.params()) {
    const auto n = static_cast<std::size_t>(p.value.size());
    if (gc.worst_index < off + n) {
      out.worst_block = p.name + "[" + std::to_string(gc.worst_index - off) + "]";
      break;
    }
    off += n;
  }
  out.passed = gc.max_rel_error <= kGradcheckTolerance;
  return out;
}

train::SweepResult run_sweep(const RunConfig &config, const std::string &init_path,
                             const std::vector<int> &n_tr_list,
                             const std::vector<int> &n_de_list) {
  if (n_tr_list.empty() || n_de_list.empty()) throw ArgumentError("sweep: empty beam list");
  for (int n : n_tr_list)
    if (n < 1) throw ArgumentError("sweep: beam sizes must be >= 1");
  for (int n : n_de_list)
    if (n < 1) throw ArgumentError("sweep: beam sizes must be >= 1");

  std::map<int, model::Seq2Seq> checkpoints;
  for (int ntr : n_tr_list) {
    if (checkpoints.count(ntr)) continue;
    RunConfig rc = config;
    rc.train.n_tr = ntr;
    if (!init_path.empty()) rc.init = init_path;
    rc.output_dir = (fs::path(config.output_dir) / ("sweep_ntr" + std::to_string(ntr))).string();
    const fs::path dir(rc.output_dir);
    const fs::path ckpt = dir / "best.ckpt";
    // Reuse a finished run only when it was produced by the same config.
    bool reuse = false;
    if (fs::exists(ckpt) && fs::exists(dir / "effective_config.json")) {
      RunConfig expected = rc;
      LoadedData probe = load_data(rc.data);
      if (!expected.init.empty()) {
        const model::ModelConfig ic = model::load_checkpoint(expected.init).config();
        expected.model = ic;
        expected.model.symbols.clear();
        expected.model.vocab_size = 0;
      }
      expected.model.input_dim = probe.train.feat_dim;
      reuse = json::parse(read_file((dir / "effective_config.json").string())) ==
              to_json(expected);
    }
    if (!reuse) run_train(rc);
    checkpoints.emplace(ntr, model::load_checkpoint(ckpt.string()));
  }

  const data::Dataset dev = load_data(config.data).dev;
  train::SweepResult res = train::sweep_beam(checkpoints, dev, n_tr_list, n_de_list);

  ensure_dir(config.output_dir);
  std::string csv = "n_tr,n_de,wer,cer\n";
  char buf[96];
  for (std::size_t i = 0; i < res.n_tr.size(); ++i)
    for (std::size_t j = 0; j < res.n_de.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%d,%d,%.4f,%.4f\n", res.n_tr[i], res.n_de[j],
                    res.wer[i][j], res.cer[i][j]);
      csv += buf;
    }
  write_file(fs::path(config.output_dir) / "sweep.csv", csv);
  return res;
}

void run_synth(const SynthSpec &spec, const std::string &out_dir) {
  if (spec.dev_n < 1) throw ArgumentError("synth: dev_n must be >= 1");
  data::SynthParams p = spec.params;
  const int n_train = p.n;
  p.n = n_train + spec.dev_n;
  data::Dataset train_set = data::synth_transduce(p);
  data::Dataset dev = data::split_tail(train_set, static_cast<std::size_t>(n_train));
  const fs::path dir(out_dir);
  ensure_dir(dir);
  data::save_jsonl(train_set, (dir / "train.jsonl").string());
  data::save_jsonl(dev, (dir / "dev.jsonl").string());
  data::save_vocab(train_set.vocab, (dir / "vocab.txt").string());
  write_file(dir / "synth.json", to_json(spec).dump(2) + "\n");
}

}  // namespace papb::cli
