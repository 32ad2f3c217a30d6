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

#include "papb/cli/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "papb/error.hpp"

namespace papb::cli {

using nlohmann::json;

namespace {

// Reads typed fields out of one JSON object and rejects keys it was never
// asked about.
class Section {
 public:
  Section(const json &j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("'" + name_ + "' must be an object");
  }

  template <class T>
  void get(const std::string &key, T &out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception &e) {
      throw ConfigError("'" + path(key) + "': " + e.what());
    }
  }

  const json *child(const std::string &key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const std::string &key) const {
    return name_.empty() ? key : name_ + "." + key;
  }

  void finish() const {
    for (const auto &item : j_.items())
      if (!seen_.count(item.key()))
        throw ConfigError("unknown config key '" + path(item.key()) + "'");
  }

 private:
  const json &j_;
  std::string name_;
  std::set<std::string> seen_;
};

void read_model(const json &j, model::ModelConfig &m) {
  Section s(j, "model");
  s.get("input_dim", m.input_dim);
  s.get("encoder_layers", m.encoder_layers);
  s.get("encoder_units", m.encoder_units);
  s.get("decoder_layers", m.decoder_layers);
  s.get("decoder_units", m.decoder_units);
  s.get("attention_dim", m.attention_dim);
  s.get("conv_channels", m.conv_channels);
  s.get("conv_kernel", m.conv_kernel);
  s.get("init_range", m.init_range);
  s.get("forget_bias", m.forget_bias);
  s.finish();
}

void read_loss(const json &j, loss::LossConfig &l) {
  Section s(j, "loss");
  std::string objective = loss::objective_name(l.objective);
  std::string margin = loss::margin_reference_name(l.margin_reference);
  s.get("objective", objective);
  s.get("alpha", l.alpha);
  s.get("lambda", l.lambda);
  s.get("teacher_forcing_prob", l.teacher_forcing_prob);
  s.get("margin_reference", margin);
  s.get("include_finished", l.include_finished);
  s.finish();
  l.objective = loss::parse_objective(objective);
  l.margin_reference = loss::parse_margin_reference(margin);
}

void read_train(const json &j, train::TrainConfig &t, std::string &init) {
  Section s(j, "train");
  s.get("epochs", t.epochs);
  s.get("batch_size", t.batch_size);
  s.get("lr", t.lr);
  s.get("lr_decay_factor", t.lr_decay_factor);
  s.get("decay_threshold", t.decay_threshold);
  s.get("decay_patience", t.decay_patience);
  s.get("n_tr", t.n_tr);
  s.get("n_de", t.n_de);
  s.get("seed", t.seed);
  s.get("grad_clip", t.grad_clip);
  s.get("validation_beam", t.validation_beam);
  s.get("max_len", t.max_len);
  s.get("record_wall_time", t.record_wall_time);
  s.get("init", init);
  s.finish();
}

SynthSpec read_synth(const json &j) {
  Section s(j, "data.synth");
  SynthSpec spec;
  data::SynthParams &p = spec.params;
  s.get("vocab_size", p.vocab_size);
  s.get("len_min", p.len_min);
  s.get("len_max", p.len_max);
  s.get("n", p.n);
  s.get("dev_n", spec.dev_n);
  s.get("noise_sigma", p.noise_sigma);
  s.get("frames_per_char", p.frames_per_char);
  s.get("feat_dim", p.feat_dim);
  s.get("seed", p.seed);
  s.finish();
  if (spec.dev_n < 1) throw ConfigError("data.synth.dev_n must be >= 1");
  return spec;
}

void read_data(const json &j, DataConfig &d) {
  Section s(j, "data");
  s.get("train", d.train);
  s.get("dev", d.dev);
  s.get("vocab", d.vocab);
  if (const json *synth = s.child("synth")) d.synth = read_synth(*synth);
  s.finish();
  const bool any_path = !d.train.empty() || !d.dev.empty() || !d.vocab.empty();
  if (d.synth && any_path)
    throw ConfigError("data: give either 'synth' or the train/dev/vocab paths, not both");
}

}  // namespace

RunConfig parse_run_config(const json &doc, std::optional<loss::Objective> objective_override) {
  Section top(doc, "");
  RunConfig rc;
  if (const json *m = top.child("model")) read_model(*m, rc.model);
  if (const json *l = top.child("loss")) read_loss(*l, rc.loss);
  if (objective_override) rc.loss.objective = *objective_override;
  rc.train = train::TrainConfig::defaults_for(rc.loss.objective);
  if (const json *t = top.child("train")) read_train(*t, rc.train, rc.init);
  if (const json *d = top.child("data")) read_data(*d, rc.data);
  top.get("output_dir", rc.output_dir);
  top.finish();

  rc.loss.validate();
  rc.train.validate();
  return rc;
}

RunConfig load_run_config(const std::string &path,
                          std::optional<loss::Objective> objective_override) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error &e) {
    throw ParseError("config '" + path + "': " + e.what());
  }
  return parse_run_config(doc, objective_override);
}

json to_json(const SynthSpec &spec) {
  const data::SynthParams &p = spec.params;
  return {{"vocab_size", p.vocab_size},   {"len_min", p.len_min},
          {"len_max", p.len_max},         {"n", p.n},
          {"dev_n", spec.dev_n},          {"noise_sigma", p.noise_sigma},
          {"frames_per_char", p.frames_per_char}, {"feat_dim", p.feat_dim},
          {"seed", p.seed}};
}

json to_json(const RunConfig &rc) {
  const model::ModelConfig &m = rc.model;
  const loss::LossConfig &l = rc.loss;
  const train::TrainConfig &t = rc.train;
  json j;
  j["model"] = {{"input_dim", m.input_dim},           {"encoder_layers", m.encoder_layers},
                {"encoder_units", m.encoder_units},   {"decoder_layers", m.decoder_layers},
                {"decoder_units", m.decoder_units},   {"attention_dim", m.attention_dim},
                {"conv_channels", m.conv_channels},   {"conv_kernel", m.conv_kernel},
                {"init_range", m.init_range},         {"forget_bias", m.forget_bias}};
  j["loss"] = {{"objective", loss::objective_name(l.objective)},
               {"alpha", l.alpha},
               {"lambda", l.lambda},
               {"teacher_forcing_prob", l.teacher_forcing_prob},
               {"margin_reference", loss::margin_reference_name(l.margin_reference)},
               {"include_finished", l.include_finished}};
  j["train"] = {{"epochs", t.epochs},
                {"batch_size", t.batch_size},
                {"lr", t.lr},
                {"lr_decay_factor", t.lr_decay_factor},
                {"decay_threshold", t.decay_threshold},
                {"decay_patience", t.decay_patience},
                {"n_tr", t.n_tr},
                {"n_de", t.n_de},
                {"seed", t.seed},
                {"grad_clip", t.grad_clip},
                {"validation_beam", t.validation_beam},
                {"max_len", t.max_len},
                {"record_wall_time", t.record_wall_time},
                {"init", rc.init}};
  json d = json::object();
  if (rc.data.synth) {
    d["synth"] = to_json(*rc.data.synth);
  } else {
    d["train"] = rc.data.train;
    d["dev"] = rc.data.dev;
    d["vocab"] = rc.data.vocab;
  }
  j["data"] = d;
  j["output_dir"] = rc.output_dir;
  return j;
}

LoadedData load_data(const DataConfig &config) {
  LoadedData out;
  if (config.synth) {
    data::SynthParams p = config.synth->params;
    const int n_train = p.n;
    p.n = n_train + config.synth->dev_n;
    out.train = data::synth_transduce(p);
    out.dev = data::split_tail(out.train, static_cast<std::size_t>(n_train));
    return out;
  }
  if (config.train.empty() || config.dev.empty() || config.vocab.empty())
    throw ConfigError("data: 'train', 'dev' and 'vocab' paths are required");
  out.train = data::load_jsonl(config.train, config.vocab);
  out.dev = data::load_jsonl(config.dev, config.vocab);
  return out;
}

}  // namespace papb::cli
