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

#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "papb/data/dataset.hpp"
#include "papb/losses/losses.hpp"
#include "papb/model/seq2seq.hpp"
#include "papb/trainer/trainer.hpp"

namespace papb::cli {

/// Synthetic corpus generated in memory instead of reading files. The first
/// `params.n` utterances train and the next `dev_n` form the dev set.
struct SynthSpec {
  data::SynthParams params;
  int dev_n = 100;
};

struct DataConfig {
  std::string train;
  std::string dev;
  std::string vocab;
  std::optional<SynthSpec> synth;
};

struct RunConfig {
  model::ModelConfig model;  // vocab_size and symbols come from the data
  loss::LossConfig loss;
  train::TrainConfig train;
  std::string init;  // optional warm-start checkpoint
  DataConfig data;
  std::string output_dir = "run";
};

/// Builds a run configuration from a document. Unknown keys are errors;
/// training defaults follow the objective (after `objective_override`).
RunConfig parse_run_config(const nlohmann::json &doc,
                           std::optional<loss::Objective> objective_override = {});

RunConfig load_run_config(const std::string &path,
                          std::optional<loss::Objective> objective_override = {});

/// The fully materialized configuration.
nlohmann::json to_json(const RunConfig &config);

nlohmann::json to_json(const SynthSpec &spec);

struct LoadedData {
  data::Dataset train;
  data::Dataset dev;
};

/// Reads or generates the train and dev sets named by the config.
LoadedData load_data(const DataConfig &config);

}  // namespace papb::cli
