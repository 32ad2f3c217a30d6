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

#include <cstdint>
#include <string>

#include "json.hpp"

#include "papb/model/seq2seq.hpp"

namespace papb::model {

// Container layout, little-endian throughout:
//   "PAPBCKPT" | u32 version | u64 config digest | u32 len | config JSON
//   u32 block count
//   per block: u32 name len | name | u32 rows | u32 cols | rows*cols f64,
//              row-major
inline constexpr char kCheckpointMagic[8] = {'P', 'A', 'P', 'B', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

nlohmann::json to_json(const ModelConfig &config);
/// Rejects unknown keys; missing keys keep their defaults.
ModelConfig model_config_from_json(const nlohmann::json &j);

/// FNV-1a over the canonical JSON dump of the config.
std::uint64_t config_digest(const ModelConfig &config);

std::string serialize_checkpoint(const Seq2Seq &model);
Seq2Seq deserialize_checkpoint(const std::string &bytes);

void save_checkpoint(const Seq2Seq &model, const std::string &path);
Seq2Seq load_checkpoint(const std::string &path);

}  // namespace papb::model
