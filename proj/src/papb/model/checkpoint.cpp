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

#include "papb/model/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "papb/error.hpp"

namespace papb::model {

namespace {

void put_u32(std::string &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string &out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(const std::string &bytes) : b_(bytes) {}
  std::uint64_t uint(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw DataError("checkpoint: truncated container");
  }
  const std::string &b_;
  std::size_t pos_ = 0;
};

}  // namespace

nlohmann::json to_json(const ModelConfig &c) {
  nlohmann::json j;
  j["input_dim"] = c.input_dim;
  j["vocab_size"] = c.vocab_size;
  j["encoder_layers"] = c.encoder_layers;
  j["encoder_units"] = c.encoder_units;
  j["decoder_layers"] = c.decoder_layers;
  j["decoder_units"] = c.decoder_units;
  j["attention_dim"] = c.attention_dim;
  j["conv_channels"] = c.conv_channels;
  j["conv_kernel"] = c.conv_kernel;
  j["init_range"] = c.init_range;
  j["forget_bias"] = c.forget_bias;
  j["symbols"] = c.symbols;
  return j;
}

ModelConfig model_config_from_json(const nlohmann::json &j) {
  if (!j.is_object()) throw ConfigError("model config must be an object");
  static const std::set<std::string> known = {
      "input_dim",     "vocab_size",    "encoder_layers", "encoder_units",
      "decoder_layers", "decoder_units", "attention_dim",  "conv_channels",
      "conv_kernel",   "init_range",    "forget_bias",    "symbols"};
  for (const auto &[k, v] : j.items())
    if (!known.count(k)) throw ConfigError("unknown key model." + k);
  ModelConfig c;
  try {
    c.input_dim = j.value("input_dim", c.input_dim);
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    c.encoder_layers = j.value("encoder_layers", c.encoder_layers);
    c.encoder_units = j.value("encoder_units", c.encoder_units);
    c.decoder_layers = j.value("decoder_layers", c.decoder_layers);
    c.decoder_units = j.value("decoder_units", c.decoder_units);
    c.attention_dim = j.value("attention_dim", c.attention_dim);
    c.conv_channels = j.value("conv_channels", c.conv_channels);
    c.conv_kernel = j.value("conv_kernel", c.conv_kernel);
    c.init_range = j.value("init_range", c.init_range);
    c.forget_bias = j.value("forget_bias", c.forget_bias);
    c.symbols = j.value("symbols", c.symbols);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  return c;
}

std::uint64_t config_digest(const ModelConfig &config) {
  const std::string s = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string serialize_checkpoint(const Seq2Seq &model) {
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  put_u32(out, kCheckpointVersion);
  put_u64(out, config_digest(model.config()));
  const std::string cfg = to_json(model.config()).dump();
  put_u32(out, static_cast<std::uint32_t>(cfg.size()));
  out += cfg;
  put_u32(out, static_cast<std::uint32_t>(model.params().size()));
  for (const auto &p : model.params()) {
    put_u32(out, static_cast<std::uint32_t>(p.name.size()));
    out += p.name;
    put_u32(out, static_cast<std::uint32_t>(p.value.rows()));
    put_u32(out, static_cast<std::uint32_t>(p.value.cols()));
    for (Eigen::Index i = 0; i < p.value.rows(); ++i)
      for (Eigen::Index k = 0; k < p.value.cols(); ++k)
        put_u64(out, std::bit_cast<std::uint64_t>(p.value(i, k)));
  }
  return out;
}

Seq2Seq deserialize_checkpoint(const std::string &bytes) {
  Reader r(bytes);
  if (r.bytes(sizeof(kCheckpointMagic)) !=
      std::string(kCheckpointMagic, sizeof(kCheckpointMagic)))
    throw DataError("checkpoint: bad magic");
  const auto version = r.uint(4);
  if (version != kCheckpointVersion)
    throw DataError("checkpoint: unsupported format version " + std::to_string(version));
  const std::uint64_t digest = r.uint(8);
  const std::string cfg_text = r.bytes(r.uint(4));
  ModelConfig cfg;
  try {
    cfg = model_config_from_json(nlohmann::json::parse(cfg_text));
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("checkpoint: config block: ") + e.what());
  }
  if (config_digest(cfg) != digest) throw DataError("checkpoint: config digest mismatch");
  const auto blocks = r.uint(4);
  std::vector<NamedParam> params;
  params.reserve(blocks);
  for (std::uint64_t b = 0; b < blocks; ++b) {
    NamedParam p;
    p.name = r.bytes(r.uint(4));
    const auto rows = static_cast<Eigen::Index>(r.uint(4));
    const auto cols = static_cast<Eigen::Index>(r.uint(4));
    p.value.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index k = 0; k < cols; ++k)
        p.value(i, k) = std::bit_cast<double>(r.uint(8));
    params.push_back(std::move(p));
  }
  if (!r.done()) throw DataError("checkpoint: trailing bytes");
  return Seq2Seq(std::move(cfg), std::move(params));
}

void save_checkpoint(const Seq2Seq &model, const std::string &path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write checkpoint " + path);
  const std::string bytes = serialize_checkpoint(model);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed for checkpoint " + path);
}

Seq2Seq load_checkpoint(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace papb::model
