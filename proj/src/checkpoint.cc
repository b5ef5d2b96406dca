// Copyright 2026 The attnhar Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "attnhar/checkpoint.h"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "attnhar/errors.h"

namespace attnhar {
namespace {

constexpr std::array<char, 8> kMagic = {'A', 'T', 'N', 'H', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::ostream &out, T value) {
  std::array<unsigned char, sizeof(T)> bytes;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFF);
  }
  out.write(reinterpret_cast<const char *>(bytes.data()), bytes.size());
}

void put_f64(std::ostream &out, double value) {
  put(out, std::bit_cast<std::uint64_t>(value));
}

template <typename T>
T get(std::istream &in) {
  std::array<unsigned char, sizeof(T)> bytes;
  in.read(reinterpret_cast<char *>(bytes.data()), bytes.size());
  if (!in) throw IoError("checkpoint: unexpected end of file");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(bytes[i]) << (8 * i);
  }
  return value;
}

double get_f64(std::istream &in) {
  return std::bit_cast<double>(get<std::uint64_t>(in));
}

}  // namespace

void write_checkpoint(const Checkpoint &checkpoint, std::ostream &out) {
  const ModelConfig &cfg = checkpoint.params.config;
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kCheckpointVersion);
  for (std::size_t v : {cfg.window, cfg.channels, cfg.filters, cfg.kernel_len,
                        cfg.conv_layers, cfg.hidden, cfg.lstm_layers,
                        cfg.classes}) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(v));
  }
  put_f64(out, cfg.dropout);
  put<std::uint8_t>(out, cfg.variant == Variant::kAttention ? 1 : 0);
  put<std::uint8_t>(out, cfg.attention_intermediate ? 1 : 0);
  put<std::uint64_t>(out, checkpoint.seed);
  put<std::uint32_t>(out, checkpoint.epoch);

  const auto tensors = checkpoint.params.named_tensors();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto &[name, t] : tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t->rank()));
    for (std::size_t d : t->shape()) put<std::uint64_t>(out, d);
    for (double v : t->values()) put_f64(out, v);
  }
  if (!out) throw IoError("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream &in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IoError("checkpoint: bad magic");
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  }
  ModelConfig cfg;
  for (std::size_t *field : {&cfg.window, &cfg.channels, &cfg.filters,
                             &cfg.kernel_len, &cfg.conv_layers, &cfg.hidden,
                             &cfg.lstm_layers, &cfg.classes}) {
    *field = get<std::uint32_t>(in);
  }
  cfg.dropout = get_f64(in);
  cfg.variant = get<std::uint8_t>(in) ? Variant::kAttention : Variant::kBaseline;
  cfg.attention_intermediate = get<std::uint8_t>(in) != 0;

  Checkpoint cp;
  cp.seed = get<std::uint64_t>(in);
  cp.epoch = get<std::uint32_t>(in);

  // Build a correctly shaped skeleton, then overwrite every tensor.
  Rng scratch(0);
  cp.params = ModelParams::init(cfg, scratch);
  auto tensors = cp.params.named_tensors();
  const auto count = get<std::uint32_t>(in);
  if (count != tensors.size()) {
    throw IoError("checkpoint: expected " + std::to_string(tensors.size()) +
                  " tensors, found " + std::to_string(count));
  }
  for (auto &[name, t] : tensors) {
    const auto len = get<std::uint32_t>(in);
    std::string stored(len, '\0');
    in.read(stored.data(), len);
    if (!in || stored != name) {
      throw IoError("checkpoint: expected tensor '" + name + "', found '" +
                    stored + "'");
    }
    const auto rank = get<std::uint32_t>(in);
    Tensor::Shape shape(rank);
    for (auto &d : shape) d = static_cast<std::size_t>(get<std::uint64_t>(in));
    if (shape != t->shape()) {
      throw IoError("checkpoint: tensor '" + name + "' has shape " +
                    shape_string(shape) + ", config implies " +
                    t->shape_string());
    }
    for (double &v : t->values()) v = get_f64(in);
  }
  return cp;
}

void save_checkpoint(const Checkpoint &checkpoint,
                     const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_checkpoint(checkpoint, out);
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace attnhar
