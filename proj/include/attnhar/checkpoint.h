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

#ifndef ATTNHAR_CHECKPOINT_H_
#define ATTNHAR_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "attnhar/model.h"

namespace attnhar {

// Binary checkpoint, all integers and reals little-endian:
//
//   bytes  "ATNHCKPT"                 magic
//   u32    format version (1)
//   u32 x8 window, channels, filters, kernel_len, conv_layers, hidden,
//          lstm_layers, classes
//   f64    dropout
//   u8     variant (0 baseline, 1 attention)
//   u8     attention intermediate score layer (0/1)
//   u64    rng seed
//   u32    epoch counter
//   u32    tensor count
//   per tensor, in ModelParams::named_tensors() order:
//     u32 name length, name bytes, u32 rank, u64 x rank dims,
//     f64 x product(dims) row-major values
//
// Reals are stored as raw IEEE-754 bits, so a round trip is bit-exact.
struct Checkpoint {
  ModelParams params;
  std::uint64_t seed = 0;
  std::uint32_t epoch = 0;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(const Checkpoint &checkpoint, std::ostream &out);
Checkpoint read_checkpoint(std::istream &in);

void save_checkpoint(const Checkpoint &checkpoint,
                     const std::filesystem::path &path);
Checkpoint load_checkpoint(const std::filesystem::path &path);

}  // namespace attnhar

#endif  // ATTNHAR_CHECKPOINT_H_
