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

#ifndef ATTNHAR_RNG_H_
#define ATTNHAR_RNG_H_

#include <cstddef>
#include <cstdint>
#include <vector>

namespace attnhar {

// SplitMix64 generator. The state is a 64-bit counter advanced by the golden
// ratio increment; each output is the counter passed through the SplitMix64
// finalizer. Every derived draw below is defined in terms of next_u64() only,
// so streams are identical on every platform:
//   uniform()  = (next_u64() >> 11) * 2^-53, in [0, 1)
//   below(n)   = rejection sampling on next_u64() with threshold 2^64 mod n
//   normal()   = Box-Muller cosine branch on two uniform() draws
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  double uniform();
  double uniform(double low, double high);
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

// Fisher-Yates permutation of 0..n-1 drawing below(i + 1) for i = n-1 .. 1.
std::vector<std::size_t> shuffle_indices(Rng &rng, std::size_t n);

}  // namespace attnhar

#endif  // ATTNHAR_RNG_H_
