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

#ifndef ATTNHAR_ATTENTION_H_
#define ATTNHAR_ATTENTION_H_

#include <cstddef>

#include "attnhar/rng.h"
#include "attnhar/tensor.h"

namespace attnhar {

// Temporal attention over the recurrent states of one frame.
//
// Given hidden states h_1..h_T (T >= 2), the first T - 1 states form the past
// context and h_T is the current state:
//
//   transformed_i = tanh(W1 h_i + b1)            i = 1..T-1
//   score_i       = W2 transformed_i + b2
//   weights       = softmax(score)
//   final         = sum_i weights_i h_i + h_T
//
// The weighted sum runs over the raw states; the transformed vectors only
// produce scores. With an intermediate score layer, score_i becomes
// W2 (Wm transformed_i + bm) + b2 where Wm maps H -> H / 2.
struct AttentionParams {
  Tensor w1;     // [H x H]
  Tensor b1;     // [H]
  Tensor w_mid;  // [H/2 x H], empty unless the intermediate layer is enabled
  Tensor b_mid;  // [H/2]
  Tensor w2;     // [1 x H] or [1 x H/2]
  Tensor b2;     // [1]

  static AttentionParams init(std::size_t hidden, Rng &rng,
                              bool intermediate = false);

  std::size_t hidden_size() const { return w1.dim(0); }
  bool has_intermediate() const { return !w_mid.empty(); }
  AttentionParams zeros_like() const;
};

struct AttentionTrace {
  Tensor weights;  // [T - 1], positive, sums to 1
  long frame_id = -1;
  int predicted = -1;
  int truth = -1;
};

struct AttentionCache {
  const AttentionParams *params = nullptr;
  Tensor hidden;       // [T x H]
  Tensor transformed;  // [(T-1) x H]
  Tensor mid;          // [(T-1) x H/2] when the intermediate layer is used
  Tensor weights;      // [T-1]
};

struct AttentionForward {
  Tensor final_embedding;  // [H]
  AttentionTrace trace;
  AttentionCache cache;
};

struct AttentionBackward {
  Tensor grad_hidden;  // [T x H]
  AttentionParams grad_params;
};

AttentionForward attend_forward(const AttentionParams &params,
                                const Tensor &hidden);
AttentionBackward attend_backward(const AttentionCache &cache,
                                  const Tensor &grad_final);

}  // namespace attnhar

#endif  // ATTNHAR_ATTENTION_H_
