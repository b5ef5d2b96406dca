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

#ifndef ATTNHAR_MODEL_H_
#define ATTNHAR_MODEL_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "attnhar/attention.h"
#include "attnhar/layers.h"
#include "attnhar/rng.h"
#include "attnhar/tensor.h"

namespace attnhar {

enum class Variant { kBaseline, kAttention };

std::string_view variant_name(Variant v);
// Throws ConfigError for anything but "baseline" or "attention".
Variant parse_variant(std::string_view name);

struct ModelConfig {
  std::size_t window = 24;
  std::size_t channels = 0;
  std::size_t filters = 64;
  std::size_t kernel_len = 5;
  std::size_t conv_layers = 4;
  std::size_t hidden = 128;
  std::size_t lstm_layers = 2;
  std::size_t classes = 0;
  double dropout = 0.5;
  Variant variant = Variant::kAttention;
  bool attention_intermediate = false;

  void validate() const;
  // Recurrent steps left after the convolution stack.
  std::size_t steps() const;
  // Closed-form parameter count implied by the configuration.
  std::size_t parameter_count() const;

  friend bool operator==(const ModelConfig &, const ModelConfig &) = default;
};

// DeepConvLSTM-style network: conv x N (ReLU) -> flatten channels x filters per
// step -> stacked LSTM -> (last state | attention embedding) -> linear.
// Dropout sits after the conv stack, between LSTM layers and before the
// classifier.
struct ModelParams {
  ModelConfig config;
  std::vector<ConvLayer> conv;
  std::vector<LstmLayer> lstm;
  std::optional<AttentionParams> attention;
  LinearLayer classifier;

  static ModelParams init(const ModelConfig &config, Rng &rng);

  ModelParams zeros_like() const;

  // Ordered, named views of every parameter tensor. The order is stable and is
  // shared by gradient sets produced from zeros_like().
  std::vector<std::pair<std::string, Tensor *>> named_tensors();
  std::vector<std::pair<std::string, const Tensor *>> named_tensors() const;

  std::size_t parameter_count() const;
};

// into += scale * other, tensor by tensor.
void accumulate(ModelParams &into, const ModelParams &other, double scale = 1.0);

struct Prediction {
  Tensor logits;         // [C]
  Tensor probabilities;  // [C]
  int label = -1;        // argmax, lowest index on ties
  std::optional<AttentionTrace> trace;
};

struct ModelCache {
  const ModelParams *params = nullptr;
  Mode mode = Mode::kEval;
  std::vector<ConvCache> conv;
  DropoutCache conv_dropout;
  std::vector<LstmCache> lstm;
  std::vector<DropoutCache> lstm_dropout;  // between layer l and l + 1
  std::optional<AttentionCache> attention;
  std::size_t steps = 0;
  DropoutCache embedding_dropout;
  LinearCache classifier;
};

struct ModelForward {
  Prediction prediction;
  ModelCache cache;
};

// frame: [window x channels]. `rng` drives dropout in train mode and is
// ignored in eval mode.
ModelForward model_forward(const ModelParams &params, const Tensor &frame,
                           Mode mode, Rng *rng);

struct LossResult {
  double loss = 0.0;
  Tensor grad_seed;  // d loss / d logits = softmax - one_hot
};

LossResult cross_entropy_loss(const Prediction &prediction, int label);

// Gradients of the loss w.r.t. every parameter, given d loss / d logits.
ModelParams model_backward(const ModelCache &cache, const Tensor &grad_seed);

}  // namespace attnhar

#endif  // ATTNHAR_MODEL_H_
