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

#ifndef ATTNHAR_LAYERS_H_
#define ATTNHAR_LAYERS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "attnhar/rng.h"
#include "attnhar/tensor.h"

namespace attnhar {

enum class Mode { kTrain, kEval };

// Every layer's parameters are plain tensors. Backward passes return a value of
// the same layer type holding the gradients, so gradient sets mirror
// parameter sets one-to-one.

// ---------------------------------------------------------------------------
// Temporal convolution.
//
// Filters are one-dimensional along time and are shared across sensor
// channels: an input [T x d x c_in] maps to [(T - K + 1) x d x f] with
//   y[t, s, o] = bias[o] + sum_{k, c} kernels[o, k, c] * x[t + k, s, c].
// A rank-2 input [T x d] is read as c_in = 1.
struct ConvLayer {
  Tensor kernels;  // [filters x kernel_len x in_maps]
  Tensor bias;     // [filters]
  bool relu = true;

  static ConvLayer init(std::size_t in_maps, std::size_t filters,
                        std::size_t kernel_len, Rng &rng, bool relu = true);

  std::size_t filters() const { return kernels.dim(0); }
  std::size_t kernel_len() const { return kernels.dim(1); }
  std::size_t in_maps() const { return kernels.dim(2); }
  ConvLayer zeros_like() const;
};

struct ConvCache {
  const ConvLayer *layer = nullptr;
  Tensor::Shape input_shape;
  std::size_t channels = 0;
  Tensor columns;  // im2col of the input, [(T' * d) x (K * c_in)]
  Tensor output;   // post-activation, [T' x d x f]
};

struct ConvForward {
  Tensor output;
  ConvCache cache;
};

struct ConvBackward {
  Tensor grad_input;  // same shape as the forward input
  ConvLayer grad_params;
};

ConvForward conv_forward(const ConvLayer &layer, const Tensor &x);
ConvBackward conv_backward(const ConvCache &cache, const Tensor &grad_output);

// Output length of `layers` valid convolutions of width kernel_len over
// `length` steps; zero when the window is too short.
std::size_t conv_output_length(std::size_t length, std::size_t kernel_len,
                               std::size_t layers);

// ---------------------------------------------------------------------------
// Fully connected layer on a single vector.
struct LinearLayer {
  Tensor weight;  // [out x in]
  Tensor bias;    // [out]

  static LinearLayer init(std::size_t in, std::size_t out, Rng &rng);

  std::size_t in_features() const { return weight.dim(1); }
  std::size_t out_features() const { return weight.dim(0); }
  LinearLayer zeros_like() const;
};

struct LinearCache {
  const LinearLayer *layer = nullptr;
  Tensor input;
};

struct LinearForward {
  Tensor output;
  LinearCache cache;
};

struct LinearBackward {
  Tensor grad_input;
  LinearLayer grad_params;
};

LinearForward linear_forward(const LinearLayer &layer, const Tensor &x);
LinearBackward linear_backward(const LinearCache &cache,
                               const Tensor &grad_output);

// ---------------------------------------------------------------------------
// Inverted dropout: kept units are scaled by 1 / (1 - p) in train mode and
// eval mode is the identity.
class Dropout {
 public:
  explicit Dropout(double p = 0.5);
  double p() const { return p_; }

 private:
  double p_;
};

struct DropoutCache {
  Tensor mask;  // empty when the forward pass was the identity
};

struct DropoutForward {
  Tensor output;
  DropoutCache cache;
};

// `rng` is required in train mode with p > 0 and ignored otherwise.
DropoutForward dropout_forward(const Dropout &dropout, const Tensor &x,
                               Mode mode, Rng *rng);
Tensor dropout_backward(const DropoutCache &cache, const Tensor &grad_output);

// ---------------------------------------------------------------------------
// LSTM layer. Gate rows are packed as [input, forget, output, candidate],
// each block hidden_size rows:
//   i = sigma(W_i x + U_i h + b_i)     f = sigma(W_f x + U_f h + b_f)
//   o = sigma(W_o x + U_o h + b_o)     g = tanh(W_g x + U_g h + b_g)
//   c' = f * c + i * g                 h' = o * tanh(c')
// Initial hidden and cell states are zero.
struct LstmLayer {
  Tensor w_input;   // [4H x in]
  Tensor w_hidden;  // [4H x H]
  Tensor bias;      // [4H]

  static LstmLayer init(std::size_t in, std::size_t hidden, Rng &rng,
                        double forget_bias = 1.0);

  std::size_t input_size() const { return w_input.dim(1); }
  std::size_t hidden_size() const { return w_hidden.dim(1); }
  LstmLayer zeros_like() const;
};

struct LstmCache {
  const LstmLayer *layer = nullptr;
  Tensor input;   // [T x in]
  Tensor gates;   // [T x 4H], post-activation
  Tensor cells;   // [T x H]
  Tensor hidden;  // [T x H]
};

struct LstmForward {
  Tensor hidden;  // [T x H], every timestep
  LstmCache cache;
};

struct LstmBackward {
  Tensor grad_input;  // [T x in]
  LstmLayer grad_params;
};

LstmForward lstm_layer_forward(const LstmLayer &layer, const Tensor &xs);
// `grad_hidden` must carry a gradient row for every timestep.
LstmBackward lstm_layer_backward(const LstmCache &cache,
                                 const Tensor &grad_hidden);

struct LstmStackForward {
  Tensor hidden;  // top layer, [T x H]
  std::vector<LstmCache> caches;
};

struct LstmStackBackward {
  Tensor grad_input;
  std::vector<LstmLayer> grad_params;
};

// Stacked LSTM: layer l + 1 consumes the hidden sequence of layer l.
LstmStackForward lstm_forward(std::span<const LstmLayer> stack,
                              const Tensor &xs);
LstmStackBackward lstm_backward(const std::vector<LstmCache> &caches,
                                const Tensor &grad_hidden);

}  // namespace attnhar

#endif  // ATTNHAR_LAYERS_H_
