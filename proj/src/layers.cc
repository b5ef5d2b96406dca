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

#include "attnhar/layers.h"

#include <cmath>
#include <cstring>
#include <string>

#include "attnhar/errors.h"

namespace attnhar {
namespace {

void fill_uniform(Tensor &t, double bound, Rng &rng) {
  for (double &x : t.values()) x = rng.uniform(-bound, bound);
}

void require_cache(const void *owner, const char *what) {
  if (owner == nullptr) {
    throw ContractError(std::string(what) +
                        ": cache does not come from a forward pass");
  }
}

void require_shape(const Tensor &t, const Tensor::Shape &shape,
                   const char *what) {
  if (t.shape() != shape) {
    throw ContractError(std::string(what) + ": gradient shape " +
                        t.shape_string() + " does not match cached output " +
                        shape_string(shape));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Convolution

ConvLayer ConvLayer::init(std::size_t in_maps, std::size_t filters,
                          std::size_t kernel_len, Rng &rng, bool relu) {
  if (in_maps == 0 || filters == 0 || kernel_len == 0) {
    throw ConfigError("conv layer needs positive in_maps, filters, kernel_len");
  }
  ConvLayer layer;
  layer.kernels = Tensor({filters, kernel_len, in_maps});
  layer.bias = Tensor({filters});
  layer.relu = relu;
  const double bound = 1.0 / std::sqrt(static_cast<double>(kernel_len * in_maps));
  fill_uniform(layer.kernels, bound, rng);
  fill_uniform(layer.bias, bound, rng);
  return layer;
}

ConvLayer ConvLayer::zeros_like() const {
  return ConvLayer{kernels.zeros_like(), bias.zeros_like(), relu};
}

std::size_t conv_output_length(std::size_t length, std::size_t kernel_len,
                               std::size_t layers) {
  for (std::size_t i = 0; i < layers; ++i) {
    if (length < kernel_len) return 0;
    length = length - kernel_len + 1;
  }
  return length;
}

ConvForward conv_forward(const ConvLayer &layer, const Tensor &x) {
  if (x.rank() != 2 && x.rank() != 3) {
    throw DimensionError("conv input must be [T x d] or [T x d x c], got " +
                         x.shape_string());
  }
  const std::size_t steps = x.dim(0);
  const std::size_t channels = x.dim(1);
  const std::size_t maps = x.rank() == 3 ? x.dim(2) : 1;
  const std::size_t width = layer.kernel_len();
  const std::size_t filters = layer.filters();
  if (maps != layer.in_maps()) {
    throw DimensionError("conv input " + x.shape_string() + " has " +
                         std::to_string(maps) + " maps, kernels " +
                         layer.kernels.shape_string() + " expect " +
                         std::to_string(layer.in_maps()));
  }
  if (steps < width) {
    throw WindowTooShortError("conv input length " + std::to_string(steps) +
                              " is shorter than kernel length " +
                              std::to_string(width));
  }
  const std::size_t out_steps = steps - width + 1;
  const std::size_t rows = out_steps * channels;
  const std::size_t cols = width * maps;

  ConvForward result;
  ConvCache &cache = result.cache;
  cache.layer = &layer;
  cache.input_shape = x.shape();
  cache.channels = channels;
  cache.columns = Tensor({rows, cols});
  // columns[(t, s), (k, c)] = x[t + k, s, c]
  for (std::size_t t = 0; t < out_steps; ++t) {
    for (std::size_t s = 0; s < channels; ++s) {
      double *dst = cache.columns.data() + (t * channels + s) * cols;
      for (std::size_t k = 0; k < width; ++k) {
        const double *src = x.data() + ((t + k) * channels + s) * maps;
        std::memcpy(dst + k * maps, src, maps * sizeof(double));
      }
    }
  }

  Tensor out({out_steps, channels, filters});
  for (std::size_t r = 0; r < rows; ++r) {
    std::memcpy(out.data() + r * filters, layer.bias.data(),
                filters * sizeof(double));
  }
  gemm(Transpose::kNo, Transpose::kYes, rows, filters, cols, 1.0,
       cache.columns.data(), cols, layer.kernels.data(), cols, 1.0, out.data(),
       filters);
  if (layer.relu) {
    for (double &v : out.values()) v = v > 0.0 ? v : 0.0;
  }
  check_finite(out, "conv_forward");
  cache.output = out;
  result.output = std::move(out);
  return result;
}

ConvBackward conv_backward(const ConvCache &cache, const Tensor &grad_output) {
  require_cache(cache.layer, "conv_backward");
  require_shape(grad_output, cache.output.shape(), "conv_backward");
  const ConvLayer &layer = *cache.layer;
  const std::size_t out_steps = cache.output.dim(0);
  const std::size_t channels = cache.channels;
  const std::size_t filters = layer.filters();
  const std::size_t width = layer.kernel_len();
  const std::size_t maps = layer.in_maps();
  const std::size_t rows = out_steps * channels;
  const std::size_t cols = width * maps;
  if (cache.columns.dim(1) != cols || cache.output.dim(2) != filters) {
    throw ContractError("conv_backward: cache is stale for this layer");
  }

  Tensor grad_pre = grad_output;
  if (layer.relu) {
    for (std::size_t i = 0; i < grad_pre.size(); ++i) {
      if (cache.output[i] <= 0.0) grad_pre[i] = 0.0;
    }
  }

  ConvBackward result;
  result.grad_params = layer.zeros_like();
  Tensor &grad_bias = result.grad_params.bias;
  for (std::size_t r = 0; r < rows; ++r) {
    const double *g = grad_pre.data() + r * filters;
    for (std::size_t o = 0; o < filters; ++o) grad_bias[o] += g[o];
  }
  gemm(Transpose::kYes, Transpose::kNo, filters, cols, rows, 1.0,
       grad_pre.data(), filters, cache.columns.data(), cols, 0.0,
       result.grad_params.kernels.data(), cols);

  Tensor grad_columns({rows, cols});
  gemm(Transpose::kNo, Transpose::kNo, rows, cols, filters, 1.0,
       grad_pre.data(), filters, layer.kernels.data(), cols, 0.0,
       grad_columns.data(), cols);

  result.grad_input = Tensor(cache.input_shape);
  double *gx = result.grad_input.data();
  for (std::size_t t = 0; t < out_steps; ++t) {
    for (std::size_t s = 0; s < channels; ++s) {
      const double *src = grad_columns.data() + (t * channels + s) * cols;
      for (std::size_t k = 0; k < width; ++k) {
        double *dst = gx + ((t + k) * channels + s) * maps;
        for (std::size_t c = 0; c < maps; ++c) dst[c] += src[k * maps + c];
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Linear

LinearLayer LinearLayer::init(std::size_t in, std::size_t out, Rng &rng) {
  if (in == 0 || out == 0) {
    throw ConfigError("linear layer needs positive in/out features");
  }
  LinearLayer layer{Tensor({out, in}), Tensor({out})};
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  fill_uniform(layer.weight, bound, rng);
  fill_uniform(layer.bias, bound, rng);
  return layer;
}

LinearLayer LinearLayer::zeros_like() const {
  return LinearLayer{weight.zeros_like(), bias.zeros_like()};
}

LinearForward linear_forward(const LinearLayer &layer, const Tensor &x) {
  if (x.rank() != 1 || x.dim(0) != layer.in_features()) {
    throw DimensionError("linear input " + x.shape_string() +
                         " does not match weight " + layer.weight.shape_string());
  }
  LinearForward result;
  result.output = layer.bias;
  gemm(Transpose::kNo, Transpose::kNo, layer.out_features(), 1,
       layer.in_features(), 1.0, layer.weight.data(), layer.in_features(),
       x.data(), 1, 1.0, result.output.data(), 1);
  check_finite(result.output, "linear_forward");
  result.cache = LinearCache{&layer, x};
  return result;
}

LinearBackward linear_backward(const LinearCache &cache,
                               const Tensor &grad_output) {
  require_cache(cache.layer, "linear_backward");
  const LinearLayer &layer = *cache.layer;
  require_shape(grad_output, layer.bias.shape(), "linear_backward");
  if (cache.input.shape() != Tensor::Shape{layer.in_features()}) {
    throw ContractError("linear_backward: cache is stale for this layer");
  }
  const std::size_t in = layer.in_features();
  const std::size_t out = layer.out_features();
  LinearBackward result;
  result.grad_params.bias = grad_output;
  result.grad_params.weight = Tensor({out, in});
  gemm(Transpose::kNo, Transpose::kNo, out, in, 1, 1.0, grad_output.data(), 1,
       cache.input.data(), in, 0.0, result.grad_params.weight.data(), in);
  result.grad_input = Tensor({in});
  gemm(Transpose::kYes, Transpose::kNo, in, 1, out, 1.0, layer.weight.data(),
       in, grad_output.data(), 1, 0.0, result.grad_input.data(), 1);
  return result;
}

// ---------------------------------------------------------------------------
// Dropout

Dropout::Dropout(double p) : p_(p) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw ConfigError("dropout probability must lie in [0, 1), got " +
                      std::to_string(p));
  }
}

DropoutForward dropout_forward(const Dropout &dropout, const Tensor &x,
                               Mode mode, Rng *rng) {
  DropoutForward result;
  if (mode == Mode::kEval || dropout.p() == 0.0) {
    result.output = x;
    return result;
  }
  if (rng == nullptr) {
    throw ContractError("dropout_forward: train mode requires an Rng");
  }
  const double keep = 1.0 - dropout.p();
  const double scale = 1.0 / keep;
  result.cache.mask = x.zeros_like();
  result.output = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = rng->uniform() < keep ? scale : 0.0;
    result.cache.mask[i] = m;
    result.output[i] *= m;
  }
  return result;
}

Tensor dropout_backward(const DropoutCache &cache, const Tensor &grad_output) {
  if (cache.mask.empty()) return grad_output;
  if (cache.mask.shape() != grad_output.shape()) {
    throw ContractError("dropout_backward: gradient shape " +
                        grad_output.shape_string() + " does not match mask " +
                        cache.mask.shape_string());
  }
  Tensor out = grad_output;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= cache.mask[i];
  return out;
}

// ---------------------------------------------------------------------------
// LSTM

LstmLayer LstmLayer::init(std::size_t in, std::size_t hidden, Rng &rng,
                          double forget_bias) {
  if (in == 0 || hidden == 0) {
    throw ConfigError("lstm layer needs positive input and hidden sizes");
  }
  LstmLayer layer{Tensor({4 * hidden, in}), Tensor({4 * hidden, hidden}),
                  Tensor({4 * hidden})};
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  fill_uniform(layer.w_input, bound, rng);
  fill_uniform(layer.w_hidden, bound, rng);
  fill_uniform(layer.bias, bound, rng);
  for (std::size_t j = hidden; j < 2 * hidden; ++j) layer.bias[j] = forget_bias;
  return layer;
}

LstmLayer LstmLayer::zeros_like() const {
  return LstmLayer{w_input.zeros_like(), w_hidden.zeros_like(),
                   bias.zeros_like()};
}

LstmForward lstm_layer_forward(const LstmLayer &layer, const Tensor &xs) {
  if (xs.rank() != 2 || xs.dim(1) != layer.input_size()) {
    throw DimensionError("lstm input " + xs.shape_string() +
                         " does not match w_input " +
                         layer.w_input.shape_string());
  }
  const std::size_t steps = xs.dim(0);
  const std::size_t in = layer.input_size();
  const std::size_t h = layer.hidden_size();
  const std::size_t g4 = 4 * h;

  LstmForward result;
  LstmCache &cache = result.cache;
  cache.layer = &layer;
  cache.input = xs;
  cache.gates = Tensor({steps, g4});
  cache.cells = Tensor({steps, h});
  cache.hidden = Tensor({steps, h});

  // Input projections for every step at once, then the recurrence.
  for (std::size_t t = 0; t < steps; ++t) {
    std::memcpy(cache.gates.data() + t * g4, layer.bias.data(),
                g4 * sizeof(double));
  }
  gemm(Transpose::kNo, Transpose::kYes, steps, g4, in, 1.0, xs.data(), in,
       layer.w_input.data(), in, 1.0, cache.gates.data(), g4);

  for (std::size_t t = 0; t < steps; ++t) {
    double *gate = cache.gates.data() + t * g4;
    if (t > 0) {
      gemm(Transpose::kNo, Transpose::kNo, g4, 1, h, 1.0,
           layer.w_hidden.data(), h, cache.hidden.data() + (t - 1) * h, 1, 1.0,
           gate, 1);
    }
    double *cell = cache.cells.data() + t * h;
    double *hid = cache.hidden.data() + t * h;
    const double *cell_prev = t > 0 ? cache.cells.data() + (t - 1) * h : nullptr;
    for (std::size_t j = 0; j < h; ++j) {
      const double i_gate = sigmoid(gate[j]);
      const double f_gate = sigmoid(gate[h + j]);
      const double o_gate = sigmoid(gate[2 * h + j]);
      const double cand = std::tanh(gate[3 * h + j]);
      gate[j] = i_gate;
      gate[h + j] = f_gate;
      gate[2 * h + j] = o_gate;
      gate[3 * h + j] = cand;
      const double c_prev = cell_prev ? cell_prev[j] : 0.0;
      cell[j] = f_gate * c_prev + i_gate * cand;
      hid[j] = o_gate * std::tanh(cell[j]);
    }
  }
  check_finite(cache.hidden, "lstm_forward");
  result.hidden = cache.hidden;
  return result;
}

LstmBackward lstm_layer_backward(const LstmCache &cache,
                                 const Tensor &grad_hidden) {
  require_cache(cache.layer, "lstm_backward");
  const LstmLayer &layer = *cache.layer;
  if (grad_hidden.shape() != cache.hidden.shape()) {
    throw ContractError("lstm_backward: expected a gradient for every hidden "
                        "state " + cache.hidden.shape_string() + ", got " +
                        grad_hidden.shape_string());
  }
  const std::size_t steps = cache.hidden.dim(0);
  const std::size_t in = layer.input_size();
  const std::size_t h = layer.hidden_size();
  const std::size_t g4 = 4 * h;
  if (cache.input.dim(1) != in || cache.gates.dim(1) != g4) {
    throw ContractError("lstm_backward: cache is stale for this layer");
  }

  Tensor grad_pre({steps, g4});
  std::vector<double> dh_next(h, 0.0);
  std::vector<double> dc_next(h, 0.0);
  for (std::size_t t = steps; t-- > 0;) {
    const double *gate = cache.gates.data() + t * g4;
    const double *cell = cache.cells.data() + t * h;
    const double *cell_prev = t > 0 ? cache.cells.data() + (t - 1) * h : nullptr;
    const double *gh = grad_hidden.data() + t * h;
    double *dp = grad_pre.data() + t * g4;
    for (std::size_t j = 0; j < h; ++j) {
      const double i_gate = gate[j];
      const double f_gate = gate[h + j];
      const double o_gate = gate[2 * h + j];
      const double cand = gate[3 * h + j];
      const double tc = std::tanh(cell[j]);
      const double dh = gh[j] + dh_next[j];
      const double dc = dh * o_gate * (1.0 - tc * tc) + dc_next[j];
      const double c_prev = cell_prev ? cell_prev[j] : 0.0;
      dp[j] = dc * cand * i_gate * (1.0 - i_gate);
      dp[h + j] = dc * c_prev * f_gate * (1.0 - f_gate);
      dp[2 * h + j] = dh * tc * o_gate * (1.0 - o_gate);
      dp[3 * h + j] = dc * i_gate * (1.0 - cand * cand);
      dc_next[j] = dc * f_gate;
    }
    if (t > 0) {
      gemm(Transpose::kYes, Transpose::kNo, h, 1, g4, 1.0,
           layer.w_hidden.data(), h, dp, 1, 0.0, dh_next.data(), 1);
    }
  }

  LstmBackward result;
  result.grad_params = layer.zeros_like();
  gemm(Transpose::kYes, Transpose::kNo, g4, in, steps, 1.0, grad_pre.data(), g4,
       cache.input.data(), in, 0.0, result.grad_params.w_input.data(), in);
  if (steps > 1) {
    // h_{t-1} pairs with the gate gradient at step t; h_0 is zero.
    gemm(Transpose::kYes, Transpose::kNo, g4, h, steps - 1, 1.0,
         grad_pre.data() + g4, g4, cache.hidden.data(), h, 0.0,
         result.grad_params.w_hidden.data(), h);
  }
  for (std::size_t t = 0; t < steps; ++t) {
    const double *dp = grad_pre.data() + t * g4;
    for (std::size_t j = 0; j < g4; ++j) result.grad_params.bias[j] += dp[j];
  }
  result.grad_input = Tensor({steps, in});
  gemm(Transpose::kNo, Transpose::kNo, steps, in, g4, 1.0, grad_pre.data(), g4,
       layer.w_input.data(), in, 0.0, result.grad_input.data(), in);
  return result;
}

LstmStackForward lstm_forward(std::span<const LstmLayer> stack,
                              const Tensor &xs) {
  if (stack.empty()) throw ConfigError("lstm stack is empty");
  LstmStackForward result;
  Tensor current = xs;
  for (const LstmLayer &layer : stack) {
    LstmForward f = lstm_layer_forward(layer, current);
    current = std::move(f.hidden);
    result.caches.push_back(std::move(f.cache));
  }
  result.hidden = std::move(current);
  return result;
}

LstmStackBackward lstm_backward(const std::vector<LstmCache> &caches,
                                const Tensor &grad_hidden) {
  if (caches.empty()) throw ContractError("lstm_backward: empty cache stack");
  LstmStackBackward result;
  result.grad_params.resize(caches.size());
  Tensor grad = grad_hidden;
  for (std::size_t l = caches.size(); l-- > 0;) {
    LstmBackward b = lstm_layer_backward(caches[l], grad);
    result.grad_params[l] = std::move(b.grad_params);
    grad = std::move(b.grad_input);
  }
  result.grad_input = std::move(grad);
  return result;
}

}  // namespace attnhar
