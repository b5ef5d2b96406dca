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

#include "attnhar/model.h"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "attnhar/errors.h"

namespace attnhar {

std::string_view variant_name(Variant v) {
  return v == Variant::kBaseline ? "baseline" : "attention";
}

Variant parse_variant(std::string_view name) {
  if (name == "baseline") return Variant::kBaseline;
  if (name == "attention") return Variant::kAttention;
  throw ConfigError("unknown model variant '" + std::string(name) +
                    "' (expected baseline or attention)");
}

void ModelConfig::validate() const {
  if (channels == 0 || filters == 0 || kernel_len == 0 || conv_layers == 0 ||
      hidden == 0 || lstm_layers == 0 || window == 0) {
    throw ConfigError("model config: every dimension must be positive");
  }
  if (classes < 2) throw ConfigError("model config: need at least 2 classes");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ConfigError("model config: dropout must lie in [0, 1)");
  }
  const std::size_t t = steps();
  if (t == 0) {
    throw WindowTooShortError("window " + std::to_string(window) +
                              " is too short for " +
                              std::to_string(conv_layers) + " convolutions of "
                              "length " + std::to_string(kernel_len));
  }
  if (variant == Variant::kAttention && t < 2) {
    throw ConfigError("attention needs at least 2 recurrent steps");
  }
  if (attention_intermediate && hidden < 2) {
    throw ConfigError("intermediate score layer needs hidden >= 2");
  }
}

std::size_t ModelConfig::steps() const {
  return conv_output_length(window, kernel_len, conv_layers);
}

std::size_t ModelConfig::parameter_count() const {
  std::size_t n = 0;
  n += filters * kernel_len + filters;
  n += (conv_layers - 1) * (filters * kernel_len * filters + filters);
  std::size_t in = channels * filters;
  for (std::size_t l = 0; l < lstm_layers; ++l) {
    n += 4 * hidden * in + 4 * hidden * hidden + 4 * hidden;
    in = hidden;
  }
  if (variant == Variant::kAttention) {
    n += hidden * hidden + hidden;
    if (attention_intermediate) {
      const std::size_t mid = hidden / 2;
      n += mid * hidden + mid + mid + 1;
    } else {
      n += hidden + 1;
    }
  }
  n += classes * hidden + classes;
  return n;
}

ModelParams ModelParams::init(const ModelConfig &config, Rng &rng) {
  config.validate();
  ModelParams p;
  p.config = config;
  std::size_t maps = 1;
  for (std::size_t l = 0; l < config.conv_layers; ++l) {
    p.conv.push_back(
        ConvLayer::init(maps, config.filters, config.kernel_len, rng, true));
    maps = config.filters;
  }
  std::size_t in = config.channels * config.filters;
  for (std::size_t l = 0; l < config.lstm_layers; ++l) {
    p.lstm.push_back(LstmLayer::init(in, config.hidden, rng));
    in = config.hidden;
  }
  if (config.variant == Variant::kAttention) {
    p.attention =
        AttentionParams::init(config.hidden, rng, config.attention_intermediate);
  }
  p.classifier = LinearLayer::init(config.hidden, config.classes, rng);
  return p;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z;
  z.config = config;
  for (const auto &c : conv) z.conv.push_back(c.zeros_like());
  for (const auto &l : lstm) z.lstm.push_back(l.zeros_like());
  if (attention) z.attention = attention->zeros_like();
  z.classifier = classifier.zeros_like();
  return z;
}

namespace {

template <typename Params, typename Out>
void collect(Params &p, Out &out) {
  for (std::size_t l = 0; l < p.conv.size(); ++l) {
    const std::string prefix = "conv" + std::to_string(l) + ".";
    out.emplace_back(prefix + "kernels", &p.conv[l].kernels);
    out.emplace_back(prefix + "bias", &p.conv[l].bias);
  }
  for (std::size_t l = 0; l < p.lstm.size(); ++l) {
    const std::string prefix = "lstm" + std::to_string(l) + ".";
    out.emplace_back(prefix + "w_input", &p.lstm[l].w_input);
    out.emplace_back(prefix + "w_hidden", &p.lstm[l].w_hidden);
    out.emplace_back(prefix + "bias", &p.lstm[l].bias);
  }
  if (p.attention) {
    auto &a = *p.attention;
    out.emplace_back("attention.w1", &a.w1);
    out.emplace_back("attention.b1", &a.b1);
    if (a.has_intermediate()) {
      out.emplace_back("attention.w_mid", &a.w_mid);
      out.emplace_back("attention.b_mid", &a.b_mid);
    }
    out.emplace_back("attention.w2", &a.w2);
    out.emplace_back("attention.b2", &a.b2);
  }
  out.emplace_back("classifier.weight", &p.classifier.weight);
  out.emplace_back("classifier.bias", &p.classifier.bias);
}

}  // namespace

std::vector<std::pair<std::string, Tensor *>> ModelParams::named_tensors() {
  std::vector<std::pair<std::string, Tensor *>> out;
  collect(*this, out);
  return out;
}

std::vector<std::pair<std::string, const Tensor *>> ModelParams::named_tensors()
    const {
  std::vector<std::pair<std::string, const Tensor *>> out;
  collect(*this, out);
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto &[name, t] : named_tensors()) n += t->size();
  return n;
}

void accumulate(ModelParams &into, const ModelParams &other, double scale) {
  auto dst = into.named_tensors();
  auto src = other.named_tensors();
  if (dst.size() != src.size()) {
    throw DimensionError("accumulate: parameter sets differ in structure");
  }
  for (std::size_t i = 0; i < dst.size(); ++i) {
    axpy(scale, *src[i].second, *dst[i].second);
  }
}

ModelForward model_forward(const ModelParams &params, const Tensor &frame,
                           Mode mode, Rng *rng) {
  const ModelConfig &cfg = params.config;
  if (frame.rank() != 2 || frame.dim(0) != cfg.window ||
      frame.dim(1) != cfg.channels) {
    throw DimensionError("frame shape " + frame.shape_string() +
                         " does not match model input [" +
                         std::to_string(cfg.window) + "x" +
                         std::to_string(cfg.channels) + "]");
  }
  const Dropout dropout(cfg.dropout);

  ModelForward result;
  ModelCache &cache = result.cache;
  cache.params = &params;
  cache.mode = mode;

  Tensor x = frame;
  for (const ConvLayer &layer : params.conv) {
    ConvForward f = conv_forward(layer, x);
    x = std::move(f.output);
    cache.conv.push_back(std::move(f.cache));
  }
  // [T' x d x f] -> T' feature vectors of size d * f.
  cache.steps = x.dim(0);
  x.reshape({cache.steps, cfg.channels * cfg.filters});
  {
    DropoutForward d = dropout_forward(dropout, x, mode, rng);
    x = std::move(d.output);
    cache.conv_dropout = std::move(d.cache);
  }
  for (std::size_t l = 0; l < params.lstm.size(); ++l) {
    if (l > 0) {
      DropoutForward d = dropout_forward(dropout, x, mode, rng);
      x = std::move(d.output);
      cache.lstm_dropout.push_back(std::move(d.cache));
    }
    LstmForward f = lstm_layer_forward(params.lstm[l], x);
    x = std::move(f.hidden);
    cache.lstm.push_back(std::move(f.cache));
  }

  Tensor embedding;
  if (params.attention) {
    AttentionForward a = attend_forward(*params.attention, x);
    embedding = std::move(a.final_embedding);
    result.prediction.trace = std::move(a.trace);
    cache.attention = std::move(a.cache);
  } else {
    const std::size_t h = cfg.hidden;
    embedding = Tensor({h});
    std::memcpy(embedding.data(), x.data() + (cache.steps - 1) * h,
                h * sizeof(double));
  }
  {
    DropoutForward d = dropout_forward(dropout, embedding, mode, rng);
    embedding = std::move(d.output);
    cache.embedding_dropout = std::move(d.cache);
  }
  LinearForward out = linear_forward(params.classifier, embedding);
  cache.classifier = std::move(out.cache);

  Prediction &pred = result.prediction;
  pred.logits = std::move(out.output);
  pred.probabilities = softmax(pred.logits);
  pred.label = static_cast<int>(
      std::max_element(pred.probabilities.values().begin(),
                       pred.probabilities.values().end()) -
      pred.probabilities.values().begin());
  return result;
}

LossResult cross_entropy_loss(const Prediction &prediction, int label) {
  const std::size_t classes = prediction.logits.size();
  if (label < 0 || static_cast<std::size_t>(label) >= classes) {
    throw DataError("label " + std::to_string(label) + " outside [0, " +
                    std::to_string(classes) + ")");
  }
  const auto logits = prediction.logits.values();
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double z : logits) total += std::exp(z - peak);
  const double log_norm = peak + std::log(total);

  LossResult r;
  r.loss = log_norm - logits[label];
  r.grad_seed = Tensor({classes});
  for (std::size_t c = 0; c < classes; ++c) {
    r.grad_seed[c] = std::exp(logits[c] - log_norm);
  }
  r.grad_seed[label] -= 1.0;
  return r;
}

ModelParams model_backward(const ModelCache &cache, const Tensor &grad_seed) {
  if (cache.params == nullptr) {
    throw ContractError("model_backward: cache does not come from a forward "
                        "pass");
  }
  if (cache.mode != Mode::kTrain) {
    throw ContractError("model_backward: cache was produced in eval mode");
  }
  const ModelParams &params = *cache.params;
  const ModelConfig &cfg = params.config;
  if (cache.conv.size() != params.conv.size() ||
      cache.lstm.size() != params.lstm.size() ||
      cache.attention.has_value() != params.attention.has_value()) {
    throw ContractError("model_backward: cache is stale for these params");
  }

  ModelParams grads;
  grads.config = cfg;
  grads.conv.resize(params.conv.size());
  grads.lstm.resize(params.lstm.size());

  LinearBackward cls = linear_backward(cache.classifier, grad_seed);
  grads.classifier = std::move(cls.grad_params);
  Tensor grad_embedding = dropout_backward(cache.embedding_dropout,
                                           cls.grad_input);

  const std::size_t h = cfg.hidden;
  Tensor grad_hidden;
  if (params.attention) {
    AttentionBackward a = attend_backward(*cache.attention, grad_embedding);
    grads.attention = std::move(a.grad_params);
    grad_hidden = std::move(a.grad_hidden);
  } else {
    grad_hidden = Tensor({cache.steps, h});
    std::memcpy(grad_hidden.data() + (cache.steps - 1) * h,
                grad_embedding.data(), h * sizeof(double));
  }

  Tensor grad = std::move(grad_hidden);
  for (std::size_t l = params.lstm.size(); l-- > 0;) {
    LstmBackward b = lstm_layer_backward(cache.lstm[l], grad);
    grads.lstm[l] = std::move(b.grad_params);
    grad = std::move(b.grad_input);
    if (l > 0) grad = dropout_backward(cache.lstm_dropout[l - 1], grad);
  }
  grad = dropout_backward(cache.conv_dropout, grad);
  grad.reshape({cache.steps, cfg.channels, cfg.filters});
  for (std::size_t l = params.conv.size(); l-- > 0;) {
    ConvBackward b = conv_backward(cache.conv[l], grad);
    grads.conv[l] = std::move(b.grad_params);
    grad = std::move(b.grad_input);
  }
  return grads;
}

}  // namespace attnhar
