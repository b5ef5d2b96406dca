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

#include "attnhar/training.h"

#include <chrono>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "attnhar/errors.h"
#include "attnhar/evaluation.h"
#include "attnhar/rng.h"

namespace attnhar {
namespace {

// Training draws (shuffles, dropout masks) use a stream separate from the one
// that initializes parameters under the same seed.
constexpr std::uint64_t kTrainStreamSalt = 0x747261696E6E6721ULL;

std::vector<ParamGrad> pair_up(ModelParams &params, const ModelParams &grads) {
  auto values = params.named_tensors();
  auto gs = grads.named_tensors();
  if (values.size() != gs.size()) {
    throw DimensionError("rmsprop_step: gradient set does not mirror params");
  }
  std::vector<ParamGrad> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.push_back({values[i].first, values[i].second, gs[i].second});
  }
  return out;
}

}  // namespace

OptimState OptimState::for_params(const ModelParams &params, double lr,
                                  double lr_decay, double alpha,
                                  double epsilon) {
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(lr_decay > 0.0)) throw ConfigError("lr_decay must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  OptimState s;
  s.lr = lr;
  s.lr_decay = lr_decay;
  s.alpha = alpha;
  s.epsilon = epsilon;
  for (const auto &[name, t] : params.named_tensors()) {
    s.accumulators.push_back(t->zeros_like());
  }
  return s;
}

void OptimState::end_epoch() {
  lr *= lr_decay;
  ++epoch;
}

void rmsprop_step(OptimState &state, std::span<const ParamGrad> params) {
  if (params.size() != state.accumulators.size()) {
    throw DimensionError("rmsprop_step: " + std::to_string(params.size()) +
                         " parameter groups, optimizer tracks " +
                         std::to_string(state.accumulators.size()));
  }
  for (const ParamGrad &p : params) {
    if (p.grad->shape() != p.value->shape()) {
      throw DimensionError("rmsprop_step: gradient " + p.grad->shape_string() +
                           " does not match parameter '" + p.name + "' " +
                           p.value->shape_string());
    }
    for (double g : p.grad->values()) {
      if (!std::isfinite(g)) {
        throw NumericError("non-finite gradient in parameter group '" + p.name + "'");
      }
    }
  }
  const double alpha = state.alpha;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor &v = state.accumulators[i];
    double *theta = params[i].value->data();
    const double *g = params[i].grad->data();
    for (std::size_t k = 0; k < v.size(); ++k) {
      v[k] = alpha * v[k] + (1.0 - alpha) * g[k] * g[k];
      theta[k] -= state.lr * g[k] / (std::sqrt(v[k]) + state.epsilon);
    }
  }
}

void rmsprop_step(OptimState &state, ModelParams &params,
                  const ModelParams &grads) {
  const auto pairs = pair_up(params, grads);
  rmsprop_step(state, pairs);
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(lr_decay > 0.0)) throw ConfigError("lr_decay must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw ConfigError("overlap must lie in [0, 1)");
}

std::string EpochRecord::to_json() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["lr"] = lr;
  j["train_loss"] = train_loss;
  j["val_meanF1"] = val_mean_f1;
  j["seconds"] = seconds ? nlohmann::ordered_json(*seconds) : nlohmann::ordered_json();
  return j.dump();
}

ModelConfig model_config_for(const TimeSeriesDataset &dataset,
                             const TrainConfig &config, std::size_t window,
                             ModelConfig base) {
  base.window = window;
  base.channels = dataset.channels();
  base.classes = dataset.num_classes;
  base.dropout = config.dropout;
  base.variant = config.variant;
  base.validate();
  return base;
}

TrainResult train(ModelParams initial, const TimeSeriesDataset &train_set,
                  const TimeSeriesDataset &val_set, const TrainConfig &config,
                  const std::function<void(const EpochRecord &)> &on_epoch,
                  bool record_timing) {
  config.validate();
  if (train_set.length() == 0) throw DataError("training split is empty");
  if (val_set.length() == 0) throw DataError("validation split is empty");
  const ModelConfig &cfg = initial.config;
  if (train_set.channels() != cfg.channels) {
    throw DimensionError("training data has " +
                         std::to_string(train_set.channels()) +
                         " channels, model expects " + std::to_string(cfg.channels));
  }
  const FrameBatch frames = extract_frames(train_set, cfg.window, config.overlap);
  for (int label : frames.labels) {
    if (static_cast<std::size_t>(label) >= cfg.classes) {
      throw DataError("frame label " + std::to_string(label) +
                      " outside the model's " + std::to_string(cfg.classes) +
                      " classes");
    }
  }

  TrainResult result;
  ModelParams params = std::move(initial);
  OptimState state = OptimState::for_params(params, config.lr, config.lr_decay,
                                            config.alpha, config.epsilon);
  Rng rng(config.seed ^ kTrainStreamSalt);
  result.best = Checkpoint{params, config.seed, 0};
  double best_f1 = -std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  const std::size_t n = frames.size();
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const std::vector<std::size_t> order = shuffle_indices(rng, n);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < n; begin += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(n, begin + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - begin);
      ModelParams grads = params.zeros_like();
      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t f = order[k];
        ModelForward fw = model_forward(params, frames.frame(f), Mode::kTrain, &rng);
        LossResult loss = cross_entropy_loss(fw.prediction, frames.labels[f]);
        if (!std::isfinite(loss.loss)) {
          throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batch_index) + ", frame " +
                             std::to_string(f));
        }
        loss_sum += loss.loss;
        accumulate(grads, model_backward(fw.cache, loss.grad_seed), scale);
      }
      try {
        rmsprop_step(state, params, grads);
      } catch (const NumericError &e) {
        throw NumericError(std::string(e.what()) + " at epoch " +
                           std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index));
      }
    }
    state.end_epoch();

    EpochRecord record;
    record.epoch = epoch;
    record.lr = state.lr;
    record.train_loss = loss_sum / static_cast<double>(n);
    record.val_mean_f1 = evaluate(params, val_set, config.include_null_in_mean).mean_f1;
    if (record_timing) {
      record.seconds = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - started)
                           .count();
    }
    result.log.push_back(record);
    if (on_epoch) on_epoch(record);

    if (record.val_mean_f1 > best_f1) {
      best_f1 = record.val_mean_f1;
      result.best = Checkpoint{params, config.seed, static_cast<std::uint32_t>(epoch)};
      result.best_epoch = epoch;
      since_best = 0;
    } else if (config.patience > 0 && ++since_best >= config.patience) {
      result.early_stopped = true;
      break;
    }
  }
  result.last = Checkpoint{std::move(params), config.seed,
                           static_cast<std::uint32_t>(state.epoch)};
  return result;
}

}  // namespace attnhar
