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

#ifndef ATTNHAR_TRAINING_H_
#define ATTNHAR_TRAINING_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attnhar/checkpoint.h"
#include "attnhar/data.h"
#include "attnhar/model.h"
#include "attnhar/tensor.h"

namespace attnhar {

// Plain RMSProp without momentum or centering:
//   v <- alpha v + (1 - alpha) g^2
//   theta <- theta - lr g / (sqrt(v) + epsilon)
struct OptimState {
  std::vector<Tensor> accumulators;
  double lr = 1e-3;
  double lr_decay = 0.98;
  double alpha = 0.9;
  double epsilon = 1e-8;
  std::size_t epoch = 0;

  static OptimState for_params(const ModelParams &params, double lr,
                               double lr_decay, double alpha = 0.9,
                               double epsilon = 1e-8);
  // lr <- lr * lr_decay; epoch += 1.
  void end_epoch();
};

struct ParamGrad {
  std::string name;
  Tensor *value;
  const Tensor *grad;
};

// Throws NumericError naming the parameter group on a non-finite gradient;
// nothing is updated in that case.
void rmsprop_step(OptimState &state, std::span<const ParamGrad> params);
void rmsprop_step(OptimState &state, ModelParams &params,
                  const ModelParams &grads);

struct TrainConfig {
  std::size_t batch_size = 100;
  std::size_t epochs = 30;
  std::uint64_t seed = 1;
  double lr = 1e-3;
  double lr_decay = 0.98;
  double alpha = 0.9;
  double epsilon = 1e-8;
  double dropout = 0.5;
  Variant variant = Variant::kAttention;
  std::size_t patience = 5;  // 0 disables early stopping
  double overlap = 0.5;
  bool include_null_in_mean = true;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;     // 1-based
  double lr = 0.0;           // after this epoch's decay
  double train_loss = 0.0;   // sample-weighted mean over the epoch
  double val_mean_f1 = 0.0;
  std::optional<double> seconds;

  // {"epoch":..,"lr":..,"train_loss":..,"val_meanF1":..,"seconds":..}
  std::string to_json() const;
};

struct TrainResult {
  Checkpoint best;  // highest validation mean F1, earliest on ties
  Checkpoint last;
  std::size_t best_epoch = 0;  // 0: initial parameters
  std::vector<EpochRecord> log;
  bool early_stopped = false;
};

// Shuffled mini-batch training with per-epoch learning-rate decay and
// best-validation checkpointing. `initial` is consumed as the starting point.
// With record_timing, EpochRecord::seconds carries wall-clock time, which
// makes logs differ between otherwise identical runs.
TrainResult train(ModelParams initial, const TimeSeriesDataset &train_set,
                  const TimeSeriesDataset &val_set, const TrainConfig &config,
                  const std::function<void(const EpochRecord &)> &on_epoch = {},
                  bool record_timing = false);

// Model configuration for a dataset under a training config, with the
// remaining architecture sizes taken from `base`.
ModelConfig model_config_for(const TimeSeriesDataset &dataset,
                             const TrainConfig &config, std::size_t window,
                             ModelConfig base = {});

}  // namespace attnhar

#endif  // ATTNHAR_TRAINING_H_
