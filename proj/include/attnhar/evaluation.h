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

#ifndef ATTNHAR_EVALUATION_H_
#define ATTNHAR_EVALUATION_H_

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "attnhar/attention.h"
#include "attnhar/data.h"
#include "attnhar/model.h"
#include "attnhar/tensor.h"

namespace attnhar {

inline constexpr double kZ95 = 1.959964;

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;    // true samples of this class
  std::size_t predicted = 0;  // samples predicted as this class
  bool in_mean = false;
};

struct EvalReport {
  std::size_t num_classes = 0;
  std::vector<std::vector<std::size_t>> confusion;  // [truth][predicted]
  std::vector<ClassMetrics> per_class;
  double mean_f1 = 0.0;
  double accuracy = 0.0;
  std::size_t samples = 0;
  std::size_t correct = 0;
  double confidence = 0.95;
  double wilson_low = 0.0;
  double wilson_high = 0.0;
  bool null_in_mean = true;

  // Versioned JSON document ("format": "attnhar-eval-report", "version": 1).
  std::string to_json() const;
};

// Mean F1 averages per-class F1 over the classes present in `truth`; class 0
// is left out of the mean when include_null is false.
EvalReport macro_f1(std::span<const int> truth, std::span<const int> predicted,
                    std::size_t num_classes, bool include_null = true);

// Wilson score interval for a binomial proportion. The z value for 0.95 is
// 1.959964; other confidences invert the normal CDF numerically.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n,
                                          double confidence = 0.95);

// Combines frame probabilities [frames x C] into per-sample probabilities
// [N x C]: each sample takes the mean over the frames covering it, and
// samples after the last frame take the last frame's probabilities.
Tensor assemble_samplewise(std::size_t num_samples,
                           std::span<const FrameRange> ranges,
                           const Tensor &frame_probabilities);

std::vector<int> argmax_rows(const Tensor &probabilities);

struct SamplewisePrediction {
  std::vector<int> labels;             // per sample
  Tensor probabilities;                // [N x C]
  FrameBatch frames;
  std::vector<int> frame_predictions;
  std::vector<AttentionTrace> traces;  // attention variant only
};

SamplewisePrediction samplewise_predict(const ModelParams &params,
                                        const TimeSeriesDataset &dataset);

// Sample-wise prediction followed by macro F1 and the Wilson interval on
// sample accuracy.
EvalReport evaluate(const ModelParams &params, const TimeSeriesDataset &dataset,
                    bool include_null = true);

struct AttentionSummary {
  std::size_t num_weights = 0;
  std::vector<int> classes;                  // classes with at least one frame
  std::vector<std::vector<double>> medians;  // [class row][weight]
  std::vector<std::size_t> frame_counts;

  // Header "class,w1,...,wK" then one row per class.
  std::string to_csv() const;
};

// Per-class elementwise medians of the traces, grouped by trace.truth.
AttentionSummary summarize_traces(std::span<const AttentionTrace> traces,
                                  std::size_t num_classes);

// Throws UnsupportedVariantError for baseline models.
AttentionSummary attention_summary(const ModelParams &params,
                                   const TimeSeriesDataset &dataset);

double median(std::vector<double> values);

}  // namespace attnhar

#endif  // ATTNHAR_EVALUATION_H_
