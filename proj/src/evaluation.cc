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

#include "attnhar/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "attnhar/errors.h"

namespace attnhar {
namespace {

// z with P(|Z| <= z) = confidence, by bisection on erfc.
double normal_quantile_two_sided(double confidence) {
  const double tail = 1.0 - confidence;
  double lo = 0.0;
  double hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (std::erfc(mid / std::sqrt(2.0)) > tail) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::string format_weight(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

}  // namespace

EvalReport macro_f1(std::span<const int> truth, std::span<const int> predicted,
                    std::size_t num_classes, bool include_null) {
  if (truth.size() != predicted.size()) {
    throw DataError("macro_f1: " + std::to_string(truth.size()) +
                    " true labels vs " + std::to_string(predicted.size()) +
                    " predictions");
  }
  if (truth.empty()) throw DataError("macro_f1: no samples");
  EvalReport r;
  r.num_classes = num_classes;
  r.null_in_mean = include_null;
  r.samples = truth.size();
  r.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = predicted[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= num_classes ||
        static_cast<std::size_t>(p) >= num_classes) {
      throw DataError("macro_f1: label out of range at sample " +
                      std::to_string(i));
    }
    ++r.confusion[t][p];
    if (t == p) ++r.correct;
  }

  r.per_class.resize(num_classes);
  double f1_sum = 0.0;
  std::size_t in_mean = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    ClassMetrics &m = r.per_class[c];
    for (std::size_t k = 0; k < num_classes; ++k) {
      m.support += r.confusion[c][k];
      m.predicted += r.confusion[k][c];
    }
    const double tp = static_cast<double>(r.confusion[c][c]);
    m.precision = m.predicted ? tp / static_cast<double>(m.predicted) : 0.0;
    m.recall = m.support ? tp / static_cast<double>(m.support) : 0.0;
    const double denom = m.precision + m.recall;
    m.f1 = denom > 0.0 ? 2.0 * m.precision * m.recall / denom : 0.0;
    m.in_mean = m.support > 0 && (include_null || c != 0);
    if (m.in_mean) {
      f1_sum += m.f1;
      ++in_mean;
    }
  }
  r.mean_f1 = in_mean ? f1_sum / static_cast<double>(in_mean) : 0.0;
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.samples);
  std::tie(r.wilson_low, r.wilson_high) =
      wilson_interval(r.correct, r.samples, r.confidence);
  return r;
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n,
                                          double confidence) {
  if (n == 0) throw DataError("wilson_interval: n must be positive");
  if (successes > n) throw DataError("wilson_interval: successes exceed n");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw ConfigError("wilson_interval: confidence must lie in (0, 1)");
  }
  const double z =
      confidence == 0.95 ? kZ95 : normal_quantile_two_sided(confidence);
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half =
      z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  double low = std::clamp(center - half, 0.0, 1.0);
  double high = std::clamp(center + half, 0.0, 1.0);
  if (successes == 0) low = 0.0;
  if (successes == n) high = 1.0;
  return {low, high};
}

Tensor assemble_samplewise(std::size_t num_samples,
                           std::span<const FrameRange> ranges,
                           const Tensor &frame_probabilities) {
  if (ranges.empty()) throw DataError("assemble_samplewise: no frames");
  if (frame_probabilities.rank() != 2 ||
      frame_probabilities.dim(0) != ranges.size()) {
    throw DimensionError("assemble_samplewise: " +
                         std::to_string(ranges.size()) + " frames vs " +
                         frame_probabilities.shape_string() + " probabilities");
  }
  const std::size_t classes = frame_probabilities.dim(1);
  Tensor sums({num_samples, classes});
  std::vector<std::size_t> counts(num_samples, 0);
  for (std::size_t f = 0; f < ranges.size(); ++f) {
    const auto row = frame_probabilities.row(f);
    for (std::size_t i = ranges[f].start; i < ranges[f].end && i < num_samples; ++i) {
      auto dst = sums.row(i);
      for (std::size_t c = 0; c < classes; ++c) dst[c] += row[c];
      ++counts[i];
    }
  }
  const auto last = frame_probabilities.row(ranges.size() - 1);
  for (std::size_t i = 0; i < num_samples; ++i) {
    auto dst = sums.row(i);
    if (counts[i] == 0) {
      std::copy(last.begin(), last.end(), dst.begin());
    } else {
      for (double &v : dst) v /= static_cast<double>(counts[i]);
    }
  }
  return sums;
}

std::vector<int> argmax_rows(const Tensor &probabilities) {
  std::vector<int> out(probabilities.dim(0));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto row = probabilities.row(i);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) -
                              row.begin());
  }
  return out;
}

SamplewisePrediction samplewise_predict(const ModelParams &params,
                                        const TimeSeriesDataset &dataset) {
  const ModelConfig &cfg = params.config;
  if (dataset.channels() != cfg.channels) {
    throw DimensionError("dataset has shape [N x " +
                         std::to_string(dataset.channels()) +
                         "], model expects [" + std::to_string(cfg.window) +
                         " x " + std::to_string(cfg.channels) + "] frames");
  }
  SamplewisePrediction out;
  out.frames = extract_frames(dataset, cfg.window, 0.5);
  const std::size_t count = out.frames.size();
  Tensor frame_probs({count, cfg.classes});
  out.frame_predictions.resize(count);
  for (std::size_t f = 0; f < count; ++f) {
    ModelForward fw = model_forward(params, out.frames.frame(f), Mode::kEval, nullptr);
    const auto probs = fw.prediction.probabilities.values();
    std::copy(probs.begin(), probs.end(), frame_probs.row(f).begin());
    out.frame_predictions[f] = fw.prediction.label;
    if (fw.prediction.trace) {
      AttentionTrace trace = std::move(*fw.prediction.trace);
      trace.frame_id = static_cast<long>(f);
      trace.predicted = fw.prediction.label;
      trace.truth = out.frames.labels[f];
      out.traces.push_back(std::move(trace));
    }
  }
  out.probabilities = assemble_samplewise(dataset.length(), out.frames.ranges,
                                          frame_probs);
  out.labels = argmax_rows(out.probabilities);
  return out;
}

EvalReport evaluate(const ModelParams &params, const TimeSeriesDataset &dataset,
                    bool include_null) {
  const SamplewisePrediction pred = samplewise_predict(params, dataset);
  return macro_f1(dataset.labels, pred.labels, params.config.classes,
                  include_null);
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "attnhar-eval-report";
  j["version"] = 1;
  j["samples"] = samples;
  j["correct"] = correct;
  j["accuracy"] = accuracy;
  j["mean_f1"] = mean_f1;
  j["null_in_mean"] = null_in_mean;
  j["wilson"] = {{"confidence", confidence}, {"low", wilson_low}, {"high", wilson_high}};
  j["per_class"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    const ClassMetrics &m = per_class[c];
    nlohmann::ordered_json row;
    row["class"] = c;
    row["precision"] = m.precision;
    row["recall"] = m.recall;
    row["f1"] = m.f1;
    row["support"] = m.support;
    row["predicted"] = m.predicted;
    row["in_mean"] = m.in_mean;
    j["per_class"].push_back(std::move(row));
  }
  j["confusion"] = confusion;
  return j.dump(2) + "\n";
}

double median(std::vector<double> values) {
  if (values.empty()) throw DataError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

AttentionSummary summarize_traces(std::span<const AttentionTrace> traces,
                                  std::size_t num_classes) {
  AttentionSummary s;
  if (traces.empty()) return s;
  s.num_weights = traces.front().weights.size();
  std::vector<std::vector<std::vector<double>>> columns(
      num_classes, std::vector<std::vector<double>>(s.num_weights));
  for (const AttentionTrace &t : traces) {
    if (t.truth < 0 || static_cast<std::size_t>(t.truth) >= num_classes) {
      throw DataError("attention trace has class " + std::to_string(t.truth) +
                      " outside [0, " + std::to_string(num_classes) + ")");
    }
    if (t.weights.size() != s.num_weights) {
      throw DimensionError("attention traces differ in length");
    }
    for (std::size_t k = 0; k < s.num_weights; ++k) {
      columns[t.truth][k].push_back(t.weights[k]);
    }
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (columns[c].front().empty()) continue;
    s.classes.push_back(static_cast<int>(c));
    s.frame_counts.push_back(columns[c].front().size());
    std::vector<double> row;
    for (auto &col : columns[c]) row.push_back(median(std::move(col)));
    s.medians.push_back(std::move(row));
  }
  return s;
}

AttentionSummary attention_summary(const ModelParams &params,
                                   const TimeSeriesDataset &dataset) {
  if (!params.attention) {
    throw UnsupportedVariantError(
        "attention summary needs an attention-variant model, got baseline");
  }
  const SamplewisePrediction pred = samplewise_predict(params, dataset);
  return summarize_traces(pred.traces, params.config.classes);
}

std::string AttentionSummary::to_csv() const {
  std::string out = "class";
  for (std::size_t k = 0; k < num_weights; ++k) out += ",w" + std::to_string(k + 1);
  out += '\n';
  for (std::size_t r = 0; r < classes.size(); ++r) {
    out += std::to_string(classes[r]);
    for (double v : medians[r]) out += "," + format_weight(v);
    out += '\n';
  }
  return out;
}

}  // namespace attnhar
