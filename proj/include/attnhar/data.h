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

#ifndef ATTNHAR_DATA_H_
#define ATTNHAR_DATA_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "attnhar/rng.h"
#include "attnhar/tensor.h"

namespace attnhar {

// Per-channel affine normalization fitted on the training split.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  // Population mean and standard deviation per column of [N x d]. Constant
  // channels get stddev 1.
  static Standardizer fit(const Tensor &samples);
  void apply(Tensor &samples) const;
  bool empty() const { return mean.empty(); }
};

struct TimeSeriesDataset {
  Tensor samples;            // [N x d]
  std::vector<int> labels;   // N entries in [0, num_classes), 0 = null class
  std::vector<std::string> channel_names;
  double sampling_rate = 0.0;
  std::string split = "train";
  std::size_t num_classes = 0;
  Standardizer normalization;

  std::size_t length() const { return labels.size(); }
  std::size_t channels() const { return channel_names.size(); }
};

// Column mapping for CSV ingestion. Empty channel_columns selects every
// column except the label and timestamp columns, in file order.
struct CsvSchema {
  std::vector<std::string> channel_columns;
  std::string label_column = "label";
  std::string timestamp_column;  // optional, ignored when empty
  char delimiter = ',';
  std::size_t num_classes = 0;   // 0: one more than the largest label
  double sampling_rate = 0.0;
  std::string split = "train";
};

// Parses the file and fills sensor dropouts: empty, "nan" or "NaN" cells are
// linearly interpolated per channel, with leading and trailing runs held at
// the nearest observed value. No normalization is applied.
TimeSeriesDataset read_csv(const std::filesystem::path &path,
                           const CsvSchema &schema);

// read_csv followed by standardization. With `train_stats` null the
// statistics are fitted on this file, which is then treated as the training
// split; otherwise the given statistics are applied.
TimeSeriesDataset load_csv(const std::filesystem::path &path,
                           const CsvSchema &schema,
                           const Standardizer *train_stats = nullptr);

// Writes header "ch0,...,label" and shortest round-trip decimal values.
void write_csv(const TimeSeriesDataset &dataset,
               const std::filesystem::path &path);

// In place over [N x d]; a channel without any observation is an error.
void interpolate_missing(Tensor &samples);

struct FrameRange {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
};

struct FrameBatch {
  Tensor frames;  // [B x window x d]
  std::vector<int> labels;
  std::vector<FrameRange> ranges;
  std::size_t window = 0;

  std::size_t size() const { return labels.size(); }
  // Copy of frame i as [window x d].
  Tensor frame(std::size_t i) const;
};

std::size_t frame_stride(std::size_t window, double overlap);

// Majority label of labels[start, end); ties go to the largest class id.
int majority_label(const std::vector<int> &labels, std::size_t start,
                   std::size_t end, std::size_t num_classes);

FrameBatch extract_frames(const TimeSeriesDataset &dataset, std::size_t window,
                          double overlap = 0.5);

// ---------------------------------------------------------------------------
// Synthetic activity generator.
//
// The series is a concatenation of segments. Each segment draws its class
// with probability proportional to proportion / mean_duration (so that the
// share of *samples* per class follows `proportion`), then a duration
// uniformly from [min_duration, max_duration]. Within a segment, sample
// t (counted from the segment start) on channel j is
//   bias[j] + amplitude[j] * sin(2 pi frequency t / sampling_rate + phase[j])
// plus N(0, noise_std^2) noise.
struct SynthClass {
  double proportion = 1.0;
  std::size_t min_duration = 24;
  std::size_t max_duration = 96;
  double frequency = 1.0;  // Hz
  std::vector<double> amplitude;
  std::vector<double> bias;
  std::vector<double> phase;
};

struct SynthSpec {
  std::size_t channels = 0;
  double sampling_rate = 24.0;
  double noise_std = 0.0;
  std::size_t train_samples = 0;
  std::size_t val_samples = 0;
  std::size_t test_samples = 0;
  std::vector<SynthClass> classes;

  void validate() const;
  // Mean noiseless power per channel and sample, weighted by proportion.
  double signal_power() const;
  double snr_db() const;
  // Noise standard deviation achieving `snr_db` for this spec's signals.
  double noise_std_for_snr(double snr_db) const;

  static SynthSpec from_json_text(const std::string &text);
  std::string to_json_text() const;
};

// Generates `samples` samples for one split.
TimeSeriesDataset synth_generate(Rng &rng, const SynthSpec &spec,
                                 std::size_t samples,
                                 const std::string &split = "train");

// 4 classes, 6 channels, class-dependent durations within 24..96 samples and
// noise at 6 dB SNR; 20000 / 5000 / 5000 samples.
SynthSpec benchmark_synth_spec();

// ---------------------------------------------------------------------------
// Dataset manifest: plain-text "key=value" lines describing a directory of
// split CSVs.
//
//   format=attnhar-dataset
//   version=1
//   channels=ch0,ch1,...          channel columns (comma separated)
//   label_column=label
//   timestamp_column=             optional
//   delimiter=,                   single character; "tab" for '\t'
//   num_classes=4
//   sampling_rate=24
//   window=24
//   split.train=train.csv         paths relative to the manifest
//   split.val=val.csv
//   split.test=test.csv
//   norm.mean=...                 optional train statistics; fitted on the
//   norm.std=...                  train split when absent
//   digest.<split>=<fnv1a64 hex>  optional, checked on load when present
struct DatasetManifest {
  std::filesystem::path directory;
  CsvSchema schema;
  std::size_t window = 24;
  std::map<std::string, std::string> splits;
  std::map<std::string, std::string> digests;
  Standardizer normalization;

  static DatasetManifest load(const std::filesystem::path &path);
  void save(const std::filesystem::path &path) const;

  // Loads and standardizes one split with the train statistics.
  TimeSeriesDataset load_split(const std::string &split) const;
};

// FNV-1a 64-bit digest of a file's bytes, as 16 lowercase hex digits.
std::string file_digest(const std::filesystem::path &path);

}  // namespace attnhar

#endif  // ATTNHAR_DATA_H_
