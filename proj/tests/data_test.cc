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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <gtest/gtest.h>

#include "attnhar/data.h"
#include "attnhar/errors.h"

namespace attnhar {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("attnhar_data_test_" + std::to_string(::testing::UnitTest::GetInstance()
                                                       ->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path file(const std::string &name, const std::string &body) const {
    const fs::path p = path_ / name;
    std::ofstream(p) << body;
    return p;
  }
  const fs::path &path() const { return path_; }

 private:
  fs::path path_;
};

TimeSeriesDataset series(std::vector<int> labels, std::size_t channels = 1) {
  TimeSeriesDataset ds;
  ds.samples = Tensor({labels.size(), channels});
  for (std::size_t i = 0; i < ds.samples.size(); ++i) ds.samples[i] = double(i);
  ds.labels = std::move(labels);
  for (std::size_t j = 0; j < channels; ++j) ds.channel_names.push_back("c" + std::to_string(j));
  ds.num_classes = 3;
  return ds;
}

TEST(CsvTest, ReadsThreeRows) {
  TempDir dir;
  const fs::path p = dir.file("a.csv", "t,ax,ay,label\n0,1.5,-2,0\n1,2.5,-3,1\n2,3.5,-4,2\n");
  CsvSchema schema;
  schema.timestamp_column = "t";
  const TimeSeriesDataset ds = read_csv(p, schema);
  EXPECT_EQ(ds.samples.shape(), (Tensor::Shape{3, 2}));
  EXPECT_EQ(ds.labels, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(ds.channel_names, (std::vector<std::string>{"ax", "ay"}));
  EXPECT_EQ(ds.num_classes, 3u);
  EXPECT_EQ(ds.samples.at(2, 1), -4.0);
}

TEST(CsvTest, InterpolatesMissingCells) {
  TempDir dir;
  const fs::path p = dir.file("a.csv", "x,y,label\n1,,0\nnan,5,0\n3,NaN,0\n,7,0\n");
  const TimeSeriesDataset ds = read_csv(p, CsvSchema{});
  EXPECT_EQ(ds.samples.at(1, 0), 2.0);
  EXPECT_EQ(ds.samples.at(3, 0), 3.0);  // trailing run holds the last value
  EXPECT_EQ(ds.samples.at(0, 1), 5.0);  // leading run holds the first value
  EXPECT_EQ(ds.samples.at(2, 1), 6.0);
}

TEST(CsvTest, InterpolationOfSingleGap) {
  Tensor t({3, 1}, std::vector<double>{1.0, std::nan(""), 3.0});
  interpolate_missing(t);
  EXPECT_EQ(t, Tensor({3, 1}, std::vector<double>{1.0, 2.0, 3.0}));
  Tensor empty_channel({2, 1}, std::nan(""));
  EXPECT_THROW(interpolate_missing(empty_channel), DataError);
}

TEST(CsvTest, SchemaAndParseErrors) {
  TempDir dir;
  CsvSchema schema;
  schema.channel_columns = {"x", "z"};
  EXPECT_THROW(read_csv(dir.file("a.csv", "x,y,label\n1,2,0\n"), schema), SchemaError);
  try {
    read_csv(dir.file("b.csv", "x,label\n1,0\nabc,1\n"), CsvSchema{});
    FAIL() << "expected ParseError";
  } catch (const ParseError &e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(read_csv(dir.path() / "missing.csv", CsvSchema{}), IoError);
  EXPECT_THROW(read_csv(dir.file("c.csv", "x,label\n"), CsvSchema{}), DataError);
}

TEST(CsvTest, WriteReadRoundTripIsExact) {
  TempDir dir;
  TimeSeriesDataset ds = series({0, 1, 1, 2}, 2);
  ds.samples[3] = 0.1 + 0.2;
  ds.samples[5] = -1e-300;
  write_csv(ds, dir.path() / "x.csv");
  const TimeSeriesDataset back = read_csv(dir.path() / "x.csv", CsvSchema{});
  EXPECT_EQ(back.samples, ds.samples);
  EXPECT_EQ(back.labels, ds.labels);
}

TEST(StandardizerTest, ProducesZeroMeanUnitVariance) {
  Rng rng(1);
  Tensor x({500, 3});
  for (std::size_t i = 0; i < 500; ++i) {
    x.at(i, 0) = 5.0 + 2.0 * rng.normal();
    x.at(i, 1) = -3.0 + 0.1 * rng.normal();
    x.at(i, 2) = 4.0;  // constant channel
  }
  const Standardizer s = Standardizer::fit(x);
  EXPECT_EQ(s.stddev[2], 1.0);
  s.apply(x);
  for (std::size_t j = 0; j < 2; ++j) {
    double m = 0, v = 0;
    for (std::size_t i = 0; i < 500; ++i) m += x.at(i, j);
    m /= 500;
    for (std::size_t i = 0; i < 500; ++i) v += (x.at(i, j) - m) * (x.at(i, j) - m);
    EXPECT_NEAR(m, 0.0, 1e-12);
    EXPECT_NEAR(v / 500, 1.0, 1e-12);
  }
  for (std::size_t i = 0; i < 500; ++i) EXPECT_EQ(x.at(i, 2), 0.0);
  Tensor wrong({2, 2});
  EXPECT_THROW(s.apply(wrong), DimensionError);
}

TEST(FrameTest, CountsAndStride) {
  EXPECT_EQ(frame_stride(24, 0.5), 12u);
  EXPECT_EQ(frame_stride(24, 0.0), 24u);
  EXPECT_THROW(frame_stride(24, 1.0), ConfigError);
  EXPECT_EQ(extract_frames(series(std::vector<int>(100, 1)), 24).size(), 7u);
  EXPECT_EQ(extract_frames(series(std::vector<int>(24, 1)), 24).size(), 1u);
  EXPECT_THROW(extract_frames(series(std::vector<int>(23, 1)), 24), WindowTooShortError);
}

TEST(FrameTest, BookkeepingAndContents) {
  const TimeSeriesDataset ds = series(std::vector<int>(100, 2), 2);
  const FrameBatch b = extract_frames(ds, 24);
  for (std::size_t f = 0; f < b.size(); ++f) {
    EXPECT_EQ(b.ranges[f].start, 12 * f);
    EXPECT_EQ(b.ranges[f].end, 12 * f + 24);
    EXPECT_EQ(b.labels[f], 2);
    const Tensor fr = b.frame(f);
    ASSERT_EQ(fr.shape(), (Tensor::Shape{24, 2}));
    for (std::size_t t = 0; t < 24; ++t)
      for (std::size_t j = 0; j < 2; ++j)
        EXPECT_EQ(fr.at(t, j), ds.samples.at(12 * f + t, j));
  }
}

TEST(FrameTest, MajorityLabelAndTies) {
  const std::vector<int> labels{0, 0, 1, 1, 1, 2, 2, 2};
  EXPECT_EQ(majority_label(labels, 0, 5, 3), 1);
  EXPECT_EQ(majority_label(labels, 2, 8, 3), 2);  // 3 vs 3: larger id wins
  EXPECT_EQ(majority_label(labels, 0, 4, 3), 1);  // 2 vs 2
  EXPECT_EQ(majority_label(labels, 0, 2, 3), 0);
}

TEST(FrameProperty, EverySampleCoveredUpToTail) {
  for (std::size_t n : {24u, 25u, 35u, 36u, 100u, 1000u}) {
    const FrameBatch b = extract_frames(series(std::vector<int>(n, 0)), 24);
    std::vector<int> cover(n, 0);
    for (const FrameRange &r : b.ranges) {
      EXPECT_EQ(r.end - r.start, 24u);
      EXPECT_LE(r.end, n);
      for (std::size_t i = r.start; i < r.end; ++i) ++cover[i];
    }
    // Only the tail shorter than one stride may be left uncovered.
    for (std::size_t i = 0; i < n; ++i)
      if (cover[i] == 0) EXPECT_GT(i + 12, n - 1) << "n " << n << " i " << i;
  }
}

SynthClass synth_class(double proportion, std::size_t lo, std::size_t hi, double hz,
                       std::size_t channels) {
  SynthClass c;
  c.proportion = proportion;
  c.min_duration = lo;
  c.max_duration = hi;
  c.frequency = hz;
  c.amplitude.assign(channels, 1.0);
  c.bias.assign(channels, 0.0);
  c.phase.assign(channels, 0.0);
  return c;
}

TEST(SynthTest, NoiselessSignalFollowsTheFormula) {
  SynthSpec spec;
  spec.channels = 2;
  spec.sampling_rate = 24.0;
  SynthClass c = synth_class(1.0, 48, 48, 2.0, 2);
  c.amplitude = {0.5, 2.0};
  c.bias = {1.0, -1.0};
  c.phase = {0.0, 0.7};
  spec.classes = {c, synth_class(1e-9, 48, 48, 1.0, 2)};
  Rng rng(3);
  const TimeSeriesDataset ds = synth_generate(rng, spec, 480);
  for (std::size_t n = 0; n < 480; ++n) {
    if (ds.labels[n] != 0) continue;
    const double t = double(n % 48);
    for (std::size_t j = 0; j < 2; ++j) {
      const double want =
          c.bias[j] + c.amplitude[j] * std::sin(2 * std::numbers::pi * 2.0 * t / 24.0 + c.phase[j]);
      EXPECT_NEAR(ds.samples.at(n, j), want, 1e-12);
    }
  }
}

TEST(SynthTest, FixedDurationSegments) {
  SynthSpec spec;
  spec.channels = 1;
  spec.classes = {synth_class(0.5, 48, 48, 1.0, 1), synth_class(0.5, 48, 48, 3.0, 1)};
  Rng rng(4);
  const TimeSeriesDataset ds = synth_generate(rng, spec, 4800);
  // Label changes can only happen on segment boundaries.
  for (std::size_t n = 1; n < ds.length(); ++n)
    if (ds.labels[n] != ds.labels[n - 1]) EXPECT_EQ(n % 48, 0u);
}

TEST(SynthTest, ClassSharesFollowProportions) {
  SynthSpec spec;
  spec.channels = 1;
  spec.classes = {synth_class(0.4, 4, 12, 1.0, 1), synth_class(0.2, 8, 24, 2.0, 1),
                  synth_class(0.2, 2, 6, 3.0, 1), synth_class(0.2, 4, 4, 4.0, 1)};
  Rng rng(5);
  const TimeSeriesDataset ds = synth_generate(rng, spec, 100000);
  std::vector<double> share(4, 0.0);
  for (int l : ds.labels) share[l] += 1.0 / 100000;
  EXPECT_NEAR(share[0], 0.4, 0.02);
  for (int c = 1; c < 4; ++c) EXPECT_NEAR(share[c], 0.2, 0.02);
}

TEST(SynthTest, DeterministicAndSnrCalibrated) {
  const SynthSpec spec = benchmark_synth_spec();
  EXPECT_NO_THROW(spec.validate());
  EXPECT_NEAR(spec.snr_db(), 6.0, 1e-9);
  Rng a(9), b(9), c(10);
  const TimeSeriesDataset x = synth_generate(a, spec, 2000);
  const TimeSeriesDataset y = synth_generate(b, spec, 2000);
  const TimeSeriesDataset z = synth_generate(c, spec, 2000);
  EXPECT_EQ(x.samples, y.samples);
  EXPECT_EQ(x.labels, y.labels);
  EXPECT_FALSE(x.samples == z.samples);
}

TEST(SynthTest, JsonRoundTripAndErrors) {
  const SynthSpec spec = benchmark_synth_spec();
  const SynthSpec back = SynthSpec::from_json_text(spec.to_json_text());
  EXPECT_EQ(back.to_json_text(), spec.to_json_text());
  EXPECT_THROW(SynthSpec::from_json_text("{not json"), ParseError);
  SynthSpec bad = spec;
  bad.classes.resize(1);
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(ManifestTest, RoundTripAndDigestCheck) {
  TempDir dir;
  TimeSeriesDataset train = series({0, 1, 2, 0, 1, 2}, 2);
  TimeSeriesDataset test = series({2, 2, 1}, 2);
  write_csv(train, dir.path() / "train.csv");
  write_csv(test, dir.path() / "test.csv");

  DatasetManifest m;
  m.directory = dir.path();
  m.schema.channel_columns = train.channel_names;
  m.schema.num_classes = 3;
  m.schema.sampling_rate = 24;
  m.splits = {{"train", "train.csv"}, {"test", "test.csv"}};
  m.digests = {{"train", file_digest(dir.path() / "train.csv")},
               {"test", file_digest(dir.path() / "test.csv")}};
  m.normalization = Standardizer::fit(train.samples);
  m.save(dir.path() / "manifest.txt");

  const DatasetManifest back = DatasetManifest::load(dir.path() / "manifest.txt");
  EXPECT_EQ(back.splits, m.splits);
  EXPECT_EQ(back.digests, m.digests);
  EXPECT_EQ(back.normalization.mean, m.normalization.mean);
  EXPECT_EQ(back.normalization.stddev, m.normalization.stddev);
  EXPECT_EQ(back.schema.num_classes, 3u);
  EXPECT_EQ(m.digests["train"].size(), 16u);

  // Splits are standardized with the train statistics.
  const TimeSeriesDataset t = back.load_split("test");
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      EXPECT_NEAR(t.samples.at(i, j),
                  (test.samples.at(i, j) - m.normalization.mean[j]) / m.normalization.stddev[j],
                  1e-12);
  EXPECT_THROW(back.load_split("val"), SchemaError);

  std::ofstream(dir.path() / "test.csv", std::ios::app) << "99,99,1\n";
  EXPECT_THROW(back.load_split("test"), DataError);
}

}  // namespace
}  // namespace attnhar
