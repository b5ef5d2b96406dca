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

#include "attnhar/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "attnhar/errors.h"

namespace attnhar {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string &line, char delimiter) {
  std::vector<std::string> out;
  std::string_view rest(line);
  for (;;) {
    const auto pos = rest.find(delimiter);
    out.push_back(trim(rest.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    rest.remove_prefix(pos + 1);
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool parse_double(const std::string &s, double &out) {
  const char *begin = s.data();
  const char *end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end;
}

bool is_missing(const std::string &s) {
  return s.empty() || s == "nan" || s == "NaN" || s == "NAN" || s == "NA";
}

std::string join_doubles(const std::vector<double> &values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  return out;
}

std::vector<double> parse_doubles(const std::string &text,
                                  const std::string &key) {
  std::vector<double> out;
  if (text.empty()) return out;
  for (const auto &cell : split(text, ',')) {
    double v = 0.0;
    if (!parse_double(cell, v)) {
      throw ParseError("manifest: bad number '" + cell + "' in " + key);
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Standardization

Standardizer Standardizer::fit(const Tensor &samples) {
  const std::size_t n = samples.dim(0);
  const std::size_t d = samples.dim(1);
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.stddev.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += samples.at(i, j);
  }
  for (double &m : s.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double c = samples.at(i, j) - s.mean[j];
      s.stddev[j] += c * c;
    }
  }
  for (double &v : s.stddev) {
    v = std::sqrt(v / static_cast<double>(n));
    if (!(v > 0.0)) v = 1.0;
  }
  return s;
}

void Standardizer::apply(Tensor &samples) const {
  const std::size_t d = samples.dim(1);
  if (mean.size() != d || stddev.size() != d) {
    throw DimensionError("standardizer has " + std::to_string(mean.size()) +
                         " channels, data has " + std::to_string(d));
  }
  for (std::size_t i = 0; i < samples.dim(0); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      samples.at(i, j) = (samples.at(i, j) - mean[j]) / stddev[j];
    }
  }
}

// ---------------------------------------------------------------------------
// CSV

void interpolate_missing(Tensor &samples) {
  const std::size_t n = samples.dim(0);
  const std::size_t d = samples.dim(1);
  for (std::size_t j = 0; j < d; ++j) {
    std::size_t prev = n;  // last observed index, n = none yet
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isnan(samples.at(i, j))) continue;
      if (prev == n) {
        for (std::size_t k = 0; k < i; ++k) samples.at(k, j) = samples.at(i, j);
      } else if (i > prev + 1) {
        const double a = samples.at(prev, j);
        const double b = samples.at(i, j);
        const double span = static_cast<double>(i - prev);
        for (std::size_t k = prev + 1; k < i; ++k) {
          samples.at(k, j) = a + (b - a) * static_cast<double>(k - prev) / span;
        }
      }
      prev = i;
    }
    if (prev == n) {
      throw DataError("channel " + std::to_string(j) + " has no observations");
    }
    for (std::size_t k = prev + 1; k < n; ++k) {
      samples.at(k, j) = samples.at(prev, j);
    }
  }
}

TimeSeriesDataset read_csv(const std::filesystem::path &path,
                           const CsvSchema &schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    line.erase(0, 3);
  }
  const auto header = split(line, schema.delimiter);
  auto column = [&](const std::string &name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw SchemaError(path.string() + ": missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t label_col = column(schema.label_column);
  std::vector<std::string> names = schema.channel_columns;
  if (names.empty()) {
    for (const auto &h : header) {
      if (h != schema.label_column && h != schema.timestamp_column) {
        names.push_back(h);
      }
    }
  }
  if (names.empty()) throw SchemaError(path.string() + ": no channel columns");
  std::vector<std::size_t> cols;
  for (const auto &n : names) cols.push_back(column(n));
  if (!schema.timestamp_column.empty()) column(schema.timestamp_column);

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split(line, schema.delimiter);
    if (cells.size() != header.size()) {
      throw ParseError(path.string() + ": line " + std::to_string(row) +
                       " has " + std::to_string(cells.size()) +
                       " cells, header has " + std::to_string(header.size()));
    }
    for (std::size_t c : cols) {
      double v = std::numeric_limits<double>::quiet_NaN();
      if (!is_missing(cells[c]) && !parse_double(cells[c], v)) {
        throw ParseError(path.string() + ": line " + std::to_string(row) +
                         ": non-numeric value '" + cells[c] + "' in column '" +
                         header[c] + "'");
      }
      if (std::isinf(v)) {
        throw ParseError(path.string() + ": line " + std::to_string(row) +
                         ": infinite value in column '" + header[c] + "'");
      }
      values.push_back(v);
    }
    const std::string &lab = cells[label_col];
    int label = 0;
    const auto res = std::from_chars(lab.data(), lab.data() + lab.size(), label);
    if (res.ec != std::errc() || res.ptr != lab.data() + lab.size() ||
        label < 0) {
      throw ParseError(path.string() + ": line " + std::to_string(row) +
                       ": bad label '" + lab + "'");
    }
    labels.push_back(label);
  }
  if (labels.empty()) throw DataError(path.string() + ": no data rows");

  TimeSeriesDataset ds;
  ds.samples = Tensor({labels.size(), names.size()}, std::move(values));
  interpolate_missing(ds.samples);
  ds.labels = std::move(labels);
  ds.channel_names = std::move(names);
  ds.sampling_rate = schema.sampling_rate;
  ds.split = schema.split;
  const int max_label = *std::max_element(ds.labels.begin(), ds.labels.end());
  ds.num_classes = schema.num_classes ? schema.num_classes
                                      : static_cast<std::size_t>(max_label) + 1;
  if (static_cast<std::size_t>(max_label) >= ds.num_classes) {
    throw DataError(path.string() + ": label " + std::to_string(max_label) +
                    " outside [0, " + std::to_string(ds.num_classes) + ")");
  }
  return ds;
}

TimeSeriesDataset load_csv(const std::filesystem::path &path,
                           const CsvSchema &schema,
                           const Standardizer *train_stats) {
  TimeSeriesDataset ds = read_csv(path, schema);
  ds.normalization = train_stats ? *train_stats : Standardizer::fit(ds.samples);
  ds.normalization.apply(ds.samples);
  return ds;
}

void write_csv(const TimeSeriesDataset &dataset,
               const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto &name : dataset.channel_names) out << name << ',';
  out << "label\n";
  const std::size_t d = dataset.channels();
  for (std::size_t i = 0; i < dataset.length(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      out << format_double(dataset.samples.at(i, j)) << ',';
    }
    out << dataset.labels[i] << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Frames

Tensor FrameBatch::frame(std::size_t i) const {
  const std::size_t d = frames.dim(2);
  const std::size_t stride = window * d;
  return Tensor({window, d}, std::vector<double>(frames.data() + i * stride,
                                                 frames.data() + (i + 1) * stride));
}

std::size_t frame_stride(std::size_t window, double overlap) {
  if (!(overlap >= 0.0 && overlap < 1.0)) {
    throw ConfigError("overlap must lie in [0, 1)");
  }
  const auto stride = static_cast<std::size_t>(
      std::llround(static_cast<double>(window) * (1.0 - overlap)));
  return std::max<std::size_t>(stride, 1);
}

int majority_label(const std::vector<int> &labels, std::size_t start,
                   std::size_t end, std::size_t num_classes) {
  std::vector<std::size_t> counts(num_classes, 0);
  for (std::size_t i = start; i < end; ++i) ++counts[labels[i]];
  int best = 0;
  for (std::size_t c = 1; c < num_classes; ++c) {
    if (counts[c] >= counts[best]) best = static_cast<int>(c);
  }
  return best;
}

FrameBatch extract_frames(const TimeSeriesDataset &dataset, std::size_t window,
                          double overlap) {
  if (window == 0) throw ConfigError("window must be positive");
  const std::size_t n = dataset.length();
  if (n < window) {
    throw WindowTooShortError("series of " + std::to_string(n) +
                              " samples is shorter than the window of " +
                              std::to_string(window));
  }
  const std::size_t stride = frame_stride(window, overlap);
  const std::size_t count = (n - window) / stride + 1;
  const std::size_t d = dataset.samples.dim(1);

  FrameBatch batch;
  batch.window = window;
  batch.frames = Tensor({count, window, d});
  batch.labels.reserve(count);
  batch.ranges.reserve(count);
  for (std::size_t f = 0; f < count; ++f) {
    const std::size_t start = f * stride;
    std::copy_n(dataset.samples.data() + start * d, window * d,
                batch.frames.data() + f * window * d);
    batch.ranges.push_back({start, start + window});
    batch.labels.push_back(
        majority_label(dataset.labels, start, start + window, dataset.num_classes));
  }
  return batch;
}

// ---------------------------------------------------------------------------
// Synthetic data

void SynthSpec::validate() const {
  if (classes.size() < 2) throw ConfigError("synth: need at least 2 classes");
  if (channels == 0) throw ConfigError("synth: need at least 1 channel");
  if (!(sampling_rate > 0.0)) throw ConfigError("synth: sampling rate must be positive");
  if (!(noise_std >= 0.0)) throw ConfigError("synth: noise_std must be >= 0");
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto &k = classes[c];
    const std::string where = "synth: class " + std::to_string(c);
    if (!(k.proportion > 0.0)) throw ConfigError(where + " needs proportion > 0");
    if (k.min_duration == 0 || k.max_duration < k.min_duration) {
      throw ConfigError(where + " needs 0 < min_duration <= max_duration");
    }
    if (k.amplitude.size() != channels || k.bias.size() != channels ||
        k.phase.size() != channels) {
      throw ConfigError(where + " needs amplitude/bias/phase per channel");
    }
  }
}

double SynthSpec::signal_power() const {
  double total = 0.0;
  double weight = 0.0;
  for (const auto &k : classes) {
    double p = 0.0;
    for (std::size_t j = 0; j < channels; ++j) {
      p += k.bias[j] * k.bias[j] + 0.5 * k.amplitude[j] * k.amplitude[j];
    }
    total += k.proportion * p / static_cast<double>(channels);
    weight += k.proportion;
  }
  return total / weight;
}

double SynthSpec::snr_db() const {
  if (noise_std == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal_power() / (noise_std * noise_std));
}

double SynthSpec::noise_std_for_snr(double db) const {
  return std::sqrt(signal_power() / std::pow(10.0, db / 10.0));
}

SynthSpec SynthSpec::from_json_text(const std::string &text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("synth spec: ") + e.what());
  }
  SynthSpec s;
  try {
    s.channels = j.at("channels").get<std::size_t>();
    s.sampling_rate = j.value("sampling_rate", 24.0);
    s.train_samples = j.value("train_samples", std::size_t{0});
    s.val_samples = j.value("val_samples", std::size_t{0});
    s.test_samples = j.value("test_samples", std::size_t{0});
    for (const auto &c : j.at("classes")) {
      SynthClass k;
      k.proportion = c.value("proportion", 1.0);
      k.min_duration = c.at("min_duration").get<std::size_t>();
      k.max_duration = c.at("max_duration").get<std::size_t>();
      k.frequency = c.at("frequency").get<double>();
      k.amplitude = c.at("amplitude").get<std::vector<double>>();
      k.bias = c.at("bias").get<std::vector<double>>();
      k.phase = c.contains("phase") ? c.at("phase").get<std::vector<double>>()
                                    : std::vector<double>(s.channels, 0.0);
      s.classes.push_back(std::move(k));
    }
    if (j.contains("snr_db")) {
      s.noise_std = s.noise_std_for_snr(j.at("snr_db").get<double>());
    } else {
      s.noise_std = j.value("noise_std", 0.0);
    }
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("synth spec: ") + e.what());
  }
  s.validate();
  return s;
}

std::string SynthSpec::to_json_text() const {
  nlohmann::ordered_json j;
  j["channels"] = channels;
  j["sampling_rate"] = sampling_rate;
  j["noise_std"] = noise_std;
  j["train_samples"] = train_samples;
  j["val_samples"] = val_samples;
  j["test_samples"] = test_samples;
  j["classes"] = nlohmann::ordered_json::array();
  for (const auto &k : classes) {
    nlohmann::ordered_json c;
    c["proportion"] = k.proportion;
    c["min_duration"] = k.min_duration;
    c["max_duration"] = k.max_duration;
    c["frequency"] = k.frequency;
    c["amplitude"] = k.amplitude;
    c["bias"] = k.bias;
    c["phase"] = k.phase;
    j["classes"].push_back(std::move(c));
  }
  return j.dump(2) + "\n";
}

TimeSeriesDataset synth_generate(Rng &rng, const SynthSpec &spec,
                                 std::size_t samples, const std::string &split) {
  spec.validate();
  if (samples == 0) throw ConfigError("synth: sample count must be positive");
  const std::size_t d = spec.channels;
  const std::size_t k = spec.classes.size();

  // Segment-level class probabilities that give the requested sample shares.
  std::vector<double> cumulative(k);
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const auto &cls = spec.classes[c];
    const double mean_duration =
        0.5 * static_cast<double>(cls.min_duration + cls.max_duration);
    total += cls.proportion / mean_duration;
    cumulative[c] = total;
  }

  TimeSeriesDataset ds;
  ds.samples = Tensor({samples, d});
  ds.labels.reserve(samples);
  ds.sampling_rate = spec.sampling_rate;
  ds.split = split;
  ds.num_classes = k;
  for (std::size_t j = 0; j < d; ++j) ds.channel_names.push_back("ch" + std::to_string(j));

  std::size_t pos = 0;
  while (pos < samples) {
    const double u = rng.uniform() * total;
    std::size_t c = 0;
    while (c + 1 < k && u >= cumulative[c]) ++c;
    const auto &cls = spec.classes[c];
    const std::size_t duration =
        cls.min_duration +
        static_cast<std::size_t>(rng.below(cls.max_duration - cls.min_duration + 1));
    const std::size_t end = std::min(samples, pos + duration);
    for (std::size_t t = 0; t < end - pos; ++t) {
      const double angle = 2.0 * std::numbers::pi * cls.frequency *
                           static_cast<double>(t) / spec.sampling_rate;
      for (std::size_t j = 0; j < d; ++j) {
        double v = cls.bias[j] + cls.amplitude[j] * std::sin(angle + cls.phase[j]);
        if (spec.noise_std > 0.0) v += spec.noise_std * rng.normal();
        ds.samples.at(pos + t, j) = v;
      }
      ds.labels.push_back(static_cast<int>(c));
    }
    pos = end;
  }
  return ds;
}

SynthSpec benchmark_synth_spec() {
  SynthSpec s;
  s.channels = 6;
  s.sampling_rate = 24.0;
  s.train_samples = 20000;
  s.val_samples = 5000;
  s.test_samples = 5000;
  struct Shape {
    double proportion;
    std::size_t lo, hi;
    double freq;
  };
  const Shape shapes[] = {
      {0.4, 24, 96, 0.5}, {0.2, 48, 96, 2.0}, {0.2, 36, 84, 4.0}, {0.2, 60, 96, 6.0}};
  for (std::size_t c = 0; c < 4; ++c) {
    SynthClass k;
    k.proportion = shapes[c].proportion;
    k.min_duration = shapes[c].lo;
    k.max_duration = shapes[c].hi;
    k.frequency = shapes[c].freq;
    for (std::size_t j = 0; j < s.channels; ++j) {
      k.amplitude.push_back(c == 0 ? 0.3 : 1.0);
      // Class- and channel-specific offsets in [-0.75, 0.75].
      k.bias.push_back(0.25 * static_cast<double>(static_cast<int>((c * 5 + j * 3) % 7) - 3));
      k.phase.push_back(0.5 * static_cast<double>(j));
    }
    s.classes.push_back(std::move(k));
  }
  s.noise_std = s.noise_std_for_snr(6.0);
  return s;
}

// ---------------------------------------------------------------------------
// Manifest

std::string file_digest(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

DatasetManifest DatasetManifest::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset manifest " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path.string() + ": line " + std::to_string(row) +
                       " is not key=value");
    }
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  auto get = [&](const std::string &key) -> const std::string & {
    const auto it = kv.find(key);
    if (it == kv.end()) {
      throw SchemaError(path.string() + ": missing key '" + key + "'");
    }
    return it->second;
  };
  if (get("format") != "attnhar-dataset") {
    throw SchemaError(path.string() + ": not an attnhar dataset manifest");
  }
  if (get("version") != "1") {
    throw SchemaError(path.string() + ": unsupported manifest version");
  }

  DatasetManifest m;
  m.directory = path.parent_path();
  m.schema.channel_columns = split(get("channels"), ',');
  m.schema.label_column = kv.count("label_column") ? kv["label_column"] : "label";
  m.schema.timestamp_column = kv.count("timestamp_column") ? kv["timestamp_column"] : "";
  if (kv.count("delimiter") && !kv["delimiter"].empty()) {
    const std::string &delim = kv["delimiter"];
    m.schema.delimiter = delim == "tab" ? '\t' : delim[0];
  }
  try {
    m.schema.num_classes = std::stoul(get("num_classes"));
    m.schema.sampling_rate = kv.count("sampling_rate") ? std::stod(kv["sampling_rate"]) : 0.0;
    m.window = kv.count("window") ? std::stoul(kv["window"]) : 24;
  } catch (const std::logic_error &) {
    throw ParseError(path.string() + ": bad numeric field");
  }
  for (const auto &[key, value] : kv) {
    if (key.rfind("split.", 0) == 0) m.splits[key.substr(6)] = value;
    if (key.rfind("digest.", 0) == 0) m.digests[key.substr(7)] = value;
  }
  if (!m.splits.count("train")) {
    throw SchemaError(path.string() + ": missing key 'split.train'");
  }
  if (kv.count("norm.mean") || kv.count("norm.std")) {
    m.normalization.mean = parse_doubles(get("norm.mean"), "norm.mean");
    m.normalization.stddev = parse_doubles(get("norm.std"), "norm.std");
    if (m.normalization.mean.size() != m.schema.channel_columns.size() ||
        m.normalization.stddev.size() != m.schema.channel_columns.size()) {
      throw SchemaError(path.string() + ": normalization size does not match channels");
    }
  }
  return m;
}

void DatasetManifest::save(const std::filesystem::path &path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "format=attnhar-dataset\nversion=1\n";
  out << "channels=";
  for (std::size_t i = 0; i < schema.channel_columns.size(); ++i) {
    out << (i ? "," : "") << schema.channel_columns[i];
  }
  out << "\nlabel_column=" << schema.label_column << '\n';
  out << "timestamp_column=" << schema.timestamp_column << '\n';
  out << "delimiter=" << (schema.delimiter == '\t' ? std::string("tab")
                                                    : std::string(1, schema.delimiter))
      << '\n';
  out << "num_classes=" << schema.num_classes << '\n';
  out << "sampling_rate=" << format_double(schema.sampling_rate) << '\n';
  out << "window=" << window << '\n';
  for (const auto &[name, file] : splits) out << "split." << name << '=' << file << '\n';
  if (!normalization.empty()) {
    out << "norm.mean=" << join_doubles(normalization.mean) << '\n';
    out << "norm.std=" << join_doubles(normalization.stddev) << '\n';
  }
  for (const auto &[name, digest] : digests) {
    out << "digest." << name << '=' << digest << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

TimeSeriesDataset DatasetManifest::load_split(const std::string &split) const {
  const auto it = splits.find(split);
  if (it == splits.end()) {
    throw SchemaError("dataset manifest has no split '" + split + "'");
  }
  auto path_of = [&](const std::string &name) {
    const std::filesystem::path p = splits.at(name);
    return p.is_absolute() ? p : directory / p;
  };
  auto verify = [&](const std::string &name) {
    const auto d = digests.find(name);
    if (d != digests.end() && file_digest(path_of(name)) != d->second) {
      throw DataError("split '" + name + "' does not match its recorded digest");
    }
  };
  CsvSchema sch = schema;
  sch.split = split;
  verify(split);
  if (!normalization.empty()) {
    return load_csv(path_of(split), sch, &normalization);
  }
  if (split == "train") return load_csv(path_of(split), sch);
  CsvSchema train_schema = schema;
  verify("train");
  const Standardizer stats =
      Standardizer::fit(read_csv(path_of("train"), train_schema).samples);
  return load_csv(path_of(split), sch, &stats);
}

}  // namespace attnhar
