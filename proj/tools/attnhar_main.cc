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

// attnhar command-line tool: synthetic data generation, training, evaluation,
// attention-weight export and gradient checking.
//
// Exit codes: 0 ok, 2 usage or configuration error, 3 numeric failure,
// 4 I/O error.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "attnhar/checkpoint.h"
#include "attnhar/data.h"
#include "attnhar/errors.h"
#include "attnhar/evaluation.h"
#include "attnhar/gradcheck.h"
#include "attnhar/model.h"
#include "attnhar/training.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace attnhar {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;
constexpr const char *kOutDirEnv = "ATTNHAR_OUT_DIR";

int exit_code_for(const Error &e) {
  switch (e.kind()) {
    case Error::Kind::kNumeric:
      return kExitNumeric;
    case Error::Kind::kIo:
      return kExitIo;
    default:
      return kExitUsage;
  }
}

void write_text_atomic(const fs::path &path, const std::string &text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string());
}

std::string read_text(const fs::path &path, const char *what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot open ") + what + " " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path resolve_out_dir(const std::string &flag) {
  if (!flag.empty()) return flag;
  if (const char *env = std::getenv(kOutDirEnv); env && *env) return env;
  return "attnhar_out";
}

fs::path resolve_manifest(const fs::path &data) {
  return fs::is_directory(data) ? data / "manifest.txt" : data;
}

void ensure_dir(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string());
}

// Records a run: command, effective configuration with the source of each
// value, seed, digests of inputs, output paths and wall-clock time.
class RunManifest {
 public:
  explicit RunManifest(std::string command)
      : started_(std::chrono::steady_clock::now()) {
    doc_["command"] = std::move(command);
    doc_["config"] = json::object();
    doc_["inputs"] = json::object();
    doc_["outputs"] = json::array();
  }

  void config(const std::string &key, json value, const std::string &source) {
    doc_["config"][key] = {{"value", std::move(value)}, {"source", source}};
  }
  void seed(std::uint64_t s) { doc_["seed"] = s; }
  void input(const fs::path &path) {
    doc_["inputs"][path.string()] = file_digest(path);
  }
  void output(const fs::path &path) { doc_["outputs"].push_back(path.string()); }
  json &extra() { return doc_; }

  void write(const fs::path &path) {
    doc_["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_)
            .count();
    write_text_atomic(path, doc_.dump(2) + "\n");
  }

 private:
  std::chrono::steady_clock::time_point started_;
  json doc_;
};

// CLI flag > config file > built-in default.
template <typename T>
T pick(const CLI::App &cmd, const char *flag, const json &config,
       const char *key, const T &flag_value, const T &fallback,
       RunManifest &manifest) {
  if (cmd.count(flag) > 0) {
    manifest.config(key, flag_value, "flag");
    return flag_value;
  }
  if (config.contains(key)) {
    T v = config.at(key).get<T>();
    manifest.config(key, v, "config");
    return v;
  }
  manifest.config(key, fallback, "default");
  return fallback;
}

// ---------------------------------------------------------------------------

struct SynthOptions {
  std::string spec;
  std::uint64_t seed = 1;
  std::string out;
};

int run_synth(const SynthOptions &opt) {
  RunManifest manifest("synth");
  SynthSpec spec;
  if (opt.spec.empty()) {
    spec = benchmark_synth_spec();
    manifest.config("spec", "builtin:benchmark", "default");
  } else {
    if (!fs::exists(opt.spec)) {
      throw ConfigError("synth spec file not found: " + opt.spec);
    }
    spec = SynthSpec::from_json_text(read_text(opt.spec, "synth spec"));
    manifest.config("spec", opt.spec, "flag");
    manifest.input(opt.spec);
  }
  if (spec.train_samples == 0) {
    throw ConfigError("synth spec needs train_samples > 0");
  }
  const fs::path out = resolve_out_dir(opt.out);
  ensure_dir(out);
  manifest.seed(opt.seed);
  manifest.config("snr_db", spec.snr_db(), "derived");

  Rng rng(opt.seed);
  DatasetManifest dm;
  dm.directory = out;
  dm.schema.num_classes = spec.classes.size();
  dm.schema.sampling_rate = spec.sampling_rate;
  dm.window = static_cast<std::size_t>(spec.sampling_rate + 0.5);
  const std::pair<const char *, std::size_t> splits[] = {
      {"train", spec.train_samples},
      {"val", spec.val_samples},
      {"test", spec.test_samples}};
  for (const auto &[name, count] : splits) {
    if (count == 0) continue;
    TimeSeriesDataset ds = synth_generate(rng, spec, count, name);
    if (dm.schema.channel_columns.empty()) dm.schema.channel_columns = ds.channel_names;
    const std::string file = std::string(name) + ".csv";
    write_csv(ds, out / file);
    dm.splits[name] = file;
    dm.digests[name] = file_digest(out / file);
    manifest.output(out / file);
    if (std::string(name) == "train") dm.normalization = Standardizer::fit(ds.samples);
  }
  write_text_atomic(out / "spec.json", spec.to_json_text());
  dm.save(out / "manifest.txt");
  manifest.output(out / "spec.json");
  manifest.output(out / "manifest.txt");
  manifest.write(out / "run_manifest.json");
  std::cout << "wrote dataset to " << out.string() << " (snr " << spec.snr_db()
            << " dB)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct TrainOptions {
  std::string data;
  std::string config;
  std::string variant = "attention";
  std::size_t epochs = 30;
  double lr = 1e-3;
  std::size_t batch = 100;
  std::uint64_t seed = 1;
  double dropout = 0.5;
  double lr_decay = 0.98;
  std::size_t patience = 5;
  std::size_t filters = 64;
  std::size_t hidden = 128;
  std::string out;
  bool log_timing = false;
  bool quiet = false;
};

int run_train(const CLI::App &cmd, const TrainOptions &opt) {
  RunManifest manifest("train");
  json config = json::object();
  if (!opt.config.empty()) {
    try {
      config = json::parse(read_text(opt.config, "config file"));
    } catch (const json::exception &e) {
      throw ConfigError("config file " + opt.config + ": " + e.what());
    }
    manifest.input(opt.config);
  }
  TrainConfig tc;
  ModelConfig base;
  try {
    tc.variant = parse_variant(
        pick<std::string>(cmd, "--variant", config, "variant", opt.variant,
                          "attention", manifest));
    tc.epochs = pick<std::size_t>(cmd, "--epochs", config, "epochs", opt.epochs, 30, manifest);
    tc.lr = pick<double>(cmd, "--lr", config, "lr", opt.lr, 1e-3, manifest);
    tc.batch_size = pick<std::size_t>(cmd, "--batch", config, "batch", opt.batch, 100, manifest);
    tc.seed = pick<std::uint64_t>(cmd, "--seed", config, "seed", opt.seed, 1, manifest);
    tc.dropout = pick<double>(cmd, "--dropout", config, "dropout", opt.dropout, 0.5, manifest);
    tc.lr_decay = pick<double>(cmd, "--lr-decay", config, "lr_decay", opt.lr_decay, 0.98, manifest);
    tc.patience = pick<std::size_t>(cmd, "--patience", config, "patience", opt.patience, 5, manifest);
    base.filters = pick<std::size_t>(cmd, "--filters", config, "filters", opt.filters, 64, manifest);
    base.hidden = pick<std::size_t>(cmd, "--hidden", config, "hidden", opt.hidden, 128, manifest);
  } catch (const json::exception &e) {
    throw ConfigError(std::string("config file: ") + e.what());
  }
  manifest.config("alpha", tc.alpha, "default");
  manifest.config("epsilon", tc.epsilon, "default");
  tc.validate();
  manifest.seed(tc.seed);

  const fs::path manifest_path = resolve_manifest(opt.data);
  const DatasetManifest dm = DatasetManifest::load(manifest_path);
  manifest.input(manifest_path);
  const TimeSeriesDataset train_set = dm.load_split("train");
  if (!dm.splits.count("val")) throw SchemaError("dataset manifest has no 'val' split");
  const TimeSeriesDataset val_set = dm.load_split("val");

  const ModelConfig mc = model_config_for(train_set, tc, dm.window, base);
  manifest.config("window", mc.window, "dataset");
  manifest.config("channels", mc.channels, "dataset");
  manifest.config("classes", mc.classes, "dataset");
  manifest.config("parameters", mc.parameter_count(), "derived");
  Rng init_rng(tc.seed);
  ModelParams params = ModelParams::init(mc, init_rng);

  const fs::path out = resolve_out_dir(opt.out);
  ensure_dir(out);
  const fs::path log_path = out / "train_log.jsonl";
  std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
  if (!log) throw IoError("cannot open " + log_path.string());

  TrainResult result =
      train(std::move(params), train_set, val_set, tc,
            [&](const EpochRecord &r) {
              log << r.to_json() << '\n';
              log.flush();
              if (!opt.quiet) {
                std::fprintf(stderr, "epoch %zu loss %.5f val_meanF1 %.4f lr %.6g\n",
                             r.epoch, r.train_loss, r.val_mean_f1, r.lr);
              }
            },
            opt.log_timing);
  log.close();

  save_checkpoint(result.best, out / "checkpoint.bin");
  save_checkpoint(result.last, out / "last_checkpoint.bin");
  manifest.output(out / "checkpoint.bin");
  manifest.output(out / "last_checkpoint.bin");
  manifest.output(log_path);
  manifest.extra()["best_epoch"] = result.best_epoch;
  manifest.extra()["epochs_run"] = result.log.size();
  manifest.extra()["early_stopped"] = result.early_stopped;
  manifest.write(out / "run_manifest.json");
  return kExitOk;
}

// ---------------------------------------------------------------------------

void check_compatible(const ModelConfig &mc, const TimeSeriesDataset &ds) {
  if (ds.channels() != mc.channels || ds.num_classes > mc.classes) {
    throw DimensionError(
        "checkpoint expects frames [" + std::to_string(mc.window) + "x" +
        std::to_string(mc.channels) + "] with " + std::to_string(mc.classes) +
        " classes, dataset provides [" + std::to_string(ds.length()) + "x" +
        std::to_string(ds.channels()) + "] with " +
        std::to_string(ds.num_classes) + " classes");
  }
}

struct EvalOptions {
  std::string checkpoint;
  std::string data;
  std::string split = "test";
  std::string out_file;
  bool exclude_null = false;
};

int run_eval(const EvalOptions &opt) {
  RunManifest manifest("eval");
  const Checkpoint cp = load_checkpoint(opt.checkpoint);
  const fs::path manifest_path = resolve_manifest(opt.data);
  const DatasetManifest dm = DatasetManifest::load(manifest_path);
  const TimeSeriesDataset ds = dm.load_split(opt.split);
  check_compatible(cp.params.config, ds);
  manifest.input(opt.checkpoint);
  manifest.input(manifest_path);
  manifest.seed(cp.seed);
  manifest.config("split", opt.split, "flag");
  manifest.config("null_in_mean", !opt.exclude_null, "flag");

  const EvalReport report = evaluate(cp.params, ds, !opt.exclude_null);
  const fs::path out = opt.out_file.empty()
                           ? resolve_out_dir("") / "eval_report.json"
                           : fs::path(opt.out_file);
  if (out.has_parent_path()) ensure_dir(out.parent_path());
  write_text_atomic(out, report.to_json());
  manifest.output(out);
  manifest.write(out.string() + ".manifest.json");
  std::printf("mean F1 %.4f  accuracy %.4f  wilson95 [%.4f, %.4f]  (%zu samples)\n",
              report.mean_f1, report.accuracy, report.wilson_low,
              report.wilson_high, report.samples);
  return kExitOk;
}

struct DumpOptions {
  std::string checkpoint;
  std::string data;
  std::string split = "test";
  std::string csv;
};

int run_attention_dump(const DumpOptions &opt) {
  RunManifest manifest("attention-dump");
  const Checkpoint cp = load_checkpoint(opt.checkpoint);
  if (!cp.params.attention) {
    throw UnsupportedVariantError("checkpoint " + opt.checkpoint +
                                  " is a baseline model; attention-dump needs "
                                  "the attention variant");
  }
  const fs::path manifest_path = resolve_manifest(opt.data);
  const DatasetManifest dm = DatasetManifest::load(manifest_path);
  const TimeSeriesDataset ds = dm.load_split(opt.split);
  check_compatible(cp.params.config, ds);
  manifest.input(opt.checkpoint);
  manifest.input(manifest_path);
  manifest.seed(cp.seed);
  manifest.config("split", opt.split, "flag");

  const SamplewisePrediction pred = samplewise_predict(cp.params, ds);
  double worst = 0.0;
  for (const auto &t : pred.traces) {
    double s = 0.0;
    for (double w : t.weights.values()) s += w;
    worst = std::max(worst, std::abs(s - 1.0));
  }
  const AttentionSummary summary = summarize_traces(pred.traces, cp.params.config.classes);
  const fs::path out = opt.csv.empty() ? resolve_out_dir("") / "attention_summary.csv"
                                       : fs::path(opt.csv);
  if (out.has_parent_path()) ensure_dir(out.parent_path());
  write_text_atomic(out, summary.to_csv());
  manifest.output(out);

  // Run summary: where the median weight mass sits.
  json per_class = json::array();
  bool early_below_last = true;
  for (std::size_t r = 0; r < summary.classes.size(); ++r) {
    const auto &m = summary.medians[r];
    const std::size_t k = m.size();
    const bool ok = m[0] <= m[k - 1] && (k < 2 || m[1] <= m[k - 1]);
    early_below_last = early_below_last && ok;
    per_class.push_back({{"class", summary.classes[r]},
                         {"frames", summary.frame_counts[r]},
                         {"median_first", m[0]},
                         {"median_second", k > 1 ? m[1] : m[0]},
                         {"median_last", m[k - 1]},
                         {"first_two_below_last", ok}});
    std::printf("class %d: frames %zu  w1 %.4f  w2 %.4f  w%zu %.4f%s\n",
                summary.classes[r], summary.frame_counts[r], m[0],
                k > 1 ? m[1] : m[0], k, m[k - 1], ok ? "" : "  (early > last)");
  }
  std::printf("%zu frame traces, max |sum(weights) - 1| = %.3e\n",
              pred.traces.size(), worst);
  manifest.extra()["summary"] = {{"frames", pred.traces.size()},
                                 {"max_weight_sum_error", worst},
                                 {"first_two_below_last_all_classes", early_below_last},
                                 {"per_class", per_class}};
  manifest.write(out.string() + ".manifest.json");
  return kExitOk;
}

struct GradcheckOptions {
  double tolerance = 1e-4;
  double linear_tolerance = 1e-6;
  std::uint64_t seed = 7;
};

int run_gradcheck(const GradcheckOptions &opt) {
  const GradcheckReport report =
      gradcheck_suite(opt.tolerance, opt.linear_tolerance, opt.seed);
  std::cout << report.to_text();
  return report.pass() ? kExitOk : kExitNumeric;
}

}  // namespace
}  // namespace attnhar

int main(int argc, char **argv) {
  using namespace attnhar;
  CLI::App app{"attnhar: attention-augmented DeepConvLSTM for activity recognition"};
  app.require_subcommand(1);

  SynthOptions synth;
  auto *synth_cmd = app.add_subcommand("synth", "Generate a synthetic activity dataset");
  synth_cmd->add_option("--spec", synth.spec, "Synth spec JSON (default: built-in benchmark)");
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--out", synth.out, "Output directory (default $ATTNHAR_OUT_DIR)");

  TrainOptions train_opt;
  auto *train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--data", train_opt.data, "Dataset manifest or directory")->required();
  train_cmd->add_option("--config", train_opt.config, "JSON config file");
  train_cmd->add_option("--variant", train_opt.variant, "baseline | attention");
  train_cmd->add_option("--epochs", train_opt.epochs, "Epoch budget");
  train_cmd->add_option("--lr", train_opt.lr, "Initial learning rate");
  train_cmd->add_option("--batch", train_opt.batch, "Mini-batch size");
  train_cmd->add_option("--seed", train_opt.seed, "Random seed");
  train_cmd->add_option("--dropout", train_opt.dropout, "Dropout probability");
  train_cmd->add_option("--lr-decay", train_opt.lr_decay, "Learning-rate factor per epoch");
  train_cmd->add_option("--patience", train_opt.patience, "Early-stopping patience (0: off)");
  train_cmd->add_option("--filters", train_opt.filters, "Convolution filters per layer");
  train_cmd->add_option("--hidden", train_opt.hidden, "LSTM hidden units");
  train_cmd->add_option("--out", train_opt.out, "Output directory (default $ATTNHAR_OUT_DIR)");
  train_cmd->add_flag("--log-timing", train_opt.log_timing,
                      "Record wall-clock seconds in the training log");
  train_cmd->add_flag("--quiet", train_opt.quiet, "No per-epoch progress on stderr");

  EvalOptions eval_opt;
  auto *eval_cmd = app.add_subcommand("eval", "Sample-wise evaluation report");
  eval_cmd->add_option("--checkpoint", eval_opt.checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--data", eval_opt.data, "Dataset manifest or directory")->required();
  eval_cmd->add_option("--split", eval_opt.split, "Split to evaluate");
  eval_cmd->add_option("--report", eval_opt.out_file, "Output JSON report");
  eval_cmd->add_flag("--exclude-null", eval_opt.exclude_null,
                     "Leave class 0 out of the mean F1");

  DumpOptions dump_opt;
  auto *dump_cmd = app.add_subcommand("attention-dump", "Per-class median attention weights");
  dump_cmd->add_option("--checkpoint", dump_opt.checkpoint, "Checkpoint file")->required();
  dump_cmd->add_option("--data", dump_opt.data, "Dataset manifest or directory")->required();
  dump_cmd->add_option("--split", dump_opt.split, "Split to summarize");
  dump_cmd->add_option("--csv", dump_opt.csv, "Output CSV");

  GradcheckOptions gc_opt;
  auto *gc_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  gc_cmd->add_option("--tolerance", gc_opt.tolerance, "Max relative error");
  gc_cmd->add_option("--linear-tolerance", gc_opt.linear_tolerance,
                     "Max relative error for purely linear layers");
  gc_cmd->add_option("--seed", gc_opt.seed, "Seed for the random instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*train_cmd) return run_train(*train_cmd, train_opt);
    if (*eval_cmd) return run_eval(eval_opt);
    if (*dump_cmd) return run_attention_dump(dump_opt);
    if (*gc_cmd) return run_gradcheck(gc_opt);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 2;
}
