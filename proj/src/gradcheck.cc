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

#include "attnhar/gradcheck.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "attnhar/attention.h"
#include "attnhar/errors.h"
#include "attnhar/layers.h"
#include "attnhar/rng.h"

namespace attnhar {
namespace {

Tensor random_tensor(Tensor::Shape shape, Rng &rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double &v : t.values()) v = rng.uniform(-scale, scale);
  return t;
}

double dot(const Tensor &a, const Tensor &b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::uint64_t mix(std::uint64_t h, bool bit) {
  h ^= bit ? 0x9E3779B97F4A7C15ULL : 0x632BE59BD9B4E019ULL;
  return h * 0x100000001B3ULL + (h >> 29);
}

std::uint64_t relu_signature(const Tensor &output, std::uint64_t h) {
  for (double v : output.values()) h = mix(h, v > 0.0);
  return h;
}

}  // namespace

bool GradcheckReport::pass() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const GradcheckEntry &e) { return e.pass; });
}

std::string GradcheckReport::to_text() const {
  std::ostringstream os;
  char line[256];
  for (const auto &e : entries) {
    std::snprintf(line, sizeof(line),
                  "%-5s %-24s %-22s max_rel=%.3e max_abs=%.3e tol=%.0e "
                  "checked=%zu skipped=%zu\n",
                  e.pass ? "PASS" : "FAIL", e.problem.c_str(), e.group.c_str(),
                  e.max_rel_error, e.max_abs_error, e.tolerance, e.checked,
                  e.skipped);
    os << line;
  }
  std::snprintf(line, sizeof(line), "%s in %.2f s\n",
                pass() ? "gradcheck passed" : "gradcheck FAILED", seconds);
  os << line;
  return os.str();
}

double relative_error(double analytic, double numeric) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), 1e-7});
  return std::abs(analytic - numeric) / denom;
}

GradcheckReport gradcheck(const std::function<GradcheckProblem()> &factory,
                          double tolerance, double step) {
  const auto started = std::chrono::steady_clock::now();
  GradcheckProblem problem = factory();
  std::size_t total = 0;
  for (const auto &[name, t] : problem.groups) total += t->size();
  if (total == 0) {
    throw ConfigError("gradcheck: problem '" + problem.name +
                      "' has no parameters");
  }
  const double tol = problem.tolerance > 0.0 ? problem.tolerance : tolerance;
  const std::vector<Tensor> analytic = problem.analytic();
  if (analytic.size() != problem.groups.size()) {
    throw ContractError("gradcheck: analytic gradient count mismatch");
  }
  const std::uint64_t base_signature =
      problem.branch_signature ? problem.branch_signature() : 0;

  GradcheckReport report;
  for (std::size_t g = 0; g < problem.groups.size(); ++g) {
    auto &[name, tensor] = problem.groups[g];
    if (analytic[g].shape() != tensor->shape()) {
      throw ContractError("gradcheck: analytic gradient for '" + name +
                          "' has the wrong shape");
    }
    GradcheckEntry entry;
    entry.problem = problem.name;
    entry.group = name;
    entry.tolerance = tol;
    bool within = true;
    for (std::size_t i = 0; i < tensor->size(); ++i) {
      const double saved = (*tensor)[i];
      (*tensor)[i] = saved + step;
      const double plus = problem.loss();
      const bool plus_kink =
          problem.branch_signature && problem.branch_signature() != base_signature;
      (*tensor)[i] = saved - step;
      const double minus = problem.loss();
      const bool minus_kink =
          problem.branch_signature && problem.branch_signature() != base_signature;
      (*tensor)[i] = saved;
      if (plus_kink || minus_kink) {
        ++entry.skipped;
        continue;
      }
      const double numeric = (plus - minus) / (2.0 * step);
      const double rel = relative_error(analytic[g][i], numeric);
      const double abs = std::abs(analytic[g][i] - numeric);
      entry.max_rel_error = std::max(entry.max_rel_error, rel);
      entry.max_abs_error = std::max(entry.max_abs_error, abs);
      within = within && (rel <= tol || abs <= kGradcheckAbsFloor);
      ++entry.checked;
    }
    entry.pass = entry.checked > 0 && within;
    report.entries.push_back(std::move(entry));
  }
  report.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - started)
                       .count();
  return report;
}

// ---------------------------------------------------------------------------
// Built-in problems

GradcheckProblem linear_gradcheck_problem(std::uint64_t seed) {
  struct State {
    LinearLayer layer;
    Tensor x, r;
  };
  Rng rng(seed);
  auto s = std::make_shared<State>();
  s->layer = LinearLayer::init(5, 3, rng);
  s->x = random_tensor({5}, rng);
  s->r = random_tensor({3}, rng);
  GradcheckProblem p;
  p.name = "linear";
  p.groups = {{"input", &s->x}, {"weight", &s->layer.weight},
              {"bias", &s->layer.bias}};
  p.loss = [s] { return dot(linear_forward(s->layer, s->x).output, s->r); };
  p.analytic = [s] {
    LinearForward f = linear_forward(s->layer, s->x);
    LinearBackward b = linear_backward(f.cache, s->r);
    return std::vector<Tensor>{b.grad_input, b.grad_params.weight,
                               b.grad_params.bias};
  };
  p.state = s;
  return p;
}

GradcheckProblem dropout_gradcheck_problem(std::uint64_t seed) {
  struct State {
    Dropout dropout{0.5};
    std::uint64_t mask_seed;
    Tensor x, r;
  };
  Rng rng(seed);
  auto s = std::make_shared<State>();
  s->mask_seed = rng.next_u64();
  s->x = random_tensor({4, 3}, rng);
  s->r = random_tensor({4, 3}, rng);
  GradcheckProblem p;
  p.name = "dropout";
  p.groups = {{"input", &s->x}};
  // Re-seeding per evaluation holds the mask fixed.
  p.loss = [s] {
    Rng mask_rng(s->mask_seed);
    return dot(dropout_forward(s->dropout, s->x, Mode::kTrain, &mask_rng).output,
               s->r);
  };
  p.analytic = [s] {
    Rng mask_rng(s->mask_seed);
    DropoutForward f = dropout_forward(s->dropout, s->x, Mode::kTrain, &mask_rng);
    return std::vector<Tensor>{dropout_backward(f.cache, s->r)};
  };
  p.state = s;
  return p;
}

GradcheckProblem conv_gradcheck_problem(std::uint64_t seed) {
  struct State {
    ConvLayer first, second;
    Tensor x, r;
  };
  Rng rng(seed);
  auto s = std::make_shared<State>();
  // Two stacked layers so both the rank-2 and rank-3 input paths are covered.
  s->first = ConvLayer::init(1, 3, 3, rng, true);
  s->second = ConvLayer::init(3, 4, 3, rng, true);
  s->x = random_tensor({9, 2}, rng);
  s->r = random_tensor({5, 2, 4}, rng);
  GradcheckProblem p;
  p.name = "conv";
  p.groups = {{"input", &s->x},
              {"conv0.kernels", &s->first.kernels},
              {"conv0.bias", &s->first.bias},
              {"conv1.kernels", &s->second.kernels},
              {"conv1.bias", &s->second.bias}};
  p.loss = [s] {
    ConvForward a = conv_forward(s->first, s->x);
    return dot(conv_forward(s->second, a.output).output, s->r);
  };
  p.analytic = [s] {
    ConvForward a = conv_forward(s->first, s->x);
    ConvForward b = conv_forward(s->second, a.output);
    ConvBackward gb = conv_backward(b.cache, s->r);
    ConvBackward ga = conv_backward(a.cache, gb.grad_input);
    return std::vector<Tensor>{ga.grad_input, ga.grad_params.kernels,
                               ga.grad_params.bias, gb.grad_params.kernels,
                               gb.grad_params.bias};
  };
  p.branch_signature = [s] {
    ConvForward a = conv_forward(s->first, s->x);
    ConvForward b = conv_forward(s->second, a.output);
    return relu_signature(b.output, relu_signature(a.output, 0));
  };
  p.state = s;
  return p;
}

GradcheckProblem lstm_gradcheck_problem(std::uint64_t seed) {
  struct State {
    std::vector<LstmLayer> stack;
    Tensor x, r;
  };
  Rng rng(seed);
  auto s = std::make_shared<State>();
  s->stack.push_back(LstmLayer::init(3, 4, rng));
  s->stack.push_back(LstmLayer::init(4, 4, rng));
  s->x = random_tensor({3, 3}, rng);
  s->r = random_tensor({3, 4}, rng);
  GradcheckProblem p;
  p.name = "lstm";
  p.groups = {{"input", &s->x}};
  for (std::size_t l = 0; l < s->stack.size(); ++l) {
    const std::string prefix = "lstm" + std::to_string(l) + ".";
    p.groups.emplace_back(prefix + "w_input", &s->stack[l].w_input);
    p.groups.emplace_back(prefix + "w_hidden", &s->stack[l].w_hidden);
    p.groups.emplace_back(prefix + "bias", &s->stack[l].bias);
  }
  p.loss = [s] { return dot(lstm_forward(s->stack, s->x).hidden, s->r); };
  p.analytic = [s] {
    LstmStackForward f = lstm_forward(s->stack, s->x);
    LstmStackBackward b = lstm_backward(f.caches, s->r);
    std::vector<Tensor> out{b.grad_input};
    for (const auto &g : b.grad_params) {
      out.push_back(g.w_input);
      out.push_back(g.w_hidden);
      out.push_back(g.bias);
    }
    return out;
  };
  p.state = s;
  return p;
}

GradcheckProblem attention_gradcheck_problem(std::uint64_t seed,
                                             bool intermediate) {
  struct State {
    AttentionParams params;
    Tensor h, r;
  };
  Rng rng(seed);
  auto s = std::make_shared<State>();
  s->params = AttentionParams::init(6, rng, intermediate);
  // Nonzero b2 and a larger W2 keep the weights away from uniform.
  for (double &v : s->params.w2.values()) v *= 3.0;
  s->params.b2[0] = 0.3;
  s->h = random_tensor({8, 6}, rng);
  s->r = random_tensor({6}, rng);
  GradcheckProblem p;
  p.name = intermediate ? "attention(mid)" : "attention";
  p.groups = {{"hidden", &s->h}, {"w1", &s->params.w1}, {"b1", &s->params.b1}};
  if (intermediate) {
    p.groups.emplace_back("w_mid", &s->params.w_mid);
    p.groups.emplace_back("b_mid", &s->params.b_mid);
  }
  p.groups.emplace_back("w2", &s->params.w2);
  p.groups.emplace_back("b2", &s->params.b2);
  p.loss = [s] {
    // Nonlinear in the output; b2 still gets a zero gradient by shift
    // invariance of the softmax.
    const Tensor f = attend_forward(s->params, s->h).final_embedding;
    return dot(f, s->r) + 0.5 * dot(f, f);
  };
  p.analytic = [s] {
    AttentionForward f = attend_forward(s->params, s->h);
    Tensor seed_grad = s->r;
    axpy(1.0, f.final_embedding, seed_grad);
    AttentionBackward b = attend_backward(f.cache, seed_grad);
    std::vector<Tensor> out{b.grad_hidden, b.grad_params.w1, b.grad_params.b1};
    if (s->params.has_intermediate()) {
      out.push_back(b.grad_params.w_mid);
      out.push_back(b.grad_params.b_mid);
    }
    out.push_back(b.grad_params.w2);
    out.push_back(b.grad_params.b2);
    return out;
  };
  p.state = s;
  return p;
}

ModelConfig tiny_model_config(Variant variant) {
  ModelConfig c;
  c.window = 24;
  c.channels = 2;
  c.filters = 3;
  c.kernel_len = 5;
  c.conv_layers = 4;
  c.hidden = 4;
  c.lstm_layers = 2;
  c.classes = 2;
  c.dropout = 0.5;
  c.variant = variant;
  return c;
}

GradcheckProblem model_gradcheck_problem(const ModelConfig &config,
                                         std::uint64_t seed) {
  struct State {
    ModelParams params;
    Tensor frame;
    int label = 0;
    std::uint64_t dropout_seed = 0;
  };
  Rng rng(seed);
  auto s = std::make_shared<State>();
  s->params = ModelParams::init(config, rng);
  s->frame = random_tensor({config.window, config.channels}, rng, 1.5);
  s->label = static_cast<int>(rng.below(config.classes));
  s->dropout_seed = rng.next_u64();

  GradcheckProblem p;
  p.name = std::string("model(") + std::string(variant_name(config.variant)) + ")";
  p.groups = s->params.named_tensors();
  p.loss = [s] {
    Rng drop(s->dropout_seed);
    ModelForward f = model_forward(s->params, s->frame, Mode::kTrain, &drop);
    return cross_entropy_loss(f.prediction, s->label).loss;
  };
  p.analytic = [s] {
    Rng drop(s->dropout_seed);
    ModelForward f = model_forward(s->params, s->frame, Mode::kTrain, &drop);
    LossResult loss = cross_entropy_loss(f.prediction, s->label);
    ModelParams g = model_backward(f.cache, loss.grad_seed);
    std::vector<Tensor> out;
    for (const auto &[name, t] : g.named_tensors()) out.push_back(*t);
    return out;
  };
  p.branch_signature = [s] {
    Rng drop(s->dropout_seed);
    ModelForward f = model_forward(s->params, s->frame, Mode::kTrain, &drop);
    std::uint64_t h = 0;
    for (const auto &c : f.cache.conv) h = relu_signature(c.output, h);
    return h;
  };
  p.state = s;
  return p;
}

GradcheckReport gradcheck_suite(double tolerance, double linear_tolerance,
                                std::uint64_t seed) {
  const auto started = std::chrono::steady_clock::now();
  std::vector<std::function<GradcheckProblem()>> factories = {
      [&] {
        auto p = linear_gradcheck_problem(seed);
        p.tolerance = linear_tolerance;
        return p;
      },
      [&] {
        auto p = dropout_gradcheck_problem(seed + 1);
        p.tolerance = linear_tolerance;
        return p;
      },
      [&] { return conv_gradcheck_problem(seed + 2); },
      [&] { return lstm_gradcheck_problem(seed + 3); },
      [&] { return attention_gradcheck_problem(seed + 4, false); },
      [&] { return attention_gradcheck_problem(seed + 5, true); },
      [&] {
        return model_gradcheck_problem(tiny_model_config(Variant::kBaseline),
                                       seed + 6);
      },
      [&] {
        return model_gradcheck_problem(tiny_model_config(Variant::kAttention),
                                       seed + 7);
      },
  };
  GradcheckReport report;
  for (const auto &factory : factories) {
    GradcheckReport r = gradcheck(factory, tolerance);
    report.entries.insert(report.entries.end(), r.entries.begin(),
                          r.entries.end());
  }
  report.seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - started)
                       .count();
  return report;
}

}  // namespace attnhar
