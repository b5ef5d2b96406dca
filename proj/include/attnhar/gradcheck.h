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

#ifndef ATTNHAR_GRADCHECK_H_
#define ATTNHAR_GRADCHECK_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "attnhar/model.h"
#include "attnhar/tensor.h"

namespace attnhar {

// A scalar function of some tensors together with its analytic gradient.
// `state` owns whatever the closures and group pointers refer to.
struct GradcheckProblem {
  std::string name;
  std::vector<std::pair<std::string, Tensor *>> groups;
  std::function<double()> loss;
  std::function<std::vector<Tensor>()> analytic;  // one per group, same order
  // Optional fingerprint of piecewise-linear branch choices (ReLU masks).
  // A coordinate whose +h / -h evaluations change the fingerprint straddles a
  // kink and is skipped.
  std::function<std::uint64_t()> branch_signature;
  double tolerance = 0.0;  // 0: use the tolerance passed to gradcheck
  std::shared_ptr<void> state;
};

struct GradcheckEntry {
  std::string problem;
  std::string group;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct GradcheckReport {
  std::vector<GradcheckEntry> entries;
  double seconds = 0.0;

  bool pass() const;
  std::string to_text() const;
};

// Relative error |a - n| / max(|a|, |n|, 1e-7).
double relative_error(double analytic, double numeric);

// Differences below this are central-difference roundoff. Parameters whose
// true gradient is zero (score-layer biases feeding a softmax) would
// otherwise fail on relative error alone.
inline constexpr double kGradcheckAbsFloor = 1e-9;

// Central differences with step h on every element of every group. A
// coordinate passes when its relative error is within tolerance or its
// absolute error is within kGradcheckAbsFloor.
// Throws ConfigError when the problem has no parameters.
GradcheckReport gradcheck(const std::function<GradcheckProblem()> &factory,
                          double tolerance = 1e-4, double step = 1e-5);

// Built-in problems: random small instances whose loss is a fixed random
// projection of the layer output (model problems use cross-entropy).
GradcheckProblem linear_gradcheck_problem(std::uint64_t seed);
GradcheckProblem dropout_gradcheck_problem(std::uint64_t seed);
GradcheckProblem conv_gradcheck_problem(std::uint64_t seed);
GradcheckProblem lstm_gradcheck_problem(std::uint64_t seed);
GradcheckProblem attention_gradcheck_problem(std::uint64_t seed,
                                             bool intermediate = false);
GradcheckProblem model_gradcheck_problem(const ModelConfig &config,
                                         std::uint64_t seed);

// d = 2, f = 3, hidden = 4, C = 2 on the default 24-step window.
ModelConfig tiny_model_config(Variant variant);

// Every layer plus both model variants; purely linear problems (linear,
// dropout) are held to `linear_tolerance`.
GradcheckReport gradcheck_suite(double tolerance = 1e-4,
                                double linear_tolerance = 1e-6,
                                std::uint64_t seed = 7);

}  // namespace attnhar

#endif  // ATTNHAR_GRADCHECK_H_
