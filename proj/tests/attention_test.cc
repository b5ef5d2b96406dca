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

#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "attnhar/attention.h"
#include "attnhar/errors.h"
#include "fd_oracle.h"

namespace attnhar {
namespace {

using testing::dot;
using testing::max_relative_error;
using testing::numeric_gradient;
using testing::random_tensor;

constexpr std::size_t kSteps = 8;

TEST(AttentionTest, IdenticalPastStatesGiveUniformWeights) {
  Rng rng(1);
  const AttentionParams p = AttentionParams::init(5, rng);
  const Tensor v = random_tensor({5}, rng);
  const Tensor last = random_tensor({5}, rng);
  Tensor h({kSteps, 5});
  for (std::size_t t = 0; t < kSteps; ++t)
    for (std::size_t j = 0; j < 5; ++j) h.at(t, j) = t + 1 < kSteps ? v[j] : last[j];
  const AttentionForward f = attend_forward(p, h);
  for (double w : f.trace.weights.values()) EXPECT_NEAR(w, 1.0 / 7.0, 1e-15);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(f.final_embedding[j], v[j] + last[j], 1e-14);
}

TEST(AttentionTest, ZeroScoreWeightsGiveUniformWeights) {
  Rng rng(2);
  AttentionParams p = AttentionParams::init(4, rng);
  p.w2.fill(0.0);
  const AttentionForward f = attend_forward(p, random_tensor({kSteps, 4}, rng));
  for (double w : f.trace.weights.values()) EXPECT_NEAR(w, 1.0 / 7.0, 1e-15);
}

TEST(AttentionTest, CraftedScoresConcentrateOnOneStep) {
  const std::size_t hsz = 3;
  AttentionParams p{Tensor::identity(hsz), Tensor({hsz}), Tensor(), Tensor(),
                    Tensor::matrix({{60.0, 0.0, 0.0}}), Tensor({1})};
  Tensor h({kSteps, hsz});
  h.at(2, 0) = 3.0;  // third past state scores tanh(3) * 60
  h.at(kSteps - 1, 1) = 1.0;
  const AttentionForward f = attend_forward(p, h);
  const auto w = f.trace.weights.values();
  const auto top = std::max_element(w.begin(), w.end()) - w.begin();
  EXPECT_EQ(top, 2);
  EXPECT_NEAR(w[2], 1.0, 1e-15);
  for (std::size_t t = 0; t < w.size(); ++t)
    if (t != 2) EXPECT_LT(w[t], 1e-20);
  EXPECT_NEAR(f.final_embedding[0], 3.0, 1e-12);
  EXPECT_NEAR(f.final_embedding[1], 1.0, 1e-12);
}

TEST(AttentionTest, ZeroUpstreamGradient) {
  Rng rng(3);
  const AttentionParams p = AttentionParams::init(4, rng);
  const AttentionForward f = attend_forward(p, random_tensor({kSteps, 4}, rng));
  const AttentionBackward b = attend_backward(f.cache, Tensor({4}));
  for (double v : b.grad_hidden.values()) EXPECT_EQ(v, 0.0);
  for (double v : b.grad_params.w1.values()) EXPECT_EQ(v, 0.0);
  for (double v : b.grad_params.w2.values()) EXPECT_EQ(v, 0.0);
}

TEST(AttentionTest, ErrorPaths) {
  Rng rng(4);
  const AttentionParams p = AttentionParams::init(4, rng);
  EXPECT_THROW(attend_forward(p, Tensor({1, 4})), DimensionError);
  EXPECT_THROW(attend_forward(p, Tensor({8, 3})), DimensionError);
  EXPECT_THROW(AttentionParams::init(0, rng), ConfigError);
  const AttentionForward f = attend_forward(p, random_tensor({kSteps, 4}, rng));
  EXPECT_THROW(attend_backward(f.cache, Tensor({5})), ContractError);
  EXPECT_THROW(attend_backward(AttentionCache{}, Tensor({4})), ContractError);
}

TEST(AttentionTest, InitialisationZeroesScoreBias) {
  Rng rng(5);
  EXPECT_EQ(AttentionParams::init(16, rng).b2[0], 0.0);
  const AttentionParams q = AttentionParams::init(16, rng, true);
  EXPECT_EQ(q.w_mid.shape(), (Tensor::Shape{8, 16}));
  EXPECT_EQ(q.w2.shape(), (Tensor::Shape{1, 8}));
}

void check_fd(bool intermediate, std::uint64_t seed) {
  Rng rng(seed);
  AttentionParams p = AttentionParams::init(6, rng, intermediate);
  Tensor h = random_tensor({kSteps, 6}, rng);
  for (double &v : p.w2.values()) v *= 3.0;
  const Tensor r = random_tensor({6}, rng);
  // The quadratic term keeps the loss nonlinear in the output.
  auto loss = [&] {
    const Tensor f = attend_forward(p, h).final_embedding;
    return dot(f, r) + 0.5 * dot(f, f);
  };
  const AttentionForward f = attend_forward(p, h);
  Tensor seed_grad = r;
  axpy(1.0, f.final_embedding, seed_grad);
  const AttentionBackward b = attend_backward(f.cache, seed_grad);
  EXPECT_LE(max_relative_error(b.grad_hidden, numeric_gradient(loss, h)), 1e-4);
  EXPECT_LE(max_relative_error(b.grad_params.w1, numeric_gradient(loss, p.w1)), 1e-4);
  EXPECT_LE(max_relative_error(b.grad_params.b1, numeric_gradient(loss, p.b1)), 1e-4);
  EXPECT_LE(max_relative_error(b.grad_params.w2, numeric_gradient(loss, p.w2)), 1e-4);
  if (intermediate) {
    EXPECT_LE(max_relative_error(b.grad_params.w_mid, numeric_gradient(loss, p.w_mid)),
              1e-4);
    // W2 b_mid shifts every score equally, so it is as inert as b2.
    for (double v : b.grad_params.b_mid.values()) EXPECT_NEAR(v, 0.0, 1e-12);
    for (double v : numeric_gradient(loss, p.b_mid).values()) EXPECT_NEAR(v, 0.0, 1e-9);
  }
  // Softmax is shift invariant, so the score bias never receives gradient.
  EXPECT_NEAR(b.grad_params.b2[0], 0.0, 1e-12);
}

TEST(AttentionProperty, BackwardMatchesFiniteDifferences) {
  for (std::uint64_t s = 0; s < 10; ++s) check_fd(false, 40 + s);
}

TEST(AttentionProperty, IntermediateBackwardMatchesFiniteDifferences) {
  for (std::uint64_t s = 0; s < 10; ++s) check_fd(true, 80 + s);
}

TEST(AttentionProperty, InvariantsOverRandomInstances) {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t hsz = 2 + rng.below(6);
    AttentionParams p = AttentionParams::init(hsz, rng, trial % 4 == 0);
    const Tensor h = random_tensor({kSteps, hsz}, rng, 2.0);
    const AttentionForward f = attend_forward(p, h);

    const auto w = f.trace.weights.values();
    ASSERT_EQ(w.size(), kSteps - 1);
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-9);
    for (double x : w) EXPECT_GT(x, 0.0);

    // Final embedding minus the skip path is a convex mix of past states.
    for (std::size_t j = 0; j < hsz; ++j) {
      double mix = 0.0;
      for (std::size_t t = 0; t + 1 < kSteps; ++t) mix += w[t] * h.at(t, j);
      EXPECT_NEAR(f.final_embedding[j] - h.at(kSteps - 1, j), mix, 1e-12);
    }

    // Permuting the past states permutes their weights.
    std::vector<std::size_t> perm = shuffle_indices(rng, kSteps - 1);
    Tensor hp = h;
    for (std::size_t t = 0; t + 1 < kSteps; ++t)
      for (std::size_t j = 0; j < hsz; ++j) hp.at(t, j) = h.at(perm[t], j);
    const AttentionForward fp = attend_forward(p, hp);
    for (std::size_t t = 0; t + 1 < kSteps; ++t)
      EXPECT_NEAR(fp.trace.weights[t], w[perm[t]], 1e-12);
    for (std::size_t j = 0; j < hsz; ++j)
      EXPECT_NEAR(fp.final_embedding[j], f.final_embedding[j], 1e-12);

    // Shifting the score bias changes nothing.
    p.b2[0] += rng.uniform(-5.0, 5.0);
    const AttentionForward fs = attend_forward(p, h);
    for (std::size_t t = 0; t + 1 < kSteps; ++t)
      EXPECT_NEAR(fs.trace.weights[t], w[t], 1e-12);

    // The current state passes through with unit gradient.
    const Tensor g = random_tensor({hsz}, rng);
    const AttentionBackward b = attend_backward(fs.cache, g);
    for (std::size_t j = 0; j < hsz; ++j)
      EXPECT_EQ(b.grad_hidden.at(kSteps - 1, j), g[j]);
  }
}

}  // namespace
}  // namespace attnhar
