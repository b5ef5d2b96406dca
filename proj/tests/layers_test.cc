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

#include <gtest/gtest.h>

#include "attnhar/errors.h"
#include "attnhar/layers.h"
#include "fd_oracle.h"

namespace attnhar {
namespace {

using testing::dot;
using testing::max_relative_error;
using testing::numeric_gradient;
using testing::random_tensor;

double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// ---------------------------------------------------------------------------
// Convolution

TEST(ConvTest, IdentityKernelCopiesInput) {
  ConvLayer layer{Tensor({1, 1, 1}, 1.0), Tensor({1}, 0.0), false};
  const Tensor x = Tensor::matrix({{1.0, -2.0}, {3.0, 4.5}, {-0.5, 6.0}});
  const ConvForward f = conv_forward(layer, x);
  EXPECT_EQ(f.output.reshaped({3, 2}), x);
}

TEST(ConvTest, TwoTapSum) {
  ConvLayer layer{Tensor({1, 2, 1}, 1.0), Tensor({1}, 0.0), false};
  const ConvForward f = conv_forward(layer, Tensor({3, 1}, std::vector<double>{1, 2, 3}));
  ASSERT_EQ(f.output.shape(), (Tensor::Shape{2, 1, 1}));
  EXPECT_EQ(f.output[0], 3.0);
  EXPECT_EQ(f.output[1], 5.0);
}

TEST(ConvTest, FourKernelFiveLayersMap24To8) {
  Rng rng(1);
  Tensor x = random_tensor({24, 3}, rng);
  ConvLayer l0 = ConvLayer::init(1, 4, 5, rng);
  Tensor h = conv_forward(l0, x).output;
  std::vector<ConvLayer> rest;
  for (int i = 0; i < 3; ++i) rest.push_back(ConvLayer::init(4, 4, 5, rng));
  for (const auto &l : rest) h = conv_forward(l, h).output;
  EXPECT_EQ(h.shape(), (Tensor::Shape{8, 3, 4}));
  EXPECT_EQ(conv_output_length(24, 5, 4), 8u);
  EXPECT_EQ(conv_output_length(16, 5, 4), 0u);
}

TEST(ConvTest, ChannelsAreNotMixed) {
  // Changing sensor channel 1 must leave channel 0's outputs untouched.
  Rng rng(2);
  ConvLayer layer = ConvLayer::init(1, 3, 3, rng, false);
  Tensor x = random_tensor({6, 2}, rng);
  const Tensor a = conv_forward(layer, x).output;
  for (std::size_t t = 0; t < 6; ++t) x.at(t, 1) += 10.0;
  const Tensor b = conv_forward(layer, x).output;
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t o = 0; o < 3; ++o) EXPECT_EQ(a.at(t, 0, o), b.at(t, 0, o));
}

TEST(ConvTest, WindowTooShort) {
  Rng rng(3);
  ConvLayer layer = ConvLayer::init(1, 2, 5, rng);
  EXPECT_THROW(conv_forward(layer, Tensor({4, 2})), WindowTooShortError);
}

TEST(ConvTest, BackwardOfZeroIsZero) {
  Rng rng(4);
  ConvLayer layer = ConvLayer::init(2, 3, 3, rng);
  const ConvForward f = conv_forward(layer, random_tensor({7, 2, 2}, rng));
  const ConvBackward b = conv_backward(f.cache, f.output.zeros_like());
  for (double v : b.grad_input.values()) EXPECT_EQ(v, 0.0);
  for (double v : b.grad_params.kernels.values()) EXPECT_EQ(v, 0.0);
  for (double v : b.grad_params.bias.values()) EXPECT_EQ(v, 0.0);
}

TEST(ConvTest, IdentityKernelAdjoint) {
  ConvLayer layer{Tensor({1, 1, 1}, 1.0), Tensor({1}, 0.0), false};
  Rng rng(5);
  const Tensor x = random_tensor({5, 2}, rng);
  const ConvForward f = conv_forward(layer, x);
  const Tensor g = random_tensor({5, 2, 1}, rng);
  const ConvBackward b = conv_backward(f.cache, g);
  EXPECT_EQ(b.grad_input, g.reshaped({5, 2}));
}

TEST(ConvTest, StaleCacheIsRejected) {
  Rng rng(6);
  ConvLayer layer = ConvLayer::init(1, 2, 3, rng);
  EXPECT_THROW(conv_backward(ConvCache{}, Tensor({1})), ContractError);
  const ConvForward f = conv_forward(layer, random_tensor({5, 1}, rng));
  EXPECT_THROW(conv_backward(f.cache, Tensor({2, 2, 2})), ContractError);
}

TEST(ConvProperty, BackwardMatchesFiniteDifferences) {
  Rng rng(100);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t maps = 1 + rng.below(3);
    const std::size_t width = 1 + rng.below(3);
    const std::size_t steps = width + 2 + rng.below(4);
    // Linear (no ReLU) layer keeps the map smooth for the oracle.
    ConvLayer layer = ConvLayer::init(maps, 1 + rng.below(3), width, rng, false);
    Tensor x = random_tensor({steps, 2, maps}, rng);
    const Tensor r = random_tensor({steps - width + 1, 2, layer.filters()}, rng);
    auto loss = [&] { return dot(conv_forward(layer, x).output, r); };
    const ConvBackward b = conv_backward(conv_forward(layer, x).cache, r);
    EXPECT_LE(max_relative_error(b.grad_input, numeric_gradient(loss, x)), 1e-4);
    EXPECT_LE(max_relative_error(b.grad_params.kernels,
                                 numeric_gradient(loss, layer.kernels)), 1e-4);
    EXPECT_LE(max_relative_error(b.grad_params.bias, numeric_gradient(loss, layer.bias)),
              1e-4);
  }
}

TEST(ConvProperty, ReluBackwardMatchesFiniteDifferencesAwayFromKinks) {
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    ConvLayer layer = ConvLayer::init(2, 3, 3, rng, true);
    Tensor x = random_tensor({7, 2, 2}, rng);
    const ConvForward f = conv_forward(layer, x);
    // Pre-activations within 1e-3 of zero could cross the kink under h.
    ConvLayer linear = layer;
    linear.relu = false;
    const Tensor pre = conv_forward(linear, x).output;
    bool near_kink = false;
    for (double v : pre.values()) near_kink |= std::abs(v) < 1e-3;
    if (near_kink) continue;
    const Tensor r = random_tensor(f.output.shape(), rng);
    auto loss = [&] { return dot(conv_forward(layer, x).output, r); };
    const ConvBackward b = conv_backward(f.cache, r);
    EXPECT_LE(max_relative_error(b.grad_input, numeric_gradient(loss, x)), 1e-4);
    EXPECT_LE(max_relative_error(b.grad_params.kernels,
                                 numeric_gradient(loss, layer.kernels)), 1e-4);
  }
}

// ---------------------------------------------------------------------------
// Linear and dropout

TEST(LinearTest, ForwardIsAffine) {
  LinearLayer layer{Tensor::matrix({{1, 2}, {3, 4}, {5, 6}}), Tensor::vector({1, 0, -1})};
  const LinearForward f = linear_forward(layer, Tensor::vector({1, -1}));
  EXPECT_EQ(f.output, Tensor::vector({0, -1, -2}));
  EXPECT_THROW(linear_forward(layer, Tensor::vector({1, 2, 3})), DimensionError);
  EXPECT_THROW(LinearLayer::init(0, 3, *std::make_unique<Rng>(1)), ConfigError);
}

TEST(LinearProperty, BackwardMatchesFiniteDifferences) {
  Rng rng(200);
  for (int trial = 0; trial < 20; ++trial) {
    LinearLayer layer = LinearLayer::init(1 + rng.below(6), 1 + rng.below(6), rng);
    Tensor x = random_tensor({layer.in_features()}, rng);
    const Tensor r = random_tensor({layer.out_features()}, rng);
    auto loss = [&] { return dot(linear_forward(layer, x).output, r); };
    const LinearBackward b = linear_backward(linear_forward(layer, x).cache, r);
    EXPECT_LE(max_relative_error(b.grad_input, numeric_gradient(loss, x)), 1e-6);
    EXPECT_LE(max_relative_error(b.grad_params.weight, numeric_gradient(loss, layer.weight)),
              1e-6);
    EXPECT_LE(max_relative_error(b.grad_params.bias, numeric_gradient(loss, layer.bias)),
              1e-6);
  }
}

TEST(DropoutTest, EvalAndZeroProbabilityAreIdentity) {
  Rng rng(7);
  const Tensor x = random_tensor({4, 5}, rng);
  EXPECT_EQ(dropout_forward(Dropout(0.5), x, Mode::kEval, nullptr).output, x);
  EXPECT_EQ(dropout_forward(Dropout(0.0), x, Mode::kTrain, &rng).output, x);
  const Tensor g = random_tensor({4, 5}, rng);
  EXPECT_EQ(dropout_backward(DropoutCache{}, g), g);
}

TEST(DropoutTest, ConfigurationErrors) {
  EXPECT_THROW(Dropout(1.0), ConfigError);
  EXPECT_THROW(Dropout(-0.1), ConfigError);
  EXPECT_THROW(dropout_forward(Dropout(0.5), Tensor({3}), Mode::kTrain, nullptr),
               ContractError);
}

TEST(DropoutTest, InvertedScalingAndBackwardMask) {
  Rng rng(8);
  const Tensor x({1000}, 2.0);
  const DropoutForward f = dropout_forward(Dropout(0.25), x, Mode::kTrain, &rng);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_TRUE(f.output[i] == 0.0 || std::abs(f.output[i] - 2.0 / 0.75) < 1e-15);
  }
  const Tensor g({1000}, 1.0);
  const Tensor gx = dropout_backward(f.cache, g);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(gx[i] * 2.0, f.output[i]);
}

TEST(DropoutProperty, ExpectationPreserved) {
  Rng rng(9);
  const Tensor x = Tensor::vector({1.0, -2.0, 0.5, 3.0});
  Tensor mean = x.zeros_like();
  const int masks = 20000;
  for (int i = 0; i < masks; ++i) {
    axpy(1.0 / masks, dropout_forward(Dropout(0.5), x, Mode::kTrain, &rng).output, mean);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(mean[i], x[i], 0.02 * std::abs(x[i]));
  }
}

// ---------------------------------------------------------------------------
// LSTM

LstmLayer zero_lstm(std::size_t in, std::size_t h) {
  return LstmLayer{Tensor({4 * h, in}), Tensor({4 * h, h}), Tensor({4 * h})};
}

TEST(LstmTest, ZeroFixedPoint) {
  const LstmLayer layer = zero_lstm(3, 4);
  const LstmForward f = lstm_layer_forward(layer, Tensor({8, 3}));
  for (double v : f.hidden.values()) EXPECT_EQ(v, 0.0);
}

TEST(LstmTest, SaturatedForgetAndClosedInputHoldCellConstant) {
  const std::size_t h = 3;
  LstmLayer layer = zero_lstm(2, h);
  for (std::size_t j = 0; j < h; ++j) {
    layer.bias[j] = -50.0;         // input gate closed
    layer.bias[h + j] = 50.0;      // forget gate open
    layer.bias[3 * h + j] = 0.7;   // nonzero candidate
  }
  Rng rng(10);
  const LstmForward f = lstm_layer_forward(layer, random_tensor({6, 2}, rng));
  for (std::size_t t = 1; t < 6; ++t)
    for (std::size_t j = 0; j < h; ++j)
      EXPECT_NEAR(f.cache.cells.at(t, j), f.cache.cells.at(0, j), 1e-20);
}

TEST(LstmTest, MatchesHandUnrolledRecurrence) {
  Rng rng(11);
  const std::size_t in = 2, h = 3, steps = 2;
  const LstmLayer layer = LstmLayer::init(in, h, rng);
  const Tensor x = random_tensor({steps, in}, rng);
  const LstmForward f = lstm_layer_forward(layer, x);

  std::vector<double> hp(h, 0.0), cp(h, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<double> hn(h), cn(h);
    for (std::size_t j = 0; j < h; ++j) {
      double z[4];
      for (int g = 0; g < 4; ++g) {
        const std::size_t row = g * h + j;
        double s = layer.bias[row];
        for (std::size_t k = 0; k < in; ++k) s += layer.w_input.at(row, k) * x.at(t, k);
        for (std::size_t k = 0; k < h; ++k) s += layer.w_hidden.at(row, k) * hp[k];
        z[g] = s;
      }
      const double i = sigm(z[0]), fg = sigm(z[1]), o = sigm(z[2]), g = std::tanh(z[3]);
      cn[j] = fg * cp[j] + i * g;
      hn[j] = o * std::tanh(cn[j]);
    }
    for (std::size_t j = 0; j < h; ++j) {
      EXPECT_NEAR(f.hidden.at(t, j), hn[j], 1e-14);
      EXPECT_NEAR(f.cache.cells.at(t, j), cn[j], 1e-14);
    }
    hp = hn;
    cp = cn;
  }
}

TEST(LstmTest, DimensionAndContractErrors) {
  Rng rng(12);
  const LstmLayer layer = LstmLayer::init(3, 2, rng);
  EXPECT_THROW(lstm_layer_forward(layer, Tensor({4, 2})), DimensionError);
  const LstmForward f = lstm_layer_forward(layer, Tensor({4, 3}));
  EXPECT_THROW(lstm_layer_backward(f.cache, Tensor({3, 2})), ContractError);
  EXPECT_THROW(lstm_layer_backward(LstmCache{}, Tensor({4, 2})), ContractError);
}

TEST(LstmTest, ZeroUpstreamGivesZeroGradients) {
  Rng rng(13);
  std::vector<LstmLayer> stack{LstmLayer::init(3, 4, rng), LstmLayer::init(4, 4, rng)};
  const LstmStackForward f = lstm_forward(stack, random_tensor({5, 3}, rng));
  const LstmStackBackward b = lstm_backward(f.caches, Tensor({5, 4}));
  for (const auto &g : b.grad_params) {
    for (double v : g.w_input.values()) EXPECT_EQ(v, 0.0);
    for (double v : g.w_hidden.values()) EXPECT_EQ(v, 0.0);
    for (double v : g.bias.values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(LstmTest, SeveredRecurrenceIsolatesTimesteps) {
  // No recurrent weights and a closed forget gate: step t only sees x[t].
  Rng rng(14);
  const std::size_t h = 3, steps = 8;
  LstmLayer layer = LstmLayer::init(2, h, rng);
  for (double &v : layer.w_hidden.values()) v = 0.0;
  for (std::size_t j = h; j < 2 * h; ++j) {
    for (std::size_t k = 0; k < 2; ++k) layer.w_input.at(j, k) = 0.0;
    layer.bias[j] = -800.0;
  }
  const LstmForward f = lstm_layer_forward(layer, random_tensor({steps, 2}, rng));
  Tensor g = random_tensor({steps, h}, rng);
  const Tensor a = lstm_layer_backward(f.cache, g).grad_input;
  for (std::size_t j = 0; j < h; ++j) g.at(steps - 1, j) += 5.0;
  const Tensor b = lstm_layer_backward(f.cache, g).grad_input;
  for (std::size_t t = 0; t + 1 < steps; ++t)
    for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(a.at(t, k), b.at(t, k));
}

TEST(LstmProperty, HiddenStatesBounded) {
  Rng rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<LstmLayer> stack{LstmLayer::init(4, 5, rng), LstmLayer::init(5, 5, rng)};
    for (double &v : stack[0].w_input.values()) v *= 10.0;
    const LstmStackForward f = lstm_forward(stack, random_tensor({8, 4}, rng, 5.0));
    for (double v : f.hidden.values()) {
      EXPECT_GT(v, -1.0);
      EXPECT_LT(v, 1.0);
    }
  }
}

TEST(LstmProperty, BackwardMatchesFiniteDifferences) {
  Rng rng(300);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<LstmLayer> stack{LstmLayer::init(3, 4, rng), LstmLayer::init(4, 4, rng)};
    Tensor x = random_tensor({3, 3}, rng);
    const Tensor r = random_tensor({3, 4}, rng);
    auto loss = [&] { return dot(lstm_forward(stack, x).hidden, r); };
    const LstmStackBackward b = lstm_backward(lstm_forward(stack, x).caches, r);
    EXPECT_LE(max_relative_error(b.grad_input, numeric_gradient(loss, x)), 1e-4);
    for (std::size_t l = 0; l < 2; ++l) {
      EXPECT_LE(max_relative_error(b.grad_params[l].w_input,
                                   numeric_gradient(loss, stack[l].w_input)), 1e-4);
      EXPECT_LE(max_relative_error(b.grad_params[l].w_hidden,
                                   numeric_gradient(loss, stack[l].w_hidden)), 1e-4);
      EXPECT_LE(max_relative_error(b.grad_params[l].bias,
                                   numeric_gradient(loss, stack[l].bias)), 1e-4);
    }
  }
}

}  // namespace
}  // namespace attnhar
