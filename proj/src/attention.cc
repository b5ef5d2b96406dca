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

#include "attnhar/attention.h"

#include <cmath>
#include <cstring>
#include <string>

#include "attnhar/errors.h"

namespace attnhar {
namespace {

void fill_uniform(Tensor &t, double bound, Rng &rng) {
  for (double &x : t.values()) x = rng.uniform(-bound, bound);
}

// rows x n  =  bias broadcast + input[rows x in] * weight[n x in]^T
Tensor affine_rows(const Tensor &input, const Tensor &weight,
                   const Tensor &bias) {
  const std::size_t rows = input.dim(0);
  const std::size_t in = input.dim(1);
  const std::size_t n = weight.dim(0);
  Tensor out({rows, n});
  for (std::size_t r = 0; r < rows; ++r) {
    std::memcpy(out.data() + r * n, bias.data(), n * sizeof(double));
  }
  gemm(Transpose::kNo, Transpose::kYes, rows, n, in, 1.0, input.data(), in,
       weight.data(), in, 1.0, out.data(), n);
  return out;
}

}  // namespace

AttentionParams AttentionParams::init(std::size_t hidden, Rng &rng,
                                      bool intermediate) {
  if (hidden == 0) throw ConfigError("attention hidden size must be positive");
  if (intermediate && hidden < 2) {
    throw ConfigError("intermediate score layer needs hidden size >= 2");
  }
  AttentionParams p;
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  p.w1 = Tensor({hidden, hidden});
  p.b1 = Tensor({hidden});
  fill_uniform(p.w1, bound, rng);
  fill_uniform(p.b1, bound, rng);
  std::size_t score_in = hidden;
  if (intermediate) {
    score_in = hidden / 2;
    p.w_mid = Tensor({score_in, hidden});
    p.b_mid = Tensor({score_in});
    fill_uniform(p.w_mid, bound, rng);
    fill_uniform(p.b_mid, bound, rng);
  }
  p.w2 = Tensor({1, score_in});
  fill_uniform(p.w2, 1.0 / std::sqrt(static_cast<double>(score_in)), rng);
  p.b2 = Tensor({1}, 0.0);
  return p;
}

AttentionParams AttentionParams::zeros_like() const {
  AttentionParams z;
  z.w1 = w1.zeros_like();
  z.b1 = b1.zeros_like();
  if (has_intermediate()) {
    z.w_mid = w_mid.zeros_like();
    z.b_mid = b_mid.zeros_like();
  }
  z.w2 = w2.zeros_like();
  z.b2 = b2.zeros_like();
  return z;
}

AttentionForward attend_forward(const AttentionParams &params,
                                const Tensor &hidden) {
  const std::size_t h = params.hidden_size();
  if (hidden.rank() != 2 || hidden.dim(1) != h || hidden.dim(0) < 2) {
    throw DimensionError("attention expects at least 2 hidden states of size " +
                         std::to_string(h) + ", got " + hidden.shape_string());
  }
  const std::size_t steps = hidden.dim(0);
  const std::size_t past = steps - 1;
  const Tensor context = Tensor({past, h}, std::vector<double>(
                                               hidden.data(),
                                               hidden.data() + past * h));

  AttentionForward result;
  AttentionCache &cache = result.cache;
  cache.params = &params;
  cache.hidden = hidden;
  cache.transformed = affine_rows(context, params.w1, params.b1);
  for (double &v : cache.transformed.values()) v = std::tanh(v);

  const Tensor *score_input = &cache.transformed;
  if (params.has_intermediate()) {
    cache.mid = affine_rows(cache.transformed, params.w_mid, params.b_mid);
    score_input = &cache.mid;
  }
  Tensor scores = affine_rows(*score_input, params.w2, params.b2);
  scores.reshape({past});
  cache.weights = softmax(scores);

  result.final_embedding = Tensor({h});
  std::memcpy(result.final_embedding.data(), hidden.data() + past * h,
              h * sizeof(double));
  gemm(Transpose::kYes, Transpose::kNo, h, 1, past, 1.0, hidden.data(), h,
       cache.weights.data(), 1, 1.0, result.final_embedding.data(), 1);
  check_finite(result.final_embedding, "attend_forward");
  result.trace.weights = cache.weights;
  return result;
}

AttentionBackward attend_backward(const AttentionCache &cache,
                                  const Tensor &grad_final) {
  if (cache.params == nullptr) {
    throw ContractError("attend_backward: cache does not come from a forward "
                        "pass");
  }
  const AttentionParams &params = *cache.params;
  const std::size_t h = params.hidden_size();
  if (grad_final.shape() != Tensor::Shape{h}) {
    throw ContractError("attend_backward: gradient shape " +
                        grad_final.shape_string() + " does not match [" +
                        std::to_string(h) + "]");
  }
  if (cache.hidden.dim(1) != h ||
      params.has_intermediate() != !cache.mid.empty()) {
    throw ContractError("attend_backward: cache is stale for these params");
  }
  const std::size_t steps = cache.hidden.dim(0);
  const std::size_t past = steps - 1;
  const Tensor &w = cache.weights;

  AttentionBackward result;
  result.grad_params = params.zeros_like();
  result.grad_hidden = Tensor({steps, h});
  Tensor &gh = result.grad_hidden;

  // Skip path and the direct weighted-sum path.
  std::memcpy(gh.data() + past * h, grad_final.data(), h * sizeof(double));
  Tensor grad_w({past});
  for (std::size_t i = 0; i < past; ++i) {
    const double *hi = cache.hidden.data() + i * h;
    double *gi = gh.data() + i * h;
    double dot = 0.0;
    for (std::size_t j = 0; j < h; ++j) {
      gi[j] = w[i] * grad_final[j];
      dot += hi[j] * grad_final[j];
    }
    grad_w[i] = dot;
  }

  // Softmax Jacobian.
  double mean = 0.0;
  for (std::size_t i = 0; i < past; ++i) mean += w[i] * grad_w[i];
  Tensor grad_score({past, 1});
  for (std::size_t i = 0; i < past; ++i) {
    grad_score[i] = w[i] * (grad_w[i] - mean);
  }

  const Tensor &score_input =
      params.has_intermediate() ? cache.mid : cache.transformed;
  const std::size_t score_in = score_input.dim(1);
  AttentionParams &gp = result.grad_params;
  for (std::size_t i = 0; i < past; ++i) gp.b2[0] += grad_score[i];
  gemm(Transpose::kYes, Transpose::kNo, 1, score_in, past, 1.0,
       grad_score.data(), 1, score_input.data(), score_in, 0.0, gp.w2.data(),
       score_in);
  // d score_input = grad_score * w2
  Tensor grad_score_input({past, score_in});
  gemm(Transpose::kNo, Transpose::kNo, past, score_in, 1, 1.0,
       grad_score.data(), 1, params.w2.data(), score_in, 0.0,
       grad_score_input.data(), score_in);

  Tensor grad_transformed;
  if (params.has_intermediate()) {
    for (std::size_t i = 0; i < past; ++i) {
      for (std::size_t j = 0; j < score_in; ++j) {
        gp.b_mid[j] += grad_score_input.at(i, j);
      }
    }
    gemm(Transpose::kYes, Transpose::kNo, score_in, h, past, 1.0,
         grad_score_input.data(), score_in, cache.transformed.data(), h, 0.0,
         gp.w_mid.data(), h);
    grad_transformed = Tensor({past, h});
    gemm(Transpose::kNo, Transpose::kNo, past, h, score_in, 1.0,
         grad_score_input.data(), score_in, params.w_mid.data(), h, 0.0,
         grad_transformed.data(), h);
  } else {
    grad_transformed = std::move(grad_score_input);
  }

  // Through tanh, then W1 and b1.
  for (std::size_t k = 0; k < grad_transformed.size(); ++k) {
    const double t = cache.transformed[k];
    grad_transformed[k] *= 1.0 - t * t;
  }
  for (std::size_t i = 0; i < past; ++i) {
    for (std::size_t j = 0; j < h; ++j) gp.b1[j] += grad_transformed.at(i, j);
  }
  gemm(Transpose::kYes, Transpose::kNo, h, h, past, 1.0,
       grad_transformed.data(), h, cache.hidden.data(), h, 0.0, gp.w1.data(),
       h);
  gemm(Transpose::kNo, Transpose::kNo, past, h, h, 1.0,
       grad_transformed.data(), h, params.w1.data(), h, 1.0, gh.data(), h);
  return result;
}

}  // namespace attnhar
