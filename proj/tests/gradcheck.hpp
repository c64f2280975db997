// Copyright 2026 The LBWQ Authors.
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

// Central finite-difference check of toy::backward.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "lbwq/toytrain.hpp"

namespace lbwq::testing {

constexpr double kFdStep = 1e-4;
// Denominator floor for coordinates whose gradient is (numerically) zero.
constexpr double kFdFloor = 1e-12;

inline double fd_relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), kFdFloor});
  return std::abs(analytic - numeric) / scale;
}

/// Max relative error over every weight and bias coordinate. Perturbs the
/// weights the chosen forward path reads (quantized values or shadows).
inline double max_gradient_error(toy::ToyNet net, const toy::Matrix& x, std::span<const int> y, bool use_quantized) {
  const toy::Gradients g = toy::backward(net, toy::forward(net, x, use_quantized), y);
  auto loss = [&]() { return toy::cross_entropy(toy::forward(net, x, use_quantized).logits, y); };

  double worst = 0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    toy::Matrix& w = use_quantized ? net.layers[l].quantized : net.layers[l].shadow;
    for (Index i = 0; i < w.size(); ++i) {
      const double orig = w.data()[i];
      w.data()[i] = orig + kFdStep;
      const double up = loss();
      w.data()[i] = orig - kFdStep;
      const double down = loss();
      w.data()[i] = orig;
      worst = std::max(worst, fd_relative_error(g.weights[l].data()[i], (up - down) / (2 * kFdStep)));
    }
    toy::Vector& b = net.layers[l].bias;
    for (Index i = 0; i < b.size(); ++i) {
      const double orig = b(i);
      b(i) = orig + kFdStep;
      const double up = loss();
      b(i) = orig - kFdStep;
      const double down = loss();
      b(i) = orig;
      worst = std::max(worst, fd_relative_error(g.biases[l](i), (up - down) / (2 * kFdStep)));
    }
  }
  return worst;
}

}  // namespace lbwq::testing
