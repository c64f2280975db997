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

// Small dense ReLU classifier trained by projected SGD: every step projects
// the full-precision (shadow) weights onto the quantized set, evaluates the
// minibatch gradient at the projection, and applies it to the shadows.

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "lbwq/types.hpp"

namespace lbwq::toy {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { ReLU, Identity };

struct DenseLayer {
  Matrix shadow;  // out x in
  Vector bias;    // never quantized
  Activation activation = Activation::ReLU;

  std::optional<QuantResult<double>> quant;  // empty under full precision
  Matrix quantized;                          // weights used by the quantized forward pass

  Matrix velocity_w;
  Vector velocity_b;

  Index inputs() const { return shadow.cols(); }
  Index outputs() const { return shadow.rows(); }
};

struct ToyNet {
  std::vector<DenseLayer> layers;
};

/// widths = {in, hidden..., out}. He-uniform weights, zero biases, ReLU on
/// hidden layers and identity on the output.
ToyNet make_net(std::span<const int> widths, std::mt19937_64& rng);

struct BlobConfig {
  std::uint64_t seed = 1;
  Index n_train = 2000;
  Index n_test = 500;
  int dims = 8;
  int classes = 4;
  double noise = 1.0;  // 0 gives a separable debug set
};

/// Features are rows; train and test index the same matrix.
struct SyntheticDataset {
  Matrix features;
  std::vector<int> labels;
  std::vector<Index> train;
  std::vector<Index> test;
  int classes = 0;
};

/// Class centres uniform in [-2, 2]^dims; points are centre + noise * N(0, I).
SyntheticDataset gen_blobs(const BlobConfig& cfg);

struct ForwardCache {
  std::vector<Matrix> inputs;  // input to each layer, batch x in
  std::vector<Matrix> pre;     // pre-activation of each layer, batch x out
  Matrix logits;
  bool used_quantized = false;
};

ForwardCache forward(const ToyNet& net, const Eigen::Ref<const Matrix>& batch, bool use_quantized);

/// Mean softmax cross-entropy.
double cross_entropy(const Matrix& logits, std::span<const int> labels);

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

/// Gradients of the mean cross-entropy with respect to whichever weights the
/// cached forward pass used.
Gradients backward(const ToyNet& net, const ForwardCache& cache, std::span<const int> labels);

/// Nesterov momentum on the shadow weights and the biases:
///   v <- momentum * v - lr * g
///   w <- w + momentum * v - lr * g
void sgd_step(ToyNet& net, const Gradients& grads, double lr, double momentum);

/// Re-quantizes every layer's shadow weights; nullopt mirrors the shadows.
void project_quantize(ToyNet& net, const std::optional<QuantConfig>& cfg);

struct TrainConfig {
  std::optional<QuantConfig> quant;  // nullopt = full precision
  BlobConfig data;                   // data.seed is overwritten by seed
  std::vector<int> hidden{64, 64};
  int epochs = 90;
  int batch_size = 64;
  double learning_rate = 0.1;
  double lr_decay = 0.1;
  std::vector<int> decay_epochs{30, 60};
  double momentum = 0.9;
  std::uint64_t seed = 1;
};

struct EpochStats {
  int epoch = 0;
  double learning_rate = 0;
  double loss = 0;
  double train_accuracy = 0;

  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

struct LayerSummary {
  Index rows = 0;
  Index cols = 0;
  int bits = 0;  // 0 for full precision
  int scale_exp = 0;
  double l2_error = 0;
  double sparsity = 0;
  std::vector<Index> partition;

  friend bool operator==(const LayerSummary&, const LayerSummary&) = default;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  double final_train_accuracy = 0;
  double final_test_accuracy = 0;
  std::vector<LayerSummary> layers;

  friend bool operator==(const TrainReport&, const TrainReport&) = default;
};

double learning_rate_at(const TrainConfig& cfg, int epoch);

double accuracy(const ToyNet& net, const SyntheticDataset& data, std::span<const Index> rows,
                bool use_quantized);

std::vector<LayerSummary> summarize_layers(const ToyNet& net);

/// Throws DivergenceError when the loss stops being finite.
TrainReport train(const TrainConfig& cfg);

struct SweepRow {
  double ratio = 0;
  double final_accuracy = 0;
  double mean_l2_error = 0;
  TrainReport report;
};

/// One training run per ratio, mu = ratio * max|W| per layer, same seed for all.
std::vector<SweepRow> sweep_mu(const TrainConfig& base, std::span<const double> ratios);

}  // namespace lbwq::toy
