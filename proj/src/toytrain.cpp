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

#include "lbwq/toytrain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lbwq/error.hpp"
#include "lbwq/quantize.hpp"

namespace lbwq::toy {

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose)};
  return std::mt19937_64(seq);
}

Matrix gather_rows(const Matrix& m, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = m.row(rows[r]);
  return out;
}

std::vector<int> gather(const std::vector<int>& v, std::span<const Index> rows) {
  std::vector<int> out(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) out[r] = v[static_cast<std::size_t>(rows[r])];
  return out;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p = logits;
  for (Index r = 0; r < p.rows(); ++r) {
    const double mx = p.row(r).maxCoeff();
    p.row(r) = (p.row(r).array() - mx).exp().matrix();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

Index count_correct(const Matrix& logits, std::span<const int> labels) {
  Index correct = 0;
  for (Index r = 0; r < logits.rows(); ++r) {
    Index arg = 0;
    logits.row(r).maxCoeff(&arg);
    correct += (arg == labels[static_cast<std::size_t>(r)]) ? 1 : 0;
  }
  return correct;
}

}  // namespace

ToyNet make_net(std::span<const int> widths, std::mt19937_64& rng) {
  if (widths.size() < 2) throw Error(ErrorKind::InvalidArgument, "a net needs input and output widths");
  ToyNet net;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int in = widths[l];
    const int out = widths[l + 1];
    if (in < 1 || out < 1) throw Error(ErrorKind::InvalidArgument, "layer widths must be positive");
    const double limit = std::sqrt(6.0 / in);
    std::uniform_real_distribution<double> init(-limit, limit);

    DenseLayer layer;
    layer.shadow.resize(out, in);
    for (Index i = 0; i < layer.shadow.size(); ++i) layer.shadow.data()[i] = init(rng);
    layer.bias = Vector::Zero(out);
    layer.activation = (l + 2 == widths.size()) ? Activation::Identity : Activation::ReLU;
    layer.quantized = layer.shadow;
    layer.velocity_w = Matrix::Zero(out, in);
    layer.velocity_b = Vector::Zero(out);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

SyntheticDataset gen_blobs(const BlobConfig& cfg) {
  if (cfg.classes < 2) throw Error(ErrorKind::InvalidArgument, "blobs need at least two classes");
  if (cfg.dims < 2) throw Error(ErrorKind::InvalidArgument, "blobs need at least two dimensions");
  if (cfg.n_train < 1 || cfg.n_test < 0) throw Error(ErrorKind::InvalidArgument, "bad split sizes");

  std::mt19937_64 rng = stream(cfg.seed, 0);
  std::uniform_real_distribution<double> center_dist(-2.0, 2.0);
  std::uniform_int_distribution<int> label_dist(0, cfg.classes - 1);
  std::normal_distribution<double> noise(0.0, 1.0);

  Matrix centers(cfg.classes, cfg.dims);
  for (Index i = 0; i < centers.size(); ++i) centers.data()[i] = center_dist(rng);

  SyntheticDataset ds;
  ds.classes = cfg.classes;
  const Index total = cfg.n_train + cfg.n_test;
  ds.features.resize(total, cfg.dims);
  ds.labels.resize(static_cast<std::size_t>(total));
  for (Index r = 0; r < total; ++r) {
    const int label = label_dist(rng);
    ds.labels[static_cast<std::size_t>(r)] = label;
    for (int d = 0; d < cfg.dims; ++d) {
      ds.features(r, d) = centers(label, d) + cfg.noise * noise(rng);
    }
  }
  ds.train.resize(static_cast<std::size_t>(cfg.n_train));
  std::iota(ds.train.begin(), ds.train.end(), Index{0});
  ds.test.resize(static_cast<std::size_t>(cfg.n_test));
  std::iota(ds.test.begin(), ds.test.end(), cfg.n_train);
  return ds;
}

ForwardCache forward(const ToyNet& net, const Eigen::Ref<const Matrix>& batch, bool use_quantized) {
  ForwardCache cache;
  cache.used_quantized = use_quantized;
  Matrix a = batch;
  for (const DenseLayer& layer : net.layers) {
    const Matrix& w = use_quantized ? layer.quantized : layer.shadow;
    if (a.cols() != w.cols()) {
      throw Error(ErrorKind::ShapeMismatch, "batch has " + std::to_string(a.cols()) +
                                                " features, layer expects " + std::to_string(w.cols()));
    }
    Matrix z = a * w.transpose();
    z.rowwise() += layer.bias.transpose();
    cache.inputs.push_back(std::move(a));
    a = layer.activation == Activation::ReLU ? Matrix(z.cwiseMax(0.0)) : z;
    cache.pre.push_back(std::move(z));
  }
  cache.logits = std::move(a);
  return cache;
}

double cross_entropy(const Matrix& logits, std::span<const int> labels) {
  if (static_cast<Index>(labels.size()) != logits.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "labels and logits disagree on batch size");
  }
  double total = 0;
  for (Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
    total += lse - logits(r, labels[static_cast<std::size_t>(r)]);
  }
  return total / static_cast<double>(logits.rows());
}

Gradients backward(const ToyNet& net, const ForwardCache& cache, std::span<const int> labels) {
  const Index batch = cache.logits.rows();
  if (static_cast<Index>(labels.size()) != batch) {
    throw Error(ErrorKind::ShapeMismatch, "labels and logits disagree on batch size");
  }
  Matrix dz = softmax_rows(cache.logits);
  for (Index r = 0; r < batch; ++r) dz(r, labels[static_cast<std::size_t>(r)]) -= 1.0;
  dz /= static_cast<double>(batch);

  const std::size_t depth = net.layers.size();
  Gradients g;
  g.weights.resize(depth);
  g.biases.resize(depth);
  for (std::size_t l = depth; l-- > 0;) {
    const DenseLayer& layer = net.layers[l];
    const Matrix& w = cache.used_quantized ? layer.quantized : layer.shadow;
    g.weights[l] = dz.transpose() * cache.inputs[l];
    g.biases[l] = dz.colwise().sum().transpose();
    if (l == 0) break;
    Matrix da = dz * w;
    if (net.layers[l - 1].activation == Activation::ReLU) {
      da = da.cwiseProduct((cache.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
    dz = std::move(da);
  }
  return g;
}

void sgd_step(ToyNet& net, const Gradients& grads, double lr, double momentum) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    DenseLayer& layer = net.layers[l];
    layer.velocity_w = momentum * layer.velocity_w - lr * grads.weights[l];
    layer.shadow += momentum * layer.velocity_w - lr * grads.weights[l];
    layer.velocity_b = momentum * layer.velocity_b - lr * grads.biases[l];
    layer.bias += momentum * layer.velocity_b - lr * grads.biases[l];
  }
}

void project_quantize(ToyNet& net, const std::optional<QuantConfig>& cfg) {
  for (DenseLayer& layer : net.layers) {
    if (!cfg) {
      layer.quant.reset();
      layer.quantized = layer.shadow;
      continue;
    }
    const Eigen::Map<const Vector> flat(layer.shadow.data(), layer.shadow.size());
    layer.quant = quantize_layer(flat, *cfg);
    const Vector values = reconstruct<double>(layer.quant->tensor);
    layer.quantized = Eigen::Map<const Matrix>(values.data(), layer.shadow.rows(), layer.shadow.cols());
  }
}

double learning_rate_at(const TrainConfig& cfg, int epoch) {
  double lr = cfg.learning_rate;
  for (int e : cfg.decay_epochs) {
    if (epoch >= e) lr *= cfg.lr_decay;
  }
  return lr;
}

double accuracy(const ToyNet& net, const SyntheticDataset& data, std::span<const Index> rows,
                bool use_quantized) {
  if (rows.empty()) return 0.0;
  const ForwardCache c = forward(net, gather_rows(data.features, rows), use_quantized);
  const std::vector<int> labels = gather(data.labels, rows);
  return static_cast<double>(count_correct(c.logits, labels)) / static_cast<double>(rows.size());
}

std::vector<LayerSummary> summarize_layers(const ToyNet& net) {
  std::vector<LayerSummary> out;
  for (const DenseLayer& layer : net.layers) {
    LayerSummary s;
    s.rows = layer.shadow.rows();
    s.cols = layer.shadow.cols();
    if (layer.quant) {
      s.bits = layer.quant->tensor.bits;
      s.scale_exp = layer.quant->tensor.scale_exp;
      s.l2_error = layer.quant->l2_error;
      s.sparsity = layer.quant->sparsity;
      s.partition = layer.quant->partition.counts;
    }
    out.push_back(std::move(s));
  }
  return out;
}

TrainReport train(const TrainConfig& cfg) {
  if (cfg.quant) cfg.quant->validate();
  if (cfg.epochs < 0 || cfg.batch_size < 1) throw Error(ErrorKind::InvalidArgument, "bad epoch/batch settings");

  BlobConfig blobs = cfg.data;
  blobs.seed = cfg.seed;
  const SyntheticDataset data = gen_blobs(blobs);

  std::vector<int> widths{blobs.dims};
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(blobs.classes);
  std::mt19937_64 init_rng = stream(cfg.seed, 1);
  ToyNet net = make_net(widths, init_rng);

  std::mt19937_64 shuffle_rng = stream(cfg.seed, 2);
  std::vector<Index> order = data.train;
  TrainReport report;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = learning_rate_at(cfg, epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0;
    Index correct = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t len = std::min(order.size() - start, static_cast<std::size_t>(cfg.batch_size));
      const std::span<const Index> rows(order.data() + start, len);
      const Matrix x = gather_rows(data.features, rows);
      const std::vector<int> y = gather(data.labels, rows);

      project_quantize(net, cfg.quant);
      const ForwardCache cache = forward(net, x, true);
      const double loss = cross_entropy(cache.logits, y);
      if (!std::isfinite(loss)) throw DivergenceError(epoch, "minibatch loss is not finite");
      loss_sum += loss * static_cast<double>(len);
      correct += count_correct(cache.logits, y);
      sgd_step(net, backward(net, cache, y), lr, cfg.momentum);
    }
    const auto n = static_cast<double>(order.size());
    report.epochs.push_back({epoch, lr, loss_sum / n, static_cast<double>(correct) / n});
  }

  project_quantize(net, cfg.quant);
  report.final_train_accuracy = accuracy(net, data, data.train, true);
  report.final_test_accuracy = accuracy(net, data, data.test, true);
  report.layers = summarize_layers(net);
  return report;
}

std::vector<SweepRow> sweep_mu(const TrainConfig& base, std::span<const double> ratios) {
  if (!base.quant || base.quant->bits < 3) {
    throw Error(ErrorKind::InvalidArgument, "mu sweeps need a quantized config with bits >= 3");
  }
  std::vector<SweepRow> rows;
  for (double ratio : ratios) {
    if (!(ratio > 0.0 && ratio <= 1.0)) throw Error(ErrorKind::InvalidArgument, "mu ratios must lie in (0, 1]");
    TrainConfig cfg = base;
    cfg.quant->mu_policy = MuRatioOfMax{ratio};
    SweepRow row;
    row.ratio = ratio;
    row.report = train(cfg);
    row.final_accuracy = row.report.final_test_accuracy;
    double err = 0;
    for (const auto& l : row.report.layers) err += l.l2_error;
    row.mean_l2_error = row.report.layers.empty() ? 0.0 : err / static_cast<double>(row.report.layers.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace lbwq::toy
