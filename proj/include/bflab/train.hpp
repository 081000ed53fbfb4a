#pragma once

// Plain SGD-with-momentum training, just enough to produce competent victim
// models for the flip experiments.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bflab/data.hpp"
#include "bflab/model.hpp"
#include "bflab/rng.hpp"

namespace bflab {

// He-uniform weight init; biases start at zero.
inline void init_params(Model& m, std::uint64_t seed) {
  Rng rng(seed);
  for (Layer& l : m.layers) {
    if (!l.parameterized()) continue;
    int fan_in = l.kind == LayerKind::dense ? l.in_features
                                            : l.in_channels * l.kernel * l.kernel;
    double bound = std::sqrt(6.0 / fan_in);
    for (double& w : l.weight.data) w = rng.uniform(-bound, bound);
    for (double& b : l.bias) b = 0.0;
  }
}

struct TrainConfig {
  int epochs = 10;
  int batch_size = 32;
  double lr = 0.05;
  double momentum = 0.9;
  std::uint64_t seed = 1;
};

struct TrainSummary {
  int epochs = 0;
  double final_loss = 0.0;
  double train_accuracy = 0.0;
};

inline double accuracy(const Model& m, const LabeledBatch& batch) {
  if (batch.empty()) throw std::invalid_argument("accuracy: empty batch");
  std::vector<int> pred = predict_classes(m, batch.inputs);
  int hit = 0;
  for (int i = 0; i < batch.size(); ++i)
    if (pred[static_cast<std::size_t>(i)] == batch.labels[static_cast<std::size_t>(i)]) ++hit;
  return static_cast<double>(hit) / batch.size();
}

inline TrainSummary train_sgd(Model& m, const LabeledBatch& train, const TrainConfig& cfg) {
  m.validate();
  if (train.empty()) throw std::invalid_argument("train_sgd: empty training set");
  if (cfg.epochs <= 0 || cfg.batch_size <= 0 || cfg.lr <= 0.0)
    throw std::invalid_argument("train_sgd: bad config");

  Rng rng(cfg.seed);
  std::vector<int> pidx = m.param_layers();
  std::vector<Tensor> vel_w;
  std::vector<std::vector<double>> vel_b;
  for (int li : pidx) {
    vel_w.emplace_back(m.layers[li].weight.shape);
    vel_b.emplace_back(m.layers[li].bias.size(), 0.0);
  }

  std::vector<int> order(static_cast<std::size_t>(train.size()));
  for (int i = 0; i < train.size(); ++i) order[static_cast<std::size_t>(i)] = i;

  TrainSummary summary;
  double last_loss = 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (int start = 0; start < train.size(); start += cfg.batch_size) {
      int stop = std::min(start + cfg.batch_size, train.size());
      std::vector<int> rows(order.begin() + start, order.begin() + stop);
      LabeledBatch mb = subset(train, rows);

      ForwardTrace tr;
      Tensor logits = forward(m, mb.inputs, &tr);
      last_loss = cross_entropy(logits, mb.labels);
      if (!std::isfinite(last_loss))
        throw std::runtime_error("train_sgd: loss diverged (lower the learning rate)");
      Gradients g = backward(m, mb.inputs, mb.labels);

      for (std::size_t s = 0; s < pidx.size(); ++s) {
        Layer& l = m.layers[static_cast<std::size_t>(pidx[s])];
        for (std::size_t j = 0; j < l.weight.data.size(); ++j) {
          vel_w[s].data[j] = cfg.momentum * vel_w[s].data[j] - cfg.lr * g.weight[s].data[j];
          l.weight.data[j] += vel_w[s].data[j];
        }
        for (std::size_t j = 0; j < l.bias.size(); ++j) {
          vel_b[s][j] = cfg.momentum * vel_b[s][j] - cfg.lr * g.bias[s][j];
          l.bias[j] += vel_b[s][j];
        }
      }
    }
  }
  summary.epochs = cfg.epochs;
  summary.final_loss = last_loss;
  summary.train_accuracy = accuracy(m, train);
  return summary;
}

}  // namespace bflab
