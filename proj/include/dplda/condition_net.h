// include/dplda/condition_net.h

// Copyright 2026  The DPLDA Backend Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef DPLDA_CONDITION_NET_H_
#define DPLDA_CONDITION_NET_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dplda/data_model.h"

namespace dplda {

struct ConditionNetConfig {
  int hidden_dim = 100;
  int bottleneck_dim = 10;
  int epochs = 20;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double bn_momentum = 0.9;
  double bn_epsilon = 1e-5;
  std::uint64_t seed = 0;
};

// Condition classifier over embeddings:
//   h1 = BN(W1 x + b1), a1 = relu(h1)
//   m  = W2 a1 + b2            (bottleneck pre-activation)
//   logits = W3 relu(m) + b3
// BN uses batch statistics while training and the frozen running
// statistics at inference.
struct ConditionNet {
  Matrix w1;
  Vector b1;
  Vector running_mean;
  Vector running_var;
  Matrix w2;
  Vector b2;
  Matrix w3;
  Vector b3;
  std::vector<std::string> class_names;
  double bn_epsilon = 1e-5;

  int InputDim() const { return static_cast<int>(w1.cols()); }
  int HiddenDim() const { return static_cast<int>(w1.rows()); }
  int BottleneckDim() const { return static_cast<int>(w2.rows()); }
  int NumClasses() const { return static_cast<int>(w3.rows()); }
};

struct ConditionNetGradients {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
  Matrix w3;
  Vector b3;
};

struct ConditionNetReport {
  std::vector<double> epoch_loss;
  double train_accuracy = 0.0;
};

// He-initialized network; running statistics start at (0, 1).
ConditionNet InitConditionNet(int input_dim,
                              std::vector<std::string> class_names,
                              const ConditionNetConfig &config);

// Mean cross-entropy of a batch in training mode (batch statistics). Fills
// `grads` when non-null and the batch statistics when requested.
double ConditionNetBatchLoss(const ConditionNet &net, const Matrix &inputs,
                             const std::vector<int> &labels,
                             ConditionNetGradients *grads,
                             Vector *batch_mean = nullptr,
                             Vector *batch_var = nullptr);

// Trains on the condition_label of every record. Requires at least two
// distinct labels and no missing label. Deterministic given config.seed.
ConditionNet TrainConditionNet(const Dataset &dataset,
                               const ConditionNetConfig &config,
                               ConditionNetReport *report = nullptr);

Vector Bottleneck(const ConditionNet &net, const Vector &x);
// Row-wise bottleneck of an (n x D) matrix, inference mode.
Matrix BottleneckRows(const ConditionNet &net, const Matrix &inputs);

// Inference-mode class indices into net.class_names.
std::vector<int> PredictConditions(const ConditionNet &net,
                                   const Matrix &inputs);

}  // namespace dplda

#endif  // DPLDA_CONDITION_NET_H_
