// src/condition_net.cc

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

#include "dplda/condition_net.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "dplda/adam.h"
#include "dplda/errors.h"

namespace dplda {

namespace {

Matrix Relu(const Matrix &m) { return m.cwiseMax(0.0); }

Matrix HeNormal(int rows, int cols, std::mt19937_64 &rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / cols));
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = normal(rng);
  return m;
}

Matrix InferenceHidden(const ConditionNet &net, const Matrix &inputs) {
  if (inputs.cols() != net.InputDim())
    throw ValidationError("condition net: input dimension mismatch, expected " +
                          std::to_string(net.InputDim()));
  Matrix h1 = (inputs * net.w1.transpose()).rowwise() + net.b1.transpose();
  Eigen::RowVectorXd inv_std =
      (net.running_var.array() + net.bn_epsilon).rsqrt().matrix().transpose();
  h1 = (h1.rowwise() - net.running_mean.transpose()).array().rowwise() *
       inv_std.array();
  return Relu(h1);
}

}  // namespace

ConditionNet InitConditionNet(int input_dim,
                              std::vector<std::string> class_names,
                              const ConditionNetConfig &config) {
  if (class_names.size() < 2)
    throw ValidationError("condition net needs at least 2 classes");
  std::mt19937_64 rng(config.seed);
  ConditionNet net;
  const int h = config.hidden_dim, b = config.bottleneck_dim;
  const int c = static_cast<int>(class_names.size());
  net.w1 = HeNormal(h, input_dim, rng);
  net.b1 = Vector::Zero(h);
  net.running_mean = Vector::Zero(h);
  net.running_var = Vector::Ones(h);
  net.w2 = HeNormal(b, h, rng);
  net.b2 = Vector::Zero(b);
  net.w3 = HeNormal(c, b, rng);
  net.b3 = Vector::Zero(c);
  net.class_names = std::move(class_names);
  net.bn_epsilon = config.bn_epsilon;
  return net;
}

double ConditionNetBatchLoss(const ConditionNet &net, const Matrix &inputs,
                             const std::vector<int> &labels,
                             ConditionNetGradients *grads, Vector *batch_mean,
                             Vector *batch_var) {
  const Eigen::Index n = inputs.rows();
  if (n < 2 || static_cast<std::size_t>(n) != labels.size())
    throw ValidationError("condition net batch: need >= 2 rows with labels");
  if (inputs.cols() != net.InputDim())
    throw ValidationError("condition net batch: input dimension mismatch");

  Matrix h1 = (inputs * net.w1.transpose()).rowwise() + net.b1.transpose();
  Eigen::RowVectorXd mean = h1.colwise().mean();
  Matrix centered = h1.rowwise() - mean;
  Eigen::RowVectorXd var = centered.array().square().colwise().mean();
  Eigen::RowVectorXd inv_std = (var.array() + net.bn_epsilon).rsqrt();
  Matrix xhat = centered.array().rowwise() * inv_std.array();
  Matrix a1 = Relu(xhat);
  Matrix h2 = (a1 * net.w2.transpose()).rowwise() + net.b2.transpose();
  Matrix a2 = Relu(h2);
  Matrix logits = (a2 * net.w3.transpose()).rowwise() + net.b3.transpose();

  Matrix prob(n, logits.cols());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double mx = logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(i).array() - mx).exp();
    double z = e.sum();
    prob.row(i) = e / z;
    loss -= logits(i, labels[i]) - mx - std::log(z);
  }
  loss /= static_cast<double>(n);

  if (batch_mean) *batch_mean = mean.transpose();
  if (batch_var) *batch_var = var.transpose();
  if (!grads) return loss;

  Matrix dlogits = prob;
  for (Eigen::Index i = 0; i < n; ++i) dlogits(i, labels[i]) -= 1.0;
  dlogits /= static_cast<double>(n);
  grads->w3 = dlogits.transpose() * a2;
  grads->b3 = dlogits.colwise().sum().transpose();
  Matrix dh2 = (dlogits * net.w3).cwiseProduct(
      (h2.array() > 0.0).cast<double>().matrix());
  grads->w2 = dh2.transpose() * a1;
  grads->b2 = dh2.colwise().sum().transpose();
  Matrix dxhat = (dh2 * net.w2).cwiseProduct(
      (xhat.array() > 0.0).cast<double>().matrix());
  // Batch-norm backward.
  Eigen::RowVectorXd sum_d = dxhat.colwise().sum();
  Eigen::RowVectorXd sum_dx = dxhat.cwiseProduct(xhat).colwise().sum();
  Matrix dh1 = ((static_cast<double>(n) * dxhat).rowwise() - sum_d).array() -
               xhat.array().rowwise() * sum_dx.array();
  dh1 = dh1.array().rowwise() * (inv_std.array() / static_cast<double>(n));
  grads->w1 = dh1.transpose() * inputs;
  grads->b1 = dh1.colwise().sum().transpose();
  return loss;
}

ConditionNet TrainConditionNet(const Dataset &dataset,
                               const ConditionNetConfig &config,
                               ConditionNetReport *report) {
  if (config.epochs <= 0 || config.batch_size < 2)
    throw ValidationError("condition net: epochs > 0 and batch_size >= 2 required");
  std::set<std::string> label_set;
  for (std::size_t i = 0; i < dataset.Size(); ++i) {
    if (dataset[i].condition_label.empty())
      throw ValidationError("condition net: row " + std::to_string(i + 1) +
                            " ('" + dataset[i].segment_id +
                            "') has no condition_label");
    label_set.insert(dataset[i].condition_label);
  }
  if (label_set.size() < 2)
    throw ValidationError("condition net: need >= 2 distinct condition labels, got " +
                          std::to_string(label_set.size()));
  std::vector<std::string> classes(label_set.begin(), label_set.end());
  std::map<std::string, int> class_index;
  for (std::size_t c = 0; c < classes.size(); ++c) class_index[classes[c]] = c;

  ConditionNet net = InitConditionNet(dataset.Dim(), classes, config);
  Matrix all = dataset.EmbeddingMatrix();
  std::vector<int> labels(dataset.Size());
  for (std::size_t i = 0; i < dataset.Size(); ++i)
    labels[i] = class_index[dataset[i].condition_label];

  Adam adam;
  std::vector<std::size_t> slots;
  auto tensors = [](ConditionNet &n) {
    return std::vector<std::span<double>>{
        {n.w1.data(), static_cast<std::size_t>(n.w1.size())},
        {n.b1.data(), static_cast<std::size_t>(n.b1.size())},
        {n.w2.data(), static_cast<std::size_t>(n.w2.size())},
        {n.b2.data(), static_cast<std::size_t>(n.b2.size())},
        {n.w3.data(), static_cast<std::size_t>(n.w3.size())},
        {n.b3.data(), static_cast<std::size_t>(n.b3.size())}};
  };
  for (auto t : tensors(net)) slots.push_back(adam.AddSlot(t.size()));

  // The shuffling stream is separate from the initialization stream.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(dataset.Size());
  std::iota(order.begin(), order.end(), 0);
  ConditionNetGradients g;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      std::size_t end = std::min(order.size(), start + config.batch_size);
      if (end - start < 2) break;
      Matrix x(end - start, all.cols());
      std::vector<int> y(end - start);
      for (std::size_t i = start; i < end; ++i) {
        x.row(i - start) = all.row(order[i]);
        y[i - start] = labels[order[i]];
      }
      Vector bm, bv;
      epoch_loss += ConditionNetBatchLoss(net, x, y, &g, &bm, &bv);
      ++batches;
      net.running_mean = config.bn_momentum * net.running_mean +
                         (1.0 - config.bn_momentum) * bm;
      net.running_var = config.bn_momentum * net.running_var +
                        (1.0 - config.bn_momentum) * bv;
      adam.BeginStep();
      auto params = tensors(net);
      const Matrix *grad_list[] = {&g.w1, nullptr, &g.w2, nullptr, &g.w3, nullptr};
      const Vector *grad_vecs[] = {nullptr, &g.b1, nullptr, &g.b2, nullptr, &g.b3};
      for (std::size_t t = 0; t < params.size(); ++t) {
        const double *gd = grad_list[t] ? grad_list[t]->data() : grad_vecs[t]->data();
        adam.Update(slots[t], params[t], {gd, params[t].size()},
                    config.learning_rate);
      }
    }
    if (report) report->epoch_loss.push_back(epoch_loss / std::max(1, batches));
  }
  // Keep the frozen variances strictly positive.
  net.running_var = net.running_var.cwiseMax(1e-12);

  if (report) {
    std::vector<int> pred = PredictConditions(net, all);
    int correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == labels[i];
    report->train_accuracy = static_cast<double>(correct) / pred.size();
  }
  return net;
}

Matrix BottleneckRows(const ConditionNet &net, const Matrix &inputs) {
  Matrix a1 = InferenceHidden(net, inputs);
  return (a1 * net.w2.transpose()).rowwise() + net.b2.transpose();
}

Vector Bottleneck(const ConditionNet &net, const Vector &x) {
  return BottleneckRows(net, x.transpose()).row(0).transpose();
}

std::vector<int> PredictConditions(const ConditionNet &net,
                                   const Matrix &inputs) {
  Matrix m = BottleneckRows(net, inputs);
  Matrix logits = (Relu(m) * net.w3.transpose()).rowwise() + net.b3.transpose();
  std::vector<int> out(inputs.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index arg;
    logits.row(i).maxCoeff(&arg);
    out[i] = static_cast<int>(arg);
  }
  return out;
}

}  // namespace dplda
