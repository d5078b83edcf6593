// src/calibration.cc

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

#include "dplda/calibration.h"

#include <cmath>
#include <sstream>

#include "dplda/errors.h"

namespace dplda {

double Logit(double p) { return std::log(p) - std::log1p(-p); }

double Softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

MetaCalibration MakeMetaCalibration(int bottleneck_dim,
                                    const GlobalCalibration &global,
                                    bool use_gamma) {
  MetaCalibration mc;
  mc.w = Matrix::Zero(kMetadataDim, bottleneck_dim);
  mc.lambda_a = Matrix::Zero(kMetadataDim, kMetadataDim);
  mc.gamma_a = Matrix::Zero(kMetadataDim, kMetadataDim);
  mc.c_a = Vector::Zero(kMetadataDim);
  mc.k_a = global.alpha;
  mc.lambda_b = Matrix::Zero(kMetadataDim, kMetadataDim);
  mc.gamma_b = Matrix::Zero(kMetadataDim, kMetadataDim);
  mc.c_b = Vector::Zero(kMetadataDim);
  mc.k_b = global.beta;
  mc.use_gamma = use_gamma;
  return mc;
}

double WeightedCrossEntropy(const ClassScores &llrs, double prior) {
  if (llrs.target.empty() || llrs.impostor.empty())
    throw ValidationError("cross-entropy needs both target and impostor scores");
  const double offset = Logit(prior);
  double tgt = 0.0, imp = 0.0;
  for (double l : llrs.target) tgt += Softplus(-(l + offset));
  for (double l : llrs.impostor) imp += Softplus(l + offset);
  return prior * tgt / llrs.target.size() +
         (1.0 - prior) * imp / llrs.impostor.size();
}

namespace {

// Objective, gradient and Hessian of the weighted cross-entropy in the
// standardized parameters (a, b) of l = a * z + b.
struct Quadratic {
  double value = 0.0;
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
  Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
};

Quadratic Evaluate(const std::vector<double> &tz, const std::vector<double> &iz,
                   double a, double b, double prior) {
  const double offset = Logit(prior);
  Quadratic q;
  auto accumulate = [&](const std::vector<double> &zs, double weight,
                        bool target) {
    for (double z : zs) {
      double x = a * z + b + offset;
      double p = 1.0 / (1.0 + std::exp(-x));
      q.value += weight * (target ? Softplus(-x) : Softplus(x));
      double d = weight * (target ? p - 1.0 : p);
      double h = weight * p * (1.0 - p);
      q.grad += d * Eigen::Vector2d(z, 1.0);
      q.hess(0, 0) += h * z * z;
      q.hess(0, 1) += h * z;
      q.hess(1, 1) += h;
    }
  };
  accumulate(tz, prior / tz.size(), true);
  accumulate(iz, (1.0 - prior) / iz.size(), false);
  q.hess(1, 0) = q.hess(0, 1);
  return q;
}

}  // namespace

GlobalCalibration TrainGlobalCalibration(const ClassScores &scores,
                                         double prior) {
  if (scores.target.empty() || scores.impostor.empty())
    throw ValidationError(
        "TrainGlobalCalibration: need at least one target and one impostor");
  if (!(prior > 0.0 && prior < 1.0))
    throw ValidationError("TrainGlobalCalibration: prior must be in (0, 1)");

  double sum = 0.0, sum2 = 0.0;
  std::size_t n = scores.target.size() + scores.impostor.size();
  for (double s : scores.target) sum += s;
  for (double s : scores.impostor) sum += s;
  double mean = sum / n;
  for (double s : scores.target) sum2 += (s - mean) * (s - mean);
  for (double s : scores.impostor) sum2 += (s - mean) * (s - mean);
  double sd = std::sqrt(sum2 / n);
  const bool constant = !(sd > 0.0);

  std::vector<double> tz, iz;
  tz.reserve(scores.target.size());
  iz.reserve(scores.impostor.size());
  for (double s : scores.target) tz.push_back(constant ? 0.0 : (s - mean) / sd);
  for (double s : scores.impostor) iz.push_back(constant ? 0.0 : (s - mean) / sd);

  // Start from the identity map.
  double a = constant ? 0.0 : sd, b = constant ? 0.0 : mean;
  Quadratic q = Evaluate(tz, iz, a, b, prior);
  bool converged = false;
  for (int iter = 0; iter < 200; ++iter) {
    if (q.grad.norm() < 1e-9) {
      converged = true;
      break;
    }
    Eigen::Vector2d step;
    if (constant) {
      step = Eigen::Vector2d(0.0, q.grad(1) / q.hess(1, 1));
    } else {
      Eigen::Matrix2d h = q.hess;
      h.diagonal().array() += 1e-12;
      step = h.ldlt().solve(q.grad);
    }
    // Predicted decrease at or below rounding level of the summed loss.
    if (0.5 * q.grad.dot(step) < 1e-15) {
      converged = true;
      break;
    }
    double t = 1.0;
    Quadratic next;
    bool accepted = false;
    for (int ls = 0; ls < 60 && !accepted; ++ls) {
      next = Evaluate(tz, iz, a - t * step(0), b - t * step(1), prior);
      accepted = next.value <= q.value + 1e-4 * t * -q.grad.dot(step);
      if (!accepted) t *= 0.5;
    }
    if (!accepted) break;
    a -= t * step(0);
    b -= t * step(1);
    q = next;
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "TrainGlobalCalibration: gradient norm " << q.grad.norm()
        << " after 200 Newton iterations (separable scores?)";
    Warn(msg.str());
  }

  GlobalCalibration cal;
  if (constant) {
    cal.alpha = 0.0;
    cal.beta = b;
  } else {
    cal.alpha = a / sd;
    cal.beta = b - a * mean / sd;
  }
  return cal;
}

Vector MetadataVector(const MetaCalibration &mc, const Vector &bottleneck) {
  if (bottleneck.size() != mc.w.cols())
    throw ValidationError("MetadataVector: bottleneck dimension mismatch");
  Vector u = mc.w * bottleneck;
  double mx = u.maxCoeff();
  double lse = mx + std::log((u.array() - mx).exp().sum());
  return (u.array() - lse).matrix();
}

namespace {

double SymmetricForm(const Vector &z1, const Vector &z2, const Matrix &lambda,
                     const Matrix &gamma, const Vector &c, double k) {
  double cross = 0.5 * (z1.dot(lambda * z2) + z2.dot(lambda * z1));
  double quad = z1.dot(gamma * z1) + z2.dot(gamma * z2);
  double lin = (z1 + z2).dot(c);
  return 2.0 * cross + quad + lin + k;
}

}  // namespace

std::pair<double, double> ConditionedAlphaBeta(const MetaCalibration &mc,
                                               const Vector &z1,
                                               const Vector &z2) {
  if (z1.size() != mc.c_a.size() || z2.size() != mc.c_a.size())
    throw ValidationError("ConditionedAlphaBeta: metadata dimension mismatch");
  return {SymmetricForm(z1, z2, mc.lambda_a, mc.gamma_a, mc.c_a, mc.k_a),
          SymmetricForm(z1, z2, mc.lambda_b, mc.gamma_b, mc.c_b, mc.k_b)};
}

}  // namespace dplda
