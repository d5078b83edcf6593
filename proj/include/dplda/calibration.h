// include/dplda/calibration.h

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

#ifndef DPLDA_CALIBRATION_H_
#define DPLDA_CALIBRATION_H_

#include <utility>

#include "dplda/data_model.h"

namespace dplda {

constexpr int kMetadataDim = 5;

struct GlobalCalibration {
  double alpha = 1.0;
  double beta = 0.0;
};

// Condition-dependent calibration head. The metadata vector of a segment is
// z = log softmax(W m); the scale and shift of a trial are quadratic forms
// in the two metadata vectors with the same shape as the PLDA score.
struct MetaCalibration {
  Matrix w;  // kMetadataDim x bottleneck dim
  Matrix lambda_a, gamma_a;
  Vector c_a;
  double k_a = 1.0;
  Matrix lambda_b, gamma_b;
  Vector c_b;
  double k_b = 0.0;
  // When false, gamma_a and gamma_b are held at exactly zero.
  bool use_gamma = false;
};

// All-zero head with k_a = alpha, k_b = beta and a zero W of the given
// bottleneck width.
MetaCalibration MakeMetaCalibration(int bottleneck_dim,
                                    const GlobalCalibration &global,
                                    bool use_gamma);

// Prior-weighted binary cross-entropy in nats, with q = sigmoid(l + logit
// prior) and class weights prior / #targets and (1 - prior) / #impostors.
double WeightedCrossEntropy(const ClassScores &llrs, double prior);

// Linear logistic regression: minimizes WeightedCrossEntropy of
// alpha * s + beta. Throws ValidationError if a class is empty.
GlobalCalibration TrainGlobalCalibration(const ClassScores &scores,
                                         double prior);

Vector MetadataVector(const MetaCalibration &mc, const Vector &bottleneck);

// (alpha, beta) for a trial; exactly symmetric in (z1, z2).
std::pair<double, double> ConditionedAlphaBeta(const MetaCalibration &mc,
                                               const Vector &z1,
                                               const Vector &z2);

inline double Calibrate(double raw_score, double alpha, double beta) {
  return alpha * raw_score + beta;
}

double Logit(double p);
// log(1 + exp(x)) without overflow.
double Softplus(double x);

}  // namespace dplda

#endif  // DPLDA_CALIBRATION_H_
