// include/dplda/plda.h

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

#ifndef DPLDA_PLDA_H_
#define DPLDA_PLDA_H_

#include <string>
#include <vector>

#include "dplda/data_model.h"

namespace dplda {

// Two-covariance PLDA: x = mean + y + e, y ~ N(0, between),
// e ~ N(0, within).
struct GaussianPlda {
  Vector mean;
  Matrix between;
  Matrix within;

  int Dim() const { return static_cast<int>(mean.size()); }
};

// Pairwise score
//   s = 2 x1' Lambda x2 + x1' Gamma x1 + x2' Gamma x2 + (x1 + x2)' c + k.
struct ScoreForm {
  Matrix lambda;
  Matrix gamma;
  Vector c;
  double k = 0.0;

  int Dim() const { return static_cast<int>(c.size()); }
};

struct PldaTrainingStats {
  // Marginal log-likelihood of the training data before the first
  // iteration and after each one.
  std::vector<double> log_likelihood;
  int ridge_events = 0;
};

// EM training. Rows of `vectors` are the (normalized) training vectors and
// `speakers[i]` the speaker of row i. The mean is set once to the global
// mean; `iters` EM iterations then update between and within.
GaussianPlda TrainPldaEm(const Matrix &vectors,
                         const std::vector<std::string> &speakers, int iters,
                         PldaTrainingStats *stats = nullptr);

// Log p(data) with speaker latent variables integrated out.
double PldaLogLikelihood(const GaussianPlda &plda, const Matrix &vectors,
                         const std::vector<std::string> &speakers);

// Closed-form conversion to the pairwise score; the score is the exact
// same-speaker vs different-speaker log-likelihood ratio under `plda`.
ScoreForm ToScoreForm(const GaussianPlda &plda);

// Exactly symmetric under swapping x1 and x2.
double ScoreTrial(const Vector &x1, const Vector &x2, const ScoreForm &sf);

}  // namespace dplda

#endif  // DPLDA_PLDA_H_
