// include/dplda/metrics.h

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

#ifndef DPLDA_METRICS_H_
#define DPLDA_METRICS_H_

#include <cstddef>
#include <string>
#include <vector>

#include "dplda/data_model.h"

namespace dplda {

// Log-likelihood-ratio cost in bits:
//   1/(2 log 2) [mean_tgt log(1 + e^-l) + mean_imp log(1 + e^l)].
// Throws ValidationError if either class is empty.
double Cllr(const ClassScores &llrs);

// One pooled block of the isotonic fit, covering scores in [lower, upper].
struct PavBlock {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t targets = 0;
  std::size_t impostors = 0;
  double llr = 0.0;  // clamped to +-kPavLlrClamp
};

constexpr double kPavLlrClamp = 1e6;

// Optimal monotone recalibration found by pool-adjacent-violators.
struct PavResult {
  double min_cllr = 0.0;
  // Ascending in score and non-decreasing in llr.
  std::vector<PavBlock> blocks;

  // Step-function mapping: llr of the last block whose lower edge is <= s
  // (the first block for scores below every knot).
  double Map(double score) const;
};

PavResult PavMinCllr(const ClassScores &scores);

// Equal error rate on the ROC convex hull, linearly interpolated between
// hull vertices. A reversed system is reported by the min(e, 1 - e)
// convention, i.e. the better of the scores and their negation.
double Eer(const ClassScores &scores);

struct EvalReport {
  double actual_cllr = 0.0;
  double min_cllr = 0.0;
  double eer = 0.0;
  std::size_t n_target = 0;
  std::size_t n_impostor = 0;

  double CalibrationGap() const { return actual_cllr - min_cllr; }
};

// min_cllr is capped at actual_cllr: the identity map is itself monotone.
EvalReport Evaluate(const ClassScores &llrs);

// "actual_cllr\tmin_cllr\teer\tn_target\tn_impostor" header plus one row.
std::string EvalReportTsv(const EvalReport &report);

}  // namespace dplda

#endif  // DPLDA_METRICS_H_
