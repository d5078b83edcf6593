// include/dplda/backend_model.h

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

#ifndef DPLDA_BACKEND_MODEL_H_
#define DPLDA_BACKEND_MODEL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dplda/calibration.h"
#include "dplda/condition_net.h"
#include "dplda/data_model.h"
#include "dplda/lda.h"
#include "dplda/plda.h"

namespace dplda {

enum class CalibrationMode { kGlobal, kMeta };

const char *CalibrationModeName(CalibrationMode mode);
CalibrationMode ParseCalibrationMode(const std::string &name);

// Every parameter the discriminative trainer can touch. Gradients use the
// same type.
struct BackendParams {
  Projection proj;
  ScoreForm sf;
  MetaCalibration meta;
};

struct BackendModel {
  BackendParams params;
  ConditionNet cnet;  // frozen
  CalibrationMode mode = CalibrationMode::kMeta;
};

enum class ParamGroup { kScorePath, kCalibrationHead };

// A named, shape-tagged view of one parameter tensor (column-major data).
struct TensorView {
  std::string name;
  double *data;
  long rows;
  long cols;
  bool symmetric;
  ParamGroup group;

  std::size_t size() const { return static_cast<std::size_t>(rows * cols); }
};

// All fifteen tensors of `params`, in a fixed order.
std::vector<TensorView> ParamTensors(BackendParams &params);

// The subset updated by the trainer for the given mode: in global mode only
// the score path plus k_a and k_b; gamma_a/gamma_b only when use_gamma.
bool IsTrainable(const TensorView &t, CalibrationMode mode, bool use_gamma);

// Zero-valued parameters with the shapes of `like`.
BackendParams ZerosLike(const BackendParams &like);

// Per-segment quantities that do not depend on the trial.
struct SegmentFeatures {
  Matrix normalized;  // rows: Norm(P x + mu)
  Matrix metadata;    // rows: z (empty in global mode)
};

SegmentFeatures ComputeSegmentFeatures(const BackendModel &model,
                                       const Dataset &dataset);

// Raw score and calibrated LLR of segments a and b.
std::pair<double, double> ScorePair(const BackendModel &model,
                                    const SegmentFeatures &features,
                                    std::size_t a, std::size_t b);

ScoreSet ScoreTrials(const BackendModel &model, const Dataset &dataset,
                     const TrialSet &trials);

struct InitConfig {
  int lda_dim = 20;
  int plda_iters = 50;
  double prior = 0.5;
  bool use_gamma = false;
  CalibrationMode mode = CalibrationMode::kMeta;
  // Empty: calibrate on all training domains.
  std::string calibration_domain;
  // Segments drawn (without replacement) to build calibration trials.
  int max_calibration_segments = 2000;
  double w_init_std = 0.5;
  std::uint64_t seed = 0;
};

// Standard generative backend: LDA, length normalization, EM-trained PLDA
// converted to the pairwise score form, and a global calibration stored as
// (k_a, k_b) with the rest of the metadata head zero and W ~ N(0, std^2).
// Single-session speakers are dropped first.
BackendModel InitializeBackend(const Dataset &train, const ConditionNet &cnet,
                               const InitConfig &config);

}  // namespace dplda

#endif  // DPLDA_BACKEND_MODEL_H_
