// src/backend_model.cc

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

#include "dplda/backend_model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <tuple>

#include "dplda/errors.h"

namespace dplda {

const char *CalibrationModeName(CalibrationMode mode) {
  return mode == CalibrationMode::kGlobal ? "global_cal" : "meta_cal";
}

CalibrationMode ParseCalibrationMode(const std::string &name) {
  if (name == "global_cal" || name == "global") return CalibrationMode::kGlobal;
  if (name == "meta_cal" || name == "meta") return CalibrationMode::kMeta;
  throw ValidationError("unknown calibration mode '" + name +
                        "' (expected global_cal or meta_cal)");
}

namespace {

TensorView View(std::string name, Matrix &m, bool symmetric, ParamGroup g) {
  return {std::move(name), m.data(), static_cast<long>(m.rows()),
          static_cast<long>(m.cols()), symmetric, g};
}
TensorView View(std::string name, Vector &v, ParamGroup g) {
  return {std::move(name), v.data(), static_cast<long>(v.size()), 1, false, g};
}
TensorView View(std::string name, double &x, ParamGroup g) {
  return {std::move(name), &x, 1, 1, false, g};
}

}  // namespace

std::vector<TensorView> ParamTensors(BackendParams &p) {
  const auto sp = ParamGroup::kScorePath, ch = ParamGroup::kCalibrationHead;
  return {View("proj.P", p.proj.P, false, sp),
          View("proj.mu", p.proj.mu, sp),
          View("sf.lambda", p.sf.lambda, true, sp),
          View("sf.gamma", p.sf.gamma, true, sp),
          View("sf.c", p.sf.c, sp),
          View("sf.k", p.sf.k, sp),
          View("meta.W", p.meta.w, false, ch),
          View("meta.lambda_a", p.meta.lambda_a, true, ch),
          View("meta.gamma_a", p.meta.gamma_a, true, ch),
          View("meta.c_a", p.meta.c_a, ch),
          View("meta.k_a", p.meta.k_a, ch),
          View("meta.lambda_b", p.meta.lambda_b, true, ch),
          View("meta.gamma_b", p.meta.gamma_b, true, ch),
          View("meta.c_b", p.meta.c_b, ch),
          View("meta.k_b", p.meta.k_b, ch)};
}

bool IsTrainable(const TensorView &t, CalibrationMode mode, bool use_gamma) {
  if (t.group == ParamGroup::kScorePath) return true;
  if (mode == CalibrationMode::kGlobal)
    return t.name == "meta.k_a" || t.name == "meta.k_b";
  if (t.name == "meta.gamma_a" || t.name == "meta.gamma_b") return use_gamma;
  return true;
}

BackendParams ZerosLike(const BackendParams &like) {
  BackendParams z = like;
  for (TensorView &t : ParamTensors(z)) std::fill_n(t.data, t.size(), 0.0);
  return z;
}

SegmentFeatures ComputeSegmentFeatures(const BackendModel &model,
                                       const Dataset &dataset) {
  if (dataset.Dim() != model.params.proj.InputDim())
    throw ValidationError("dataset dimension " + std::to_string(dataset.Dim()) +
                          " does not match model input dimension " +
                          std::to_string(model.params.proj.InputDim()));
  SegmentFeatures f;
  f.normalized.resize(dataset.Size(), model.params.proj.OutputDim());
  for (std::size_t i = 0; i < dataset.Size(); ++i)
    f.normalized.row(i) = ProjectNormalize(dataset[i].embedding,
                                           model.params.proj,
                                           dataset[i].segment_id)
                              .transpose();
  if (model.mode == CalibrationMode::kMeta) {
    Matrix m = BottleneckRows(model.cnet, dataset.EmbeddingMatrix());
    f.metadata.resize(dataset.Size(), kMetadataDim);
    for (std::size_t i = 0; i < dataset.Size(); ++i)
      f.metadata.row(i) =
          MetadataVector(model.params.meta, m.row(i).transpose()).transpose();
  }
  return f;
}

std::pair<double, double> ScorePair(const BackendModel &model,
                                    const SegmentFeatures &f, std::size_t a,
                                    std::size_t b) {
  double raw = ScoreTrial(f.normalized.row(a).transpose(),
                          f.normalized.row(b).transpose(), model.params.sf);
  double alpha = model.params.meta.k_a, beta = model.params.meta.k_b;
  if (model.mode == CalibrationMode::kMeta)
    std::tie(alpha, beta) =
        ConditionedAlphaBeta(model.params.meta, f.metadata.row(a).transpose(),
                             f.metadata.row(b).transpose());
  return {raw, Calibrate(raw, alpha, beta)};
}

ScoreSet ScoreTrials(const BackendModel &model, const Dataset &dataset,
                     const TrialSet &trials) {
  SegmentFeatures f = ComputeSegmentFeatures(model, dataset);
  ScoreSet out;
  out.trials = trials;
  out.raw_score.reserve(trials.size());
  out.llr.reserve(trials.size());
  for (const Trial &t : trials) {
    if (t.enroll_id == t.test_id)
      throw ValidationError("trial with identical enroll and test id '" +
                            t.enroll_id + "'");
    auto [raw, llr] =
        ScorePair(model, f, dataset.IndexOf(t.enroll_id), dataset.IndexOf(t.test_id));
    if (!std::isfinite(raw) || !std::isfinite(llr))
      throw RuntimeError("non-finite score for trial " + t.enroll_id + " " +
                         t.test_id);
    out.raw_score.push_back(raw);
    out.llr.push_back(llr);
  }
  return out;
}

BackendModel InitializeBackend(const Dataset &train_in, const ConditionNet &cnet,
                               const InitConfig &config) {
  Dataset train = FilterMultiSessionSpeakers(train_in);
  if (train.Size() < train_in.Size())
    Warn("initialize: dropped " + std::to_string(train_in.Size() - train.Size()) +
         " segments of single-session speakers");
  if (train.Empty())
    throw ValidationError("initialize: no speaker has two or more sessions");
  if (config.mode == CalibrationMode::kMeta && cnet.InputDim() != train.Dim())
    throw ValidationError("initialize: condition net input dimension " +
                          std::to_string(cnet.InputDim()) +
                          " does not match embeddings (" +
                          std::to_string(train.Dim()) + ")");

  BackendModel model;
  model.mode = config.mode;
  model.cnet = cnet;
  model.params.proj = TrainLda(train, config.lda_dim);

  Matrix normalized = ProjectNormalizeRows(train.EmbeddingMatrix(), model.params.proj);
  std::vector<std::string> speakers(train.Size());
  for (std::size_t i = 0; i < train.Size(); ++i) speakers[i] = train[i].speaker_id;
  GaussianPlda plda = TrainPldaEm(normalized, speakers, config.plda_iters);
  model.params.sf = ToScoreForm(plda);

  // Calibration trials follow the minibatch exclusions: no same-session
  // targets, no cross-domain impostors.
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < train.Size(); ++i)
    if (config.calibration_domain.empty() ||
        train[i].domain == config.calibration_domain)
      pool.push_back(i);
  if (pool.empty())
    throw ValidationError("initialize: no training segments in calibration domain '" +
                          config.calibration_domain + "'");
  if (pool.size() > static_cast<std::size_t>(config.max_calibration_segments)) {
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(config.max_calibration_segments);
    std::sort(pool.begin(), pool.end());
  }
  ClassScores cal_scores;
  for (std::size_t a = 0; a < pool.size(); ++a) {
    const SegmentRecord &ra = train[pool[a]];
    for (std::size_t b = a + 1; b < pool.size(); ++b) {
      const SegmentRecord &rb = train[pool[b]];
      bool target = ra.speaker_id == rb.speaker_id;
      if (target && ra.session_id == rb.session_id) continue;
      if (!target && ra.domain != rb.domain) continue;
      double s = ScoreTrial(normalized.row(pool[a]).transpose(),
                            normalized.row(pool[b]).transpose(), model.params.sf);
      (target ? cal_scores.target : cal_scores.impostor).push_back(s);
    }
  }
  GlobalCalibration global = TrainGlobalCalibration(cal_scores, config.prior);

  model.params.meta =
      MakeMetaCalibration(cnet.BottleneckDim(), global, config.use_gamma);
  std::normal_distribution<double> normal(0.0, config.w_init_std);
  std::mt19937_64 w_rng(config.seed ^ 0x5bd1e9955bd1e995ULL);
  for (Eigen::Index i = 0; i < model.params.meta.w.size(); ++i)
    model.params.meta.w.data()[i] = normal(w_rng);
  return model;
}

}  // namespace dplda
