// include/dplda/trainer.h

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

#ifndef DPLDA_TRAINER_H_
#define DPLDA_TRAINER_H_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dplda/adam.h"
#include "dplda/backend_model.h"
#include "dplda/metrics.h"

namespace dplda {

// One in-batch trial between batch rows `a` and `b`.
struct BatchTrial {
  int a;
  int b;
  bool target;
};

struct Minibatch {
  std::vector<std::size_t> segments;  // dataset indices, 2 per speaker
  std::vector<BatchTrial> trials;
};

enum class SpeakerSampling {
  kUniform,          // N distinct speakers from the whole pool
  kDomainBalanced,   // round-robin over domains
};

// Speakers eligible for minibatches (two or more sessions), grouped for both
// sampling schemes.
class SpeakerPool {
 public:
  explicit SpeakerPool(const Dataset &dataset);

  std::size_t NumSpeakers() const { return speakers_.size(); }
  std::size_t NumDomains() const { return by_domain_.size(); }

  // N distinct speakers, two distinct segments each; all in-batch pairs
  // except same-session targets and cross-domain impostors.
  Minibatch Sample(int n_speakers, SpeakerSampling sampling,
                   std::mt19937_64 &rng) const;

 private:
  const Dataset *dataset_;
  std::vector<std::vector<std::size_t>> speakers_;  // segment indices
  std::vector<std::vector<std::size_t>> by_domain_;  // speaker indices
};

// Convenience wrapper over SpeakerPool for a single uniform batch.
Minibatch SampleMinibatch(const Dataset &dataset, int n_speakers,
                          std::mt19937_64 &rng);

// The inputs of one loss evaluation. Bottlenecks come from the frozen
// condition net and may be left empty in global mode.
struct BatchData {
  Matrix embeddings;   // rows: x
  Matrix bottlenecks;  // rows: m
  std::vector<BatchTrial> trials;
};

BatchData MakeBatchData(const Dataset &dataset, const Matrix &bottlenecks,
                        const Minibatch &batch);

// Prior-weighted cross-entropy (nats) of the full pipeline on the batch.
// Throws ValidationError if either class is absent.
double BatchLoss(const BackendModel &model, const BatchData &batch,
                 double prior);

struct GradientResult {
  double loss;
  BackendParams grads;  // symmetric tensors carry symmetrized gradients
};

// Analytic gradients of BatchLoss with respect to every parameter in
// ParamTensors (non-trainable ones come back zero). Returns nullopt, with a
// warning, when the batch lacks targets or impostors.
std::optional<GradientResult> Backward(const BackendModel &model,
                                       const BatchData &batch, double prior);

struct TrainConfig {
  int n_speakers_per_batch = 64;
  double prior = 0.5;
  AdamOptions adam;
  int stage1_steps = 2000;
  int stage2_steps = 1000;
  std::uint64_t seed = 0;
  double lr_stage1 = 1e-4;  // every parameter in stage 1
  double lr_stage2 = 1e-3;  // calibration head in stage 2
  int dev_eval_every = 100;
};

struct DevSet {
  Dataset data;
  TrialSet trials;
};

struct DevScore {
  double actual_cllr = 0.0;
  double min_cllr = 0.0;
};

// Mean over domains of per-domain Cllr on within-domain labelled trials.
DevScore EvaluateDev(const BackendModel &model, const DevSet &dev);

struct TrainLogEntry {
  int step = 0;
  int stage = 0;
  std::optional<double> loss;
  std::optional<DevScore> dev;
};

struct TrainReport {
  std::vector<TrainLogEntry> log;
  int skipped_batches = 0;
  int best_step_stage1 = 0;
  int best_step_stage2 = 0;
  DevScore dev_after_stage1;
  DevScore dev_after_stage2;
  // Parameter ranges observed on the final model, for the record.
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  // The stage-1 dev-best parameters that stage 2 started from.
  BackendParams stage1_params;

  // One JSON object per line: {"step", "stage", "loss", "dev_actual_cllr",
  // "dev_min_cllr"} with absent fields omitted.
  std::string ToJsonLines() const;
};

// Two-stage discriminative training. Stage 1 updates every trainable
// parameter on uniformly sampled speakers; stage 2 starts from the stage-1
// dev-best checkpoint, freezes projection and score form, and trains the
// calibration head on domain-balanced batches. Returns the dev-best model.
BackendModel Train(const BackendModel &init, const Dataset &train,
                   const DevSet &dev, const TrainConfig &config,
                   TrainReport *report = nullptr);

struct MultiseedResult {
  BackendModel best;
  int best_index = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> dev_actual_cllr;
  std::vector<BackendModel> models;
  std::vector<TrainReport> reports;

  double DevSpread() const;
};

// initialize + train with seeds config.seed .. config.seed + k - 1; picks the
// lowest dev actual Cllr (first on ties).
MultiseedResult MultiseedTrain(int k, const TrainConfig &config,
                               const InitConfig &init, const Dataset &train,
                               const DevSet &dev, const ConditionNet &cnet);

}  // namespace dplda

#endif  // DPLDA_TRAINER_H_
