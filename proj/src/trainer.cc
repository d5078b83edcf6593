// src/trainer.cc

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

#include "dplda/trainer.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "dplda/errors.h"
#include "dplda/linalg.h"

namespace dplda {

// ---------------------------------------------------------------------------
// Minibatch construction

SpeakerPool::SpeakerPool(const Dataset &dataset) : dataset_(&dataset) {
  std::map<std::string, std::vector<std::size_t>> segs;
  std::map<std::string, std::set<std::string>> sessions;
  std::map<std::string, std::string> domain_of;
  for (std::size_t i = 0; i < dataset.Size(); ++i) {
    segs[dataset[i].speaker_id].push_back(i);
    sessions[dataset[i].speaker_id].insert(dataset[i].session_id);
    domain_of.emplace(dataset[i].speaker_id, dataset[i].domain);
  }
  std::map<std::string, std::vector<std::size_t>> domains;
  for (auto &[spk, idx] : segs) {
    if (sessions[spk].size() < 2) continue;
    domains[domain_of[spk]].push_back(speakers_.size());
    speakers_.push_back(std::move(idx));
  }
  for (auto &[name, spk] : domains) by_domain_.push_back(std::move(spk));
}

namespace {

// k distinct draws from [0, n) by a partial Fisher-Yates shuffle.
std::vector<std::size_t> DrawDistinct(std::size_t n, std::size_t k,
                                      std::mt19937_64 &rng) {
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(k);
  return all;
}

}  // namespace

Minibatch SpeakerPool::Sample(int n_speakers, SpeakerSampling sampling,
                              std::mt19937_64 &rng) const {
  if (n_speakers < 2) throw ValidationError("minibatch: N must be >= 2");
  const std::size_t n = static_cast<std::size_t>(n_speakers);
  std::vector<std::size_t> chosen;
  if (sampling == SpeakerSampling::kUniform) {
    if (speakers_.size() < n)
      throw ValidationError("minibatch: " + std::to_string(n) +
                            " speakers requested but only " +
                            std::to_string(speakers_.size()) +
                            " have two or more sessions");
    chosen = DrawDistinct(speakers_.size(), n, rng);
  } else {
    const std::size_t nd = by_domain_.size();
    std::uniform_int_distribution<std::size_t> start_dist(0, nd - 1);
    std::size_t start = start_dist(rng);
    std::vector<std::size_t> per_domain(nd, 0);
    for (std::size_t k = 0; k < n; ++k) per_domain[(start + k) % nd]++;
    for (std::size_t d = 0; d < nd; ++d) {
      if (by_domain_[d].size() < per_domain[d])
        throw ValidationError("minibatch: domain has " +
                              std::to_string(by_domain_[d].size()) +
                              " eligible speakers, balanced batch needs " +
                              std::to_string(per_domain[d]));
      for (std::size_t j : DrawDistinct(by_domain_[d].size(), per_domain[d], rng))
        chosen.push_back(by_domain_[d][j]);
    }
  }

  Minibatch batch;
  for (std::size_t spk : chosen) {
    const auto &segs = speakers_[spk];
    auto two = DrawDistinct(segs.size(), 2, rng);
    batch.segments.push_back(segs[two[0]]);
    batch.segments.push_back(segs[two[1]]);
  }
  const Dataset &ds = *dataset_;
  for (std::size_t a = 0; a < batch.segments.size(); ++a) {
    const SegmentRecord &ra = ds[batch.segments[a]];
    for (std::size_t b = a + 1; b < batch.segments.size(); ++b) {
      const SegmentRecord &rb = ds[batch.segments[b]];
      bool target = ra.speaker_id == rb.speaker_id;
      if (target && ra.session_id == rb.session_id) continue;
      if (!target && ra.domain != rb.domain) continue;
      batch.trials.push_back({static_cast<int>(a), static_cast<int>(b), target});
    }
  }
  return batch;
}

Minibatch SampleMinibatch(const Dataset &dataset, int n_speakers,
                          std::mt19937_64 &rng) {
  return SpeakerPool(dataset).Sample(n_speakers, SpeakerSampling::kUniform, rng);
}

BatchData MakeBatchData(const Dataset &dataset, const Matrix &bottlenecks,
                        const Minibatch &batch) {
  BatchData data;
  data.embeddings.resize(batch.segments.size(), dataset.Dim());
  if (bottlenecks.size() > 0)
    data.bottlenecks.resize(batch.segments.size(), bottlenecks.cols());
  for (std::size_t i = 0; i < batch.segments.size(); ++i) {
    data.embeddings.row(i) = dataset[batch.segments[i]].embedding.transpose();
    if (bottlenecks.size() > 0)
      data.bottlenecks.row(i) = bottlenecks.row(batch.segments[i]);
  }
  data.trials = batch.trials;
  return data;
}

// ---------------------------------------------------------------------------
// Loss and gradients

namespace {

struct ForwardState {
  Matrix projected;   // P x + mu
  Vector norms;
  Matrix normalized;  // x~
  Matrix logits;      // W m
  Matrix metadata;    // z
  Matrix cross;       // x~_a' Lambda x~_b for all rows
  Vector quad, lin;
  Matrix cross_a, cross_b;
  Vector quad_a, lin_a, quad_b, lin_b;
  std::vector<double> score, alpha, beta, llr;
  double loss = 0.0;
  std::size_t n_target = 0, n_impostor = 0;
};

ForwardState Forward(const BackendModel &model, const BatchData &batch,
                     double prior) {
  const BackendParams &p = model.params;
  ForwardState f;
  for (const BatchTrial &t : batch.trials) (t.target ? f.n_target : f.n_impostor)++;
  if (f.n_target == 0 || f.n_impostor == 0) return f;

  f.projected = (batch.embeddings * p.proj.P.transpose()).rowwise() +
                p.proj.mu.transpose();
  f.norms = f.projected.rowwise().norm();
  f.normalized = f.norms.cwiseInverse().asDiagonal() * f.projected;
  f.cross = f.normalized * p.sf.lambda * f.normalized.transpose();
  f.quad = (f.normalized * p.sf.gamma).cwiseProduct(f.normalized).rowwise().sum();
  f.lin = f.normalized * p.sf.c;

  const bool meta = model.mode == CalibrationMode::kMeta;
  if (meta) {
    f.logits = batch.bottlenecks * p.meta.w.transpose();
    f.metadata.resize(f.logits.rows(), f.logits.cols());
    for (Eigen::Index i = 0; i < f.logits.rows(); ++i) {
      double mx = f.logits.row(i).maxCoeff();
      double lse = mx + std::log((f.logits.row(i).array() - mx).exp().sum());
      f.metadata.row(i) = f.logits.row(i).array() - lse;
    }
    const Matrix &z = f.metadata;
    f.cross_a = z * p.meta.lambda_a * z.transpose();
    f.quad_a = (z * p.meta.gamma_a).cwiseProduct(z).rowwise().sum();
    f.lin_a = z * p.meta.c_a;
    f.cross_b = z * p.meta.lambda_b * z.transpose();
    f.quad_b = (z * p.meta.gamma_b).cwiseProduct(z).rowwise().sum();
    f.lin_b = z * p.meta.c_b;
  }

  const double offset = Logit(prior);
  const double w_tgt = prior / f.n_target, w_imp = (1.0 - prior) / f.n_impostor;
  for (const BatchTrial &t : batch.trials) {
    const int a = t.a, b = t.b;
    double s = 2.0 * f.cross(a, b) + f.quad[a] + f.quad[b] + f.lin[a] + f.lin[b] +
               p.sf.k;
    double alpha = p.meta.k_a, beta = p.meta.k_b;
    if (meta) {
      alpha = 2.0 * f.cross_a(a, b) + f.quad_a[a] + f.quad_a[b] + f.lin_a[a] +
              f.lin_a[b] + p.meta.k_a;
      beta = 2.0 * f.cross_b(a, b) + f.quad_b[a] + f.quad_b[b] + f.lin_b[a] +
             f.lin_b[b] + p.meta.k_b;
    }
    double l = alpha * s + beta;
    f.score.push_back(s);
    f.alpha.push_back(alpha);
    f.beta.push_back(beta);
    f.llr.push_back(l);
    f.loss += t.target ? w_tgt * Softplus(-(l + offset)) : w_imp * Softplus(l + offset);
  }
  return f;
}

// Gradients of sum_t g_t * (2 u_a' L u_b + u_a' G u_a + u_b' G u_b +
// (u_a + u_b)' c + k) with respect to (L, G, c, k, U), given the symmetric
// pair-weight matrix S (S_ab = S_ba = g_t) and its row sums e.
void PairFormBackward(const Matrix &u, const Matrix &pair_weights,
                      const Vector &row_sums, const Matrix &lambda,
                      const Matrix &gamma, const Vector &c, Matrix *d_lambda,
                      Matrix *d_gamma, Vector *d_c, double *d_k, Matrix *d_u) {
  // Rounding leaves the products slightly asymmetric; averaging with the
  // transpose makes them exactly symmetric, which keeps the parameters so.
  *d_lambda += Symmetrized(u.transpose() * pair_weights * u);
  *d_gamma += Symmetrized(u.transpose() * row_sums.asDiagonal() * u);
  *d_c += u.transpose() * row_sums;
  *d_k += 0.5 * row_sums.sum();
  *d_u += pair_weights * u * (lambda + lambda.transpose()) +
          row_sums.asDiagonal() * u * (gamma + gamma.transpose()) +
          row_sums * c.transpose();
}

}  // namespace

double BatchLoss(const BackendModel &model, const BatchData &batch,
                 double prior) {
  ForwardState f = Forward(model, batch, prior);
  if (f.n_target == 0 || f.n_impostor == 0)
    throw ValidationError("BatchLoss: batch needs both target and impostor trials");
  return f.loss;
}

std::optional<GradientResult> Backward(const BackendModel &model,
                                       const BatchData &batch, double prior) {
  ForwardState f = Forward(model, batch, prior);
  if (f.n_target == 0 || f.n_impostor == 0) {
    Warn("skipping minibatch without " +
         std::string(f.n_target == 0 ? "target" : "impostor") + " trials");
    return std::nullopt;
  }
  const BackendParams &p = model.params;
  const bool meta = model.mode == CalibrationMode::kMeta;
  GradientResult out{f.loss, ZerosLike(p)};
  BackendParams &g = out.grads;

  const Eigen::Index n = batch.embeddings.rows();
  Matrix s_w = Matrix::Zero(n, n), a_w = Matrix::Zero(n, n), b_w = Matrix::Zero(n, n);
  const double offset = Logit(prior);
  const double w_tgt = prior / f.n_target, w_imp = (1.0 - prior) / f.n_impostor;
  double d_alpha_total = 0.0, d_beta_total = 0.0;
  for (std::size_t i = 0; i < batch.trials.size(); ++i) {
    const BatchTrial &t = batch.trials[i];
    double q = 1.0 / (1.0 + std::exp(-(f.llr[i] + offset)));
    double dl = t.target ? w_tgt * (q - 1.0) : w_imp * q;
    double ds = dl * f.alpha[i], da = dl * f.score[i], db = dl;
    s_w(t.a, t.b) += ds;
    s_w(t.b, t.a) += ds;
    a_w(t.a, t.b) += da;
    a_w(t.b, t.a) += da;
    b_w(t.a, t.b) += db;
    b_w(t.b, t.a) += db;
    d_alpha_total += da;
    d_beta_total += db;
  }

  // Score form and the normalized vectors.
  Matrix d_norm = Matrix::Zero(n, p.sf.Dim());
  Vector s_rows = s_w.rowwise().sum();
  PairFormBackward(f.normalized, s_w, s_rows, p.sf.lambda, p.sf.gamma, p.sf.c,
                   &g.sf.lambda, &g.sf.gamma, &g.sf.c, &g.sf.k, &d_norm);

  // Through Norm(v) = v / |v|: dv = (I - v~ v~') dv~ / |v|.
  Vector along = d_norm.cwiseProduct(f.normalized).rowwise().sum();
  Matrix d_proj = (d_norm - along.asDiagonal() * f.normalized);
  d_proj = f.norms.cwiseInverse().asDiagonal() * d_proj;
  g.proj.P = d_proj.transpose() * batch.embeddings;
  g.proj.mu = d_proj.colwise().sum().transpose();

  if (!meta) {
    g.meta.k_a = d_alpha_total;
    g.meta.k_b = d_beta_total;
    return out;
  }

  Matrix d_z = Matrix::Zero(n, kMetadataDim);
  PairFormBackward(f.metadata, a_w, a_w.rowwise().sum(), p.meta.lambda_a,
                   p.meta.gamma_a, p.meta.c_a, &g.meta.lambda_a, &g.meta.gamma_a,
                   &g.meta.c_a, &g.meta.k_a, &d_z);
  PairFormBackward(f.metadata, b_w, b_w.rowwise().sum(), p.meta.lambda_b,
                   p.meta.gamma_b, p.meta.c_b, &g.meta.lambda_b, &g.meta.gamma_b,
                   &g.meta.c_b, &g.meta.k_b, &d_z);
  if (!p.meta.use_gamma) {
    g.meta.gamma_a.setZero();
    g.meta.gamma_b.setZero();
  }
  // log-softmax: du = dz - softmax(u) * sum(dz).
  Matrix soft = f.metadata.array().exp();
  Vector dz_sum = d_z.rowwise().sum();
  Matrix d_logits = d_z - dz_sum.asDiagonal() * soft;
  g.meta.w = d_logits.transpose() * batch.bottlenecks;
  return out;
}

// ---------------------------------------------------------------------------
// Training loop

DevScore EvaluateDev(const BackendModel &model, const DevSet &dev) {
  ScoreSet scores = ScoreTrials(model, dev.data, dev.trials);
  std::map<std::string, ClassScores> by_domain;
  for (std::size_t i = 0; i < dev.trials.size(); ++i) {
    const Trial &t = dev.trials[i];
    if (!t.label) continue;
    const std::string &da = dev.data[dev.data.IndexOf(t.enroll_id)].domain;
    const std::string &db = dev.data[dev.data.IndexOf(t.test_id)].domain;
    if (da != db) continue;
    ClassScores &cs = by_domain[da];
    (*t.label == TrialLabel::kTarget ? cs.target : cs.impostor).push_back(scores.llr[i]);
  }
  DevScore out;
  int used = 0;
  for (const auto &[domain, cs] : by_domain) {
    if (cs.target.empty() || cs.impostor.empty()) continue;
    EvalReport r = Evaluate(cs);
    out.actual_cllr += r.actual_cllr;
    out.min_cllr += r.min_cllr;
    ++used;
  }
  if (used == 0)
    throw ValidationError("dev set has no domain with both target and impostor trials");
  out.actual_cllr /= used;
  out.min_cllr /= used;
  return out;
}

std::string TrainReport::ToJsonLines() const {
  std::ostringstream os;
  for (const TrainLogEntry &e : log) {
    nlohmann::ordered_json j;
    j["step"] = e.step;
    j["stage"] = e.stage;
    if (e.loss) j["loss"] = *e.loss;
    if (e.dev) {
      j["dev_actual_cllr"] = e.dev->actual_cllr;
      j["dev_min_cllr"] = e.dev->min_cllr;
    }
    os << j.dump() << '\n';
  }
  return os.str();
}

namespace {

void CheckDisjointSpeakers(const Dataset &train, const Dataset &dev) {
  std::vector<std::string> a = train.Speakers(), b = dev.Speakers(), common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(common));
  if (!common.empty())
    throw ValidationError("dev set shares " + std::to_string(common.size()) +
                          " speaker(s) with the training set, e.g. '" +
                          common.front() + "'");
}

struct StageResult {
  BackendModel best;
  DevScore best_dev;
  int best_step = 0;
};

StageResult RunStage(const BackendModel &start, int stage, int steps,
                     const Dataset &train, const Matrix &bottlenecks,
                     const SpeakerPool &pool, const DevSet &dev,
                     const TrainConfig &config, std::mt19937_64 &rng,
                     int step_offset, TrainReport &report) {
  BackendModel model = start;
  StageResult result{start, EvaluateDev(start, dev), step_offset};
  report.log.push_back({step_offset, stage, std::nullopt, result.best_dev});

  Adam adam(config.adam);
  std::vector<std::size_t> slots;
  std::vector<bool> active;
  std::vector<double> rates;
  for (const TensorView &t : ParamTensors(model.params)) {
    bool trainable = IsTrainable(t, model.mode, model.params.meta.use_gamma);
    if (stage == 2 && t.group == ParamGroup::kScorePath) trainable = false;
    active.push_back(trainable);
    rates.push_back(stage == 1 ? config.lr_stage1 : config.lr_stage2);
    slots.push_back(adam.AddSlot(t.size()));
  }
  const SpeakerSampling sampling =
      stage == 1 ? SpeakerSampling::kUniform : SpeakerSampling::kDomainBalanced;

  for (int s = 1; s <= steps; ++s) {
    const int step = step_offset + s;
    Minibatch mb = pool.Sample(config.n_speakers_per_batch, sampling, rng);
    BatchData data = MakeBatchData(train, bottlenecks, mb);
    std::optional<GradientResult> gr = Backward(model, data, config.prior);
    if (!gr) {
      ++report.skipped_batches;
    } else {
      adam.BeginStep();
      auto params = ParamTensors(model.params);
      auto grads = ParamTensors(gr->grads);
      for (std::size_t t = 0; t < params.size(); ++t) {
        if (!active[t]) continue;
        adam.Update(slots[t], {params[t].data, params[t].size()},
                    {grads[t].data, grads[t].size()}, rates[t]);
      }
    }
    TrainLogEntry entry{step, stage, std::nullopt, std::nullopt};
    if (gr) entry.loss = gr->loss;
    if (s % config.dev_eval_every == 0 || s == steps) {
      DevScore d = EvaluateDev(model, dev);
      entry.dev = d;
      if (d.actual_cllr < result.best_dev.actual_cllr) {
        result.best = model;
        result.best_dev = d;
        result.best_step = step;
      }
    }
    report.log.push_back(entry);
  }
  return result;
}

}  // namespace

BackendModel Train(const BackendModel &init, const Dataset &train,
                   const DevSet &dev, const TrainConfig &config,
                   TrainReport *report_out) {
  if (config.n_speakers_per_batch < 2)
    throw ValidationError("TrainConfig: n_speakers_per_batch must be >= 2");
  if (!(config.lr_stage1 > 0.0) || !(config.lr_stage2 > 0.0))
    throw ValidationError("TrainConfig: learning rates must be positive");
  if (config.stage1_steps < 0 || config.stage2_steps < 0 ||
      config.dev_eval_every <= 0)
    throw ValidationError("TrainConfig: step counts must be non-negative");
  CheckDisjointSpeakers(train, dev.data);

  TrainReport local;
  TrainReport &report = report_out ? *report_out : local;
  report = TrainReport{};

  Matrix bottlenecks;
  if (init.mode == CalibrationMode::kMeta)
    bottlenecks = BottleneckRows(init.cnet, train.EmbeddingMatrix());
  SpeakerPool pool(train);
  std::mt19937_64 rng(config.seed);

  StageResult s1 = RunStage(init, 1, config.stage1_steps, train, bottlenecks,
                            pool, dev, config, rng, 0, report);
  report.best_step_stage1 = s1.best_step;
  report.dev_after_stage1 = s1.best_dev;
  report.stage1_params = s1.best.params;

  StageResult s2 = RunStage(s1.best, 2, config.stage2_steps, train, bottlenecks,
                            pool, dev, config, rng, config.stage1_steps, report);
  report.best_step_stage2 = s2.best_step;
  report.dev_after_stage2 = s2.best_dev;

  // Observed range of the trial-dependent scale on the dev set.
  if (!dev.data.Empty()) {
    SegmentFeatures f = ComputeSegmentFeatures(s2.best, dev.data);
    double lo = s2.best.params.meta.k_a, hi = lo;
    if (s2.best.mode == CalibrationMode::kMeta) {
      lo = 1e300, hi = -1e300;
      for (const Trial &t : dev.trials) {
        double a = ConditionedAlphaBeta(
                       s2.best.params.meta,
                       f.metadata.row(dev.data.IndexOf(t.enroll_id)).transpose(),
                       f.metadata.row(dev.data.IndexOf(t.test_id)).transpose())
                       .first;
        lo = std::min(lo, a);
        hi = std::max(hi, a);
      }
    }
    report.alpha_min = lo;
    report.alpha_max = hi;
  }
  return s2.best;
}

double MultiseedResult::DevSpread() const {
  if (dev_actual_cllr.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(dev_actual_cllr.begin(), dev_actual_cllr.end());
  return *hi - *lo;
}

MultiseedResult MultiseedTrain(int k, const TrainConfig &config,
                               const InitConfig &init, const Dataset &train,
                               const DevSet &dev, const ConditionNet &cnet) {
  if (k < 1) throw ValidationError("multiseed: k must be >= 1");
  MultiseedResult out;
  for (int i = 0; i < k; ++i) {
    TrainConfig cfg = config;
    cfg.seed = config.seed + static_cast<std::uint64_t>(i);
    InitConfig ic = init;
    ic.seed = cfg.seed;
    BackendModel start = InitializeBackend(train, cnet, ic);
    TrainReport report;
    BackendModel model = Train(start, train, dev, cfg, &report);
    out.seeds.push_back(cfg.seed);
    out.dev_actual_cllr.push_back(report.dev_after_stage2.actual_cllr);
    out.models.push_back(std::move(model));
    out.reports.push_back(std::move(report));
  }
  out.best_index = static_cast<int>(
      std::min_element(out.dev_actual_cllr.begin(), out.dev_actual_cllr.end()) -
      out.dev_actual_cllr.begin());
  out.best = out.models[out.best_index];
  return out;
}

}  // namespace dplda
