// src/plda.cc

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

#include "dplda/plda.h"

#include <cmath>
#include <map>
#include <numbers>

#include "dplda/errors.h"
#include "dplda/linalg.h"

namespace dplda {

namespace {

// Sufficient statistics of one speaker around the model mean.
struct SpeakerStats {
  int count = 0;
  Vector sum;      // sum_i (x_i - m)
  Matrix scatter;  // sum_i (x_i - m)(x_i - m)'
};

std::vector<SpeakerStats> GatherStats(const Matrix &vectors,
                                      const std::vector<std::string> &speakers,
                                      const Vector &mean) {
  if (static_cast<std::size_t>(vectors.rows()) != speakers.size())
    throw ValidationError("PLDA: one speaker label per vector required");
  std::map<std::string, std::vector<Eigen::Index>> groups;
  for (Eigen::Index i = 0; i < vectors.rows(); ++i)
    groups[speakers[i]].push_back(i);
  const Eigen::Index dim = vectors.cols();
  std::vector<SpeakerStats> stats;
  stats.reserve(groups.size());
  for (const auto &[spk, rows] : groups) {
    SpeakerStats s;
    s.count = static_cast<int>(rows.size());
    s.sum = Vector::Zero(dim);
    s.scatter = Matrix::Zero(dim, dim);
    for (Eigen::Index r : rows) {
      Vector d = vectors.row(r).transpose() - mean;
      s.sum += d;
      s.scatter.noalias() += d * d.transpose();
    }
    stats.push_back(std::move(s));
  }
  return stats;
}

// Floors a covariance relative to the scale of the total covariance, on top
// of the usual condition-number ridge.
bool FloorCovariance(Matrix *m, double total_scale, const std::string &what) {
  bool changed = RegularizeIfIllConditioned(m, what);
  Eigen::SelfAdjointEigenSolver<Matrix> es(*m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < 1e-10 * total_scale) {
    double ridge = 1e-6 * total_scale;
    m->diagonal().array() += ridge;
    Warn(what + " collapsed relative to the total covariance; added ridge " +
         std::to_string(ridge));
    changed = true;
  }
  return changed;
}

double LogLikelihoodFromStats(const GaussianPlda &plda,
                              const std::vector<SpeakerStats> &stats) {
  const int dim = plda.Dim();
  Matrix within_inv = InverseSpd(plda.within, "PLDA within covariance");
  Matrix between_inv = InverseSpd(plda.between, "PLDA between covariance");
  double logdet_w = LogDetSpd(plda.within, "PLDA within covariance");
  double logdet_b = LogDetSpd(plda.between, "PLDA between covariance");
  const double log2pi = std::log(2.0 * std::numbers::pi);

  std::map<int, std::pair<Eigen::LLT<Matrix>, double>> by_count;
  double total = 0.0;
  for (const SpeakerStats &s : stats) {
    auto it = by_count.find(s.count);
    if (it == by_count.end()) {
      Matrix precision = between_inv + s.count * within_inv;
      Eigen::LLT<Matrix> llt(precision);
      double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
      it = by_count.emplace(s.count, std::make_pair(llt, logdet)).first;
    }
    const auto &[llt, logdet_prec] = it->second;
    Vector b = within_inv * s.sum;
    double quad = (within_inv.cwiseProduct(s.scatter)).sum();
    total += -0.5 * s.count * dim * log2pi - 0.5 * s.count * logdet_w -
             0.5 * logdet_b - 0.5 * logdet_prec - 0.5 * quad +
             0.5 * b.dot(llt.solve(b));
  }
  return total;
}

}  // namespace

GaussianPlda TrainPldaEm(const Matrix &vectors,
                         const std::vector<std::string> &speakers, int iters,
                         PldaTrainingStats *stats_out) {
  if (iters <= 0) throw ValidationError("TrainPldaEm: iters must be positive");
  const Eigen::Index dim = vectors.cols();
  GaussianPlda plda;
  plda.mean = vectors.colwise().mean().transpose();
  std::vector<SpeakerStats> stats = GatherStats(vectors, speakers, plda.mean);
  if (stats.size() < 2)
    throw ValidationError("TrainPldaEm: need at least 2 speakers");
  for (const auto &s : stats)
    if (s.count < 2)
      throw ValidationError("TrainPldaEm: every speaker needs >= 2 vectors");

  const double num_vectors = static_cast<double>(vectors.rows());
  const double num_spk = static_cast<double>(stats.size());

  // Moment-based starting point.
  plda.within = Matrix::Zero(dim, dim);
  plda.between = Matrix::Zero(dim, dim);
  for (const auto &s : stats) {
    Vector spk_mean = s.sum / s.count;
    plda.within += s.scatter - s.count * spk_mean * spk_mean.transpose();
    plda.between += spk_mean * spk_mean.transpose();
  }
  plda.within /= num_vectors;
  plda.between /= num_spk;

  Matrix total = plda.within + plda.between;
  double total_scale = total.trace() / dim;
  PldaTrainingStats local;
  PldaTrainingStats &st = stats_out ? *stats_out : local;
  st = PldaTrainingStats{};
  st.ridge_events += FloorCovariance(&plda.within, total_scale, "PLDA within covariance");
  st.ridge_events += FloorCovariance(&plda.between, total_scale, "PLDA between covariance");
  st.log_likelihood.push_back(LogLikelihoodFromStats(plda, stats));

  for (int it = 0; it < iters; ++it) {
    Matrix within_inv = InverseSpd(plda.within, "PLDA within covariance");
    Matrix between_inv = InverseSpd(plda.between, "PLDA between covariance");
    std::map<int, Matrix> posterior_cov;  // Lambda_s^{-1}, shared per count
    Matrix new_between = Matrix::Zero(dim, dim);
    Matrix new_within = Matrix::Zero(dim, dim);
    for (const SpeakerStats &s : stats) {
      auto pc = posterior_cov.find(s.count);
      if (pc == posterior_cov.end())
        pc = posterior_cov
                 .emplace(s.count, InverseSpd(between_inv + s.count * within_inv,
                                              "PLDA posterior precision"))
                 .first;
      const Matrix &cov = pc->second;
      Vector y = cov * (within_inv * s.sum);
      Matrix yy = y * y.transpose();
      new_between += yy + cov;
      new_within += s.scatter - s.sum * y.transpose() - y * s.sum.transpose() +
                    s.count * (yy + cov);
    }
    plda.between = Symmetrized(new_between / num_spk);
    plda.within = Symmetrized(new_within / num_vectors);
    total_scale = (plda.within + plda.between).trace() / dim;
    st.ridge_events += FloorCovariance(&plda.within, total_scale, "PLDA within covariance");
    st.ridge_events += FloorCovariance(&plda.between, total_scale, "PLDA between covariance");
    st.log_likelihood.push_back(LogLikelihoodFromStats(plda, stats));
  }
  return plda;
}

double PldaLogLikelihood(const GaussianPlda &plda, const Matrix &vectors,
                         const std::vector<std::string> &speakers) {
  return LogLikelihoodFromStats(plda, GatherStats(vectors, speakers, plda.mean));
}

ScoreForm ToScoreForm(const GaussianPlda &plda) {
  const Matrix &b = plda.between;
  Matrix total = b + plda.within;
  Matrix total_inv = InverseSpd(total, "PLDA total covariance");
  Matrix schur = Symmetrized(total - b * total_inv * b);
  Matrix schur_inv = InverseSpd(schur, "PLDA Schur complement");

  ScoreForm sf;
  sf.gamma = Symmetrized(0.5 * (total_inv - schur_inv));
  sf.lambda = Symmetrized(0.5 * total_inv * b * schur_inv);
  // log|T| - 1/2 log|[[T, B], [B, T]]| with the block determinant
  // |T| |T - B T^{-1} B|.
  double k0 = 0.5 * LogDetSpd(total, "PLDA total covariance") -
              0.5 * LogDetSpd(schur, "PLDA Schur complement");
  Matrix lg = sf.lambda + sf.gamma;
  sf.c = -2.0 * lg * plda.mean;
  sf.k = k0 + 2.0 * plda.mean.dot(lg * plda.mean);
  return sf;
}

double ScoreTrial(const Vector &x1, const Vector &x2, const ScoreForm &sf) {
  if (x1.size() != sf.Dim() || x2.size() != sf.Dim())
    throw ValidationError("ScoreTrial: dimension mismatch");
  double cross = 0.5 * (x1.dot(sf.lambda * x2) + x2.dot(sf.lambda * x1));
  double quad = x1.dot(sf.gamma * x1) + x2.dot(sf.gamma * x2);
  double lin = (x1 + x2).dot(sf.c);
  return 2.0 * cross + quad + lin + sf.k;
}

}  // namespace dplda
