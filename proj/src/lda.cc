// src/lda.cc

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

#include "dplda/lda.h"

#include <map>
#include <string>

#include "dplda/errors.h"
#include "dplda/linalg.h"

namespace dplda {

Projection TrainLda(const Dataset &dataset, int d_lda, Vector *eigenvalues) {
  const int dim = dataset.Dim();
  std::map<std::string, std::vector<std::size_t>> by_speaker;
  for (std::size_t i = 0; i < dataset.Size(); ++i)
    by_speaker[dataset[i].speaker_id].push_back(i);
  const int num_spk = static_cast<int>(by_speaker.size());
  if (num_spk < 2) throw ValidationError("TrainLda: need at least 2 speakers");
  if (d_lda <= 0 || d_lda > dim || d_lda > num_spk - 1)
    throw ValidationError("TrainLda: d_lda = " + std::to_string(d_lda) +
                          " exceeds min(D, speakers - 1) = " +
                          std::to_string(std::min(dim, num_spk - 1)));

  Vector global_mean = Vector::Zero(dim);
  for (const auto &r : dataset.Records()) global_mean += r.embedding;
  global_mean /= static_cast<double>(dataset.Size());

  Matrix within = Matrix::Zero(dim, dim);
  Matrix speaker_means(num_spk, dim);
  int s = 0;
  for (const auto &[spk, idx] : by_speaker) {
    Vector mean = Vector::Zero(dim);
    for (std::size_t i : idx) mean += dataset[i].embedding;
    mean /= static_cast<double>(idx.size());
    Matrix scatter = Matrix::Zero(dim, dim);
    for (std::size_t i : idx) {
      Vector d = dataset[i].embedding - mean;
      scatter.selfadjointView<Eigen::Lower>().rankUpdate(d);
    }
    within += scatter.selfadjointView<Eigen::Lower>().toDenseMatrix() /
              static_cast<double>(idx.size());
    speaker_means.row(s++) = mean.transpose();
  }
  within /= num_spk;

  Matrix centered = speaker_means.rowwise() - speaker_means.colwise().mean();
  Matrix between = centered.transpose() * centered / num_spk;

  RegularizeIfIllConditioned(&within, "LDA within-class scatter");

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(between, within);
  if (ges.info() != Eigen::Success)
    throw RuntimeError("TrainLda: generalized eigen-decomposition failed");

  Projection proj;
  proj.P.resize(d_lda, dim);
  if (eigenvalues) eigenvalues->resize(d_lda);
  for (int r = 0; r < d_lda; ++r) {
    int col = dim - 1 - r;  // eigenvalues come out ascending
    Vector v = ges.eigenvectors().col(col);
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    proj.P.row(r) = v.transpose();
    if (eigenvalues) (*eigenvalues)[r] = ges.eigenvalues()[col];
  }
  proj.mu = -proj.P * global_mean;
  return proj;
}

Vector ProjectNormalize(const Vector &x, const Projection &proj,
                        std::string_view segment_id) {
  if (x.size() != proj.InputDim())
    throw ValidationError("ProjectNormalize: dimension mismatch");
  Vector v = proj.P * x + proj.mu;
  double norm = v.norm();
  if (!(norm > 0.0))
    throw ValidationError("ProjectNormalize: zero-norm projection for segment '" +
                          std::string(segment_id) + "'");
  return v / norm;
}

Matrix ProjectNormalizeRows(const Matrix &x, const Projection &proj) {
  if (x.cols() != proj.InputDim())
    throw ValidationError("ProjectNormalizeRows: dimension mismatch");
  Matrix v = (x * proj.P.transpose()).rowwise() + proj.mu.transpose();
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    double norm = v.row(i).norm();
    if (!(norm > 0.0))
      throw ValidationError("ProjectNormalizeRows: zero-norm projection at row " +
                            std::to_string(i + 1));
    v.row(i) /= norm;
  }
  return v;
}

}  // namespace dplda
