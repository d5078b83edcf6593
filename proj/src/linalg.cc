// src/linalg.cc

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

#include "dplda/linalg.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "dplda/errors.h"

namespace dplda {

double SymmetricConditionNumber(const Matrix &m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  const Vector &ev = es.eigenvalues();
  if (ev.size() == 0 || ev.minCoeff() <= 0.0)
    return std::numeric_limits<double>::infinity();
  return ev.maxCoeff() / ev.minCoeff();
}

bool RegularizeIfIllConditioned(Matrix *m, const std::string &what) {
  double cond = SymmetricConditionNumber(*m);
  if (cond <= 1e10) return false;
  double ridge = 1e-6 * m->trace() / m->rows();
  if (!(ridge > 0.0)) ridge = 1e-6;
  m->diagonal().array() += ridge;
  std::ostringstream msg;
  msg << what << " is ill-conditioned (condition number " << cond
      << "); added ridge " << ridge;
  Warn(msg.str());
  return true;
}

Matrix InverseSpd(const Matrix &m, const std::string &what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw RuntimeError(what + " is not positive definite");
  return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

double LogDetSpd(const Matrix &m, const std::string &what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw RuntimeError(what + " is not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace dplda
