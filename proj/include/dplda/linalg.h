// include/dplda/linalg.h

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

#ifndef DPLDA_LINALG_H_
#define DPLDA_LINALG_H_

#include <string>

#include "dplda/data_model.h"

namespace dplda {

// Condition number of a symmetric matrix, +inf when it is not positive
// definite.
double SymmetricConditionNumber(const Matrix &m);

// Adds 1e-6 * trace(m) / dim * I when the condition number of `m` exceeds
// 1e10 (or `m` is not positive definite). Warns, naming `what`. Returns true
// when the ridge was added.
bool RegularizeIfIllConditioned(Matrix *m, const std::string &what);

// Inverse and log-determinant of a symmetric positive definite matrix.
// Throw RuntimeError when the Cholesky factorization fails.
Matrix InverseSpd(const Matrix &m, const std::string &what);
double LogDetSpd(const Matrix &m, const std::string &what);

inline Matrix Symmetrized(const Matrix &m) { return 0.5 * (m + m.transpose()); }

}  // namespace dplda

#endif  // DPLDA_LINALG_H_
