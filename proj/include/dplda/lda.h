// include/dplda/lda.h

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

#ifndef DPLDA_LDA_H_
#define DPLDA_LDA_H_

#include <string_view>

#include "dplda/data_model.h"

namespace dplda {

// Affine front end: x -> Norm(P x + mu).
struct Projection {
  Matrix P;   // d_lda x D
  Vector mu;  // d_lda; equals -P * (training mean) after TrainLda

  int InputDim() const { return static_cast<int>(P.cols()); }
  int OutputDim() const { return static_cast<int>(P.rows()); }
};

// Linear discriminant analysis on segment embeddings, one class per speaker.
// Every speaker contributes equally to the within-class scatter (each
// speaker's covariance is averaged, not its segments). Rows of P are the
// leading generalized eigenvectors of (between, within), normalized to unit
// within-class variance, with descending eigenvalues returned through
// `eigenvalues` if non-null.
Projection TrainLda(const Dataset &dataset, int d_lda,
                    Vector *eigenvalues = nullptr);

// (P x + mu) / |P x + mu|. Throws ValidationError on a zero-norm
// intermediate; `segment_id` is used in the message.
Vector ProjectNormalize(const Vector &x, const Projection &proj,
                        std::string_view segment_id = {});

// Row-wise version over an (n x D) matrix.
Matrix ProjectNormalizeRows(const Matrix &x, const Projection &proj);

}  // namespace dplda

#endif  // DPLDA_LDA_H_
