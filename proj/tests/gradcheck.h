// tests/gradcheck.h

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

#ifndef DPLDA_TESTS_GRADCHECK_H_
#define DPLDA_TESTS_GRADCHECK_H_

#include <string>

#include "dplda/trainer.h"

namespace oracle {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // "tensor[index]"
  int checked = 0;
  int tensors = 0;
};

// Compares Backward() against central differences of the longhand loss for
// every trainable element. A symmetric tensor is perturbed at (i, j) and
// (j, i) together. Relative error is |a - n| / max(|a|, |n|, floor).
GradCheckResult CheckGradients(const dplda::BackendModel &model,
                               const dplda::BatchData &batch, double prior,
                               double h = 1e-4, double floor = 1e-6);

}  // namespace oracle

#endif  // DPLDA_TESTS_GRADCHECK_H_
