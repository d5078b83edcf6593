// src/adam.cc

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

#include "dplda/adam.h"

#include <cmath>

#include "dplda/errors.h"

namespace dplda {

std::size_t Adam::AddSlot(std::size_t size) {
  first_.emplace_back(size, 0.0);
  second_.emplace_back(size, 0.0);
  return first_.size() - 1;
}

void Adam::Update(std::size_t slot, std::span<double> params,
                  std::span<const double> grads, double learning_rate) {
  if (slot >= first_.size() || params.size() != first_[slot].size() ||
      grads.size() != params.size())
    throw ValidationError("Adam::Update: slot/size mismatch");
  if (step_ == 0) throw ValidationError("Adam::Update before BeginStep");
  std::vector<double> &m = first_[slot], &v = second_[slot];
  const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = opts_.beta1 * m[i] + (1.0 - opts_.beta1) * grads[i];
    v[i] = opts_.beta2 * v[i] + (1.0 - opts_.beta2) * grads[i] * grads[i];
    double mhat = m[i] / bc1, vhat = v[i] / bc2;
    params[i] -= learning_rate * mhat / (std::sqrt(vhat) + opts_.epsilon);
  }
}

}  // namespace dplda
