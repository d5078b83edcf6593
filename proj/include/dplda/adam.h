// include/dplda/adam.h

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

#ifndef DPLDA_ADAM_H_
#define DPLDA_ADAM_H_

#include <cstddef>
#include <span>
#include <vector>

namespace dplda {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with one moment buffer per registered parameter slot. Slots are
// addressed by the index returned from AddSlot.
class Adam {
 public:
  explicit Adam(AdamOptions opts = {}) : opts_(opts) {}

  std::size_t AddSlot(std::size_t size);

  // Advances the shared step counter; call once per optimizer step before
  // Update.
  void BeginStep() { ++step_; }

  void Update(std::size_t slot, std::span<double> params,
              std::span<const double> grads, double learning_rate);

  long Step() const { return step_; }

 private:
  AdamOptions opts_;
  long step_ = 0;
  std::vector<std::vector<double>> first_, second_;
};

}  // namespace dplda

#endif  // DPLDA_ADAM_H_
