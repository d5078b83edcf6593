// include/dplda/synth.h

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

#ifndef DPLDA_SYNTH_H_
#define DPLDA_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dplda/data_model.h"

namespace dplda {

struct DomainSpec {
  std::string name;
  int n_speakers = 0;
  Vector mean_shift;  // D; empty means zero
  double scale = 1.0;
  int n_condition_labels = 1;
};

// Speakers y ~ N(0, diag(between_spectrum)); segments
// x = scale * (y + e) + mean_shift with e ~ N(0, diag(within_spectrum)).
struct SynthSpec {
  int dim = 0;
  int sessions_per_speaker = 3;
  int segments_per_session = 2;
  Vector between_spectrum;
  Vector within_spectrum;
  std::vector<DomainSpec> domains;
  std::uint64_t seed = 0;
};

// Deterministic in spec.seed. Every domain draws from its own stream seeded
// by (seed, domain position), so appending a domain leaves the earlier
// domains' records unchanged. Condition labels cycle over the sessions of a
// domain: "<domain>" when it has one label, "<domain>/c<k>" otherwise.
Dataset Generate(const SynthSpec &spec);

// Default spectra for dimension `dim`.
Vector DefaultBetweenSpectrum(int dim);
Vector DefaultWithinSpectrum(int dim);

// One unshifted domain.
SynthSpec SingleDomainSpec(int dim, int n_speakers, std::uint64_t seed);

// Five domains with 53/25/11/6/4 % of the speakers, distinct shifts and
// scales, and 1 to 8 condition labels per domain.
SynthSpec Mismatch5Spec(int dim, int total_speakers, std::uint64_t seed);

struct CorpusSplit {
  Dataset train;
  Dataset dev;
  Dataset eval;
};

// Splits speakers of every domain into train/dev/eval by the given
// fractions (rounded, at least two dev and eval speakers per domain when
// the fraction is positive).
CorpusSplit SplitBySpeaker(const Dataset &dataset, double dev_fraction,
                           double eval_fraction, std::uint64_t seed);

}  // namespace dplda

#endif  // DPLDA_SYNTH_H_
