// src/synth.cc

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

#include "dplda/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>

#include "dplda/errors.h"

namespace dplda {

namespace {

std::mt19937_64 DomainStream(std::uint64_t seed, std::size_t domain_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(domain_index), 0x5eedu};
  return std::mt19937_64(seq);
}

std::string Numbered(const std::string &prefix, int i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*d", width, i);
  return prefix + buf;
}

}  // namespace

Dataset Generate(const SynthSpec &spec) {
  if (spec.dim <= 0) throw ValidationError("synth: dim must be positive");
  if (spec.between_spectrum.size() != spec.dim ||
      spec.within_spectrum.size() != spec.dim)
    throw ValidationError("synth: spectra must have dim entries");
  if ((spec.between_spectrum.array() < 0.0).any() ||
      (spec.within_spectrum.array() < 0.0).any())
    throw ValidationError("synth: spectra must be non-negative");
  if (spec.sessions_per_speaker < 1 || spec.segments_per_session < 1)
    throw ValidationError("synth: sessions and segments per speaker must be >= 1");
  if (spec.domains.empty()) throw ValidationError("synth: no domains");

  const Vector between_sd = spec.between_spectrum.cwiseSqrt();
  const Vector within_sd = spec.within_spectrum.cwiseSqrt();
  std::vector<SegmentRecord> records;
  for (std::size_t d = 0; d < spec.domains.size(); ++d) {
    const DomainSpec &dom = spec.domains[d];
    if (!(dom.scale > 0.0))
      throw ValidationError("synth: domain '" + dom.name + "' scale must be > 0");
    if (dom.n_condition_labels < 1)
      throw ValidationError("synth: domain '" + dom.name +
                            "' needs at least one condition label");
    if (dom.mean_shift.size() != 0 && dom.mean_shift.size() != spec.dim)
      throw ValidationError("synth: domain '" + dom.name + "' shift has wrong size");
    Vector shift = dom.mean_shift.size() ? dom.mean_shift : Vector::Zero(spec.dim);

    std::mt19937_64 rng = DomainStream(spec.seed, d);
    std::normal_distribution<double> normal(0.0, 1.0);
    int session_counter = 0;
    for (int s = 0; s < dom.n_speakers; ++s) {
      const std::string spk = Numbered(dom.name + "_spk", s, 4);
      Vector y(spec.dim);
      for (int i = 0; i < spec.dim; ++i) y[i] = between_sd[i] * normal(rng);
      for (int ses = 0; ses < spec.sessions_per_speaker; ++ses, ++session_counter) {
        const std::string session = Numbered(spk + "_ses", ses, 2);
        const int label = session_counter % dom.n_condition_labels;
        const std::string condition =
            dom.n_condition_labels == 1 ? dom.name : dom.name + "/c" + std::to_string(label);
        for (int g = 0; g < spec.segments_per_session; ++g) {
          Vector x(spec.dim);
          for (int i = 0; i < spec.dim; ++i)
            x[i] = dom.scale * (y[i] + within_sd[i] * normal(rng)) + shift[i];
          records.push_back({Numbered(session + "_seg", g, 2), spk, session,
                             dom.name, condition, std::move(x)});
        }
      }
    }
  }
  return Dataset(std::move(records));
}

Vector DefaultBetweenSpectrum(int dim) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = 1.5 * std::pow(0.88, i);
  return v;
}

Vector DefaultWithinSpectrum(int dim) {
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = 0.4 + 0.3 * std::pow(0.95, i);
  return v;
}

SynthSpec SingleDomainSpec(int dim, int n_speakers, std::uint64_t seed) {
  SynthSpec spec;
  spec.dim = dim;
  spec.between_spectrum = DefaultBetweenSpectrum(dim);
  spec.within_spectrum = DefaultWithinSpectrum(dim);
  spec.seed = seed;
  spec.domains.push_back({"main", n_speakers, Vector(), 1.0, 1});
  return spec;
}

SynthSpec Mismatch5Spec(int dim, int total_speakers, std::uint64_t seed) {
  SynthSpec spec;
  spec.dim = dim;
  spec.between_spectrum = DefaultBetweenSpectrum(dim);
  spec.within_spectrum = DefaultWithinSpectrum(dim);
  spec.seed = seed;

  struct Row {
    const char *name;
    double share, shift_norm, scale;
    int labels;
  };
  const Row rows[] = {{"web", 0.53, 0.0, 1.0, 2},
                      {"phone", 0.25, 1.5, 0.8, 8},
                      {"switch", 0.11, 2.0, 1.3, 4},
                      {"radio", 0.06, 3.0, 1.6, 3},
                      {"studio", 0.04, 2.5, 0.6, 1}};
  // Shift directions come from a stream of their own.
  std::mt19937_64 rng(seed ^ 0xd1b54a32d192ed03ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const Row &r : rows) {
    Vector dir(dim);
    for (int i = 0; i < dim; ++i) dir[i] = normal(rng);
    dir.normalize();
    int n = std::max(2, static_cast<int>(std::lround(r.share * total_speakers)));
    spec.domains.push_back({r.name, n, r.shift_norm * dir, r.scale, r.labels});
  }
  return spec;
}

CorpusSplit SplitBySpeaker(const Dataset &dataset, double dev_fraction,
                           double eval_fraction, std::uint64_t seed) {
  if (dev_fraction < 0 || eval_fraction < 0 || dev_fraction + eval_fraction >= 1)
    throw ValidationError("split: fractions must be >= 0 and sum to < 1");
  std::map<std::string, std::vector<std::string>> by_domain;
  {
    std::map<std::string, std::string> domain_of;
    for (const auto &r : dataset.Records()) domain_of.emplace(r.speaker_id, r.domain);
    for (const auto &[spk, dom] : domain_of) by_domain[dom].push_back(spk);
  }
  std::mt19937_64 rng(seed);
  std::vector<std::string> train, dev, eval;
  for (auto &[dom, spks] : by_domain) {
    std::shuffle(spks.begin(), spks.end(), rng);
    const int n = static_cast<int>(spks.size());
    auto count = [n](double frac) {
      if (frac <= 0.0) return 0;
      return std::max(2, static_cast<int>(std::lround(frac * n)));
    };
    int n_dev = count(dev_fraction), n_eval = count(eval_fraction);
    if (n_dev + n_eval >= n)
      throw ValidationError("split: domain '" + dom + "' has too few speakers (" +
                            std::to_string(n) + ")");
    dev.insert(dev.end(), spks.begin(), spks.begin() + n_dev);
    eval.insert(eval.end(), spks.begin() + n_dev, spks.begin() + n_dev + n_eval);
    train.insert(train.end(), spks.begin() + n_dev + n_eval, spks.end());
  }
  return {SubsetBySpeakers(dataset, train), SubsetBySpeakers(dataset, dev),
          SubsetBySpeakers(dataset, eval)};
}

}  // namespace dplda
