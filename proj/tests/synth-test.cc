// tests/synth-test.cc

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

#include <random>
#include <set>

#include "doctest.h"

#include "dplda/errors.h"
#include "dplda/synth.h"
#include "oracles.h"
#include "test-util.h"

using namespace dplda;

namespace {

SynthSpec OneDomain(double scale) {
  SynthSpec s;
  s.dim = 4;
  s.sessions_per_speaker = 4;
  s.segments_per_session = 1;
  s.between_spectrum = Vector(4);
  s.between_spectrum << 2.0, 1.0, 0.5, 0.25;
  s.within_spectrum = Vector(4);
  s.within_spectrum << 0.5, 0.4, 0.3, 0.2;
  s.seed = 17;
  s.domains.push_back({"only", 500, Vector(), scale, 1});
  return s;
}

}  // namespace

TEST_CASE("sample covariances match the spectra") {
  SynthSpec spec = OneDomain(1.0);
  Dataset d = Generate(spec);
  CHECK(d.Size() == 2000);
  Matrix b, w;
  oracle::SampleCovariances(d, &b, &w);
  const Matrix tb = spec.between_spectrum.asDiagonal(), tw = spec.within_spectrum.asDiagonal();
  CHECK((b - tb).norm() / tb.norm() < 0.1);
  CHECK((w - tw).norm() / tw.norm() < 0.1);
}

TEST_CASE("scale multiplies the total covariance") {
  SynthSpec spec = OneDomain(2.0);
  Dataset d = Generate(spec);
  Matrix total = 4.0 * Matrix((spec.between_spectrum + spec.within_spectrum).asDiagonal());
  CHECK((oracle::DomainCovariance(d, "only") - total).norm() / total.norm() < 0.1);
}

TEST_CASE("generation is deterministic and domains are independent streams") {
  testing::TempDir dir;
  SynthSpec spec = Mismatch5Spec(10, 100, 5);
  SaveDataset(Generate(spec), dir / "a.emb", dir / "a.tsv");
  SaveDataset(Generate(spec), dir / "b.emb", dir / "b.tsv");
  CHECK(testing::ReadFile(dir / "a.emb") == testing::ReadFile(dir / "b.emb"));
  CHECK(testing::ReadFile(dir / "a.tsv") == testing::ReadFile(dir / "b.tsv"));

  SynthSpec first = spec;
  first.domains.resize(2);
  Dataset small = Generate(first), full = Generate(spec);
  REQUIRE(small.Size() < full.Size());
  for (std::size_t i = 0; i < small.Size(); ++i) {
    CHECK(small[i].segment_id == full[i].segment_id);
    CHECK((small[i].embedding.array() == full[i].embedding.array()).all());
  }
}

TEST_CASE("mismatch-5 layout") {
  SynthSpec spec = Mismatch5Spec(50, 1000, 1);
  REQUIRE(spec.domains.size() == 5);
  const int expected[] = {530, 250, 110, 60, 40};
  int lo = 100, hi = 0;
  for (int i = 0; i < 5; ++i) {
    CHECK(spec.domains[i].n_speakers == expected[i]);
    lo = std::min(lo, spec.domains[i].n_condition_labels);
    hi = std::max(hi, spec.domains[i].n_condition_labels);
  }
  CHECK(lo == 1);
  CHECK(hi == 8);
  Dataset d = Generate(spec);
  CHECK(d.Dim() == 50);
  CHECK(d.Domains().size() == 5);
}

TEST_CASE("condition labels follow the granularity") {
  SynthSpec spec = OneDomain(1.0);
  spec.domains[0].n_condition_labels = 3;
  spec.domains.push_back({"other", 10, Vector::Ones(4), 1.0, 1});
  std::set<std::string> a, b;
  for (const auto &r : Generate(spec).Records())
    (r.domain == "only" ? a : b).insert(r.condition_label);
  CHECK(a.size() == 3);
  CHECK(b == std::set<std::string>{"other"});
}

TEST_CASE("invalid specs are rejected") {
  SynthSpec s = OneDomain(1.0);
  s.domains[0].scale = 0.0;
  CHECK_THROWS_AS(Generate(s), ValidationError);
  s = OneDomain(1.0);
  s.domains[0].n_condition_labels = 0;
  CHECK_THROWS_AS(Generate(s), ValidationError);
}

TEST_CASE("speaker split is disjoint and covers every domain") {
  Dataset d = Generate(Mismatch5Spec(6, 200, 2));
  CorpusSplit s = SplitBySpeaker(d, 0.15, 0.25, 3);
  CHECK(s.train.Size() + s.dev.Size() + s.eval.Size() == d.Size());
  const auto train_spk = s.train.Speakers();
  std::set<std::string> tr(train_spk.begin(), train_spk.end());
  for (const auto &spk : s.dev.Speakers()) CHECK(tr.count(spk) == 0);
  for (const auto &spk : s.eval.Speakers()) CHECK(tr.count(spk) == 0);
  CHECK(s.dev.Domains().size() == 5);
  CHECK(s.eval.Domains().size() == 5);
}
