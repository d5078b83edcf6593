// tests/linalg-test.cc

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

#include <cmath>
#include <random>

#include "doctest.h"

#include "dplda/adam.h"
#include "dplda/errors.h"
#include "dplda/linalg.h"
#include "oracles.h"
#include "test-util.h"

using namespace dplda;

TEST_CASE("inverse and log-determinant of an SPD matrix") {
  std::mt19937_64 rng(1);
  Matrix a = oracle::RandomSpd(5, rng);
  Matrix inv = InverseSpd(a, "a");
  CHECK((a * inv - Matrix::Identity(5, 5)).norm() < 1e-12);
  Matrix l = oracle::Cholesky(a);
  double logdet = 0.0;
  for (int i = 0; i < 5; ++i) logdet += 2.0 * std::log(l(i, i));
  CHECK(LogDetSpd(a, "a") == doctest::Approx(logdet).epsilon(1e-12));
  CHECK_THROWS_AS(InverseSpd(-a, "neg"), RuntimeError);
}

TEST_CASE("ill-conditioned matrices get a ridge and a warning") {
  testing::WarningCapture warnings;
  Matrix good = Matrix::Identity(3, 3);
  CHECK_FALSE(RegularizeIfIllConditioned(&good, "good"));
  CHECK(warnings.messages().empty());

  Matrix bad = Matrix::Zero(3, 3);
  bad(0, 0) = 1.0;
  bad(1, 1) = 1e-12;
  bad(2, 2) = 2.0;
  CHECK(SymmetricConditionNumber(bad) > 1e10);
  CHECK(RegularizeIfIllConditioned(&bad, "bad"));
  CHECK(bad(1, 1) == doctest::Approx(1e-12 + 1e-6 * 3.0 / 3.0));
  CHECK(warnings.Contains("bad"));
}

TEST_CASE("Adam matches a longhand two-step update") {
  AdamOptions o;
  Adam adam(o);
  std::size_t slot = adam.AddSlot(2);
  std::vector<double> p = {1.0, -2.0};
  const std::vector<std::vector<double>> g = {{0.5, -3.0}, {0.1, 1.0}};
  double m[2] = {0, 0}, v[2] = {0, 0}, ref[2] = {1.0, -2.0};
  const double lr = 0.01;
  for (int t = 1; t <= 2; ++t) {
    adam.BeginStep();
    adam.Update(slot, p, g[t - 1], lr);
    for (int i = 0; i < 2; ++i) {
      m[i] = o.beta1 * m[i] + (1 - o.beta1) * g[t - 1][i];
      v[i] = o.beta2 * v[i] + (1 - o.beta2) * g[t - 1][i] * g[t - 1][i];
      const double mh = m[i] / (1 - std::pow(o.beta1, t));
      const double vh = v[i] / (1 - std::pow(o.beta2, t));
      ref[i] -= lr * mh / (std::sqrt(vh) + o.epsilon);
    }
  }
  CHECK(p[0] == doctest::Approx(ref[0]).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(ref[1]).epsilon(1e-14));
}
