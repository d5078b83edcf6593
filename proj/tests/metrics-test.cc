// tests/metrics-test.cc

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

#include "dplda/errors.h"
#include "dplda/metrics.h"
#include "oracles.h"

using namespace dplda;

namespace {

ClassScores CoinFlips(int n, std::mt19937_64 &rng) {
  std::normal_distribution<double> g;
  std::bernoulli_distribution coin(0.5);
  ClassScores s;
  for (int i = 0; i < n; ++i) (coin(rng) ? s.target : s.impostor).push_back(g(rng));
  return s;
}

ClassScores Separated() { return {{2.0, 3.0, 4.5}, {-1.0, 0.0, 1.0, 1.5}}; }

}  // namespace

TEST_CASE("Cllr fixtures") {
  CHECK(std::abs(Cllr({std::vector<double>(7, 0.0), std::vector<double>(13, 0.0)}) - 1.0) <
        1e-12);
  CHECK(Cllr({{40.0, 40.0}, {-40.0}}) < 1e-10);
  const double ref = (std::log(1 + std::exp(-1.0)) + std::log(1 + std::exp(-1.0))) /
                     (2 * std::log(2.0));
  CHECK(std::abs(Cllr({{1.0}, {-1.0}}) - ref) < 1e-15);
  CHECK(std::abs(ref - 0.4519) < 1e-4);
  CHECK_THROWS_AS(Cllr({{}, {1.0}}), ValidationError);
}

TEST_CASE("Cllr matches the longhand sum on random sets") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    ClassScores s = CoinFlips(200, rng);
    CHECK(Cllr(s) == doctest::Approx(oracle::Cllr(s.target, s.impostor)).epsilon(1e-12));
  }
}

TEST_CASE("PAV on separated scores reaches zero") {
  PavResult r = PavMinCllr(Separated());
  CHECK(r.min_cllr == 0.0);
  REQUIRE(r.blocks.size() == 2);
  CHECK(r.blocks.front().llr == -kPavLlrClamp);
  CHECK(r.blocks.back().llr == kPavLlrClamp);
}

TEST_CASE("label-independent scores have min Cllr near one bit") {
  std::mt19937_64 rng(2);
  ClassScores s = CoinFlips(10000, rng);
  CHECK(std::abs(PavMinCllr(s).min_cllr - 1.0) < 0.05);
}

TEST_CASE("min Cllr is below an affine calibration grid") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int t = 0; t < 10; ++t) {
    ClassScores s{{g(rng), g(rng)}, {g(rng), g(rng)}};
    const double grid = oracle::AffineGridMinCllr(s.target, s.impostor, 20.0, 20.0, 100);
    CHECK(PavMinCllr(s).min_cllr <= grid + 1e-12);
  }
}

TEST_CASE("min Cllr never exceeds actual Cllr") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int t = 0; t < 100; ++t) {
    ClassScores s;
    const double shift = 3 * g(rng), scale = std::exp(g(rng));
    for (int i = 0; i < 50; ++i) s.target.push_back(scale * (g(rng) + 1.0) + shift);
    for (int i = 0; i < 80; ++i) s.impostor.push_back(scale * g(rng) + shift);
    CHECK(PavMinCllr(s).min_cllr <= Cllr(s) + 1e-12);
    EvalReport e = Evaluate(s);
    CHECK(e.min_cllr <= e.actual_cllr);
    CHECK(e.CalibrationGap() >= 0.0);
  }
}

TEST_CASE("PAV mapping is monotone at every knot") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  ClassScores s;
  for (int i = 0; i < 500; ++i) s.target.push_back(std::round(4 * (g(rng) + 1.0)) / 4);
  for (int i = 0; i < 700; ++i) s.impostor.push_back(std::round(4 * g(rng)) / 4);
  PavResult r = PavMinCllr(s);
  for (std::size_t i = 1; i < r.blocks.size(); ++i) {
    CHECK(r.blocks[i].llr >= r.blocks[i - 1].llr);
    CHECK(r.blocks[i].lower > r.blocks[i - 1].upper);
    CHECK(r.Map(r.blocks[i].lower) >= r.Map(r.blocks[i - 1].upper));
  }
  std::size_t t = 0, n = 0;
  for (const auto &b : r.blocks) {
    t += b.targets;
    n += b.impostors;
  }
  CHECK(t == 500);
  CHECK(n == 700);
}

TEST_CASE("EER fixtures") {
  CHECK(Eer(Separated()) == 0.0);
  ClassScores flipped;
  for (double x : Separated().target) flipped.target.push_back(-x);
  for (double x : Separated().impostor) flipped.impostor.push_back(-x);
  CHECK(Eer(flipped) == 0.0);
  std::mt19937_64 rng(6);
  CHECK(std::abs(Eer(CoinFlips(10000, rng)) - 0.5) < 0.05);

  // Two unit Gaussians two apart cross at one standard deviation.
  std::normal_distribution<double> g;
  ClassScores s;
  for (int i = 0; i < 20000; ++i) {
    s.target.push_back(g(rng) + 1.0);
    s.impostor.push_back(g(rng) - 1.0);
  }
  CHECK(std::abs(Eer(s) - 0.5 * std::erfc(1.0 / std::sqrt(2.0))) < 0.01);
}

TEST_CASE("evaluation report text") {
  EvalReport r = Evaluate({std::vector<double>(4, 0.0), std::vector<double>(6, 0.0)});
  CHECK(r.actual_cllr == doctest::Approx(1.0));
  CHECK(r.n_target == 4);
  CHECK(r.n_impostor == 6);
  const std::string tsv = EvalReportTsv(r);
  CHECK(tsv.rfind("actual_cllr\tmin_cllr\teer\tn_target\tn_impostor\n", 0) == 0);
}
