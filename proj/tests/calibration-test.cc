// tests/calibration-test.cc

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

#include "dplda/calibration.h"
#include "dplda/errors.h"
#include "oracles.h"

using namespace dplda;

namespace {

// True LLRs of N(+1, 1) targets against N(-1, 1) impostors: llr = 2 s.
ClassScores GaussianLlrs(int n, std::mt19937_64 &rng) {
  std::normal_distribution<double> g;
  ClassScores s;
  for (int i = 0; i < n; ++i) {
    s.target.push_back(2.0 * (1.0 + g(rng)));
    s.impostor.push_back(2.0 * (-1.0 + g(rng)));
  }
  return s;
}

MetaCalibration RandomHead(int bottleneck, std::mt19937_64 &rng) {
  MetaCalibration mc;
  mc.w = Matrix(kMetadataDim, bottleneck);
  for (int i = 0; i < kMetadataDim; ++i)
    mc.w.row(i) = oracle::RandomVector(bottleneck, rng).transpose();
  mc.lambda_a = oracle::RandomSymmetric(kMetadataDim, rng);
  mc.gamma_a = oracle::RandomSymmetric(kMetadataDim, rng);
  mc.c_a = oracle::RandomVector(kMetadataDim, rng);
  mc.k_a = 0.9;
  mc.lambda_b = oracle::RandomSymmetric(kMetadataDim, rng);
  mc.gamma_b = oracle::RandomSymmetric(kMetadataDim, rng);
  mc.c_b = oracle::RandomVector(kMetadataDim, rng);
  mc.k_b = -0.2;
  mc.use_gamma = true;
  return mc;
}

double Quadratic(const Vector &a, const Matrix &m, const Vector &b) {
  double acc = 0.0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) acc += a[i] * m(i, j) * b[j];
  return acc;
}

}  // namespace

TEST_CASE("perfect LLRs calibrate to the identity") {
  std::mt19937_64 rng(1);
  GlobalCalibration c = TrainGlobalCalibration(GaussianLlrs(5000, rng), 0.5);
  CHECK(std::abs(c.alpha - 1.0) < 0.1);
  CHECK(std::abs(c.beta) < 0.1);
}

TEST_CASE("negated LLRs get a negative scale") {
  std::mt19937_64 rng(2);
  ClassScores s = GaussianLlrs(5000, rng);
  for (double &x : s.target) x = -x;
  for (double &x : s.impostor) x = -x;
  GlobalCalibration c = TrainGlobalCalibration(s, 0.5);
  CHECK(std::abs(c.alpha + 1.0) < 0.1);
  CHECK(std::abs(c.beta) < 0.1);
}

TEST_CASE("constant scores carry no information") {
  ClassScores s{std::vector<double>(30, 2.5), std::vector<double>(70, 2.5)};
  for (double prior : {0.5, 0.2}) {
    GlobalCalibration c = TrainGlobalCalibration(s, prior);
    CHECK(std::abs(c.alpha) < 1e-8);
    // The class weights are normalized, so the optimum sits at l = 0.
    CHECK(std::abs(c.beta) < 1e-6);
    ClassScores llr{std::vector<double>(30, Calibrate(2.5, c.alpha, c.beta)),
                    std::vector<double>(70, Calibrate(2.5, c.alpha, c.beta))};
    const double entropy = -prior * std::log(prior) - (1 - prior) * std::log(1 - prior);
    CHECK(WeightedCrossEntropy(llr, prior) == doctest::Approx(entropy).epsilon(1e-10));
  }
}

TEST_CASE("single-class calibration input is an error") {
  CHECK_THROWS_AS(TrainGlobalCalibration({{1.0, 2.0}, {}}, 0.5), ValidationError);
  CHECK_THROWS_AS(TrainGlobalCalibration({{1.0}, {0.0}}, 1.0), ValidationError);
}

TEST_CASE("weighted cross-entropy longhand") {
  ClassScores s{{0.3, -1.0}, {0.5}};
  const double prior = 0.3, off = std::log(prior / (1 - prior));
  const double ref = prior / 2 * (std::log1p(std::exp(-(0.3 + off))) +
                                  std::log1p(std::exp(-(-1.0 + off)))) +
                     (1 - prior) * std::log1p(std::exp(0.5 + off));
  CHECK(WeightedCrossEntropy(s, prior) == doctest::Approx(ref).epsilon(1e-14));
}

TEST_CASE("metadata vector fixtures") {
  std::mt19937_64 rng(3);
  MetaCalibration mc = MakeMetaCalibration(4, {1.0, 0.0}, false);
  Vector z = MetadataVector(mc, oracle::RandomVector(4, rng));
  for (int i = 0; i < kMetadataDim; ++i) CHECK(z[i] == doctest::Approx(-std::log(5.0)));

  mc.w.setZero();
  mc.w(0, 0) = 1.0;
  Vector m = Vector::Zero(4);
  m[0] = 20.0;
  z = MetadataVector(mc, m);
  CHECK(z[0] > -1e-8);
  CHECK(z[1] < -19.0);

  for (int t = 0; t < 20; ++t) {
    MetaCalibration r = RandomHead(4, rng);
    Vector mm = oracle::RandomVector(4, rng, 3.0);
    Vector zz = MetadataVector(r, mm);
    CHECK(std::abs(zz.array().exp().sum() - 1.0) < 1e-12);
    CHECK((zz - oracle::MetadataVector(r.w, mm)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("conditioned alpha and beta") {
  std::mt19937_64 rng(4);
  MetaCalibration init = MakeMetaCalibration(3, {1.0, 0.0}, false);
  for (int i = 0; i < 5; ++i) {
    auto [a, b] = ConditionedAlphaBeta(init, oracle::RandomVector(5, rng),
                                       oracle::RandomVector(5, rng));
    CHECK(a == 1.0);
    CHECK(b == 0.0);
  }
  for (int t = 0; t < 50; ++t) {
    MetaCalibration mc = RandomHead(3, rng);
    Vector z1 = oracle::RandomVector(5, rng), z2 = oracle::RandomVector(5, rng);
    auto ab = ConditionedAlphaBeta(mc, z1, z2);
    auto ba = ConditionedAlphaBeta(mc, z2, z1);
    CHECK(ab.first == ba.first);
    CHECK(ab.second == ba.second);
    const double a = 2 * Quadratic(z1, mc.lambda_a, z2) + Quadratic(z1, mc.gamma_a, z1) +
                     Quadratic(z2, mc.gamma_a, z2) + mc.c_a.dot(z1) + mc.c_a.dot(z2) + mc.k_a;
    const double b = 2 * Quadratic(z1, mc.lambda_b, z2) + Quadratic(z1, mc.gamma_b, z1) +
                     Quadratic(z2, mc.gamma_b, z2) + mc.c_b.dot(z1) + mc.c_b.dot(z2) + mc.k_b;
    CHECK(std::abs(ab.first - a) < 1e-12);
    CHECK(std::abs(ab.second - b) < 1e-12);
  }
}

TEST_CASE("calibrate arithmetic") {
  CHECK(Calibrate(1.7, 1.0, 0.0) == 1.7);
  CHECK(Calibrate(2.0, 0.5, -1.0) == 0.0);
  CHECK(Calibrate(123.0, 0.0, -0.25) == -0.25);
}
