// tests/oracles.cc

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

#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace oracle {

namespace {

const double kLog2Pi = std::log(2.0 * M_PI);

// Solves L y = b for lower-triangular L.
Vector ForwardSubstitute(const Matrix &l, const Vector &b) {
  const int n = static_cast<int>(b.size());
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    double acc = b[i];
    for (int j = 0; j < i; ++j) acc -= l(i, j) * y[j];
    y[i] = acc / l(i, i);
  }
  return y;
}

double Softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

Vector Normalize(const Matrix &p, const Vector &mu, const Vector &x) {
  Vector v(p.rows());
  double norm2 = 0.0;
  for (int i = 0; i < p.rows(); ++i) {
    double acc = mu[i];
    for (int j = 0; j < p.cols(); ++j) acc += p(i, j) * x[j];
    v[i] = acc;
    norm2 += acc * acc;
  }
  return v / std::sqrt(norm2);
}

double Quadratic(const Vector &a, const Matrix &m, const Vector &b) {
  double acc = 0.0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) acc += a[i] * m(i, j) * b[j];
  return acc;
}

double Dot(const Vector &a, const Vector &b) {
  double acc = 0.0;
  for (int i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// The pair form shared by the score and both calibration maps.
double PairForm(const Matrix &lambda, const Matrix &gamma, const Vector &c, double k,
                const Vector &u1, const Vector &u2) {
  return 2.0 * Quadratic(u1, lambda, u2) + Quadratic(u1, gamma, u1) +
         Quadratic(u2, gamma, u2) + Dot(u1, c) + Dot(u2, c) + k;
}

}  // namespace

Matrix Cholesky(const Matrix &s) {
  const int n = static_cast<int>(s.rows());
  Matrix l = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double acc = s(i, j);
      for (int k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
      if (i == j) {
        if (acc <= 0.0) throw std::runtime_error("oracle Cholesky: not positive definite");
        l(i, i) = std::sqrt(acc);
      } else {
        l(i, j) = acc / l(j, j);
      }
    }
  }
  return l;
}

double LogGaussian(const Vector &x, const Vector &mean, const Matrix &cov) {
  const Matrix l = Cholesky(cov);
  const Vector y = ForwardSubstitute(l, x - mean);
  double logdet = 0.0;
  for (int i = 0; i < l.rows(); ++i) logdet += 2.0 * std::log(l(i, i));
  return -0.5 * (x.size() * kLog2Pi + logdet + Dot(y, y));
}

double JointGaussianLlr(const dplda::GaussianPlda &plda, const Vector &x1,
                        const Vector &x2) {
  const int d = plda.Dim();
  Matrix same = Matrix::Zero(2 * d, 2 * d), diff = Matrix::Zero(2 * d, 2 * d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const double total = plda.between(i, j) + plda.within(i, j);
      same(i, j) = same(d + i, d + j) = total;
      same(i, d + j) = same(d + i, j) = plda.between(i, j);
      diff(i, j) = diff(d + i, d + j) = total;
    }
  }
  Vector x(2 * d), m(2 * d);
  for (int i = 0; i < d; ++i) {
    x[i] = x1[i];
    x[d + i] = x2[i];
    m[i] = m[d + i] = plda.mean[i];
  }
  return LogGaussian(x, m, same) - LogGaussian(x, m, diff);
}

std::vector<double> JacobiEigenvalues(Matrix a) {
  const int n = static_cast<int>(a.rows());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

std::vector<double> LdaEigenvalues(const dplda::Dataset &data, int count) {
  const int d = data.Dim();
  std::map<std::string, std::vector<Vector>> spk;
  for (const auto &r : data.Records()) spk[r.speaker_id].push_back(r.embedding);
  Matrix within = Matrix::Zero(d, d), between = Matrix::Zero(d, d);
  std::vector<Vector> means;
  for (const auto &[id, xs] : spk) {
    Vector mean = Vector::Zero(d);
    for (const Vector &x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    for (const Vector &x : xs)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          within(i, j) += (x[i] - mean[i]) * (x[j] - mean[j]) / xs.size();
    means.push_back(mean);
  }
  within /= static_cast<double>(spk.size());
  Vector grand = Vector::Zero(d);
  for (const Vector &m : means) grand += m;
  grand /= static_cast<double>(means.size());
  for (const Vector &m : means)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) between(i, j) += (m[i] - grand[i]) * (m[j] - grand[j]);
  between /= static_cast<double>(means.size());

  // L^-1 between L^-T, column by column.
  const Matrix l = Cholesky(within);
  Matrix half(d, d), reduced(d, d);
  for (int j = 0; j < d; ++j) half.col(j) = ForwardSubstitute(l, between.col(j));
  for (int i = 0; i < d; ++i) reduced.row(i) = ForwardSubstitute(l, half.row(i).transpose()).transpose();
  std::vector<double> ev = JacobiEigenvalues(reduced);
  ev.resize(count);
  return ev;
}

double Cllr(const std::vector<double> &targets, const std::vector<double> &impostors) {
  double t = 0.0, i = 0.0;
  for (double l : targets) t += std::log(1.0 + std::exp(-l));
  for (double l : impostors) i += std::log(1.0 + std::exp(l));
  return (t / targets.size() + i / impostors.size()) / (2.0 * std::log(2.0));
}

double AffineGridMinCllr(const std::vector<double> &targets,
                         const std::vector<double> &impostors, double a_max,
                         double b_max, int n) {
  double best = 1e300;
  for (int ia = 0; ia < n; ++ia) {
    const double a = a_max * ia / (n - 1);
    for (int ib = 0; ib < n; ++ib) {
      const double b = -b_max + 2.0 * b_max * ib / (n - 1);
      std::vector<double> t, i;
      for (double s : targets) t.push_back(a * s + b);
      for (double s : impostors) i.push_back(a * s + b);
      best = std::min(best, Cllr(t, i));
    }
  }
  return best;
}

PairCounts BruteForcePairs(const dplda::Dataset &data, bool exclude_same_session) {
  PairCounts c;
  for (std::size_t i = 0; i < data.Size(); ++i) {
    for (std::size_t j = 0; j < data.Size(); ++j) {
      if (j <= i) continue;
      if (exclude_same_session && data[i].session_id == data[j].session_id) continue;
      ++c.total;
      if (data[i].speaker_id == data[j].speaker_id)
        ++c.targets;
      else
        ++c.impostors;
    }
  }
  return c;
}

Vector Bottleneck(const dplda::ConditionNet &net, const Vector &x) {
  const int h = static_cast<int>(net.w1.rows());
  std::vector<double> a1(h);
  for (int i = 0; i < h; ++i) {
    double acc = net.b1[i];
    for (int j = 0; j < net.w1.cols(); ++j) acc += net.w1(i, j) * x[j];
    acc = (acc - net.running_mean[i]) / std::sqrt(net.running_var[i] + net.bn_epsilon);
    a1[i] = acc > 0 ? acc : 0.0;
  }
  Vector m(net.w2.rows());
  for (int i = 0; i < net.w2.rows(); ++i) {
    double acc = net.b2[i];
    for (int j = 0; j < h; ++j) acc += net.w2(i, j) * a1[j];
    m[i] = acc;
  }
  return m;
}

Vector MetadataVector(const Matrix &w, const Vector &m) {
  Vector u(w.rows());
  double top = -1e300;
  for (int i = 0; i < w.rows(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < w.cols(); ++j) acc += w(i, j) * m[j];
    u[i] = acc;
    top = std::max(top, acc);
  }
  double sum = 0.0;
  for (int i = 0; i < u.size(); ++i) sum += std::exp(u[i] - top);
  for (int i = 0; i < u.size(); ++i) u[i] = u[i] - top - std::log(sum);
  return u;
}

double BatchLoss(const dplda::BackendModel &model, const dplda::BatchData &batch,
                 double prior) {
  const auto &p = model.params;
  const bool meta = model.mode == dplda::CalibrationMode::kMeta;
  const double offset = std::log(prior / (1.0 - prior));
  double t_sum = 0.0, i_sum = 0.0;
  int n_t = 0, n_i = 0;
  for (const auto &trial : batch.trials) {
    const Vector x1 = Normalize(p.proj.P, p.proj.mu, batch.embeddings.row(trial.a).transpose());
    const Vector x2 = Normalize(p.proj.P, p.proj.mu, batch.embeddings.row(trial.b).transpose());
    const double s = PairForm(p.sf.lambda, p.sf.gamma, p.sf.c, p.sf.k, x1, x2);
    double alpha = p.meta.k_a, beta = p.meta.k_b;
    if (meta) {
      const Vector z1 = MetadataVector(p.meta.w, batch.bottlenecks.row(trial.a).transpose());
      const Vector z2 = MetadataVector(p.meta.w, batch.bottlenecks.row(trial.b).transpose());
      alpha = PairForm(p.meta.lambda_a, p.meta.gamma_a, p.meta.c_a, p.meta.k_a, z1, z2);
      beta = PairForm(p.meta.lambda_b, p.meta.gamma_b, p.meta.c_b, p.meta.k_b, z1, z2);
    }
    const double l = alpha * s + beta + offset;
    if (trial.target) {
      t_sum += Softplus(-l);
      ++n_t;
    } else {
      i_sum += Softplus(l);
      ++n_i;
    }
  }
  return prior * t_sum / n_t + (1.0 - prior) * i_sum / n_i;
}

void SampleCovariances(const dplda::Dataset &data, Matrix *between, Matrix *within) {
  const int d = data.Dim();
  std::map<std::string, std::vector<Vector>> spk;
  for (const auto &r : data.Records()) spk[r.speaker_id].push_back(r.embedding);
  Matrix w = Matrix::Zero(d, d);
  std::vector<Vector> means;
  long n_resid = 0, n_per = 0;
  for (const auto &[id, xs] : spk) {
    Vector mean = Vector::Zero(d);
    for (const Vector &x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    for (const Vector &x : xs) w += (x - mean) * (x - mean).transpose();
    n_resid += static_cast<long>(xs.size()) - 1;
    n_per = static_cast<long>(xs.size());
    means.push_back(mean);
  }
  w /= static_cast<double>(n_resid);
  Vector grand = Vector::Zero(d);
  for (const Vector &m : means) grand += m;
  grand /= static_cast<double>(means.size());
  Matrix b = Matrix::Zero(d, d);
  for (const Vector &m : means) b += (m - grand) * (m - grand).transpose();
  b /= static_cast<double>(means.size() - 1);
  // Speaker means carry W / n of within-speaker noise.
  *between = b - w / static_cast<double>(n_per);
  *within = w;
}

Matrix DomainCovariance(const dplda::Dataset &data, const std::string &domain) {
  std::vector<Vector> xs;
  for (const auto &r : data.Records())
    if (r.domain == domain) xs.push_back(r.embedding);
  const int d = data.Dim();
  Vector mean = Vector::Zero(d);
  for (const Vector &x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  Matrix c = Matrix::Zero(d, d);
  for (const Vector &x : xs) c += (x - mean) * (x - mean).transpose();
  return c / static_cast<double>(xs.size());
}

Matrix RandomSpd(int dim, std::mt19937_64 &rng, double floor) {
  std::normal_distribution<double> g;
  Matrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = g(rng);
  return a * a.transpose() / dim + floor * Matrix::Identity(dim, dim);
}

Matrix RandomSymmetric(int dim, std::mt19937_64 &rng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = g(rng);
  return a;
}

Vector RandomVector(int dim, std::mt19937_64 &rng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = g(rng);
  return v;
}

dplda::GaussianPlda RandomPlda(int dim, std::mt19937_64 &rng) {
  dplda::GaussianPlda p;
  p.mean = RandomVector(dim, rng);
  p.between = RandomSpd(dim, rng);
  p.within = RandomSpd(dim, rng);
  return p;
}

dplda::Dataset RandomDataset(int dim, int n_speakers, int sessions, int domains,
                             std::mt19937_64 &rng) {
  const dplda::GaussianPlda p = RandomPlda(dim, rng);
  const Matrix lb = Cholesky(p.between), lw = Cholesky(p.within);
  std::vector<dplda::SegmentRecord> recs;
  for (int s = 0; s < n_speakers; ++s) {
    const Vector y = lb * RandomVector(dim, rng);
    const std::string spk = "spk" + std::to_string(s);
    const std::string dom = "dom" + std::to_string(s % domains);
    for (int k = 0; k < sessions; ++k) {
      Vector x = p.mean + y + lw * RandomVector(dim, rng);
      const std::string ses = spk + "_ses" + std::to_string(k);
      recs.push_back({ses + "_seg0", spk, ses, dom, dom, x});
    }
  }
  return dplda::Dataset(std::move(recs));
}

dplda::BackendModel RandomModel(int input_dim, int lda_dim, int bottleneck_dim,
                                std::mt19937_64 &rng) {
  using dplda::kMetadataDim;
  dplda::BackendModel m;
  m.mode = dplda::CalibrationMode::kMeta;
  auto &p = m.params;
  p.proj.P = Matrix(lda_dim, input_dim);
  for (int i = 0; i < lda_dim; ++i) p.proj.P.row(i) = RandomVector(input_dim, rng).transpose();
  p.proj.mu = RandomVector(lda_dim, rng, 0.5);
  p.sf.lambda = RandomSymmetric(lda_dim, rng);
  p.sf.gamma = RandomSymmetric(lda_dim, rng, 0.5);
  p.sf.c = RandomVector(lda_dim, rng, 0.5);
  p.sf.k = 0.3;
  p.meta.w = Matrix(kMetadataDim, bottleneck_dim);
  for (int i = 0; i < kMetadataDim; ++i)
    p.meta.w.row(i) = RandomVector(bottleneck_dim, rng, 0.5).transpose();
  p.meta.lambda_a = RandomSymmetric(kMetadataDim, rng, 0.1);
  p.meta.gamma_a = RandomSymmetric(kMetadataDim, rng, 0.1);
  p.meta.c_a = RandomVector(kMetadataDim, rng, 0.1);
  p.meta.k_a = 1.2;
  p.meta.lambda_b = RandomSymmetric(kMetadataDim, rng, 0.1);
  p.meta.gamma_b = RandomSymmetric(kMetadataDim, rng, 0.1);
  p.meta.c_b = RandomVector(kMetadataDim, rng, 0.1);
  p.meta.k_b = -0.4;
  p.meta.use_gamma = true;

  auto &n = m.cnet;
  const int hidden = 6, classes = 3;
  n.w1 = Matrix(hidden, input_dim);
  for (int i = 0; i < hidden; ++i) n.w1.row(i) = RandomVector(input_dim, rng).transpose();
  n.b1 = RandomVector(hidden, rng);
  n.running_mean = RandomVector(hidden, rng);
  n.running_var = RandomVector(hidden, rng).cwiseAbs().array() + 0.5;
  n.w2 = Matrix(bottleneck_dim, hidden);
  for (int i = 0; i < bottleneck_dim; ++i) n.w2.row(i) = RandomVector(hidden, rng).transpose();
  n.b2 = RandomVector(bottleneck_dim, rng);
  n.w3 = Matrix(classes, bottleneck_dim);
  for (int i = 0; i < classes; ++i) n.w3.row(i) = RandomVector(bottleneck_dim, rng).transpose();
  n.b3 = RandomVector(classes, rng);
  n.class_names = {"a", "b", "c"};
  return m;
}

}  // namespace oracle
