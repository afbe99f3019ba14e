// Copyright 2026 The ADEF Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "adef/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace adef {

namespace {

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double max_eigenvalue(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double logistic_value(const Matrix& A, const Vector& b, double lambda, const Vector& x) {
  const Vector z = A * x;
  double s = 0.0;
  for (Eigen::Index j = 0; j < z.size(); ++j) s += softplus(z[j]) - b[j] * z[j];
  return s / static_cast<double>(A.rows()) + 0.5 * lambda * x.squaredNorm();
}

Vector logistic_gradient(const Matrix& A, const Vector& b, double lambda, const Vector& x) {
  Vector r = (A * x).unaryExpr(&sigmoid) - b;
  return A.transpose() * r / static_cast<double>(A.rows()) + lambda * x;
}

}  // namespace

Problem Problem::logistic(std::vector<Matrix> features, std::vector<Vector> labels,
                          double lambda_reg) {
  if (features.empty()) throw std::invalid_argument("problem: need at least one client");
  if (features.size() != labels.size())
    throw std::invalid_argument("problem: features/labels client count mismatch");
  if (!(lambda_reg >= 0.0)) throw std::invalid_argument("problem.lambda_reg: must be >= 0");
  Problem p;
  p.kind_ = ProblemKind::kLogistic;
  p.dim_ = static_cast<int>(features.front().cols());
  p.lambda_reg_ = lambda_reg;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].rows() == 0 || features[i].cols() != p.dim_ ||
        labels[i].size() != features[i].rows())
      throw std::invalid_argument("problem: malformed logistic client " + std::to_string(i));
    for (Eigen::Index j = 0; j < labels[i].size(); ++j)
      if (!(labels[i][j] >= 0.0 && labels[i][j] <= 1.0))
        throw std::invalid_argument("problem: logistic labels must lie in [0, 1]");
  }
  p.first_ = std::move(features);
  p.second_ = std::move(labels);
  p.compute_constants();
  return p;
}

Problem Problem::quadratic(std::vector<Matrix> hessians, std::vector<Vector> centers) {
  if (hessians.empty()) throw std::invalid_argument("problem: need at least one client");
  if (hessians.size() != centers.size())
    throw std::invalid_argument("problem: hessian/center client count mismatch");
  Problem p;
  p.kind_ = ProblemKind::kQuadratic;
  p.dim_ = static_cast<int>(centers.front().size());
  for (std::size_t i = 0; i < hessians.size(); ++i) {
    if (hessians[i].rows() != p.dim_ || hessians[i].cols() != p.dim_ ||
        centers[i].size() != p.dim_)
      throw std::invalid_argument("problem: malformed quadratic client " + std::to_string(i));
  }
  p.first_ = std::move(hessians);
  p.second_ = std::move(centers);
  p.compute_constants();
  return p;
}

void Problem::compute_constants() {
  client_smoothness_ = 0.0;
  if (kind_ == ProblemKind::kLogistic) {
    Matrix gram = Matrix::Zero(dim_, dim_);
    Eigen::Index total = 0;
    for (const Matrix& A : first_) {
      const Matrix g = A.transpose() * A;
      client_smoothness_ = std::max(
          client_smoothness_, max_eigenvalue(g) / (4.0 * static_cast<double>(A.rows())) + lambda_reg_);
      gram += g;
      total += A.rows();
    }
    smoothness_ = max_eigenvalue(gram) / (4.0 * static_cast<double>(total)) + lambda_reg_;
  } else {
    Matrix avg = Matrix::Zero(dim_, dim_);
    for (const Matrix& Q : first_) {
      client_smoothness_ = std::max(client_smoothness_, max_eigenvalue(Q));
      avg += Q;
    }
    avg /= static_cast<double>(first_.size());
    smoothness_ = max_eigenvalue(avg);
  }
}

void Problem::check_client(int i) const {
  if (i < 0 || i >= n_clients())
    throw std::out_of_range("problem: client index " + std::to_string(i) + " out of range");
}

double Problem::client_value(int i, const Vector& x) const {
  check_client(i);
  require_dim(x, dim_, "client_value");
  if (kind_ == ProblemKind::kLogistic) return logistic_value(first_[i], second_[i], lambda_reg_, x);
  const Vector r = x - second_[i];
  return 0.5 * r.dot(first_[i] * r);
}

Vector Problem::client_gradient(int i, const Vector& x) const {
  check_client(i);
  require_dim(x, dim_, "client_gradient");
  if (kind_ == ProblemKind::kLogistic)
    return logistic_gradient(first_[i], second_[i], lambda_reg_, x);
  return first_[i] * (x - second_[i]);
}

double Problem::value(const Vector& x) const {
  double s = 0.0;
  for (int i = 0; i < n_clients(); ++i) s += client_value(i, x);
  return s / n_clients();
}

Vector Problem::gradient(const Vector& x) const {
  Vector g = Vector::Zero(dim_);
  for (int i = 0; i < n_clients(); ++i) g += client_gradient(i, x);
  return g / n_clients();
}

Matrix Problem::hessian(const Vector& x) const {
  require_dim(x, dim_, "hessian");
  Matrix H = Matrix::Zero(dim_, dim_);
  for (int i = 0; i < n_clients(); ++i) {
    if (kind_ == ProblemKind::kLogistic) {
      const Matrix& A = first_[i];
      const Vector w = (A * x).unaryExpr([](double z) {
        const double s = sigmoid(z);
        return s * (1.0 - s);
      });
      H += A.transpose() * w.asDiagonal() * A / static_cast<double>(A.rows());
      H.diagonal().array() += lambda_reg_;
    } else {
      H += first_[i];
    }
  }
  return H / n_clients();
}

double Problem::pooled_value(const Vector& x) const {
  if (kind_ == ProblemKind::kQuadratic) return value(x);
  Eigen::Index total = 0;
  for (const Matrix& A : first_) total += A.rows();
  Matrix A(total, dim_);
  Vector b(total);
  Eigen::Index row = 0;
  for (int i = 0; i < n_clients(); ++i) {
    A.middleRows(row, first_[i].rows()) = first_[i];
    b.segment(row, first_[i].rows()) = second_[i];
    row += first_[i].rows();
  }
  return logistic_value(A, b, lambda_reg_, x);
}

Vector Problem::pooled_gradient(const Vector& x) const {
  if (kind_ == ProblemKind::kQuadratic) return gradient(x);
  Eigen::Index total = 0;
  for (const Matrix& A : first_) total += A.rows();
  Matrix A(total, dim_);
  Vector b(total);
  Eigen::Index row = 0;
  for (int i = 0; i < n_clients(); ++i) {
    A.middleRows(row, first_[i].rows()) = first_[i];
    b.segment(row, first_[i].rows()) = second_[i];
    row += first_[i].rows();
  }
  return logistic_gradient(A, b, lambda_reg_, x);
}

void Problem::export_csv(std::ostream& os) const {
  os.precision(17);
  if (kind_ == ProblemKind::kLogistic) {
    os << "client,label";
    for (int k = 0; k < dim_; ++k) os << ",a" << k;
    os << '\n';
    for (int i = 0; i < n_clients(); ++i) {
      for (Eigen::Index j = 0; j < first_[i].rows(); ++j) {
        os << i << ',' << second_[i][j];
        for (int k = 0; k < dim_; ++k) os << ',' << first_[i](j, k);
        os << '\n';
      }
    }
  } else {
    os << "client,row,center";
    for (int k = 0; k < dim_; ++k) os << ",q" << k;
    os << '\n';
    for (int i = 0; i < n_clients(); ++i) {
      for (int r = 0; r < dim_; ++r) {
        os << i << ',' << r << ',' << second_[i][r];
        for (int k = 0; k < dim_; ++k) os << ',' << first_[i](r, k);
        os << '\n';
      }
    }
  }
}

Problem generate_synthetic_logistic(const LogisticSpec& spec) {
  if (spec.n_clients < 1) throw ConfigError("problem.n_clients: must be positive");
  if (spec.dim < 1) throw ConfigError("problem.d: must be positive");
  if (spec.samples_per_client < 1) throw ConfigError("problem.samples_per_client: must be positive");
  if (!(spec.heterogeneity >= 0.0 && spec.heterogeneity <= 1.0))
    throw ConfigError("problem.heterogeneity: must lie in [0, 1]");
  if (!(spec.feature_scale_ratio >= 1.0))
    throw ConfigError("problem.feature_scale_ratio: must be >= 1");
  if (!(spec.lambda_reg >= 0.0)) throw ConfigError("problem.lambda_reg: must be >= 0");

  const int d = spec.dim;
  const int total = spec.n_clients * spec.samples_per_client;
  Stream rng(StreamFactory(spec.seed).derive(0, 0, Channel::kData));

  Vector scale(d);
  for (int k = 0; k < d; ++k)
    scale[k] = d == 1 ? 1.0 : std::pow(spec.feature_scale_ratio, -static_cast<double>(k) / (d - 1));
  // Planted weights share one scale, so with graded features the loss keeps a
  // sizeable share in low-curvature directions; the margin a^T w has std ~2.
  Vector w(d);
  const double w_scale = 2.0 / scale.norm();
  for (int k = 0; k < d; ++k) w[k] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * w_scale;

  Matrix A(total, d);
  Vector b(total);
  for (int j = 0; j < total; ++j) {
    for (int k = 0; k < d; ++k) A(j, k) = rng.normal() * scale[k];
    // Labels drawn from the logistic model itself, so classes overlap. Soft
    // labels keep the probability, which makes w the exact minimizer.
    const double p = sigmoid(A.row(j).dot(w));
    const double u = rng.uniform();
    b[j] = spec.soft_labels ? p : (u < p ? 1.0 : 0.0);
  }

  std::vector<double> key(total);
  for (int j = 0; j < total; ++j)
    key[j] = spec.heterogeneity * b[j] + (1.0 - spec.heterogeneity) * rng.uniform();
  std::vector<int> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&key](int l, int r) { return key[l] < key[r]; });

  std::vector<Matrix> features;
  std::vector<Vector> labels;
  for (int i = 0; i < spec.n_clients; ++i) {
    Matrix Ai(spec.samples_per_client, d);
    Vector bi(spec.samples_per_client);
    for (int j = 0; j < spec.samples_per_client; ++j) {
      const int src = order[i * spec.samples_per_client + j];
      Ai.row(j) = A.row(src);
      bi[j] = b[src];
    }
    features.push_back(std::move(Ai));
    labels.push_back(std::move(bi));
  }
  return Problem::logistic(std::move(features), std::move(labels), spec.lambda_reg);
}

Problem generate_synthetic_quadratic(const QuadraticSpec& spec) {
  if (spec.n_clients < 1) throw ConfigError("problem.n_clients: must be positive");
  if (spec.dim < 1) throw ConfigError("problem.d: must be positive");
  if (!(spec.L > 0.0)) throw ConfigError("problem.L: must be positive");
  if (!(spec.mu > 0.0 && spec.mu <= spec.L)) throw ConfigError("problem.mu: must lie in (0, L]");
  if (!(spec.heterogeneity >= 0.0)) throw ConfigError("problem.heterogeneity: must be >= 0");

  const int d = spec.dim;
  Stream rng(StreamFactory(spec.seed).derive(0, 0, Channel::kData));
  Matrix G(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) G(r, c) = rng.normal();
  const Matrix U = Eigen::HouseholderQR<Matrix>(G).householderQ();
  Vector eig(d);
  for (int k = 0; k < d; ++k)
    eig[k] = d == 1 ? spec.L : spec.L * std::pow(spec.mu / spec.L, static_cast<double>(k) / (d - 1));
  const Matrix Q = U * eig.asDiagonal() * U.transpose();
  const Matrix Qsym = 0.5 * (Q + Q.transpose());

  Vector common(d);
  for (int k = 0; k < d; ++k) common[k] = rng.normal() * spec.center_scale;
  std::vector<Matrix> hessians;
  std::vector<Vector> centers;
  for (int i = 0; i < spec.n_clients; ++i) {
    Vector c = common;
    for (int k = 0; k < d; ++k) c[k] += spec.heterogeneity * spec.center_scale * rng.normal();
    hessians.push_back(Qsym);
    centers.push_back(std::move(c));
  }
  return Problem::quadratic(std::move(hessians), std::move(centers));
}

Problem isotropic_quadratic(int n_clients, const Vector& center) {
  std::vector<Matrix> hessians(n_clients, Matrix::Identity(center.size(), center.size()));
  std::vector<Vector> centers(n_clients, center);
  return Problem::quadratic(std::move(hessians), std::move(centers));
}

Oracle::Oracle(const Problem& problem, double sigma2, int batch_size)
    : problem_(&problem), sigma2_(sigma2), batch_size_(batch_size) {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
    throw ConfigError("problem.sigma2: must be a finite nonnegative number");
  if (batch_size < 1) throw ConfigError("problem.batch_size: must be >= 1");
}

Vector Oracle::sample(int client, const Vector& x, Stream& rng) const {
  Vector g = problem_->client_gradient(client, x);
  if (sigma2_ == 0.0) return g;
  const double sd = std::sqrt(sigma2_ / (static_cast<double>(g.size()) * batch_size_));
  for (Eigen::Index k = 0; k < g.size(); ++k) g[k] += sd * rng.normal();
  return g;
}

double bregman(const Problem& problem, const Vector& x, const Vector& y) {
  return problem.value(y) - problem.value(x) - problem.gradient(x).dot(y - x);
}

ReferenceSolution solve_reference(const Problem& problem, double tolerance, int max_iterations) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("solve_reference: tolerance must be positive");
  Vector x = Vector::Zero(problem.dim());
  double fx = problem.value(x);
  for (int it = 0; it <= max_iterations; ++it) {
    const Vector g = problem.gradient(x);
    const double gn = g.norm();
    if (gn <= tolerance) return {x, fx, tolerance, gn, it};
    if (it == max_iterations) break;
    const Matrix H = problem.hessian(x);
    Vector dir = -H.ldlt().solve(g);
    double decrement = -g.dot(dir);
    if (!dir.allFinite() || !(decrement > 0.0)) {
      dir = -g / problem.smoothness();
      decrement = -g.dot(dir);
    }
    // Full steps once the Newton decrement is below function-value resolution.
    double step = 1.0;
    if (decrement > 1e-12 * (1.0 + std::abs(fx))) {
      while (step > 1e-10 && problem.value(x + step * dir) > fx - 1e-4 * step * decrement)
        step *= 0.5;
    }
    x += step * dir;
    fx = problem.value(x);
  }
  throw std::runtime_error("solve_reference: iteration cap reached before ||grad f|| <= " +
                           std::to_string(tolerance));
}

}  // namespace adef
