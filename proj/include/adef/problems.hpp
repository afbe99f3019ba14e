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

#ifndef ADEF_PROBLEMS_HPP
#define ADEF_PROBLEMS_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "adef/rng.hpp"
#include "adef/types.hpp"

namespace adef {

enum class ProblemKind { kLogistic, kQuadratic };

/// Distributed objective f(x) = (1/n) sum_i f_i(x).
///
/// Logistic clients hold rows a_j with labels b_j in [0,1] and use
///   f_i(x) = (1/m_i) sum_j [ -b_j a_j^T x + log(1 + exp(a_j^T x)) ] + (lambda/2)||x||^2.
/// Quadratic clients hold (Q_i, c_i) with f_i(x) = 1/2 (x - c_i)^T Q_i (x - c_i).
///
/// Immutable after construction.
class Problem {
 public:
  static Problem logistic(std::vector<Matrix> features, std::vector<Vector> labels,
                          double lambda_reg);
  static Problem quadratic(std::vector<Matrix> hessians, std::vector<Vector> centers);

  ProblemKind kind() const { return kind_; }
  int n_clients() const { return static_cast<int>(first_.size()); }
  int dim() const { return dim_; }
  double lambda_reg() const { return lambda_reg_; }

  double client_value(int i, const Vector& x) const;
  Vector client_gradient(int i, const Vector& x) const;
  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  Matrix hessian(const Vector& x) const;

  // Direct evaluation on the pooled dataset (sample-weighted). Equals value()
  // when all clients hold the same number of samples.
  double pooled_value(const Vector& x) const;
  Vector pooled_gradient(const Vector& x) const;

  /// Upper bound on the Lipschitz constant of grad f.
  double smoothness() const { return smoothness_; }
  /// max_i L_i, which bounds the averaged client smoothness constant.
  double client_smoothness() const { return client_smoothness_; }

  // Logistic: features / labels. Quadratic: hessian / center.
  const Matrix& client_matrix(int i) const { return first_.at(i); }
  const Vector& client_vector(int i) const { return second_.at(i); }

  void export_csv(std::ostream& os) const;

 private:
  Problem() = default;
  void check_client(int i) const;
  void compute_constants();

  ProblemKind kind_ = ProblemKind::kLogistic;
  int dim_ = 0;
  double lambda_reg_ = 0.0;
  std::vector<Matrix> first_;
  std::vector<Vector> second_;
  double smoothness_ = 0.0;
  double client_smoothness_ = 0.0;
};

struct LogisticSpec {
  int n_clients = 4;
  int dim = 10;
  int samples_per_client = 50;
  double heterogeneity = 0.0;  // 0: uniform shuffle, 1: sorted by label
  double lambda_reg = 1e-6;
  // Feature k is scaled by ratio^{-k/(d-1)}; 1 gives isotropic features.
  double feature_scale_ratio = 1.0;
  // Use P(b=1 | a) as the label instead of a Bernoulli draw; with lambda_reg = 0
  // the planted weights are then the exact minimizer.
  bool soft_labels = false;
  std::uint64_t seed = 0;
};

Problem generate_synthetic_logistic(const LogisticSpec& spec);

struct QuadraticSpec {
  int n_clients = 4;
  int dim = 10;
  double L = 1.0;   // largest Hessian eigenvalue
  double mu = 1e-3; // smallest Hessian eigenvalue
  double heterogeneity = 0.0;  // spread of client centers around the common one
  double center_scale = 1.0;
  std::uint64_t seed = 0;
};

Problem generate_synthetic_quadratic(const QuadraticSpec& spec);

// f_i(x) = 1/2 ||x - c||^2 on every client.
Problem isotropic_quadratic(int n_clients, const Vector& center);

/// Gaussian additive noise oracle: g_i(x) = grad f_i(x) + zeta with
/// zeta ~ N(0, sigma2 / (d * batch) I), so E||zeta||^2 = sigma2 / batch.
class Oracle {
 public:
  Oracle(const Problem& problem, double sigma2, int batch_size = 1);

  const Problem& problem() const { return *problem_; }
  double sigma2() const { return sigma2_; }
  int batch_size() const { return batch_size_; }

  Vector sample(int client, const Vector& x, Stream& rng) const;

 private:
  const Problem* problem_;
  double sigma2_;
  int batch_size_;
};

double bregman(const Problem& problem, const Vector& x, const Vector& y);

struct ReferenceSolution {
  Vector x_star;
  double f_star = 0.0;
  double solve_tolerance = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
};

// Damped Newton from the origin until ||grad f|| <= tolerance.
// Throws std::runtime_error when max_iterations is exceeded.
ReferenceSolution solve_reference(const Problem& problem, double tolerance,
                                  int max_iterations = 200);

}  // namespace adef

#endif  // ADEF_PROBLEMS_HPP
