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

#include "adef/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "adef/algorithms.hpp"
#include "adef/compressors.hpp"
#include "adef/diagnostics.hpp"
#include "adef/problems.hpp"
#include "adef/rng.hpp"

namespace adef {

namespace {

std::string fmt(const char* format, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, format, a, b);
  return buf;
}

PropertyResult result(const std::string& suite, std::string property, bool ok, std::string detail) {
  return PropertyResult{suite, std::move(property), ok, std::move(detail)};
}

std::vector<Vector> gaussian_vectors(int count, int d, Stream& rng) {
  std::vector<Vector> out;
  for (int i = 0; i < count; ++i) {
    Vector x(d);
    for (int j = 0; j < d; ++j) x[j] = rng.normal();
    out.push_back(std::move(x));
  }
  return out;
}

// Small logistic instance shared by the trajectory suites.
Problem verification_problem(std::uint64_t seed) {
  LogisticSpec spec;
  spec.n_clients = 4;
  spec.dim = 10;
  spec.samples_per_client = 50;
  spec.heterogeneity = 0.5;
  spec.lambda_reg = 1e-3;
  spec.seed = seed;
  return generate_synthetic_logistic(spec);
}

RunTrace record(const Oracle& oracle, const MethodSpec& spec, std::uint64_t seed, int rounds) {
  const Vector x0 = Vector::Zero(oracle.problem().dim());
  Simulation sim(oracle, spec, x0, seed);
  RunTrace tr;
  tr.method = spec.method;
  tr.n_clients = oracle.problem().n_clients();
  tr.dim = oracle.problem().dim();
  tr.x0 = sim.server().x;
  tr.v0 = sim.server().v;
  tr.setup = sim.setup_cost();
  tr.has_memories = method_has_memories(spec.method);
  for (int t = 0; t < rounds; ++t) tr.rounds.push_back(sim.step());
  return tr;
}

// Largest per-coordinate gap between the x and v sequences of two traces.
double max_gap(const RunTrace& a, const RunTrace& b) {
  double gap = 0.0;
  const std::size_t n = std::min(a.rounds.size(), b.rounds.size());
  if (a.rounds.size() != b.rounds.size()) return INFINITY;
  for (std::size_t t = 0; t < n; ++t) {
    gap = std::max(gap, (a.rounds[t].x_next - b.rounds[t].x_next).cwiseAbs().maxCoeff());
    gap = std::max(gap, (a.rounds[t].v_next - b.rounds[t].v_next).cwiseAbs().maxCoeff());
  }
  return gap;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"contractivity", "error-identity",
                                              "lossless-reduction", "rate-fit-synthetic"};
  return names;
}

std::vector<PropertyResult> run_suite(const std::string& name, std::uint64_t seed) {
  if (name == "contractivity") return verify_contractivity(seed);
  if (name == "error-identity") return verify_error_identity(seed);
  if (name == "lossless-reduction") return verify_lossless_reduction(seed);
  if (name == "rate-fit-synthetic") return verify_rate_fit_synthetic(seed);
  if (name == "all") {
    std::vector<PropertyResult> out;
    for (const std::string& s : suite_names()) {
      auto part = run_suite(s, seed);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  throw std::invalid_argument("unknown verify suite '" + name + "'");
}

std::vector<PropertyResult> verify_contractivity(std::uint64_t seed) {
  const std::string suite = "contractivity";
  constexpr int d = 50;
  std::vector<PropertyResult> out;
  Stream data(StreamFactory(seed).derive(0, 0, Channel::kData));
  const std::vector<Vector> xs = gaussian_vectors(100, d, data);
  Stream rng(StreamFactory(seed).derive(1, 0, Channel::kFeedback));

  for (int k : {1, 5, 25}) {
    const double bound = 1.0 - static_cast<double>(k) / d;
    // Top-K is deterministic, so the bound must hold on every call.
    double worst = -INFINITY;
    for (const Vector& x : xs) {
      const Vector c = compress(top_k(k), x, rng).output;
      worst = std::max(worst, (c - x).squaredNorm() - bound * x.squaredNorm());
    }
    out.push_back(result(suite, "topk k=" + std::to_string(k) + " per-call bound", worst <= 0.0,
                         fmt("max excess %.3e", worst)));

    // Rand-K: mean ratio over 2000 draws, one-sided 3 standard error check.
    constexpr int samples = 2000;
    double sum = 0.0, sum_sq = 0.0;
    for (int s = 0; s < samples; ++s) {
      const Vector& x = xs[static_cast<std::size_t>(s) % xs.size()];
      const double r = (compress(rand_k(k), x, rng).output - x).squaredNorm() / x.squaredNorm();
      sum += r;
      sum_sq += r * r;
    }
    const double mean = sum / samples;
    const double var = std::max(0.0, sum_sq / samples - mean * mean) * samples / (samples - 1.0);
    const double se = std::sqrt(var / samples);
    out.push_back(result(suite, "randk k=" + std::to_string(k) + " mean bound",
                         mean <= bound + 3.0 * se, fmt("mean %.5f bound %.5f", mean, bound)));
  }

  // Repeated Top-K: residual contracts by (1-k/d)^R per call.
  {
    const CompressorSpec rep = repeated(top_k(5), 3);
    const double bound = std::pow(1.0 - 5.0 / d, 3);
    double worst = -INFINITY;
    for (const Vector& x : xs)
      worst = std::max(worst, (compress(rep, x, rng).output - x).squaredNorm() - bound * x.squaredNorm());
    out.push_back(result(suite, "repeated topk per-call bound", worst <= 1e-12,
                         fmt("max excess %.3e", worst)));
  }
  {
    double worst = 0.0;
    for (const Vector& x : xs) worst = std::max(worst, (compress(identity(), x, rng).output - x).norm());
    out.push_back(result(suite, "identity exact", worst == 0.0, fmt("max error %.3e", worst)));
  }
  // Absolute compressors: error radius independent of the input scale.
  for (double scale : {1e-2, 1.0, 1e3}) {
    const CompressorSpec round = absolute_round(0.1);
    const CompressorSpec thr = absolute_threshold(0.1);
    const double r_round = contraction_parameter(round, d).value;
    const double r_thr = contraction_parameter(thr, d).value;
    double worst_round = 0.0, worst_thr = 0.0;
    for (const Vector& x : xs) {
      const Vector y = scale * x;
      worst_round = std::max(worst_round, (compress(round, y, rng).output - y).norm());
      worst_thr = std::max(worst_thr, (compress(thr, y, rng).output - y).norm());
    }
    out.push_back(result(suite, fmt("rounding error radius at scale %g", scale),
                         worst_round <= r_round * (1 + 1e-12), fmt("max %.4e radius %.4e", worst_round, r_round)));
    out.push_back(result(suite, fmt("threshold error radius at scale %g", scale),
                         worst_thr <= r_thr * (1 + 1e-12), fmt("max %.4e radius %.4e", worst_thr, r_thr)));
  }
  return out;
}

std::vector<PropertyResult> verify_error_identity(std::uint64_t seed) {
  const std::string suite = "error-identity";
  std::vector<PropertyResult> out;
  const Problem problem = verification_problem(seed);
  const CompressorSpec topk = top_k(1);
  const double delta = contraction_parameter(topk, problem.dim()).value;
  for (double sigma2 : {0.0, 1.0}) {
    const Oracle oracle(problem, sigma2);
    const std::vector<MethodSpec> specs{
        {Method::kAdef, topk, StepSchedule::experiment_gamma(0.05, delta)},
        {Method::kVanillaAccEf, topk, StepSchedule::experiment_gamma(0.05, delta)},
        {Method::kEf, topk, StepSchedule::constant(0.5)}};
    for (const MethodSpec& spec : specs) {
      const RunTrace tr = record(oracle, spec, seed, 200);
      const std::vector<double> res = error_identity_residuals(tr);
      const double worst = res.empty() ? INFINITY : *std::max_element(res.begin(), res.end());
      out.push_back(result(suite, to_string(spec.method) + fmt(" sigma2=%g", sigma2),
                           res.size() == 200 && worst <= 1e-9, fmt("max relative residual %.3e", worst)));
    }
  }
  return out;
}

std::vector<PropertyResult> verify_lossless_reduction(std::uint64_t seed) {
  const std::string suite = "lossless-reduction";
  std::vector<PropertyResult> out;
  const Problem problem = verification_problem(seed);
  const StepSchedule schedule = StepSchedule::experiment_gamma(0.05, 1.0);
  for (double sigma2 : {0.0, 1.0}) {
    const Oracle oracle(problem, sigma2);
    const RunTrace base = record(oracle, {Method::kAccSgd, identity(), schedule}, seed, 500);
    for (Method m : {Method::kAdef, Method::kVanillaAccEf, Method::kNeolithic}) {
      const RunTrace tr = record(oracle, {m, identity(), schedule}, seed, 500);
      const double gap = max_gap(tr, base);
      out.push_back(result(suite, to_string(m) + " identity" + fmt(" sigma2=%g", sigma2), gap <= 1e-12,
                           fmt("max coordinate gap %.3e", gap)));
    }
    // Repeating Top-K ceil(d/k) times transmits the vector exactly.
    const int d = problem.dim();
    for (int k : {1, 3}) {
      const int R = (d + k - 1) / k;
      const RunTrace tr = record(oracle, {Method::kNeolithic, repeated(top_k(k), R), schedule}, seed, 200);
      RunTrace ref = base;
      ref.rounds.resize(200);
      const double gap = max_gap(tr, ref);
      bool messages_ok = true;
      for (const RoundTrace& r : tr.rounds)
        messages_ok = messages_ok && r.comm.messages == static_cast<std::int64_t>(R) * problem.n_clients();
      out.push_back(result(suite, "neolithic topk k=" + std::to_string(k) + fmt(" R=%g sigma2=%g", R, sigma2),
                           gap <= 1e-12 && messages_ok,
                           fmt("max coordinate gap %.3e, messages per client per round ok=%g", gap,
                               messages_ok ? 1.0 : 0.0)));
    }
  }
  return out;
}

std::vector<PropertyResult> verify_rate_fit_synthetic(std::uint64_t seed) {
  const std::string suite = "rate-fit-synthetic";
  std::vector<PropertyResult> out;
  Stream rng(StreamFactory(seed).derive(0, 0, Channel::kData));
  const double c = 0.5 + 10.0 * rng.uniform();
  for (double p : {1.0, 2.0, 0.5}) {
    std::vector<double> t, F;
    for (int i = 1; i <= 500; ++i) {
      t.push_back(i);
      F.push_back(c / std::pow(i, p));
    }
    const RateFit fit = fit_rate(t, F, 10, 500);
    out.push_back(result(suite, fmt("c/t^%g slope", p), std::abs(fit.slope + p) < 1e-6,
                         fmt("slope %.9f r2 %.9f", fit.slope, fit.r2)));
  }
  return out;
}

}  // namespace adef
