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

#include <array>
#include <cmath>

#include "adef/algorithms.hpp"
#include "adef/diagnostics.hpp"
#include "doctest.h"

using adef::Matrix;
using adef::Method;
using adef::StepSchedule;
using adef::Vector;

namespace {

using V2 = std::array<double, 2>;

// Brute-force two-dimensional model of the round equations, written without
// the library: f(x) = 1/2 (x - c)^T Q (x - c), one client, Top-1.
struct Model {
  double q00 = 2.0, q01 = 0.5, q11 = 1.0;
  V2 c{1.0, -1.0};

  V2 grad(const V2& x) const {
    const double u = x[0] - c[0], w = x[1] - c[1];
    return {q00 * u + q01 * w, q01 * u + q11 * w};
  }
  static V2 top1(const V2& z) {
    return std::abs(z[0]) >= std::abs(z[1]) ? V2{z[0], 0.0} : V2{0.0, z[1]};
  }
};

adef::Problem model_problem() {
  Matrix Q(2, 2);
  Q << 2.0, 0.5, 0.5, 1.0;
  Vector c(2);
  c << 1.0, -1.0;
  return adef::Problem::quadratic({Q}, {c});
}

V2 to2(const Vector& v) { return {v[0], v[1]}; }

adef::Problem logistic(std::uint64_t seed, int n = 4, int d = 10) {
  adef::LogisticSpec s;
  s.n_clients = n;
  s.dim = d;
  s.samples_per_client = 30;
  s.heterogeneity = 0.7;
  s.lambda_reg = 1e-3;
  s.seed = seed;
  return adef::generate_synthetic_logistic(s);
}

adef::RunTrace run(const adef::Oracle& oracle, const adef::MethodSpec& spec, std::uint64_t seed,
                   int rounds) {
  adef::Simulation sim(oracle, spec, Vector::Zero(oracle.problem().dim()), seed);
  adef::RunTrace tr;
  tr.method = spec.method;
  tr.dim = oracle.problem().dim();
  tr.n_clients = oracle.problem().n_clients();
  tr.has_memories = adef::method_has_memories(spec.method);
  tr.setup = sim.setup_cost();
  for (int t = 0; t < rounds; ++t) tr.rounds.push_back(sim.step());
  return tr;
}

double max_gap(const adef::RunTrace& a, const adef::RunTrace& b) {
  double gap = 0.0;
  for (std::size_t t = 0; t < a.rounds.size(); ++t) {
    gap = std::max(gap, (a.rounds[t].x_next - b.rounds[t].x_next).cwiseAbs().maxCoeff());
    gap = std::max(gap, (a.rounds[t].v_next - b.rounds[t].v_next).cwiseAbs().maxCoeff());
  }
  return gap;
}

}  // namespace

TEST_CASE("accelerated step by hand") {
  // x0 = v0 = 1, A0 = 0, a1 = 1: y0 = v0, v1 = v0 - ghat, x1 = v1.
  Vector one = Vector::Ones(1);
  const auto s = StepSchedule::custom({1.0, 1.0}, 0.0);
  auto server = adef::make_server(one, one, s);
  adef::prepare_round(server, s);
  CHECK(server.y[0] == 1.0);
  adef::acc_step(server, s, one);
  CHECK(server.v[0] == 0.0);
  CHECK(server.x[0] == 0.0);
  CHECK(server.A == 1.0);
  // Second round: A1 = 1, a2 = 1, y1 = (x1 + v1)/2 = 0, v2 = -2, x2 = (0 + -2)/2.
  adef::prepare_round(server, s);
  CHECK(server.y[0] == 0.0);
  adef::acc_step(server, s, 2.0 * one);
  CHECK(server.v[0] == -2.0);
  CHECK(server.x[0] == -1.0);
}

TEST_CASE("ADEF rounds match a brute-force trace") {
  const auto problem = model_problem();
  const adef::Oracle oracle(problem, 0.0);
  const auto sched = StepSchedule::experiment_gamma(0.1, 0.5);
  adef::Simulation sim(oracle, {Method::kAdef, adef::top_k(1), sched}, Vector::Zero(2), 0);

  const Model m;
  V2 x{0, 0}, v{0, 0}, e{0, 0};
  double A = sched.A0();
  // Setup: uncompressed gradient at y0 = x0.
  V2 gt_client = m.grad(x), gt_server = gt_client;
  CHECK(sim.setup_cost() == adef::CommCost{2, 0, 1});
  for (int t = 1; t <= 8; ++t) {
    const double a = sched.a(t), An = A + a;
    const V2 y{A / An * x[0] + a / An * v[0], A / An * x[1] + a / An * v[1]};
    const V2 g = m.grad(y);
    const V2 dtil = Model::top1({g[0] - gt_client[0], g[1] - gt_client[1]});
    gt_client = {gt_client[0] + dtil[0], gt_client[1] + dtil[1]};
    const V2 delta{g[0] - gt_client[0] - e[0] / a, g[1] - gt_client[1] - e[1] / a};
    const V2 D = Model::top1(delta);
    e = {a * (D[0] - delta[0]), a * (D[1] - delta[1])};
    gt_server = {gt_server[0] + dtil[0], gt_server[1] + dtil[1]};
    const V2 ghat{gt_server[0] + D[0], gt_server[1] + D[1]};
    v = {v[0] - a * ghat[0], v[1] - a * ghat[1]};
    x = {A / An * x[0] + a / An * v[0], A / An * x[1] + a / An * v[1]};
    A = An;

    const adef::RoundTrace r = sim.step();
    CHECK(r.comm == adef::CommCost{2, 2, 2});
    for (int k = 0; k < 2; ++k) {
      CHECK(r.x_next[k] == doctest::Approx(x[k]).epsilon(1e-14));
      CHECK(r.v_next[k] == doctest::Approx(v[k]).epsilon(1e-14));
      CHECK(r.ghat[k] == doctest::Approx(ghat[k]).epsilon(1e-14));
      CHECK(sim.clients()[0].e[k] == doctest::Approx(e[k]).epsilon(1e-14));
    }
  }
}

TEST_CASE("vanilla accelerated EF matches the residual-sign form of the recursion") {
  // Literal form: ghat = C(e/a + g), e' = e + a (g - ghat).
  const auto problem = model_problem();
  const adef::Oracle oracle(problem, 0.0);
  const auto sched = StepSchedule::experiment_gamma(0.1, 0.5);
  adef::Simulation sim(oracle, {Method::kVanillaAccEf, adef::top_k(1), sched}, Vector::Zero(2), 0);
  const Model m;
  V2 x{0, 0}, v{0, 0}, e{0, 0};
  double A = sched.A0();
  for (int t = 1; t <= 8; ++t) {
    const double a = sched.a(t), An = A + a;
    const V2 y{A / An * x[0] + a / An * v[0], A / An * x[1] + a / An * v[1]};
    const V2 g = m.grad(y);
    const V2 ghat = Model::top1({e[0] / a + g[0], e[1] / a + g[1]});
    e = {e[0] + a * (g[0] - ghat[0]), e[1] + a * (g[1] - ghat[1])};
    v = {v[0] - a * ghat[0], v[1] - a * ghat[1]};
    x = {A / An * x[0] + a / An * v[0], A / An * x[1] + a / An * v[1]};
    A = An;

    const adef::RoundTrace r = sim.step();
    CHECK(r.comm == adef::CommCost{1, 1, 1});
    for (int k = 0; k < 2; ++k) {
      CHECK(r.x_next[k] == doctest::Approx(x[k]).epsilon(1e-14));
      CHECK(r.v_next[k] == doctest::Approx(v[k]).epsilon(1e-14));
      // Library memory carries the opposite sign.
      CHECK(sim.clients()[0].e[k] == doctest::Approx(-e[k]).epsilon(1e-14));
    }
  }
}

TEST_CASE("unaccelerated EF matches a brute-force trace") {
  const auto problem = model_problem();
  const adef::Oracle oracle(problem, 0.0);
  const double eta = 0.3;
  adef::Simulation sim(oracle, {Method::kEf, adef::top_k(1), StepSchedule::constant(eta)},
                       Vector::Zero(2), 0);
  const Model m;
  V2 x{0, 0}, e{0, 0};
  for (int t = 1; t <= 8; ++t) {
    const V2 g = m.grad(x);
    const V2 z{e[0] + eta * g[0], e[1] + eta * g[1]};
    const V2 p = Model::top1(z);
    e = {z[0] - p[0], z[1] - p[1]};
    x = {x[0] - p[0], x[1] - p[1]};
    const adef::RoundTrace r = sim.step();
    CHECK(r.x_next[0] == doctest::Approx(x[0]).epsilon(1e-14));
    CHECK(r.x_next[1] == doctest::Approx(x[1]).epsilon(1e-14));
  }
}

TEST_CASE("ADEF setup costs one uncompressed vector per client") {
  const auto p = logistic(1, 5, 7);
  const adef::Oracle oracle(p, 1.0);
  adef::Simulation sim(oracle, {Method::kAdef, adef::top_k(2), StepSchedule::experiment_gamma(0.05, 0.3)},
                       Vector::Zero(7), 3);
  CHECK(sim.setup_cost() == adef::CommCost{35, 0, 5});
  const adef::RoundTrace r = sim.step();
  CHECK(r.comm == adef::CommCost{20, 20, 10});
  // Server and client control variates stay synchronized.
  Vector avg = Vector::Zero(7);
  for (const auto& c : sim.clients()) avg += c.g_tilde;
  CHECK((sim.server().g_tilde - avg / 5).norm() <= 1e-12);
}

TEST_CASE("error identity holds for every method with local memories") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto p = logistic(seed);
    for (double sigma2 : {0.0, 2.0}) {
      const adef::Oracle oracle(p, sigma2);
      for (const adef::MethodSpec& spec :
           {adef::MethodSpec{Method::kAdef, adef::rand_k(2), StepSchedule::experiment_gamma(0.05, 0.2)},
            adef::MethodSpec{Method::kVanillaAccEf, adef::top_k(1), StepSchedule::theorem_vanilla(30.0, 0.1)},
            adef::MethodSpec{Method::kEf, adef::rand_k(3), StepSchedule::constant(0.2)}}) {
        const auto tr = run(oracle, spec, seed, 60);
        const auto res = adef::error_identity_residuals(tr);
        REQUIRE(res.size() == 60);
        for (double r : res) CHECK(r <= 1e-9);
      }
    }
  }
}

TEST_CASE("identity compressor reduces the compressed methods to accelerated SGD") {
  const auto p = logistic(4);
  const auto sched = StepSchedule::experiment_gamma(0.05, 1.0);
  for (double sigma2 : {0.0, 3.0}) {
    const adef::Oracle oracle(p, sigma2);
    const auto base = run(oracle, {Method::kAccSgd, adef::identity(), sched}, 9, 100);
    for (Method m : {Method::kAdef, Method::kVanillaAccEf, Method::kNeolithic})
      CHECK(max_gap(run(oracle, {m, adef::identity(), sched}, 9, 100), base) <= 1e-12);
  }
}

TEST_CASE("same seed gives identical trajectories, different seeds differ") {
  const auto p = logistic(5);
  const adef::Oracle oracle(p, 1.0);
  const adef::MethodSpec spec{Method::kAdef, adef::rand_k(2), StepSchedule::experiment_gamma(0.05, 0.2)};
  const auto a = run(oracle, spec, 11, 30), b = run(oracle, spec, 11, 30), c = run(oracle, spec, 12, 30);
  CHECK(max_gap(a, b) == 0.0);
  CHECK(max_gap(a, c) > 0.0);
}

TEST_CASE("oracle noise is shared across methods with the same seed") {
  const auto p = logistic(6);
  const adef::Oracle oracle(p, 4.0);
  const auto sched = StepSchedule::experiment_gamma(0.05, 0.1);
  const auto a = run(oracle, {Method::kAdef, adef::top_k(1), sched}, 3, 1);
  const auto b = run(oracle, {Method::kAccSgd, adef::identity(), sched}, 3, 1);
  // Both evaluate at y_0 = x_0 in round 0.
  CHECK((a.rounds[0].gbar - b.rounds[0].gbar).norm() == 0.0);
}

TEST_CASE("non-contractive compressor is rejected for error-feedback methods") {
  const auto p = logistic(7);
  const adef::Oracle oracle(p, 0.0);
  CHECK_THROWS_AS(adef::Simulation(oracle, {Method::kAdef, adef::absolute_round(0.1),
                                            StepSchedule::constant(0.1)},
                                   Vector::Zero(10), 0),
                  adef::ConfigError);
  CHECK_NOTHROW(adef::Simulation(oracle, {Method::kAbsoluteAcc, adef::absolute_round(0.1),
                                          StepSchedule::theorem_absolute(10.0)},
                                 Vector::Zero(10), 0));
}

TEST_CASE("theorem M branches match direct evaluation") {
  adef::ProblemConstants c;
  c.L = 2.0;
  c.ell = 3.0;
  c.sigma2 = 0.5;
  c.zeta2 = 0.25;
  c.R0_sq = 4.0;
  c.n = 8;
  const int T = 100;
  const double delta = 0.2;

  const auto adef_b = adef::theorem_M_branches(Method::kAdef, c, delta, T);
  REQUIRE(adef_b.size() == 3);
  CHECK(adef_b[0] == doctest::Approx(8192.0 * 3.0 / 0.0016));
  CHECK(adef_b[1] == doctest::Approx(std::sqrt(4.0 * 100 * 260.0 * 260.0 * 0.5 / (4.0 * 8))));
  CHECK(adef_b[2] == doctest::Approx(8.0 * std::pow(2.0 * 100 * std::pow(260.0, 3) * 0.5 / (0.0016 * 4.0), 1.0 / 3)));

  const auto van = adef::theorem_M_branches(Method::kVanillaAccEf, c, delta, T);
  REQUIRE(van.size() == 3);
  CHECK(van[0] == doctest::Approx(40.0 * 2.0 * 120.0 / 0.2));
  CHECK(van[1] == doctest::Approx(std::sqrt(4.0 * 100 * 120.0 * 120.0 * 0.5 / (4.0 * 8))));
  CHECK(van[2] == doctest::Approx(std::pow(544.0 * 2.0 * (1.0 + 0.1) * 100 * std::pow(120.0, 3) / (0.04 * 4.0), 1.0 / 3)));

  const double Delta = 0.3;
  const auto abs_b = adef::theorem_M_branches(Method::kAbsoluteAcc, c, Delta, T);
  REQUIRE(abs_b.size() == 3);
  CHECK(abs_b[0] == doctest::Approx(48.0));
  CHECK(abs_b[1] == doctest::Approx(std::sqrt(4.0 * 1e6 * 0.5 / (8 * 4.0))));
  CHECK(abs_b[2] == doctest::Approx(std::pow(2.0 * 2.0 * 0.09 * 116.0 * 1e10 / 4.0, 1.0 / 3)));

  const auto neo = adef::theorem_M_branches(Method::kNeolithic, c, delta, T);
  REQUIRE(neo.size() == 2);
  CHECK(neo[1] == doctest::Approx(std::sqrt(12.0 * 1e6 * 0.5 / (8 * 4.0))));

  CHECK(adef::theorem_M(Method::kVanillaAccEf, c, delta, T) ==
        doctest::Approx(std::max({van[0], van[1], van[2]})));
  CHECK_THROWS(adef::theorem_M_branches(Method::kEf, c, delta, T));
}

TEST_CASE("neolithic round count") {
  // max{4/0.5 ln 100, ln(4*2*1e4/3)/0.5} = max{36.84, 20.38}
  CHECK(adef::neolithic_rounds(0.5, 100, 2, 0.0, 0.0) == 37);
  // zeta2/sigma2 large enough for the third term to dominate.
  const double third = std::log(4.0 * 2 * 1e8 * 1e4 / 3.0) / 0.5;
  CHECK(adef::neolithic_rounds(0.5, 100, 2, 1.0, 1e8) == static_cast<int>(std::ceil(third)));
}

TEST_CASE("theorem schedule pairs with its method") {
  CHECK(adef::theorem_schedule(Method::kAdef, 10.0, 0.5).kind() == StepSchedule::Kind::kTheoremAdef);
  CHECK(adef::theorem_schedule(Method::kNeolithic, 10.0, 0.5).kind() ==
        StepSchedule::Kind::kTheoremAbsolute);
  CHECK_THROWS_AS(adef::theorem_schedule(Method::kEf, 1.0, 1.0), adef::ConfigError);
}

TEST_CASE("method names round-trip") {
  for (Method m : {Method::kAdef, Method::kVanillaAccEf, Method::kEf, Method::kNeolithic,
                   Method::kAbsoluteAcc, Method::kAccSgd})
    CHECK(adef::method_from_string(adef::to_string(m)) == m);
  CHECK_THROWS_AS(adef::method_from_string("sgd"), adef::ConfigError);
}
