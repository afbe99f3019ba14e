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

#include "adef/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace adef {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

RoundTrace begin_trace(const ServerState& server) {
  RoundTrace tr;
  tr.t = server.t;
  tr.a = server.a_next;
  tr.A_next = server.A_next;
  return tr;
}

void finish_trace(RoundTrace& tr, const ServerState& server) {
  tr.x_next = server.x;
  tr.v_next = server.v;
}

void record_memories(RoundTrace& tr, const std::vector<ClientState>& clients, double sign) {
  const auto n = static_cast<double>(clients.size());
  Vector avg = Vector::Zero(clients.front().e.size());
  double ebar = 0.0;
  for (const ClientState& c : clients) {
    avg += c.e;
    ebar += c.e.squaredNorm();
  }
  tr.avg_e_next = sign * avg / n;
  tr.Ebar_next = ebar / n;
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::kAdef:
      return "adef";
    case Method::kVanillaAccEf:
      return "vanilla_acc_ef";
    case Method::kEf:
      return "ef";
    case Method::kNeolithic:
      return "neolithic";
    case Method::kAbsoluteAcc:
      return "absolute_acc";
    case Method::kAccSgd:
      return "acc_sgd";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  for (Method m : {Method::kAdef, Method::kVanillaAccEf, Method::kEf, Method::kNeolithic,
                   Method::kAbsoluteAcc, Method::kAccSgd}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("method: unknown method '" + name + "'");
}

ServerState make_server(const Vector& x0, const Vector& v0, const StepSchedule& schedule) {
  require_finite(x0, "make_server");
  require_dim(v0, x0.size(), "make_server");
  ServerState s;
  s.x = x0;
  s.v = v0;
  s.y = x0;
  s.A = schedule.A0();
  s.g_tilde = Vector::Zero(x0.size());
  return s;
}

std::vector<ClientState> make_clients(int n, int d) {
  return std::vector<ClientState>(n, ClientState{Vector::Zero(d), Vector::Zero(d)});
}

void prepare_round(ServerState& server, const StepSchedule& schedule) {
  server.a_next = schedule.a(server.t + 1);
  server.A_next = server.A + server.a_next;
  server.y = (server.A / server.A_next) * server.x + (server.a_next / server.A_next) * server.v;
}

void acc_step(ServerState& server, const StepSchedule& schedule, const Vector& ghat) {
  require_finite(ghat, "acc_step");
  const double a = schedule.a(server.t + 1);
  const double A_next = server.A + a;
  server.v -= a * ghat;
  server.x = (server.A / A_next) * server.x + (a / A_next) * server.v;
  server.A = A_next;
  ++server.t;
}

CommCost adef_setup(ServerState& server, std::vector<ClientState>& clients, const Oracle& oracle,
                    const StepSchedule& schedule, const StreamFactory& streams) {
  prepare_round(server, schedule);
  const int n = static_cast<int>(clients.size());
  const auto d = static_cast<std::int64_t>(server.x.size());
  Vector sum = Vector::Zero(d);
  CommCost cost;
  for (int i = 0; i < n; ++i) {
    Stream rng = streams.stream(i, 0, Channel::kSetup);
    clients[i].g_tilde = oracle.sample(i, server.y, rng);
    clients[i].e.setZero();
    sum += clients[i].g_tilde;
    cost += CommCost{d, 0, 1};
  }
  server.g_tilde = sum / n;
  return cost;
}

RoundTrace adef_round(ServerState& server, std::vector<ClientState>& clients,
                      const Oracle& oracle, const CompressorSpec& compressor,
                      const StepSchedule& schedule, const StreamFactory& streams) {
  prepare_round(server, schedule);
  RoundTrace tr = begin_trace(server);
  const double a = server.a_next;
  const int n = static_cast<int>(clients.size());
  const auto d = server.x.size();
  Vector sum_control = Vector::Zero(d);
  Vector sum_feedback = Vector::Zero(d);
  tr.gbar = Vector::Zero(d);
  for (int i = 0; i < n; ++i) {
    ClientState& c = clients[i];
    Stream noise = streams.stream(i, server.t, Channel::kOracle);
    const Vector g = oracle.sample(i, server.y, noise);

    // gradient-difference compression of the control variate
    Stream control_rng = streams.stream(i, server.t, Channel::kControl);
    CompressionResult control = compress(compressor, g - c.g_tilde, control_rng);
    c.g_tilde += control.output;

    // error feedback around the control variate
    const Vector delta = g - c.g_tilde - c.e / a;
    Stream feedback_rng = streams.stream(i, server.t, Channel::kFeedback);
    CompressionResult feedback = compress(compressor, delta, feedback_rng);
    c.e = a * (feedback.output - delta);

    sum_control += control.output;
    sum_feedback += feedback.output;
    tr.gbar += g;
    tr.H += (g - c.g_tilde).squaredNorm();
    tr.comm += control.cost;
    tr.comm += feedback.cost;
  }
  tr.gbar /= n;
  tr.H /= n;
  server.g_tilde += sum_control / n;
  tr.ghat = server.g_tilde + sum_feedback / n;
  acc_step(server, schedule, tr.ghat);
  record_memories(tr, clients, 1.0);
  finish_trace(tr, server);
  return tr;
}

RoundTrace vanilla_acc_ef_round(ServerState& server, std::vector<ClientState>& clients,
                                const Oracle& oracle, const CompressorSpec& compressor,
                                const StepSchedule& schedule, const StreamFactory& streams) {
  prepare_round(server, schedule);
  RoundTrace tr = begin_trace(server);
  const double a = server.a_next;
  const int n = static_cast<int>(clients.size());
  const auto d = server.x.size();
  Vector sum = Vector::Zero(d);
  tr.gbar = Vector::Zero(d);
  for (int i = 0; i < n; ++i) {
    ClientState& c = clients[i];
    Stream noise = streams.stream(i, server.t, Channel::kOracle);
    const Vector g = oracle.sample(i, server.y, noise);
    // e holds sum_j a_{j+1} (ghat_j^i - g_j^i), i.e. the negated residual, so
    // the message is C(g - e/a) and the memory grows by a (ghat^i - g).
    Stream rng = streams.stream(i, server.t, Channel::kFeedback);
    CompressionResult msg = compress(compressor, g - c.e / a, rng);
    c.e += a * (msg.output - g);

    sum += msg.output;
    tr.gbar += g;
    tr.H += g.squaredNorm();
    tr.comm += msg.cost;
  }
  tr.gbar /= n;
  tr.H /= n;
  tr.ghat = sum / n;
  acc_step(server, schedule, tr.ghat);
  record_memories(tr, clients, 1.0);
  finish_trace(tr, server);
  return tr;
}

RoundTrace ef_round(ServerState& server, std::vector<ClientState>& clients, const Oracle& oracle,
                    const CompressorSpec& compressor, double eta, const StreamFactory& streams) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("ef: stepsize must be positive");
  RoundTrace tr;
  tr.t = server.t;
  tr.a = eta;
  tr.A_next = server.A + eta;
  server.y = server.x;
  const int n = static_cast<int>(clients.size());
  const auto d = server.x.size();
  Vector sum = Vector::Zero(d);
  tr.gbar = Vector::Zero(d);
  for (int i = 0; i < n; ++i) {
    ClientState& c = clients[i];
    Stream noise = streams.stream(i, server.t, Channel::kOracle);
    const Vector g = oracle.sample(i, server.x, noise);
    const Vector corrected = c.e + eta * g;
    Stream rng = streams.stream(i, server.t, Channel::kFeedback);
    CompressionResult msg = compress(compressor, corrected, rng);
    c.e = corrected - msg.output;

    sum += msg.output;
    tr.gbar += g;
    tr.H += g.squaredNorm();
    tr.comm += msg.cost;
  }
  tr.gbar /= n;
  tr.H /= n;
  const Vector step = sum / n;
  tr.ghat = step / eta;
  server.x -= step;
  server.v = server.x;
  server.A += eta;
  ++server.t;
  // Residual memories satisfy avg e = -sum_j eta (ghat_j - gbar_j).
  record_memories(tr, clients, -1.0);
  finish_trace(tr, server);
  return tr;
}

RoundTrace neolithic_round(ServerState& server, const Oracle& oracle,
                           const CompressorSpec& base_compressor, int rounds,
                           const StepSchedule& schedule, const StreamFactory& streams) {
  if (rounds < 1) throw ConfigError("neolithic: rounds must be >= 1");
  const CompressorSpec channel =
      rounds == 1 ? base_compressor : repeated(base_compressor, rounds);
  prepare_round(server, schedule);
  RoundTrace tr = begin_trace(server);
  const int n = oracle.problem().n_clients();
  const auto d = server.x.size();
  Vector sum = Vector::Zero(d);
  tr.gbar = Vector::Zero(d);
  for (int i = 0; i < n; ++i) {
    Stream noise = streams.stream(i, server.t, Channel::kOracle);
    const Vector g = oracle.sample(i, server.y, noise);
    Stream rng = streams.stream(i, server.t, Channel::kFeedback);
    CompressionResult msg = compress(channel, g, rng);
    sum += msg.output;
    tr.gbar += g;
    tr.H += g.squaredNorm();
    tr.comm += msg.cost;
  }
  tr.gbar /= n;
  tr.H /= n;
  tr.ghat = sum / n;
  tr.Ebar_next = kNaN;
  acc_step(server, schedule, tr.ghat);
  finish_trace(tr, server);
  return tr;
}

RoundTrace absolute_acc_round(ServerState& server, const Oracle& oracle,
                              const CompressorSpec& absolute_compressor,
                              const StepSchedule& schedule, const StreamFactory& streams) {
  prepare_round(server, schedule);
  RoundTrace tr = begin_trace(server);
  const int n = oracle.problem().n_clients();
  const auto d = server.x.size();
  Vector sum = Vector::Zero(d);
  tr.gbar = Vector::Zero(d);
  for (int i = 0; i < n; ++i) {
    Stream noise = streams.stream(i, server.t, Channel::kOracle);
    const Vector g = oracle.sample(i, server.y, noise);
    Stream rng = streams.stream(i, server.t, Channel::kFeedback);
    CompressionResult msg = compress(absolute_compressor, g, rng);
    sum += msg.output;
    tr.gbar += g;
    tr.H += g.squaredNorm();
    tr.comm += msg.cost;
  }
  tr.gbar /= n;
  tr.H /= n;
  tr.ghat = sum / n;
  tr.Ebar_next = kNaN;
  acc_step(server, schedule, tr.ghat);
  finish_trace(tr, server);
  return tr;
}

RoundTrace acc_sgd_round(ServerState& server, const Oracle& oracle, const StepSchedule& schedule,
                         const StreamFactory& streams) {
  prepare_round(server, schedule);
  RoundTrace tr = begin_trace(server);
  const int n = oracle.problem().n_clients();
  const auto d = static_cast<std::int64_t>(server.x.size());
  tr.gbar = Vector::Zero(d);
  for (int i = 0; i < n; ++i) {
    Stream noise = streams.stream(i, server.t, Channel::kOracle);
    const Vector g = oracle.sample(i, server.y, noise);
    tr.gbar += g;
    tr.H += g.squaredNorm();
    tr.comm += CommCost{d, 0, 1};
  }
  tr.gbar /= n;
  tr.H /= n;
  tr.ghat = tr.gbar;
  tr.Ebar_next = kNaN;
  acc_step(server, schedule, tr.ghat);
  finish_trace(tr, server);
  return tr;
}

Simulation::Simulation(const Oracle& oracle, MethodSpec spec, const Vector& x0, std::uint64_t seed)
    : oracle_(&oracle), spec_(std::move(spec)), streams_(seed) {
  const int d = oracle.problem().dim();
  require_dim(x0, d, "simulation x0");
  if (spec_.method != Method::kAccSgd) validate(spec_.compressor, d);
  if (spec_.method == Method::kAdef || spec_.method == Method::kVanillaAccEf ||
      spec_.method == Method::kNeolithic) {
    if (!is_contractive(spec_.compressor))
      throw ConfigError("compressor: " + to_string(spec_.method) + " needs a contractive compressor");
  }
  server_ = make_server(x0, x0, spec_.schedule);
  clients_ = make_clients(oracle.problem().n_clients(), d);
  if (spec_.method == Method::kAdef) {
    setup_cost_ = adef_setup(server_, clients_, oracle, spec_.schedule, streams_);
  }
}

RoundTrace Simulation::step() {
  switch (spec_.method) {
    case Method::kAdef:
      return adef_round(server_, clients_, *oracle_, spec_.compressor, spec_.schedule, streams_);
    case Method::kVanillaAccEf:
      return vanilla_acc_ef_round(server_, clients_, *oracle_, spec_.compressor, spec_.schedule,
                                  streams_);
    case Method::kEf:
      return ef_round(server_, clients_, *oracle_, spec_.compressor,
                      spec_.schedule.a(server_.t + 1), streams_);
    case Method::kNeolithic:
      if (const auto* r = std::get_if<Repeated>(&spec_.compressor.kind)) {
        return neolithic_round(server_, *oracle_, *r->base, r->rounds, spec_.schedule, streams_);
      }
      return neolithic_round(server_, *oracle_, spec_.compressor, 1, spec_.schedule, streams_);
    case Method::kAbsoluteAcc:
      return absolute_acc_round(server_, *oracle_, spec_.compressor, spec_.schedule, streams_);
    case Method::kAccSgd:
      return acc_sgd_round(server_, *oracle_, spec_.schedule, streams_);
  }
  throw std::logic_error("simulation: unhandled method");
}

std::vector<double> theorem_M_branches(Method method, const ProblemConstants& c, double quality,
                                       int T) {
  if (T <= 0) throw std::invalid_argument("theorem_M: T must be positive");
  if (!(c.R0_sq > 0.0)) throw std::invalid_argument("theorem_M: R0^2 must be positive");
  if (c.n < 1) throw std::invalid_argument("theorem_M: n must be positive");
  const double t = T;
  const double n = c.n;
  switch (method) {
    case Method::kAdef: {
      const double delta = quality;
      if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("theorem_M: delta in (0,1]");
      const double s = t + 32.0 / delta;
      return {std::pow(2.0, 13) * c.ell / std::pow(delta, 4),
              std::sqrt(4.0 * t * s * s * c.sigma2 / (c.R0_sq * n)),
              8.0 * std::cbrt(c.L * t * s * s * s * c.sigma2 / (std::pow(delta, 4) * c.R0_sq))};
    }
    case Method::kVanillaAccEf: {
      const double delta = quality;
      if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("theorem_M: delta in (0,1]");
      const double s = t + 4.0 / delta;
      return {40.0 * c.L * s / delta, std::sqrt(4.0 * t * s * s * c.sigma2 / (c.R0_sq * n)),
              std::cbrt(544.0 * c.L * (4.0 * c.zeta2 + delta * c.sigma2) * t * s * s * s /
                        (delta * delta * c.R0_sq))};
    }
    case Method::kAbsoluteAcc: {
      const double Delta = quality;
      if (!(Delta >= 0.0)) throw std::invalid_argument("theorem_M: Delta must be >= 0");
      return {24.0 * c.L, std::sqrt(4.0 * t * t * t * c.sigma2 / (n * c.R0_sq)),
              std::cbrt(2.0 * c.L * Delta * Delta * (t + 16.0) * std::pow(t, 5) / c.R0_sq)};
    }
    case Method::kNeolithic:
      return {24.0 * c.L, std::sqrt(12.0 * t * t * t * c.sigma2 / (n * c.R0_sq))};
    case Method::kEf:
    case Method::kAccSgd:
      break;
  }
  throw std::invalid_argument("theorem_M: no theorem schedule for method " + to_string(method));
}

double theorem_M(Method method, const ProblemConstants& c, double quality, int T) {
  const std::vector<double> b = theorem_M_branches(method, c, quality, T);
  return *std::max_element(b.begin(), b.end());
}

int neolithic_rounds(double delta, int T, int n, double sigma2, double zeta2) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("neolithic_rounds: delta in (0,1]");
  if (T < 1 || n < 1) throw std::invalid_argument("neolithic_rounds: T and n must be positive");
  const double t = T;
  double r = std::max(4.0 / delta * std::log(t), std::log(4.0 * n * t * t / 3.0) / delta);
  if (sigma2 > 0.0 && zeta2 > 0.0)
    r = std::max(r, std::log(4.0 * n * zeta2 * t * t / (3.0 * sigma2)) / delta);
  return std::max(1, static_cast<int>(std::ceil(r)));
}

StepSchedule theorem_schedule(Method method, double M, double delta) {
  switch (method) {
    case Method::kAdef:
      return StepSchedule::theorem_adef(M, delta);
    case Method::kVanillaAccEf:
      return StepSchedule::theorem_vanilla(M, delta);
    case Method::kNeolithic:
    case Method::kAbsoluteAcc:
      return StepSchedule::theorem_absolute(M);
    case Method::kEf:
    case Method::kAccSgd:
      break;
  }
  throw ConfigError("schedule: no theorem schedule for method " + to_string(method));
}

}  // namespace adef
