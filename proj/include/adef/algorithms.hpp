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

#ifndef ADEF_ALGORITHMS_HPP
#define ADEF_ALGORITHMS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "adef/compressors.hpp"
#include "adef/problems.hpp"
#include "adef/rng.hpp"
#include "adef/schedule.hpp"
#include "adef/types.hpp"

namespace adef {

enum class Method {
  kAdef,          // acceleration + error feedback + gradient-difference compression
  kVanillaAccEf,  // acceleration + plain error feedback
  kEf,            // unaccelerated error feedback
  kNeolithic,     // acceleration + repeated compression
  kAbsoluteAcc,   // acceleration + absolute compressor, no feedback
  kAccSgd,        // uncompressed accelerated SGD
};

std::string to_string(Method method);
// Throws ConfigError for unknown names.
Method method_from_string(const std::string& name);

struct ServerState {
  Vector x;
  Vector v;
  Vector y;
  double A = 0.0;
  int t = 0;
  // Weights of the round in progress, set by prepare_round.
  double a_next = 0.0;
  double A_next = 0.0;
  // Server copy of the averaged control variate (ADEF).
  Vector g_tilde;
};

struct ClientState {
  Vector e;        // local error memory
  Vector g_tilde;  // local control variate (ADEF)
};

struct RoundTrace {
  int t = 0;
  double a = 0.0;       // a_{t+1}
  double A_next = 0.0;  // A_{t+1}
  Vector ghat;          // vector applied by the server
  Vector gbar;          // exact average of the drawn stochastic gradients
  CommCost comm;        // client -> server cost of this round
  double H = 0.0;       // avg_i ||g_t^i - gtilde_t^i||^2 (gtilde = 0 without control variates)
  // avg_i ||e_{t+1}^i||^2 and avg_i e_{t+1}^i for methods with local memories;
  // NaN / empty otherwise. avg_e_next uses the sign for which
  // avg_e_next = sum_{j<=t} a_{j+1} (ghat_j - gbar_j).
  double Ebar_next = 0.0;
  Vector avg_e_next;
  Vector x_next;
  Vector v_next;
};

ServerState make_server(const Vector& x0, const Vector& v0, const StepSchedule& schedule);
std::vector<ClientState> make_clients(int n, int d);

// Sets a_{t+1}, A_{t+1} and y_t = (A_t/A_{t+1}) x_t + (a_{t+1}/A_{t+1}) v_t.
void prepare_round(ServerState& server, const StepSchedule& schedule);

// v_{t+1} = v_t - a_{t+1} ghat, x_{t+1} = (A_t/A_{t+1}) x_t + (a_{t+1}/A_{t+1}) v_{t+1}.
// Expects prepare_round to have run for this round.
void acc_step(ServerState& server, const StepSchedule& schedule, const Vector& ghat);

// One-time uncompressed transmission of gtilde_{-1}^i = g_i(y_0, xi) to the server.
CommCost adef_setup(ServerState& server, std::vector<ClientState>& clients, const Oracle& oracle,
                    const StepSchedule& schedule, const StreamFactory& streams);

RoundTrace adef_round(ServerState& server, std::vector<ClientState>& clients,
                      const Oracle& oracle, const CompressorSpec& compressor,
                      const StepSchedule& schedule, const StreamFactory& streams);

RoundTrace vanilla_acc_ef_round(ServerState& server, std::vector<ClientState>& clients,
                                const Oracle& oracle, const CompressorSpec& compressor,
                                const StepSchedule& schedule, const StreamFactory& streams);

// Unaccelerated EF: p^i = C(e^i + eta g^i), e^i += eta g^i - p^i, x -= avg p^i.
RoundTrace ef_round(ServerState& server, std::vector<ClientState>& clients, const Oracle& oracle,
                    const CompressorSpec& compressor, double eta, const StreamFactory& streams);

// Each client sends Repeated(base, rounds) of its stochastic gradient.
RoundTrace neolithic_round(ServerState& server, const Oracle& oracle,
                           const CompressorSpec& base_compressor, int rounds,
                           const StepSchedule& schedule, const StreamFactory& streams);

RoundTrace absolute_acc_round(ServerState& server, const Oracle& oracle,
                              const CompressorSpec& absolute_compressor,
                              const StepSchedule& schedule, const StreamFactory& streams);

RoundTrace acc_sgd_round(ServerState& server, const Oracle& oracle, const StepSchedule& schedule,
                         const StreamFactory& streams);

struct MethodSpec {
  Method method = Method::kAdef;
  CompressorSpec compressor = identity();
  StepSchedule schedule = StepSchedule::experiment_gamma(0.05, 1.0);
};

/// Owns server and client states of one run and advances them round by round.
class Simulation {
 public:
  Simulation(const Oracle& oracle, MethodSpec spec, const Vector& x0, std::uint64_t seed);

  const ServerState& server() const { return server_; }
  const std::vector<ClientState>& clients() const { return clients_; }
  const MethodSpec& spec() const { return spec_; }
  // One-time setup communication (nonzero only for ADEF).
  CommCost setup_cost() const { return setup_cost_; }

  RoundTrace step();

 private:
  const Oracle* oracle_;
  MethodSpec spec_;
  StreamFactory streams_;
  ServerState server_;
  std::vector<ClientState> clients_;
  CommCost setup_cost_;
};

// Problem constants entering the parameter choices of the convergence theorems.
struct ProblemConstants {
  double L = 1.0;
  double ell = 1.0;
  double sigma2 = 0.0;
  double zeta2 = 0.0;  // gradient dissimilarity bound
  double R0_sq = 1.0;
  int n = 1;
};

// Individual branches of the max-formula for M, in the order the theorem lists them.
// `quality` is delta for contractive methods and Delta for kAbsoluteAcc.
std::vector<double> theorem_M_branches(Method method, const ProblemConstants& c, double quality,
                                       int T);
double theorem_M(Method method, const ProblemConstants& c, double quality, int T);

// Number of repeated-compression rounds suggested for NEOLITHIC.
int neolithic_rounds(double delta, int T, int n, double sigma2, double zeta2);

// Schedule a theorem prescribes for `method` with the given M.
StepSchedule theorem_schedule(Method method, double M, double delta);

}  // namespace adef

#endif  // ADEF_ALGORITHMS_HPP
