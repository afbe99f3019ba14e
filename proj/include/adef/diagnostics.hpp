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

#ifndef ADEF_DIAGNOSTICS_HPP
#define ADEF_DIAGNOSTICS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "adef/algorithms.hpp"
#include "adef/problems.hpp"

namespace adef {

// A complete run: initial iterates, setup cost and one record per round.
struct RunTrace {
  Method method = Method::kAdef;
  int n_clients = 0;
  int dim = 0;
  Vector x0;
  Vector v0;
  CommCost setup;
  bool has_memories = false;  // ADEF, vanilla accelerated EF and EF keep local errors
  std::vector<RoundTrace> rounds;
};

bool method_has_memories(Method method);

struct MetricsRow {
  int t = 0;
  double F = 0.0;     // f(x_t) - f*
  double E = 0.0;     // ||sum_{j<t} a_{j+1} (ghat_j - gbar_j)||^2
  double Ebar = 0.0;  // avg_i ||e_t^i||^2, NaN without local memories
  double H = 0.0;     // avg_i ||g_t^i - gtilde_t^i||^2, NaN on the final row
  double R2 = 0.0;    // ||v_t - x*||^2
  std::int64_t comm_scalars = 0;  // cumulative, setup included
  std::int64_t comm_indices = 0;
  std::int64_t comm_messages = 0;
};

struct TraceMetrics {
  std::vector<MetricsRow> rows;  // t = 0..T

  std::vector<double> times() const;
  std::vector<double> suboptimality() const;
};

// Throws std::invalid_argument when a round lacks ghat/gbar/x/v.
TraceMetrics compute_metrics(const RunTrace& trace, const Problem& problem,
                             const ReferenceSolution& reference);

// Per round t (1-based, after t rounds):
//   ||avg_i e_t^i - sum_{j<t} a_{j+1}(ghat_j - gbar_j)|| / (1 + ||sum||).
// Empty when the method keeps no local memories.
std::vector<double> error_identity_residuals(const RunTrace& trace);

// Row-wise mean over runs, truncated to the shortest run.
TraceMetrics average_metrics(const std::vector<TraceMetrics>& runs);

struct RateFit {
  int window_begin = 0;
  int window_end = 0;  // inclusive
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;
};

// Least squares of log F against log t over t in [begin, end]. Needs t >= 1,
// F > 0 and at least 10 points; throws std::domain_error otherwise.
RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& F, int begin, int end);
RateFit fit_rate(const TraceMetrics& metrics, int begin, int end);

enum class PlateauStatus { kPlateau, kNoPlateau, kSaturated };
std::string to_string(PlateauStatus status);

struct PlateauAssessment {
  PlateauStatus status = PlateauStatus::kNoPlateau;
  double stabilized_error = 0.0;  // median F over the final quarter
  double relative_change = 0.0;   // between the two halves of the final quarter
};

// `saturated` marks runs that cannot plateau (noise-free); their error is still reported.
PlateauAssessment assess_plateau(const std::vector<double>& F, bool saturated = false,
                                 double tolerance = 0.05);

double median(std::vector<double> values);

// Fixed column order: t,F,E,Ebar,H,R2,comm_scalars,comm_indices,comm_messages.
void write_metrics_csv(std::ostream& os, const TraceMetrics& metrics);
TraceMetrics read_metrics_csv(std::istream& is);

void write_trace_jsonl(std::ostream& os, const RunTrace& trace);
RunTrace read_trace_jsonl(std::istream& is);

}  // namespace adef

#endif  // ADEF_DIAGNOSTICS_HPP
