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

#ifndef ADEF_HARNESS_HPP
#define ADEF_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "adef/algorithms.hpp"
#include "adef/compressors.hpp"
#include "adef/diagnostics.hpp"
#include "adef/problems.hpp"
#include "adef/schedule.hpp"

namespace adef {

struct ProblemConfig {
  std::string kind = "logistic";  // "logistic" | "quadratic"
  int n_clients = 4;
  int dim = 10;
  double heterogeneity = 0.0;
  double sigma2 = 0.0;
  int batch_size = 1;
  std::uint64_t seed = 0;
  // logistic
  int samples_per_client = 50;
  double lambda_reg = 1e-6;
  double feature_scale_ratio = 1.0;
  bool soft_labels = false;
  // quadratic
  double L = 1.0;
  double mu = 1e-3;
  double center_scale = 1.0;

  friend bool operator==(const ProblemConfig&, const ProblemConfig&) = default;
};

struct ScheduleConfig {
  std::string kind = "experiment_gamma";
  double gamma = 0.05;
  std::optional<double> delta;  // defaults to the compressor's contraction parameter
  std::optional<double> M;      // theorem schedules; empty means evaluate the theorem
  std::vector<double> weights;  // custom
  double A0 = 0.0;              // custom

  friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

struct RunConfig {
  ProblemConfig problem;
  Method method = Method::kAdef;
  CompressorSpec compressor = top_k(1);
  ScheduleConfig schedule;
  int rounds = 100;
  std::vector<std::uint64_t> seeds{0};
  std::string output;
  std::vector<double> grid;
  double reference_tolerance = 1e-10;
  bool write_traces = true;
  std::optional<std::pair<int, int>> fit_window;
};

bool operator==(const CompressorSpec& a, const CompressorSpec& b);
bool operator==(const RunConfig& a, const RunConfig& b);

// JSON config I/O. Parsing is strict: unknown or mistyped fields raise
// ConfigError naming the field path.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const RunConfig& config);
CompressorSpec parse_compressor(const std::string& json_text);

const std::vector<double>& default_grid();

Problem build_problem(const ProblemConfig& config);

/// Everything derived from a config before any round runs.
struct ResolvedRun {
  RunConfig config;
  std::shared_ptr<const Problem> problem;
  std::shared_ptr<const Oracle> oracle;
  ReferenceSolution reference;
  ProblemConstants constants;
  MethodSpec method;
  Vector x0;
};

// Validates every block and builds problem, reference solution and schedule.
ResolvedRun resolve(const RunConfig& config);
ResolvedRun resolve(const RunConfig& config, std::shared_ptr<const Problem> problem,
                    const ReferenceSolution& reference);

struct SeedRun {
  std::uint64_t seed = 0;
  RunTrace trace;
  TraceMetrics metrics;
  bool diverged = false;
  int divergence_round = -1;
  std::string divergence_reason;
  double final_F() const;
};

// Runs config.rounds rounds for one seed. A non-finite iterate or ||x|| > 1e12
// stops the run and is recorded as divergence.
SeedRun simulate(const ResolvedRun& run, std::uint64_t seed);

struct ExperimentResult {
  ResolvedRun run;
  std::vector<SeedRun> seeds;
  TraceMetrics mean;  // row-wise mean over seeds
  std::optional<RateFit> fit;
  std::string fit_error;
  bool any_diverged() const;
  // mean over seeds of F_T; +inf if any seed diverged
  double mean_final_F() const;
};

ExperimentResult run_in_memory(const RunConfig& config, int jobs = 1);
ExperimentResult run_in_memory(const ResolvedRun& run, int jobs = 1);

// Writes config.json, traces/seed_<s>.jsonl, metrics/seed_<s>.csv,
// metrics/mean.csv and summary.json under `out`.
ExperimentResult run_experiment(const RunConfig& config, const std::filesystem::path& out,
                                int jobs = 1);
void write_experiment(const ExperimentResult& result, const std::filesystem::path& out);

struct GridPoint {
  double gamma = 0.0;
  double mean_final_F = 0.0;
  int diverged_seeds = 0;
};

struct GridResult {
  std::vector<GridPoint> points;
  double selected_gamma = 0.0;
  std::size_t selected_index = 0;
};

// Runs every grid value with the same seeds and selects argmin of the averaged
// final F (ties toward the smaller gamma). Throws std::runtime_error if every
// point diverged.
GridResult grid_search(const RunConfig& config, int jobs = 1);
void write_grid(const GridResult& grid, const std::filesystem::path& out);

struct SpeedupRow {
  int n_clients = 0;
  PlateauAssessment plateau;
};

// One experiment per client count with everything else fixed.
std::vector<SpeedupRow> speedup_curve(const RunConfig& base, const std::vector<int>& client_counts,
                                      int jobs = 1);

// COMPRESSED_OPT_LOG: 0 quiet (default), 1 info, 2 debug.
int log_level();
void log_message(int level, const std::string& message);

}  // namespace adef

#endif  // ADEF_HARNESS_HPP
