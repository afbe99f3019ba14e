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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Empirical instances and tolerances are pinned here; see README for the rationale.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "adef/harness.hpp"
#include "adef/verify.hpp"

namespace fs = std::filesystem;
using namespace adef;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

int jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Runs the verify properties of `suite` whose names contain every token in `filter`.
Outcome from_suite(const std::string& suite, const std::vector<std::string>& filter) {
  Outcome o{true, ""};
  int count = 0;
  for (const PropertyResult& r : run_suite(suite, 7)) {
    const bool match = std::all_of(filter.begin(), filter.end(), [&](const std::string& tok) {
      return r.property.find(tok) != std::string::npos;
    });
    if (!match) continue;
    ++count;
    if (!r.passed) {
      o.passed = false;
      o.detail += "[" + r.property + ": " + r.detail + "] ";
    }
  }
  if (count == 0) return {false, "no properties matched"};
  if (o.passed) o.detail = std::to_string(count) + " properties hold";
  return o;
}

double grid_selected(RunConfig cfg) {
  return grid_search(cfg, jobs()).selected_gamma;
}

Outcome criterion5() {
  const std::string problem =
      R"("problem": {"kind": "logistic", "n_clients": 4, "d": 20, "samples_per_client": 200,
          "heterogeneity": 0.5, "lambda_reg": 0, "feature_scale_ratio": 1000,
          "soft_labels": true, "sigma2": 0, "seed": 1},
         "compressor": {"kind": "topk", "k": 2}, "rounds": 2000, "seeds": [0],
         "fit_window": [500, 2000], "grid": [0.01, 0.03, 0.1, 0.3, 1, 3, 10, 30])";
  RunConfig adef_cfg = parse_config(
      "{" + problem + R"(, "method": "adef", "schedule": {"kind": "experiment_gamma"}})");
  RunConfig ef_cfg =
      parse_config("{" + problem + R"(, "method": "ef", "schedule": {"kind": "constant"}})");
  adef_cfg.schedule.gamma = grid_selected(adef_cfg);
  ef_cfg.schedule.gamma = grid_selected(ef_cfg);
  const ExperimentResult a = run_in_memory(adef_cfg, 1);
  const ExperimentResult e = run_in_memory(ef_cfg, 1);
  if (!a.fit || !e.fit) return {false, "rate fit failed: " + a.fit_error + e.fit_error};
  const double sa = a.fit->slope;
  const double se = e.fit->slope;
  const bool ok = sa <= -1.6 && se >= -1.3 && se <= -0.7 && sa <= se - 0.5;
  return {ok, "adef gamma=" + fmt("%g", adef_cfg.schedule.gamma) + " slope=" + fmt("%.3f", sa) +
                  ", ef eta=" + fmt("%g", ef_cfg.schedule.gamma) + " slope=" + fmt("%.3f", se)};
}

Outcome criterion6() {
  RunConfig base = parse_config(R"({
    "problem": {"kind": "logistic", "n_clients": 2, "d": 40, "samples_per_client": 50,
                "heterogeneity": 0, "lambda_reg": 100, "sigma2": 25, "seed": 3},
    "method": "adef", "compressor": {"kind": "topk", "k": 4},
    "schedule": {"kind": "experiment_gamma", "gamma": 1e-4}, "rounds": 10000})");
  base.seeds.clear();
  for (std::uint64_t s = 0; s < 20; ++s) base.seeds.push_back(s);
  const std::vector<SpeedupRow> rows = speedup_curve(base, {2, 4, 8, 16}, jobs());
  bool ok = true;
  int in_band = 0;
  std::string detail;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const PlateauAssessment& p = rows[i].plateau;
    detail += "n=" + std::to_string(rows[i].n_clients) + ":" + fmt("%.3e", p.stabilized_error) +
              "(" + to_string(p.status) + ") ";
    if (p.status != PlateauStatus::kPlateau) ok = false;
    if (i == 0) continue;
    const double prev = rows[i - 1].plateau.stabilized_error;
    if (!(p.stabilized_error < prev)) ok = false;
    const double ratio = prev / p.stabilized_error;
    if (ratio >= 1.3 && ratio <= 3.0) ++in_band;
    detail += "ratio=" + fmt("%.2f", ratio) + " ";
  }
  return {ok && in_band >= 2, detail};
}

Outcome criterion7() {
  std::vector<double> plateaus;
  std::string detail;
  bool ok = true;
  for (double step : {0.01, 0.02, 0.04}) {
    RunConfig cfg = parse_config(R"({
      "problem": {"kind": "quadratic", "n_clients": 4, "d": 10, "L": 1, "mu": 0.1,
                  "heterogeneity": 0, "center_scale": 1, "sigma2": 0, "seed": 1},
      "method": "absolute_acc", "compressor": {"kind": "round", "step": 1},
      "schedule": {"kind": "theorem_absolute", "M": 24}, "rounds": 2000})");
    cfg.compressor = absolute_round(step);
    const ExperimentResult r = run_in_memory(cfg, 1);
    if (r.any_diverged()) return {false, "diverged at step " + fmt("%g", step)};
    const PlateauAssessment p = assess_plateau(r.mean.suboptimality());
    if (!plateaus.empty() && !(p.stabilized_error > plateaus.back())) ok = false;
    plateaus.push_back(p.stabilized_error);
    detail += "step=" + fmt("%g", step) + ":" + fmt("%.3e", p.stabilized_error) + " ";
  }
  return {ok, detail};
}

Outcome criterion8() {
  const std::string common = R"("problem": {"kind": "quadratic", "n_clients": 4, "d": 20,
      "L": 1, "mu": 0.01, "heterogeneity": 2, "center_scale": 1, "sigma2": 0, "seed": 1},
      "compressor": {"kind": "topk", "k": 1}, "schedule": {"kind": "experiment_gamma"},
      "seeds": [0], "grid": [1e-5, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1])";
  RunConfig adef_cfg = parse_config("{" + common + R"(, "method": "adef", "rounds": 3000})");
  adef_cfg.schedule.gamma = grid_selected(adef_cfg);
  const ExperimentResult a = run_in_memory(adef_cfg, 1);
  const std::int64_t budget = a.mean.rows.back().comm_messages;

  // Same message budget: ADEF's setup plus two messages per client per round.
  RunConfig neo_cfg = parse_config("{" + common + R"(, "method": "neolithic", "rounds": 1})");
  neo_cfg.rounds = static_cast<int>(budget / neo_cfg.problem.n_clients);
  neo_cfg.schedule.gamma = grid_selected(neo_cfg);
  const ExperimentResult n = run_in_memory(neo_cfg, 1);
  const double fa = a.mean_final_F();
  const double fn = n.mean_final_F();
  const bool diverged = n.any_diverged();
  const bool ok = diverged || fn > 10.0 * fa;
  return {ok, "messages=" + std::to_string(budget) + " adef F=" + fmt("%.3e", fa) +
                  " neolithic(R=1) F=" + fmt("%.3e", fn) +
                  (diverged ? " diverged" : " ratio=" + fmt("%.1f", fn / fa))};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome criterion10() {
  RunConfig cfg = parse_config(R"({
    "problem": {"kind": "logistic", "n_clients": 4, "d": 10, "heterogeneity": 0.5,
                "sigma2": 1, "seed": 11},
    "method": "adef", "compressor": {"kind": "randk", "k": 2},
    "schedule": {"kind": "experiment_gamma", "gamma": 0.05}, "rounds": 200,
    "seeds": [0, 1, 2], "write_traces": true})");
  const fs::path root = fs::temp_directory_path() / ("adef_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  run_experiment(cfg, root / "a", 1);
  run_experiment(cfg, root / "b", jobs());
  int files = 0;
  bool ok = true;
  for (const char* sub : {"traces", "metrics"}) {
    for (const auto& entry : fs::directory_iterator(root / "a" / sub)) {
      const fs::path other = root / "b" / sub / entry.path().filename();
      ++files;
      if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) ok = false;
    }
  }
  fs::remove_all(root);
  return {ok && files > 0, std::to_string(files) + " trace/metrics files compared"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    double budget_s;  // runtime limit; 0 means none
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "compressor contractivity", 5, [] { return from_suite("contractivity", {}); }},
      {2, "error identity", 10, [] { return from_suite("error-identity", {}); }},
      {3, "lossless reduction", 10, [] { return from_suite("lossless-reduction", {"identity"}); }},
      {4, "neolithic exact reconstruction", 0,
       [] { return from_suite("lossless-reduction", {"neolithic topk"}); }},
      {5, "accelerated rate", 120, criterion5},
      {6, "linear speedup", 600, criterion6},
      {7, "absolute-compression neighborhood", 60, criterion7},
      {8, "naive compression stalls", 0, criterion8},
      {9, "rate-fit oracle", 0, [] { return from_suite("rate-fit-synthetic", {"c/t^"}); }},
      {10, "determinism", 0, criterion10},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool over = c.budget_s > 0 && secs > c.budget_s;
    const bool passed = o.passed && !over;
    if (!passed) ++failures;
    std::printf("%s criterion %d (%s): %s [%.1fs%s]\n", passed ? "PASS" : "FAIL", c.id,
                c.name.c_str(), o.detail.c_str(), secs,
                over ? (", over " + fmt("%g", c.budget_s) + "s budget").c_str() : "");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
