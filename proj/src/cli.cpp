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

#include "adef/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "adef/diagnostics.hpp"
#include "adef/harness.hpp"
#include "adef/verify.hpp"
#include "json.hpp"

namespace adef {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunConfig load_existing(const std::string& path) {
  if (path.empty()) throw std::runtime_error("no config file given (positional or --config)");
  if (!fs::is_regular_file(path)) throw std::runtime_error("config file not found: " + path);
  return load_config(path);
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw std::runtime_error("cannot read " + p.string());
  return nlohmann::json::parse(is);
}

TraceMetrics read_metrics(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw std::runtime_error("cannot read " + p.string());
  return read_metrics_csv(is);
}

fs::path require_run_dir(const std::string& dir) {
  const fs::path p(dir);
  if (!fs::is_directory(p / "metrics")) throw std::runtime_error("not a run directory: " + dir);
  return p;
}

std::pair<int, int> fit_window_of(const fs::path& run, int rounds) {
  if (fs::exists(run / "config.json")) {
    const RunConfig c = load_config(run / "config.json");
    if (c.fit_window) return *c.fit_window;
  }
  return {std::max(1, rounds / 4), rounds};
}

void report_slope(const std::vector<std::string>& dirs, std::ostream& out) {
  out << "run,seed,window_begin,window_end,slope,intercept,r2\n";
  for (const std::string& dir : dirs) {
    const fs::path run = require_run_dir(dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(run / "metrics"))
      if (entry.path().extension() == ".csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) {
      const TraceMetrics m = read_metrics(f);
      const int rounds = m.rows.empty() ? 0 : m.rows.back().t;
      const auto [begin, end] = fit_window_of(run, rounds);
      const RateFit fit = fit_rate(m, begin, end);
      std::string seed = f.stem().string();
      if (seed.rfind("seed_", 0) == 0) seed = seed.substr(5);
      out << dir << ',' << seed << ',' << fit.window_begin << ',' << fit.window_end << ','
          << num(fit.slope) << ',' << num(fit.intercept) << ',' << num(fit.r2) << '\n';
    }
  }
}

void report_speedup(const std::vector<std::string>& dirs, std::ostream& out) {
  struct Row {
    int n;
    PlateauAssessment p;
  };
  std::vector<Row> rows;
  for (const std::string& dir : dirs) {
    const fs::path run = require_run_dir(dir);
    const nlohmann::json summary = read_json(run / "summary.json");
    const TraceMetrics m = read_metrics(run / "metrics" / "mean.csv");
    const bool saturated = summary.value("sigma2", 0.0) == 0.0;
    rows.push_back({summary.at("n_clients").get<int>(), assess_plateau(m.suboptimality(), saturated)});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.n < b.n; });
  out << "n_clients,status,stabilized_error,relative_change,ratio_to_previous\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double ratio = i == 0 ? NAN : rows[i - 1].p.stabilized_error / rows[i].p.stabilized_error;
    out << rows[i].n << ',' << to_string(rows[i].p.status) << ',' << num(rows[i].p.stabilized_error)
        << ',' << num(rows[i].p.relative_change) << ',' << (i == 0 ? "nan" : num(ratio)) << '\n';
  }
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compressed accelerated distributed optimization: simulator and diagnostics", "adef"};
  app.require_subcommand(1);

  std::string config_pos, config_opt, out_dir;
  int jobs = 1;
  CLI::App* run = app.add_subcommand("run", "Run an experiment from a config file");
  run->add_option("CONFIG", config_pos, "Config file (JSON)");
  run->add_option("--config", config_opt, "Config file (JSON)");
  run->add_option("--out", out_dir, "Output directory (defaults to the config's output)");
  run->add_option("--jobs", jobs, "Parallel run slots")->check(CLI::PositiveNumber);

  CLI::App* grid = app.add_subcommand("grid", "Grid search over gamma");
  grid->add_option("CONFIG", config_pos, "Config file (JSON)");
  grid->add_option("--config", config_opt, "Config file (JSON)");
  grid->add_option("--out", out_dir, "Directory for grid.json");
  grid->add_option("--jobs", jobs, "Parallel run slots")->check(CLI::PositiveNumber);

  std::string suite_pos, suite_opt;
  std::uint64_t seed = 0;
  CLI::App* verify = app.add_subcommand("verify", "Run an invariant suite");
  verify->add_option("SUITE", suite_pos, "Suite name or 'all'");
  verify->add_option("--suite", suite_opt, "Suite name or 'all'");
  verify->add_option("--seed", seed, "Seed");

  std::string kind_opt;
  std::vector<std::string> report_args;
  CLI::App* report = app.add_subcommand("report", "Emit slope or speedup tables as CSV");
  report->add_option("--kind", kind_opt, "slope | speedup");
  report->add_option("ARGS", report_args, "[kind] run directories");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    const std::string config_path = config_opt.empty() ? config_pos : config_opt;
    if (*run) {
      const RunConfig config = load_existing(config_path);
      const std::string dir = out_dir.empty() ? config.output : out_dir;
      if (dir.empty()) throw std::runtime_error("no output directory (--out or config output)");
      const ExperimentResult res = run_experiment(config, dir, jobs);
      out << "wrote " << dir << " (" << res.seeds.size() << " seeds";
      if (res.any_diverged()) out << ", diverged";
      out << ")\n";
      return 0;
    }
    if (*grid) {
      const RunConfig config = load_existing(config_path);
      const GridResult g = grid_search(config, jobs);
      const std::string dir = out_dir.empty() ? config.output : out_dir;
      if (!dir.empty()) write_grid(g, dir);
      out << "gamma,mean_final_F,diverged_seeds,selected\n";
      for (std::size_t i = 0; i < g.points.size(); ++i)
        out << num(g.points[i].gamma) << ',' << num(g.points[i].mean_final_F) << ','
            << g.points[i].diverged_seeds << ',' << (i == g.selected_index ? 1 : 0) << '\n';
      return 0;
    }
    if (*verify) {
      const std::string suite = suite_opt.empty() ? suite_pos : suite_opt;
      if (suite.empty()) throw std::runtime_error("no suite given; choose one of contractivity, "
                                                  "error-identity, lossless-reduction, "
                                                  "rate-fit-synthetic, all");
      const std::vector<PropertyResult> results = run_suite(suite, seed);
      bool ok = true;
      for (const PropertyResult& r : results) {
        out << (r.passed ? "PASS " : "FAIL ") << r.suite << ": " << r.property << " (" << r.detail
            << ")\n";
        ok = ok && r.passed;
      }
      return ok ? 0 : 1;
    }
    if (*report) {
      std::string kind = kind_opt;
      std::vector<std::string> dirs = report_args;
      if (kind.empty()) {
        if (dirs.empty()) throw std::runtime_error("no report kind given (slope or speedup)");
        kind = dirs.front();
        dirs.erase(dirs.begin());
      }
      if (dirs.empty()) throw std::runtime_error("no run directories given");
      if (kind == "slope") {
        report_slope(dirs, out);
      } else if (kind == "speedup") {
        report_speedup(dirs, out);
      } else {
        throw std::runtime_error("unknown report kind '" + kind + "' (expected slope or speedup)");
      }
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace adef
