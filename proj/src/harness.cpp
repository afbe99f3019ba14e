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

#include "adef/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace adef {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDivergenceNorm = 1e12;

// ---- strict JSON field access ------------------------------------------------

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> known) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  std::set<std::string> allowed(known.begin(), known.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError((path.empty() ? "" : path + ".") + it.key() + ": unknown field");
  }
}

std::string field(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

double get_number(const json& j, const std::string& path, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(field(path, key) + ": expected a number");
  return v.get<double>();
}

std::int64_t get_integer(const json& j, const std::string& path, const char* key,
                         std::int64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(field(path, key) + ": expected an integer");
  return v.get<std::int64_t>();
}

std::string get_string(const json& j, const std::string& path, const char* key,
                       const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(field(path, key) + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> get_number_list(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) return {};
  const json& v = j.at(key);
  if (!v.is_array()) throw ConfigError(field(path, key) + ": expected an array of numbers");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number()) throw ConfigError(field(path, key) + ": expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

CompressorSpec compressor_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  const std::string kind = get_string(j, path, "kind", "");
  if (kind == "identity") {
    reject_unknown(j, path, {"kind"});
    return identity();
  }
  if (kind == "topk" || kind == "randk") {
    reject_unknown(j, path, {"kind", "k"});
    if (!j.contains("k")) throw ConfigError(path + ".k: required");
    const auto k = static_cast<int>(get_integer(j, path, "k", 0));
    return kind == "topk" ? top_k(k) : rand_k(k);
  }
  if (kind == "repeated") {
    reject_unknown(j, path, {"kind", "base", "rounds"});
    if (!j.contains("base")) throw ConfigError(path + ".base: required");
    CompressorSpec base = compressor_from_json(j.at("base"), path + ".base");
    return repeated(std::move(base), static_cast<int>(get_integer(j, path, "rounds", 1)));
  }
  if (kind == "round") {
    reject_unknown(j, path, {"kind", "step"});
    return absolute_round(get_number(j, path, "step", 1.0));
  }
  if (kind == "threshold") {
    reject_unknown(j, path, {"kind", "threshold"});
    return absolute_threshold(get_number(j, path, "threshold", 0.0));
  }
  throw ConfigError(path + ".kind: unknown compressor kind '" + kind + "'");
}

json compressor_to_json(const CompressorSpec& spec) {
  if (std::holds_alternative<Identity>(spec.kind)) return json{{"kind", "identity"}};
  if (const auto* c = std::get_if<TopK>(&spec.kind)) return json{{"kind", "topk"}, {"k", c->k}};
  if (const auto* c = std::get_if<RandK>(&spec.kind)) return json{{"kind", "randk"}, {"k", c->k}};
  if (const auto* c = std::get_if<Repeated>(&spec.kind))
    return json{{"kind", "repeated"}, {"base", compressor_to_json(*c->base)}, {"rounds", c->rounds}};
  if (const auto* c = std::get_if<AbsoluteRound>(&spec.kind))
    return json{{"kind", "round"}, {"step", c->step}};
  const auto& c = std::get<AbsoluteThreshold>(spec.kind);
  return json{{"kind", "threshold"}, {"threshold", c.threshold}};
}

ProblemConfig problem_from_json(const json& j) {
  const std::string path = "problem";
  reject_unknown(j, path,
                 {"kind", "n_clients", "d", "heterogeneity", "sigma2", "batch_size", "seed",
                  "samples_per_client", "lambda_reg", "feature_scale_ratio", "soft_labels", "L", "mu",
                  "center_scale"});
  ProblemConfig p;
  p.kind = get_string(j, path, "kind", p.kind);
  if (p.kind != "logistic" && p.kind != "quadratic")
    throw ConfigError("problem.kind: unknown problem kind '" + p.kind + "'");
  p.n_clients = static_cast<int>(get_integer(j, path, "n_clients", p.n_clients));
  p.dim = static_cast<int>(get_integer(j, path, "d", p.dim));
  p.heterogeneity = get_number(j, path, "heterogeneity", p.heterogeneity);
  p.sigma2 = get_number(j, path, "sigma2", p.sigma2);
  p.batch_size = static_cast<int>(get_integer(j, path, "batch_size", p.batch_size));
  const std::int64_t seed = get_integer(j, path, "seed", 0);
  if (seed < 0) throw ConfigError("problem.seed: must be nonnegative");
  p.seed = static_cast<std::uint64_t>(seed);
  p.samples_per_client = static_cast<int>(get_integer(j, path, "samples_per_client", p.samples_per_client));
  p.lambda_reg = get_number(j, path, "lambda_reg", p.lambda_reg);
  p.feature_scale_ratio = get_number(j, path, "feature_scale_ratio", p.feature_scale_ratio);
  if (j.contains("soft_labels")) {
    if (!j.at("soft_labels").is_boolean()) throw ConfigError("problem.soft_labels: expected a boolean");
    p.soft_labels = j.at("soft_labels").get<bool>();
  }
  p.L = get_number(j, path, "L", p.L);
  p.mu = get_number(j, path, "mu", p.mu);
  p.center_scale = get_number(j, path, "center_scale", p.center_scale);
  return p;
}

json problem_to_json(const ProblemConfig& p) {
  json j{{"kind", p.kind},
         {"n_clients", p.n_clients},
         {"d", p.dim},
         {"heterogeneity", p.heterogeneity},
         {"sigma2", p.sigma2},
         {"batch_size", p.batch_size},
         {"seed", p.seed}};
  // Fields of the other problem kind are kept so that parsing round-trips.
  j["samples_per_client"] = p.samples_per_client;
  j["lambda_reg"] = p.lambda_reg;
  j["feature_scale_ratio"] = p.feature_scale_ratio;
  j["soft_labels"] = p.soft_labels;
  j["L"] = p.L;
  j["mu"] = p.mu;
  j["center_scale"] = p.center_scale;
  return j;
}

ScheduleConfig schedule_from_json(const json& j) {
  const std::string path = "schedule";
  reject_unknown(j, path, {"kind", "gamma", "eta", "delta", "M", "a", "A0"});
  ScheduleConfig s;
  s.kind = get_string(j, path, "kind", s.kind);
  static const std::set<std::string> kinds{"theorem_adef", "theorem_vanilla", "theorem_absolute",
                                           "experiment_gamma", "constant", "custom"};
  if (!kinds.count(s.kind)) throw ConfigError("schedule.kind: unknown schedule kind '" + s.kind + "'");
  s.gamma = get_number(j, path, "gamma", s.gamma);
  if (j.contains("eta")) s.gamma = get_number(j, path, "eta", s.gamma);
  if (j.contains("delta")) s.delta = get_number(j, path, "delta", 1.0);
  if (j.contains("M")) {
    const json& m = j.at("M");
    if (m.is_string()) {
      if (m.get<std::string>() != "auto") throw ConfigError("schedule.M: expected a number or \"auto\"");
    } else {
      s.M = get_number(j, path, "M", 1.0);
    }
  }
  s.weights = get_number_list(j, path, "a");
  s.A0 = get_number(j, path, "A0", 0.0);
  return s;
}

json schedule_to_json(const ScheduleConfig& s) {
  json j{{"kind", s.kind}, {"gamma", s.gamma}, {"M", s.M ? json(*s.M) : json("auto")},
         {"a", s.weights}, {"A0", s.A0}};
  if (s.delta) j["delta"] = *s.delta;
  return j;
}

RunConfig config_from_json(const json& j) {
  reject_unknown(j, "", {"problem", "method", "compressor", "schedule", "rounds", "seeds", "output",
                         "grid", "reference_tolerance", "write_traces", "fit_window"});
  RunConfig c;
  if (j.contains("problem")) c.problem = problem_from_json(j.at("problem"));
  c.method = method_from_string(get_string(j, "", "method", "adef"));
  if (j.contains("compressor")) c.compressor = compressor_from_json(j.at("compressor"), "compressor");
  if (j.contains("schedule")) c.schedule = schedule_from_json(j.at("schedule"));
  c.rounds = static_cast<int>(get_integer(j, "", "rounds", c.rounds));
  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    if (!s.is_array() || s.empty()) throw ConfigError("seeds: expected a nonempty array of integers");
    c.seeds.clear();
    for (const json& e : s) {
      if (!e.is_number_integer() || e.get<std::int64_t>() < 0)
        throw ConfigError("seeds: expected a nonempty array of nonnegative integers");
      c.seeds.push_back(e.get<std::uint64_t>());
    }
  }
  c.output = get_string(j, "", "output", "");
  c.grid = get_number_list(j, "", "grid");
  c.reference_tolerance = get_number(j, "", "reference_tolerance", c.reference_tolerance);
  if (j.contains("write_traces")) {
    if (!j.at("write_traces").is_boolean()) throw ConfigError("write_traces: expected a boolean");
    c.write_traces = j.at("write_traces").get<bool>();
  }
  if (j.contains("fit_window")) {
    const json& w = j.at("fit_window");
    if (!w.is_array() || w.size() != 2 || !w[0].is_number_integer() || !w[1].is_number_integer())
      throw ConfigError("fit_window: expected [begin, end] integers");
    c.fit_window = std::make_pair(w[0].get<int>(), w[1].get<int>());
  }
  return c;
}

json config_to_json(const RunConfig& c) {
  json j{{"problem", problem_to_json(c.problem)},
         {"method", to_string(c.method)},
         {"compressor", compressor_to_json(c.compressor)},
         {"schedule", schedule_to_json(c.schedule)},
         {"rounds", c.rounds},
         {"seeds", c.seeds},
         {"output", c.output},
         {"grid", c.grid},
         {"reference_tolerance", c.reference_tolerance},
         {"write_traces", c.write_traces}};
  if (c.fit_window) j["fit_window"] = {c.fit_window->first, c.fit_window->second};
  return j;
}

json fit_to_json(const RateFit& f) {
  return json{{"window", {f.window_begin, f.window_end}},
              {"slope", f.slope},
              {"intercept", f.intercept},
              {"r2", f.r2},
              {"points", f.points}};
}

void ensure_dir(const std::filesystem::path& p) {
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create directory " + p.string() + ": " + ec.message());
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

// Runs tasks [0, count) on up to `jobs` threads; results land by index.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::pair<int, int> default_fit_window(int rounds) { return {std::max(1, rounds / 4), rounds}; }

}  // namespace

bool operator==(const CompressorSpec& a, const CompressorSpec& b) {
  if (a.kind.index() != b.kind.index()) return false;
  if (const auto* x = std::get_if<TopK>(&a.kind)) return x->k == std::get<TopK>(b.kind).k;
  if (const auto* x = std::get_if<RandK>(&a.kind)) return x->k == std::get<RandK>(b.kind).k;
  if (const auto* x = std::get_if<Repeated>(&a.kind)) {
    const auto& y = std::get<Repeated>(b.kind);
    return x->rounds == y.rounds && x->base && y.base && *x->base == *y.base;
  }
  if (const auto* x = std::get_if<AbsoluteRound>(&a.kind))
    return x->step == std::get<AbsoluteRound>(b.kind).step;
  if (const auto* x = std::get_if<AbsoluteThreshold>(&a.kind))
    return x->threshold == std::get<AbsoluteThreshold>(b.kind).threshold;
  return true;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.problem == b.problem && a.method == b.method && a.compressor == b.compressor &&
         a.schedule == b.schedule && a.rounds == b.rounds && a.seeds == b.seeds &&
         a.output == b.output && a.grid == b.grid &&
         a.reference_tolerance == b.reference_tolerance && a.write_traces == b.write_traces &&
         a.fit_window == b.fit_window;
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& config) { return config_to_json(config).dump(2); }

CompressorSpec parse_compressor(const std::string& json_text) {
  return compressor_from_json(json::parse(json_text), "compressor");
}

const std::vector<double>& default_grid() {
  static const std::vector<double> grid{1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1, 1.0};
  return grid;
}

Problem build_problem(const ProblemConfig& c) {
  if (c.kind == "logistic") {
    LogisticSpec s;
    s.n_clients = c.n_clients;
    s.dim = c.dim;
    s.samples_per_client = c.samples_per_client;
    s.heterogeneity = c.heterogeneity;
    s.lambda_reg = c.lambda_reg;
    s.feature_scale_ratio = c.feature_scale_ratio;
    s.soft_labels = c.soft_labels;
    s.seed = c.seed;
    return generate_synthetic_logistic(s);
  }
  if (c.kind == "quadratic") {
    QuadraticSpec s;
    s.n_clients = c.n_clients;
    s.dim = c.dim;
    s.L = c.L;
    s.mu = c.mu;
    s.heterogeneity = c.heterogeneity;
    s.center_scale = c.center_scale;
    s.seed = c.seed;
    return generate_synthetic_quadratic(s);
  }
  throw ConfigError("problem.kind: unknown problem kind '" + c.kind + "'");
}

ResolvedRun resolve(const RunConfig& config) {
  auto problem = std::make_shared<const Problem>(build_problem(config.problem));
  const ReferenceSolution ref = solve_reference(*problem, config.reference_tolerance);
  return resolve(config, std::move(problem), ref);
}

ResolvedRun resolve(const RunConfig& config, std::shared_ptr<const Problem> problem,
                    const ReferenceSolution& reference) {
  if (config.rounds < 0) throw ConfigError("rounds: must be nonnegative");
  if (config.seeds.empty()) throw ConfigError("seeds: must be nonempty");
  if (!(config.reference_tolerance > 0.0)) throw ConfigError("reference_tolerance: must be positive");

  ResolvedRun r;
  r.config = config;
  r.problem = std::move(problem);
  r.oracle = std::make_shared<const Oracle>(*r.problem, config.problem.sigma2, config.problem.batch_size);
  r.reference = reference;
  r.x0 = Vector::Zero(r.problem->dim());

  const int d = r.problem->dim();
  if (config.method != Method::kAccSgd) {
    try {
      validate(config.compressor, d);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }

  ProblemConstants& k = r.constants;
  k.L = r.problem->smoothness();
  k.ell = r.problem->client_smoothness();
  k.sigma2 = config.problem.sigma2 / config.problem.batch_size;
  k.n = r.problem->n_clients();
  k.R0_sq = (r.x0 - reference.x_star).squaredNorm();
  // Dissimilarity at the optimum; a lower estimate of the global bound.
  double z = 0.0;
  for (int i = 0; i < k.n; ++i) z += r.problem->client_gradient(i, reference.x_star).squaredNorm();
  k.zeta2 = z / k.n;

  const ContractionBound quality = config.method == Method::kAccSgd
                                       ? ContractionBound{}
                                       : contraction_parameter(config.compressor, d);
  const double delta = config.schedule.delta.value_or(quality.contractive() ? quality.value : 1.0);

  const ScheduleConfig& s = config.schedule;
  StepSchedule schedule = StepSchedule::constant(1.0);
  if (s.kind == "experiment_gamma") {
    schedule = StepSchedule::experiment_gamma(s.gamma, delta);
  } else if (s.kind == "constant") {
    schedule = StepSchedule::constant(s.gamma);
  } else if (s.kind == "custom") {
    schedule = StepSchedule::custom(s.weights, s.A0);
  } else {
    const Method theory_method = s.kind == "theorem_adef"      ? Method::kAdef
                                 : s.kind == "theorem_vanilla" ? Method::kVanillaAccEf
                                 : config.method == Method::kNeolithic ? Method::kNeolithic
                                                                       : Method::kAbsoluteAcc;
    double M = 0.0;
    if (s.M) {
      M = *s.M;
    } else {
      if (config.rounds < 1) throw ConfigError("schedule.M: \"auto\" needs rounds >= 1");
      const double q = theory_method == Method::kAbsoluteAcc
                           ? (quality.contractive() ? 0.0 : quality.value)
                           : delta;
      M = theorem_M(theory_method, k, q, config.rounds);
    }
    schedule = theorem_schedule(theory_method, M, delta);
  }
  schedule.validate(config.rounds);
  r.method = MethodSpec{config.method, config.compressor, schedule};
  // Constructing a throwaway simulation runs the method-specific checks.
  Simulation probe(*r.oracle, r.method, r.x0, 0);
  (void)probe;
  return r;
}

double SeedRun::final_F() const {
  if (diverged) return kInf;
  return metrics.rows.empty() ? kInf : metrics.rows.back().F;
}

SeedRun simulate(const ResolvedRun& run, std::uint64_t seed) {
  SeedRun out;
  out.seed = seed;
  Simulation sim(*run.oracle, run.method, run.x0, seed);
  RunTrace& tr = out.trace;
  tr.method = run.method.method;
  tr.n_clients = run.problem->n_clients();
  tr.dim = run.problem->dim();
  tr.x0 = sim.server().x;
  tr.v0 = sim.server().v;
  tr.setup = sim.setup_cost();
  tr.has_memories = method_has_memories(tr.method);
  tr.rounds.reserve(static_cast<std::size_t>(run.config.rounds));
  for (int t = 0; t < run.config.rounds; ++t) {
    try {
      RoundTrace r = sim.step();
      const Vector& x = sim.server().x;
      if (!x.allFinite() || !sim.server().v.allFinite() || x.norm() > kDivergenceNorm) {
        out.diverged = true;
        out.divergence_round = t;
        out.divergence_reason = x.allFinite() ? "iterate norm exceeded 1e12" : "non-finite iterate";
        break;
      }
      tr.rounds.push_back(std::move(r));
    } catch (const NonFiniteError& e) {
      out.diverged = true;
      out.divergence_round = t;
      out.divergence_reason = e.what();
      break;
    }
  }
  out.metrics = compute_metrics(tr, *run.problem, run.reference);
  if (out.diverged) {
    log_message(1, to_string(tr.method) + " seed " + std::to_string(seed) + " diverged at round " +
                       std::to_string(out.divergence_round));
  }
  return out;
}

bool ExperimentResult::any_diverged() const {
  return std::any_of(seeds.begin(), seeds.end(), [](const SeedRun& s) { return s.diverged; });
}

double ExperimentResult::mean_final_F() const {
  if (seeds.empty()) return kInf;
  double acc = 0.0;
  for (const SeedRun& s : seeds) acc += s.final_F();
  return acc / static_cast<double>(seeds.size());
}

ExperimentResult run_in_memory(const RunConfig& config, int jobs) {
  return run_in_memory(resolve(config), jobs);
}

ExperimentResult run_in_memory(const ResolvedRun& run, int jobs) {
  ExperimentResult res;
  res.run = run;
  res.seeds.resize(run.config.seeds.size());
  parallel_for(run.config.seeds.size(), jobs,
               [&](std::size_t i) { res.seeds[i] = simulate(run, run.config.seeds[i]); });
  std::vector<TraceMetrics> all;
  for (const SeedRun& s : res.seeds) all.push_back(s.metrics);
  res.mean = average_metrics(all);
  const int T = run.config.rounds;
  const auto window = run.config.fit_window.value_or(default_fit_window(T));
  if (run.problem && T >= 10) {
    try {
      res.fit = fit_rate(res.mean, window.first, window.second);
    } catch (const std::exception& e) {
      res.fit_error = e.what();
    }
  } else {
    res.fit_error = "too few rounds for a rate fit";
  }
  log_message(1, to_string(run.config.method) + ": mean final F = " +
                     std::to_string(res.mean_final_F()));
  return res;
}

void write_experiment(const ExperimentResult& result, const std::filesystem::path& out) {
  ensure_dir(out / "metrics");
  if (result.run.config.write_traces) ensure_dir(out / "traces");
  {
    std::ofstream os = open_out(out / "config.json");
    os << serialize_config(result.run.config) << '\n';
  }
  json seeds = json::array();
  for (const SeedRun& s : result.seeds) {
    const std::string stem = "seed_" + std::to_string(s.seed);
    if (result.run.config.write_traces) {
      std::ofstream os = open_out(out / "traces" / (stem + ".jsonl"));
      write_trace_jsonl(os, s.trace);
    }
    std::ofstream os = open_out(out / "metrics" / (stem + ".csv"));
    write_metrics_csv(os, s.metrics);
    json entry{{"seed", s.seed},
               {"diverged", s.diverged},
               {"rounds_completed", static_cast<int>(s.trace.rounds.size())}};
    if (s.diverged) {
      entry["divergence_round"] = s.divergence_round;
      entry["divergence_reason"] = s.divergence_reason;
    } else {
      entry["final_F"] = s.final_F();
    }
    seeds.push_back(entry);
  }
  {
    std::ofstream os = open_out(out / "metrics" / "mean.csv");
    write_metrics_csv(os, result.mean);
  }
  const ResolvedRun& r = result.run;
  json summary{{"method", to_string(r.config.method)},
               {"problem", r.config.problem.kind},
               {"n_clients", r.problem->n_clients()},
               {"dim", r.problem->dim()},
               {"sigma2", r.config.problem.sigma2},
               {"rounds", r.config.rounds},
               {"compressor", describe(r.config.compressor)},
               {"schedule", r.method.schedule.describe()},
               {"f_star", r.reference.f_star},
               {"R0_sq", r.constants.R0_sq},
               {"L", r.constants.L},
               {"ell", r.constants.ell},
               {"setup_scalars", result.seeds.empty() ? 0 : result.seeds.front().trace.setup.scalars},
               {"seeds", seeds},
               {"any_diverged", result.any_diverged()}};
  if (!result.any_diverged() && !result.seeds.empty())
    summary["mean_final_F"] = result.mean_final_F();
  if (result.fit) {
    summary["slope_fit"] = fit_to_json(*result.fit);
  } else {
    summary["slope_fit"] = nullptr;
    summary["slope_fit_error"] = result.fit_error;
  }
  if (result.mean.rows.size() >= 8) {
    const PlateauAssessment p =
        assess_plateau(result.mean.suboptimality(), r.config.problem.sigma2 == 0.0);
    summary["plateau"] = {{"status", to_string(p.status)},
                          {"stabilized_error", p.stabilized_error},
                          {"relative_change", p.relative_change}};
  }
  std::ofstream os = open_out(out / "summary.json");
  os << summary.dump(2) << '\n';
}

ExperimentResult run_experiment(const RunConfig& config, const std::filesystem::path& out,
                                int jobs) {
  ExperimentResult res = run_in_memory(config, jobs);
  write_experiment(res, out);
  return res;
}

GridResult grid_search(const RunConfig& config, int jobs) {
  const std::vector<double>& grid = config.grid.empty() ? default_grid() : config.grid;
  if (config.schedule.kind != "experiment_gamma" && config.schedule.kind != "constant")
    throw ConfigError("schedule.kind: grid search needs an experiment_gamma or constant schedule");
  for (double g : grid)
    if (!(g > 0.0)) throw ConfigError("grid: values must be positive");
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());

  auto problem = std::make_shared<const Problem>(build_problem(config.problem));
  const ReferenceSolution ref = solve_reference(*problem, config.reference_tolerance);

  std::vector<ResolvedRun> runs;
  for (double g : sorted) {
    RunConfig c = config;
    c.schedule.gamma = g;
    runs.push_back(resolve(c, problem, ref));
  }
  const std::size_t seeds = config.seeds.size();
  std::vector<SeedRun> results(sorted.size() * seeds);
  parallel_for(results.size(), jobs, [&](std::size_t k) {
    results[k] = simulate(runs[k / seeds], config.seeds[k % seeds]);
  });

  GridResult out;
  double best = kInf;
  for (std::size_t gi = 0; gi < sorted.size(); ++gi) {
    GridPoint p;
    p.gamma = sorted[gi];
    double acc = 0.0;
    for (std::size_t s = 0; s < seeds; ++s) {
      const SeedRun& r = results[gi * seeds + s];
      if (r.diverged) ++p.diverged_seeds;
      acc += r.final_F();
    }
    p.mean_final_F = acc / static_cast<double>(seeds);
    if (p.mean_final_F < best) {
      best = p.mean_final_F;
      out.selected_index = gi;
    }
    out.points.push_back(p);
  }
  if (!std::isfinite(best)) throw std::runtime_error("grid search: every grid point diverged");
  out.selected_gamma = out.points[out.selected_index].gamma;
  return out;
}

void write_grid(const GridResult& grid, const std::filesystem::path& out) {
  ensure_dir(out);
  json points = json::array();
  for (const GridPoint& p : grid.points) {
    json e{{"gamma", p.gamma}, {"diverged_seeds", p.diverged_seeds}};
    e["mean_final_F"] = std::isfinite(p.mean_final_F) ? json(p.mean_final_F) : json(nullptr);
    points.push_back(e);
  }
  json j{{"points", points}, {"selected_gamma", grid.selected_gamma}};
  std::ofstream os = open_out(out / "grid.json");
  os << j.dump(2) << '\n';
}

std::vector<SpeedupRow> speedup_curve(const RunConfig& base, const std::vector<int>& client_counts,
                                      int jobs) {
  std::vector<SpeedupRow> rows;
  for (int n : client_counts) {
    RunConfig c = base;
    c.problem.n_clients = n;
    const ExperimentResult res = run_in_memory(c, jobs);
    if (res.any_diverged()) throw std::runtime_error("speedup: a run diverged for n=" + std::to_string(n));
    SpeedupRow row;
    row.n_clients = n;
    row.plateau = assess_plateau(res.mean.suboptimality(), base.problem.sigma2 == 0.0);
    rows.push_back(row);
  }
  return rows;
}

int log_level() {
  const char* env = std::getenv("COMPRESSED_OPT_LOG");
  if (!env) return 0;
  const std::string v(env);
  if (v == "debug" || v == "2") return 2;
  if (v == "info" || v == "1") return 1;
  return 0;
}

void log_message(int level, const std::string& message) {
  if (level <= log_level()) {
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << "[adef] " << message << '\n';
  }
}

}  // namespace adef
