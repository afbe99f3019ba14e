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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "adef/cli.hpp"
#include "adef/diagnostics.hpp"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int status;
  std::string out;
  std::string err;
};

Outcome call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int status = adef::dispatch(args, out, err);
  return {status, out.str(), err.str()};
}

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path dir = fs::temp_directory_path() / ("adef_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "config.json") << body;
  return dir;
}

const char* kRunConfig = R"({
  "problem": {"kind": "logistic", "n_clients": 3, "d": 6, "samples_per_client": 20,
              "lambda_reg": 0.01, "sigma2": 0},
  "method": "adef",
  "compressor": {"kind": "topk", "k": 1},
  "schedule": {"kind": "experiment_gamma", "gamma": 0.05},
  "rounds": 60,
  "seeds": [0]
})";

}  // namespace

TEST_CASE("verify contractivity passes with seed 7") {
  const auto r = call({"verify", "contractivity", "--seed", "7"});
  CHECK(r.status == 0);
  CHECK(r.out.find("PASS") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
  // Same seed, same report.
  CHECK(call({"verify", "--suite", "contractivity", "--seed", "7"}).out == r.out);
}

TEST_CASE("verify rejects unknown suites") {
  const auto r = call({"verify", "nonsense"});
  CHECK(r.status != 0);
  CHECK(r.err.find("nonsense") != std::string::npos);
}

TEST_CASE("run with a missing config names the path") {
  const auto r = call({"run", "missing.conf"});
  CHECK(r.status != 0);
  CHECK(r.err.find("missing.conf") != std::string::npos);
}

TEST_CASE("malformed config names the offending field") {
  const fs::path dir = write_config("bad", R"({"problem": {"kind": "logistic", "dimension": 3}})");
  const auto r = call({"run", "--config", (dir / "config.json").string(), "--out", (dir / "out").string()});
  CHECK(r.status != 0);
  CHECK(r.err.find("problem.dimension") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("run then report slope emits a parseable table") {
  const fs::path dir = write_config("slope", kRunConfig);
  const fs::path out = dir / "run";
  REQUIRE(call({"run", (dir / "config.json").string(), "--out", out.string()}).status == 0);
  CHECK(fs::exists(out / "summary.json"));
  CHECK(fs::exists(out / "traces" / "seed_0.jsonl"));
  const auto r = call({"report", "slope", out.string()});
  CHECK(r.status == 0);
  std::istringstream is(r.out);
  std::string header, row;
  std::getline(is, header);
  CHECK(header == "run,seed,window_begin,window_end,slope,intercept,r2");
  int rows = 0;
  while (std::getline(is, row)) {
    ++rows;
    const double slope = std::stod(row.substr(row.find(',', row.find(',', row.find(',', row.find(',') + 1) + 1) + 1) + 1));
    CHECK(slope < 0.0);
  }
  CHECK(rows == 2);  // mean and seed_0
  fs::remove_all(dir);
}

TEST_CASE("report speedup reads several run directories") {
  const fs::path dir = write_config("speedup", kRunConfig);
  std::vector<std::string> args{"report", "--kind", "speedup"};
  for (int n : {2, 4}) {
    std::string body = kRunConfig;
    body.replace(body.find("\"n_clients\": 3"), 14, "\"n_clients\": " + std::to_string(n));
    std::ofstream(dir / "config.json") << body;
    const fs::path out = dir / ("n" + std::to_string(n));
    REQUIRE(call({"run", (dir / "config.json").string(), "--out", out.string()}).status == 0);
    args.push_back(out.string());
  }
  const auto r = call(args);
  CHECK(r.status == 0);
  CHECK(r.out.rfind("n_clients,status,stabilized_error", 0) == 0);
  CHECK(r.out.find("\n2,saturated,") != std::string::npos);
  CHECK(r.out.find("\n4,saturated,") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("grid subcommand prints the grid and marks the selection") {
  std::string body = kRunConfig;
  body.insert(body.rfind('}'), ", \"grid\": [0.01, 0.05]");
  const fs::path dir = write_config("grid", body);
  const auto r = call({"grid", (dir / "config.json").string(), "--out", (dir / "g").string()});
  CHECK(r.status == 0);
  CHECK(r.out.rfind("gamma,mean_final_F,diverged_seeds,selected", 0) == 0);
  CHECK(fs::exists(dir / "g" / "grid.json"));
  fs::remove_all(dir);
}

TEST_CASE("report rejects unknown kinds and missing directories") {
  CHECK(call({"report", "histogram", "/tmp"}).status != 0);
  CHECK(call({"report", "slope", "/nonexistent/run"}).status != 0);
  CHECK(call({}).status != 0);
}
