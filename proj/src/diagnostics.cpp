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

#include "adef/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace adef {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "nan") return kNaN;
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("metrics csv: bad number '" + s + "'");
  return v;
}

json vec_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector json_to_vec(const json& j) {
  const auto vals = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double from_nullable(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

json cost_to_json(const CommCost& c) {
  return json{{"scalars", c.scalars}, {"indices", c.indices}, {"messages", c.messages}};
}

CommCost cost_from_json(const json& j) {
  return {j.at("scalars").get<std::int64_t>(), j.at("indices").get<std::int64_t>(),
          j.at("messages").get<std::int64_t>()};
}

}  // namespace

bool method_has_memories(Method method) {
  return method == Method::kAdef || method == Method::kVanillaAccEf || method == Method::kEf;
}

std::vector<double> TraceMetrics::times() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const MetricsRow& r : rows) out.push_back(r.t);
  return out;
}

std::vector<double> TraceMetrics::suboptimality() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const MetricsRow& r : rows) out.push_back(r.F);
  return out;
}

TraceMetrics compute_metrics(const RunTrace& trace, const Problem& problem,
                             const ReferenceSolution& reference) {
  const Vector& xs = reference.x_star;
  TraceMetrics m;
  m.rows.reserve(trace.rounds.size() + 1);
  MetricsRow row;
  row.t = 0;
  row.F = problem.value(trace.x0) - reference.f_star;
  row.E = 0.0;
  row.Ebar = trace.has_memories ? 0.0 : kNaN;
  row.H = trace.rounds.empty() ? kNaN : trace.rounds.front().H;
  row.R2 = (trace.v0 - xs).squaredNorm();
  row.comm_scalars = trace.setup.scalars;
  row.comm_indices = trace.setup.indices;
  row.comm_messages = trace.setup.messages;
  m.rows.push_back(row);

  Vector e = Vector::Zero(trace.dim);
  for (std::size_t k = 0; k < trace.rounds.size(); ++k) {
    const RoundTrace& r = trace.rounds[k];
    if (r.ghat.size() != trace.dim || r.gbar.size() != trace.dim || r.x_next.size() != trace.dim ||
        r.v_next.size() != trace.dim)
      throw std::invalid_argument("compute_metrics: round " + std::to_string(r.t) +
                                  " lacks ghat/gbar/x/v");
    e += r.a * (r.ghat - r.gbar);
    row.t = r.t + 1;
    row.F = problem.value(r.x_next) - reference.f_star;
    row.E = e.squaredNorm();
    row.Ebar = trace.has_memories ? r.Ebar_next : kNaN;
    row.H = k + 1 < trace.rounds.size() ? trace.rounds[k + 1].H : kNaN;
    row.R2 = (r.v_next - xs).squaredNorm();
    row.comm_scalars += r.comm.scalars;
    row.comm_indices += r.comm.indices;
    row.comm_messages += r.comm.messages;
    m.rows.push_back(row);
  }
  return m;
}

std::vector<double> error_identity_residuals(const RunTrace& trace) {
  std::vector<double> out;
  if (!trace.has_memories) return out;
  Vector e = Vector::Zero(trace.dim);
  for (const RoundTrace& r : trace.rounds) {
    e += r.a * (r.ghat - r.gbar);
    if (r.avg_e_next.size() != trace.dim)
      throw std::invalid_argument("error_identity_residuals: round lacks avg_e");
    out.push_back((r.avg_e_next - e).norm() / (1.0 + e.norm()));
  }
  return out;
}

TraceMetrics average_metrics(const std::vector<TraceMetrics>& runs) {
  TraceMetrics out;
  if (runs.empty()) return out;
  std::size_t len = runs.front().rows.size();
  for (const TraceMetrics& r : runs) len = std::min(len, r.rows.size());
  const double k = static_cast<double>(runs.size());
  for (std::size_t i = 0; i < len; ++i) {
    MetricsRow acc;
    acc.t = runs.front().rows[i].t;
    acc.F = acc.E = acc.Ebar = acc.H = acc.R2 = 0.0;
    double scalars = 0, indices = 0, messages = 0;
    for (const TraceMetrics& r : runs) {
      const MetricsRow& row = r.rows[i];
      acc.F += row.F;
      acc.E += row.E;
      acc.Ebar += row.Ebar;
      acc.H += row.H;
      acc.R2 += row.R2;
      scalars += static_cast<double>(row.comm_scalars);
      indices += static_cast<double>(row.comm_indices);
      messages += static_cast<double>(row.comm_messages);
    }
    acc.F /= k;
    acc.E /= k;
    acc.Ebar /= k;
    acc.H /= k;
    acc.R2 /= k;
    acc.comm_scalars = static_cast<std::int64_t>(std::llround(scalars / k));
    acc.comm_indices = static_cast<std::int64_t>(std::llround(indices / k));
    acc.comm_messages = static_cast<std::int64_t>(std::llround(messages / k));
    out.rows.push_back(acc);
  }
  return out;
}

RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& F, int begin, int end) {
  if (t.size() != F.size()) throw std::invalid_argument("fit_rate: series length mismatch");
  if (begin < 1) throw std::domain_error("fit_rate: window must start at t >= 1");
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int count = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < begin || t[i] > end) continue;
    if (!(F[i] > 0.0) || !std::isfinite(F[i]))
      throw std::domain_error("fit_rate: nonpositive F at t=" + format_double(t[i]) +
                              " (saturated below f* accuracy); shrink the window");
    const double lx = std::log(t[i]);
    const double ly = std::log(F[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
    ++count;
  }
  if (count < 10) throw std::domain_error("fit_rate: window holds fewer than 10 points");
  const double n = count;
  const double cxx = sxx - sx * sx / n;
  const double cxy = sxy - sx * sy / n;
  const double cyy = syy - sy * sy / n;
  RateFit fit;
  fit.window_begin = begin;
  fit.window_end = end;
  fit.points = count;
  fit.slope = cxy / cxx;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.r2 = cyy > 0.0 ? std::clamp(cxy * cxy / (cxx * cyy), 0.0, 1.0) : 1.0;
  return fit;
}

RateFit fit_rate(const TraceMetrics& metrics, int begin, int end) {
  return fit_rate(metrics.times(), metrics.suboptimality(), begin, end);
}

std::string to_string(PlateauStatus status) {
  switch (status) {
    case PlateauStatus::kPlateau:
      return "plateau";
    case PlateauStatus::kNoPlateau:
      return "no_plateau";
    case PlateauStatus::kSaturated:
      return "saturated";
  }
  return "?";
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  const double lo = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lo + hi);
}

PlateauAssessment assess_plateau(const std::vector<double>& F, bool saturated, double tolerance) {
  if (F.size() < 8) throw std::invalid_argument("assess_plateau: series too short");
  const std::size_t start = F.size() - F.size() / 4;
  const std::size_t mid = start + (F.size() - start) / 2;
  PlateauAssessment out;
  out.stabilized_error = median({F.begin() + static_cast<std::ptrdiff_t>(start), F.end()});
  const double first = median({F.begin() + static_cast<std::ptrdiff_t>(start),
                               F.begin() + static_cast<std::ptrdiff_t>(mid)});
  const double second = median({F.begin() + static_cast<std::ptrdiff_t>(mid), F.end()});
  const double scale = std::max(std::abs(first), std::abs(second));
  out.relative_change = scale > 0.0 ? std::abs(second - first) / scale : 0.0;
  if (saturated) {
    out.status = PlateauStatus::kSaturated;
  } else {
    out.status = out.relative_change < tolerance ? PlateauStatus::kPlateau : PlateauStatus::kNoPlateau;
  }
  return out;
}

void write_metrics_csv(std::ostream& os, const TraceMetrics& metrics) {
  os << "t,F,E,Ebar,H,R2,comm_scalars,comm_indices,comm_messages\n";
  for (const MetricsRow& r : metrics.rows) {
    os << r.t << ',' << format_double(r.F) << ',' << format_double(r.E) << ','
       << format_double(r.Ebar) << ',' << format_double(r.H) << ',' << format_double(r.R2) << ','
       << r.comm_scalars << ',' << r.comm_indices << ',' << r.comm_messages << '\n';
  }
}

TraceMetrics read_metrics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("metrics csv: empty input");
  if (line.rfind("t,F,E,Ebar,H,R2,comm_scalars,comm_indices", 0) != 0)
    throw std::invalid_argument("metrics csv: unexpected header '" + line + "'");
  TraceMetrics m;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 8) throw std::invalid_argument("metrics csv: short row '" + line + "'");
    MetricsRow r;
    r.t = std::stoi(cells[0]);
    r.F = parse_double(cells[1]);
    r.E = parse_double(cells[2]);
    r.Ebar = parse_double(cells[3]);
    r.H = parse_double(cells[4]);
    r.R2 = parse_double(cells[5]);
    r.comm_scalars = std::stoll(cells[6]);
    r.comm_indices = std::stoll(cells[7]);
    r.comm_messages = cells.size() > 8 ? std::stoll(cells[8]) : 0;
    m.rows.push_back(r);
  }
  return m;
}

void write_trace_jsonl(std::ostream& os, const RunTrace& trace) {
  json head{{"record", "init"},
            {"method", to_string(trace.method)},
            {"n_clients", trace.n_clients},
            {"dim", trace.dim},
            {"has_memories", trace.has_memories},
            {"x0", vec_to_json(trace.x0)},
            {"v0", vec_to_json(trace.v0)},
            {"setup", cost_to_json(trace.setup)}};
  os << head.dump() << '\n';
  for (const RoundTrace& r : trace.rounds) {
    json j{{"record", "round"},
           {"t", r.t},
           {"a", r.a},
           {"A", r.A_next},
           {"ghat", vec_to_json(r.ghat)},
           {"gbar", vec_to_json(r.gbar)},
           {"comm", cost_to_json(r.comm)},
           {"H", nullable(r.H)},
           {"Ebar", nullable(r.Ebar_next)},
           {"x", vec_to_json(r.x_next)},
           {"v", vec_to_json(r.v_next)}};
    if (r.avg_e_next.size() > 0) j["avg_e"] = vec_to_json(r.avg_e_next);
    os << j.dump() << '\n';
  }
}

RunTrace read_trace_jsonl(std::istream& is) {
  RunTrace trace;
  std::string line;
  bool have_head = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const std::string kind = j.at("record").get<std::string>();
    if (kind == "init") {
      trace.method = method_from_string(j.at("method").get<std::string>());
      trace.n_clients = j.at("n_clients").get<int>();
      trace.dim = j.at("dim").get<int>();
      trace.has_memories = j.at("has_memories").get<bool>();
      trace.x0 = json_to_vec(j.at("x0"));
      trace.v0 = json_to_vec(j.at("v0"));
      trace.setup = cost_from_json(j.at("setup"));
      have_head = true;
    } else if (kind == "round") {
      if (!have_head) throw std::invalid_argument("trace: round record before init record");
      RoundTrace r;
      r.t = j.at("t").get<int>();
      r.a = j.at("a").get<double>();
      r.A_next = j.at("A").get<double>();
      if (j.contains("ghat")) r.ghat = json_to_vec(j.at("ghat"));
      if (j.contains("gbar")) r.gbar = json_to_vec(j.at("gbar"));
      if (j.contains("x")) r.x_next = json_to_vec(j.at("x"));
      if (j.contains("v")) r.v_next = json_to_vec(j.at("v"));
      if (j.contains("avg_e")) r.avg_e_next = json_to_vec(j.at("avg_e"));
      r.comm = cost_from_json(j.at("comm"));
      r.H = from_nullable(j.at("H"));
      r.Ebar_next = from_nullable(j.at("Ebar"));
      trace.rounds.push_back(std::move(r));
    } else {
      throw std::invalid_argument("trace: unknown record kind '" + kind + "'");
    }
  }
  if (!have_head) throw std::invalid_argument("trace: missing init record");
  return trace;
}

}  // namespace adef
