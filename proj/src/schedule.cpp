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

#include "adef/schedule.hpp"

#include <cmath>
#include <sstream>

#include "adef/types.hpp"

namespace adef {

StepSchedule StepSchedule::theorem_adef(double M, double delta) {
  StepSchedule s(Kind::kTheoremAdef);
  s.M_ = M;
  s.delta_ = delta;
  return s;
}

StepSchedule StepSchedule::theorem_vanilla(double M, double delta) {
  StepSchedule s(Kind::kTheoremVanilla);
  s.M_ = M;
  s.delta_ = delta;
  return s;
}

StepSchedule StepSchedule::theorem_absolute(double M) {
  StepSchedule s(Kind::kTheoremAbsolute);
  s.M_ = M;
  return s;
}

StepSchedule StepSchedule::experiment_gamma(double gamma, double delta) {
  StepSchedule s(Kind::kExperimentGamma);
  s.gamma_ = gamma;
  s.delta_ = delta;
  return s;
}

StepSchedule StepSchedule::constant(double eta) {
  StepSchedule s(Kind::kConstant);
  s.gamma_ = eta;
  return s;
}

StepSchedule StepSchedule::custom(std::vector<double> a, double A0) {
  StepSchedule s(Kind::kCustom);
  s.custom_ = std::move(a);
  s.custom_A0_ = A0;
  return s;
}

double StepSchedule::a(int t) const {
  if (t < 1) throw std::out_of_range("schedule: a_t defined for t >= 1");
  switch (kind_) {
    case Kind::kTheoremAdef:
      return (t + 32.0 / delta_) / M_;
    case Kind::kTheoremVanilla:
      return (t + 4.0 / delta_) / M_;
    case Kind::kTheoremAbsolute:
      return t / M_;
    case Kind::kExperimentGamma:
      return gamma_ * (t + 1.0 / delta_);
    case Kind::kConstant:
      return gamma_;
    case Kind::kCustom:
      if (static_cast<std::size_t>(t) > custom_.size())
        throw std::out_of_range("schedule: custom weights exhausted at t=" + std::to_string(t));
      return custom_[t - 1];
  }
  return 0.0;
}

double StepSchedule::A0() const {
  switch (kind_) {
    case Kind::kTheoremAdef:
      return 32.0 * 32.0 / (2.0 * delta_ * delta_ * M_);
    case Kind::kTheoremVanilla:
      return 8.0 / (delta_ * delta_ * M_);
    case Kind::kExperimentGamma:
      return 1.0 / (delta_ * delta_);
    case Kind::kCustom:
      return custom_A0_;
    case Kind::kTheoremAbsolute:
    case Kind::kConstant:
      return 0.0;
  }
  return 0.0;
}

double StepSchedule::A(int t) const {
  double acc = A0();
  for (int j = 1; j <= t; ++j) acc += a(j);
  return acc;
}

StepSchedule StepSchedule::with_gamma(double gamma) const {
  if (kind_ != Kind::kExperimentGamma && kind_ != Kind::kConstant)
    throw ConfigError("schedule.gamma: only experiment_gamma and constant schedules take gamma");
  StepSchedule s = *this;
  s.gamma_ = gamma;
  return s;
}

void StepSchedule::validate(int rounds) const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  switch (kind_) {
    case Kind::kTheoremAdef:
    case Kind::kTheoremVanilla:
      if (!positive(delta_) || delta_ > 1.0) throw ConfigError("schedule.delta: must lie in (0, 1]");
      [[fallthrough]];
    case Kind::kTheoremAbsolute:
      if (!positive(M_)) throw ConfigError("schedule.M: must be positive");
      break;
    case Kind::kExperimentGamma:
      if (!positive(delta_) || delta_ > 1.0) throw ConfigError("schedule.delta: must lie in (0, 1]");
      [[fallthrough]];
    case Kind::kConstant:
      if (!positive(gamma_)) throw ConfigError("schedule.gamma: must be positive");
      break;
    case Kind::kCustom:
      if (static_cast<int>(custom_.size()) < rounds)
        throw ConfigError("schedule.a: custom list shorter than the number of rounds");
      if (!(custom_A0_ >= 0.0) || !std::isfinite(custom_A0_))
        throw ConfigError("schedule.A0: must be finite and nonnegative");
      break;
  }
  for (int t = 1; t <= rounds; ++t) {
    const double at = a(t);
    if (!std::isfinite(at) || at <= 1e-12)
      throw ConfigError("schedule: a_" + std::to_string(t) + " = " + std::to_string(at) +
                        " is not positive");
  }
}

std::string to_string(StepSchedule::Kind kind) {
  switch (kind) {
    case StepSchedule::Kind::kTheoremAdef:
      return "theorem_adef";
    case StepSchedule::Kind::kTheoremVanilla:
      return "theorem_vanilla";
    case StepSchedule::Kind::kTheoremAbsolute:
      return "theorem_absolute";
    case StepSchedule::Kind::kExperimentGamma:
      return "experiment_gamma";
    case StepSchedule::Kind::kConstant:
      return "constant";
    case StepSchedule::Kind::kCustom:
      return "custom";
  }
  return "?";
}

std::string StepSchedule::describe() const {
  std::ostringstream os;
  os << to_string(kind_);
  switch (kind_) {
    case Kind::kTheoremAdef:
    case Kind::kTheoremVanilla:
      os << "(M=" << M_ << ", delta=" << delta_ << ")";
      break;
    case Kind::kTheoremAbsolute:
      os << "(M=" << M_ << ")";
      break;
    case Kind::kExperimentGamma:
      os << "(gamma=" << gamma_ << ", delta=" << delta_ << ")";
      break;
    case Kind::kConstant:
      os << "(eta=" << gamma_ << ")";
      break;
    case Kind::kCustom:
      os << "(" << custom_.size() << " weights)";
      break;
  }
  return os.str();
}

}  // namespace adef
