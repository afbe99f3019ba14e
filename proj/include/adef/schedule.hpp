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

#ifndef ADEF_SCHEDULE_HPP
#define ADEF_SCHEDULE_HPP

#include <string>
#include <vector>

namespace adef {

/// Weights a_t (t >= 1) and A_0 of the accelerated skeleton.
class StepSchedule {
 public:
  enum class Kind {
    kTheoremAdef,      // a_t = (t + 32/delta)/M,  A_0 = 32^2/(2 delta^2 M)
    kTheoremVanilla,   // a_t = (t + 4/delta)/M,   A_0 = 8/(delta^2 M)
    kTheoremAbsolute,  // a_t = t/M,               A_0 = 0
    kExperimentGamma,  // a_t = gamma (t + 1/delta), A_0 = 1/delta^2
    kConstant,         // a_t = gamma,             A_0 = 0
    kCustom,           // explicit list
  };

  static StepSchedule theorem_adef(double M, double delta);
  static StepSchedule theorem_vanilla(double M, double delta);
  static StepSchedule theorem_absolute(double M);
  static StepSchedule experiment_gamma(double gamma, double delta);
  static StepSchedule constant(double eta);
  static StepSchedule custom(std::vector<double> a, double A0);

  Kind kind() const { return kind_; }
  double a(int t) const;
  double A0() const;
  // A_t = A_0 + sum_{j<=t} a_j.
  double A(int t) const;

  double M() const { return M_; }
  double delta() const { return delta_; }
  double gamma() const { return gamma_; }
  const std::vector<double>& custom_weights() const { return custom_; }

  // Same schedule with gamma (experiment/constant) replaced.
  StepSchedule with_gamma(double gamma) const;

  // Rejects schedules with a_t <= 1e-12 for some t in [1, rounds], or
  // non-finite parameters. Throws ConfigError.
  void validate(int rounds) const;

  std::string describe() const;

 private:
  StepSchedule(Kind kind) : kind_(kind) {}

  Kind kind_;
  double M_ = 1.0;
  double delta_ = 1.0;
  double gamma_ = 1.0;
  double custom_A0_ = 0.0;
  std::vector<double> custom_;
};

std::string to_string(StepSchedule::Kind kind);

}  // namespace adef

#endif  // ADEF_SCHEDULE_HPP
