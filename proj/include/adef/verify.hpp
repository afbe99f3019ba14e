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

#ifndef ADEF_VERIFY_HPP
#define ADEF_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace adef {

struct PropertyResult {
  std::string suite;
  std::string property;
  bool passed = false;
  std::string detail;
};

// Suite names accepted by run_suite, "all" excluded.
const std::vector<std::string>& suite_names();

// Runs a named invariant suite ("all" runs every suite). Deterministic in
// `seed`. Throws std::invalid_argument for unknown names.
std::vector<PropertyResult> run_suite(const std::string& name, std::uint64_t seed);

std::vector<PropertyResult> verify_contractivity(std::uint64_t seed);
std::vector<PropertyResult> verify_error_identity(std::uint64_t seed);
std::vector<PropertyResult> verify_lossless_reduction(std::uint64_t seed);
std::vector<PropertyResult> verify_rate_fit_synthetic(std::uint64_t seed);

}  // namespace adef

#endif  // ADEF_VERIFY_HPP
