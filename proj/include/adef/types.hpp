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

#ifndef ADEF_TYPES_HPP
#define ADEF_TYPES_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace adef {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Raised when an operation receives or produces NaN/Inf.
class NonFiniteError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised for invalid configurations; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline bool all_finite(const Vector& x) { return x.allFinite(); }

inline void require_finite(const Vector& x, const char* where) {
  if (!x.allFinite()) {
    throw NonFiniteError(std::string(where) + ": non-finite entry in vector");
  }
}

inline void require_dim(const Vector& x, Eigen::Index d, const char* where) {
  if (x.size() != d) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch (got " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(d) + ")");
  }
}

}  // namespace adef

#endif  // ADEF_TYPES_HPP
