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

#ifndef ADEF_COMPRESSORS_HPP
#define ADEF_COMPRESSORS_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>

#include "adef/rng.hpp"
#include "adef/types.hpp"

namespace adef {

struct CompressorSpec;

struct Identity {};
struct TopK {
  int k = 1;
};
// Unscaled random sparsification: keeps k uniformly chosen coordinates.
struct RandK {
  int k = 1;
};
// Applies the base compressor to the running residual `rounds` times and
// sums the messages.
struct Repeated {
  std::shared_ptr<const CompressorSpec> base;
  int rounds = 1;
};
// Rounds every coordinate to the nearest multiple of `step`.
struct AbsoluteRound {
  double step = 1.0;
};
// Hard thresholding: zeroes every coordinate with |x_i| < threshold.
struct AbsoluteThreshold {
  double threshold = 0.0;
};

struct CompressorSpec {
  std::variant<Identity, TopK, RandK, Repeated, AbsoluteRound, AbsoluteThreshold> kind;
};

CompressorSpec identity();
CompressorSpec top_k(int k);
CompressorSpec rand_k(int k);
CompressorSpec repeated(CompressorSpec base, int rounds);
CompressorSpec absolute_round(double step);
CompressorSpec absolute_threshold(double threshold);

bool is_contractive(const CompressorSpec& spec);
bool is_deterministic(const CompressorSpec& spec);
std::string describe(const CompressorSpec& spec);

// Throws std::invalid_argument if `spec` is malformed for dimension d.
void validate(const CompressorSpec& spec, int d);

// Per-call transmission cost. `messages` counts separate compressed messages
// (a repeated compressor sends one per round).
struct CommCost {
  std::int64_t scalars = 0;
  std::int64_t indices = 0;
  std::int64_t messages = 0;

  CommCost& operator+=(const CommCost& o) {
    scalars += o.scalars;
    indices += o.indices;
    messages += o.messages;
    return *this;
  }
  friend bool operator==(const CommCost&, const CommCost&) = default;
};

struct CompressionResult {
  Vector output;
  CommCost cost;
};

CompressionResult compress(const CompressorSpec& spec, const Vector& x, Stream& rng);

// Declared quality of a compressor: delta for contractive kinds, the absolute
// error radius Delta (not squared) for absolute kinds.
struct ContractionBound {
  enum class Type { kContractive, kAbsolute };
  Type type = Type::kContractive;
  double value = 1.0;

  bool contractive() const { return type == Type::kContractive; }
};

ContractionBound contraction_parameter(const CompressorSpec& spec, int d);

// max over trials of mean_s ||C(x)-x||^2 / ||x||^2.
double estimate_contraction(const CompressorSpec& spec, std::span<const Vector> trials,
                            int samples_per_vector, Stream& rng);

}  // namespace adef

#endif  // ADEF_COMPRESSORS_HPP
