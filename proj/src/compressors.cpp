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

#include "adef/compressors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace adef {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Keeps the k largest |x_i|; ties go to the lower index.
Vector top_k_select(const Vector& x, int k) {
  const auto d = static_cast<int>(x.size());
  if (k >= d) return x;
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  auto before = [&x](int a, int b) {
    const double fa = std::abs(x[a]);
    const double fb = std::abs(x[b]);
    return fa > fb || (fa == fb && a < b);
  };
  std::nth_element(idx.begin(), idx.begin() + k, idx.end(), before);
  Vector out = Vector::Zero(d);
  for (int j = 0; j < k; ++j) out[idx[j]] = x[idx[j]];
  return out;
}

Vector rand_k_select(const Vector& x, int k, Stream& rng) {
  const auto d = static_cast<int>(x.size());
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, d - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  Vector out = Vector::Zero(d);
  for (int j = 0; j < k; ++j) out[idx[j]] = x[idx[j]];
  return out;
}

}  // namespace

CompressorSpec identity() { return {Identity{}}; }
CompressorSpec top_k(int k) { return {TopK{k}}; }
CompressorSpec rand_k(int k) { return {RandK{k}}; }
CompressorSpec repeated(CompressorSpec base, int rounds) {
  return {Repeated{std::make_shared<const CompressorSpec>(std::move(base)), rounds}};
}
CompressorSpec absolute_round(double step) { return {AbsoluteRound{step}}; }
CompressorSpec absolute_threshold(double threshold) { return {AbsoluteThreshold{threshold}}; }

bool is_contractive(const CompressorSpec& spec) {
  return std::holds_alternative<Identity>(spec.kind) ||
         std::holds_alternative<TopK>(spec.kind) || std::holds_alternative<RandK>(spec.kind) ||
         std::holds_alternative<Repeated>(spec.kind);
}

bool is_deterministic(const CompressorSpec& spec) {
  return std::visit(overloaded{
                        [](const RandK&) { return false; },
                        [](const Repeated& r) { return r.base && is_deterministic(*r.base); },
                        [](const auto&) { return true; },
                    },
                    spec.kind);
}

std::string describe(const CompressorSpec& spec) {
  return std::visit(overloaded{
                        [](const Identity&) { return std::string("identity"); },
                        [](const TopK& c) { return "topk(k=" + std::to_string(c.k) + ")"; },
                        [](const RandK& c) { return "randk(k=" + std::to_string(c.k) + ")"; },
                        [](const Repeated& c) {
                          return "repeated(" + (c.base ? describe(*c.base) : std::string("?")) +
                                 ", R=" + std::to_string(c.rounds) + ")";
                        },
                        [](const AbsoluteRound& c) {
                          std::ostringstream os;
                          os << "round(step=" << c.step << ")";
                          return os.str();
                        },
                        [](const AbsoluteThreshold& c) {
                          std::ostringstream os;
                          os << "threshold(tau=" << c.threshold << ")";
                          return os.str();
                        },
                    },
                    spec.kind);
}

void validate(const CompressorSpec& spec, int d) {
  if (d <= 0) throw std::invalid_argument("compressor: dimension must be positive");
  std::visit(overloaded{
                 [](const Identity&) {},
                 [d](const TopK& c) {
                   if (c.k < 1 || c.k > d)
                     throw std::invalid_argument("compressor.k: topk requires 1 <= k <= d");
                 },
                 [d](const RandK& c) {
                   if (c.k < 1 || c.k > d)
                     throw std::invalid_argument("compressor.k: randk requires 1 <= k <= d");
                 },
                 [d](const Repeated& c) {
                   if (c.rounds < 1)
                     throw std::invalid_argument("compressor.rounds: must be >= 1");
                   if (!c.base) throw std::invalid_argument("compressor.base: missing");
                   if (!is_contractive(*c.base))
                     throw std::invalid_argument(
                         "compressor.base: repeated compression needs a contractive base");
                   validate(*c.base, d);
                 },
                 [](const AbsoluteRound& c) {
                   if (!(c.step > 0.0) || !std::isfinite(c.step))
                     throw std::invalid_argument("compressor.step: must be positive");
                 },
                 [](const AbsoluteThreshold& c) {
                   if (!(c.threshold >= 0.0) || !std::isfinite(c.threshold))
                     throw std::invalid_argument("compressor.threshold: must be nonnegative");
                 },
             },
             spec.kind);
}

CompressionResult compress(const CompressorSpec& spec, const Vector& x, Stream& rng) {
  require_finite(x, "compress");
  const auto d = static_cast<std::int64_t>(x.size());
  return std::visit(
      overloaded{
          [&](const Identity&) { return CompressionResult{x, {d, 0, 1}}; },
          [&](const TopK& c) {
            if (c.k < 1 || c.k > d) throw std::invalid_argument("compress: topk k out of range");
            return CompressionResult{top_k_select(x, c.k), {c.k, c.k, 1}};
          },
          [&](const RandK& c) {
            if (c.k < 1 || c.k > d) throw std::invalid_argument("compress: randk k out of range");
            return CompressionResult{rand_k_select(x, c.k, rng), {c.k, c.k, 1}};
          },
          [&](const Repeated& c) {
            CompressionResult acc{Vector::Zero(d), {}};
            for (int q = 0; q < c.rounds; ++q) {
              CompressionResult part = compress(*c.base, x - acc.output, rng);
              acc.output += part.output;
              acc.cost += part.cost;
            }
            return acc;
          },
          [&](const AbsoluteRound& c) {
            Vector out = x.unaryExpr([s = c.step](double v) { return s * std::round(v / s); });
            return CompressionResult{std::move(out), {d, 0, 1}};
          },
          [&](const AbsoluteThreshold& c) {
            Vector out = x.unaryExpr(
                [tau = c.threshold](double v) { return std::abs(v) < tau ? 0.0 : v; });
            return CompressionResult{std::move(out), {d, 0, 1}};
          },
      },
      spec.kind);
}

ContractionBound contraction_parameter(const CompressorSpec& spec, int d) {
  validate(spec, d);
  using T = ContractionBound::Type;
  return std::visit(
      overloaded{
          [](const Identity&) { return ContractionBound{T::kContractive, 1.0}; },
          [d](const TopK& c) {
            return ContractionBound{T::kContractive, static_cast<double>(c.k) / d};
          },
          [d](const RandK& c) {
            return ContractionBound{T::kContractive, static_cast<double>(c.k) / d};
          },
          [d](const Repeated& c) {
            const double base = contraction_parameter(*c.base, d).value;
            return ContractionBound{T::kContractive, 1.0 - std::pow(1.0 - base, c.rounds)};
          },
          [d](const AbsoluteRound& c) {
            // worst case: every coordinate off by step/2
            return ContractionBound{T::kAbsolute, std::sqrt(static_cast<double>(d)) * c.step / 2};
          },
          [d](const AbsoluteThreshold& c) {
            return ContractionBound{T::kAbsolute, std::sqrt(static_cast<double>(d)) * c.threshold};
          },
      },
      spec.kind);
}

double estimate_contraction(const CompressorSpec& spec, std::span<const Vector> trials,
                            int samples_per_vector, Stream& rng) {
  if (samples_per_vector < 1)
    throw std::invalid_argument("estimate_contraction: samples_per_vector must be >= 1");
  double worst = 0.0;
  for (const Vector& x : trials) {
    const double norm2 = x.squaredNorm();
    if (norm2 == 0.0) throw std::invalid_argument("estimate_contraction: zero trial vector");
    double total = 0.0;
    for (int s = 0; s < samples_per_vector; ++s) {
      total += (compress(spec, x, rng).output - x).squaredNorm();
    }
    worst = std::max(worst, total / samples_per_vector / norm2);
  }
  return worst;
}

}  // namespace adef
