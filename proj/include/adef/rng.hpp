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

#ifndef ADEF_RNG_HPP
#define ADEF_RNG_HPP

#include <cstdint>
#include <random>

namespace adef {

// Independent random channels inside one round. Keeping them separate means
// compressor randomness never perturbs oracle noise, so methods that share a
// seed see the same stochastic gradients.
enum class Channel : std::uint64_t {
  kOracle = 1,
  kControl = 2,   // gradient-difference (control variate) compression
  kFeedback = 3,  // error-feedback compression
  kSetup = 4,
  kData = 5,
};

std::uint64_t splitmix64(std::uint64_t x);

// Seeded stream. Thin wrapper so call sites never touch a global engine.
class Stream {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Derives per-(client, round, channel) streams from one master seed.
class StreamFactory {
 public:
  explicit StreamFactory(std::uint64_t master_seed) : master_(master_seed) {}

  std::uint64_t master_seed() const { return master_; }
  std::uint64_t derive(std::uint64_t client, std::uint64_t round, Channel channel) const;
  Stream stream(std::uint64_t client, std::uint64_t round, Channel channel) const {
    return Stream(derive(client, round, channel));
  }

 private:
  std::uint64_t master_;
};

}  // namespace adef

#endif  // ADEF_RNG_HPP
