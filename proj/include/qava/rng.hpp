// Copyright 2026 The QAVA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QAVA_RNG_HPP_
#define QAVA_RNG_HPP_

#include <cstdint>
#include <random>

#include "qava/tensor.hpp"

namespace qava {

// SplitMix64 finalizer (Steele, Lea & Flood). Used only to derive seeds.
std::uint64_t SplitMix64(std::uint64_t x);

// Deterministic random stream.
//
// Engine: std::mt19937_64 seeded with the 64-bit seed. Its output sequence is
// fixed by the C++ standard (the 10000th draw from the default seed 5489 is
// 9981545732273789042), so every conforming library reproduces it. All
// distributions are implemented here rather than taken from <random>, whose
// distribution algorithms are implementation-defined:
//   Uniform01   = (draw >> 11) * 2^-53, a double in [0, 1)
//   UniformInt  = rejection sampling on the top bits, exact for any bound
//
// A stream has a single consumer. Parallel jobs each take Fork(job_index),
// whose seed is SplitMix64(seed ^ SplitMix64(job_index + 1)).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t NextU64();
  double Uniform01();
  // Value in [lo, hi); returns lo when lo == hi. Throws ArgumentError if lo > hi.
  double Uniform(double lo, double hi);
  // Value in [0, bound). bound must be positive.
  std::uint64_t UniformInt(std::uint64_t bound);
  bool Bernoulli(double p);

  RngStream Fork(std::uint64_t job_index) const;
  static std::uint64_t ChildSeed(std::uint64_t parent_seed, std::uint64_t job_index);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// Tensor of the given shape filled with Uniform(lo, hi) draws in row-major order.
Tensor RngUniform(RngStream& stream, double lo, double hi, const Shape& shape);

}  // namespace qava

#endif  // QAVA_RNG_HPP_
