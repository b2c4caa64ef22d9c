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

#include "qava/rng.hpp"

#include <cmath>
#include <string>

#include "qava/errors.hpp"

namespace qava {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::uint64_t RngStream::NextU64() { return engine_(); }

double RngStream::Uniform01() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double RngStream::Uniform(double lo, double hi) {
  if (!(lo <= hi)) {
    throw ArgumentError("uniform range requires lo <= hi, got [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + ")");
  }
  const double u = Uniform01();
  if (lo == hi) return lo;
  double v = lo + (hi - lo) * u;
  if (v >= hi) v = std::nextafter(hi, lo);
  return v;
}

std::uint64_t RngStream::UniformInt(std::uint64_t bound) {
  if (bound == 0) throw ArgumentError("UniformInt bound must be positive");
  if ((bound & (bound - 1)) == 0) return NextU64() & (bound - 1);
  // Largest multiple of bound representable; reject draws above it.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
  for (;;) {
    const std::uint64_t r = NextU64();
    if (r <= limit) return r % bound;
  }
}

bool RngStream::Bernoulli(double p) { return Uniform01() < p; }

std::uint64_t RngStream::ChildSeed(std::uint64_t parent_seed, std::uint64_t job_index) {
  return SplitMix64(parent_seed ^ SplitMix64(job_index + 1));
}

RngStream RngStream::Fork(std::uint64_t job_index) const {
  return RngStream(ChildSeed(seed_, job_index));
}

Tensor RngUniform(RngStream& stream, double lo, double hi, const Shape& shape) {
  if (!(lo <= hi)) {
    throw ArgumentError("rng_uniform requires lo <= hi");
  }
  Tensor out(shape);
  for (double& v : out.data()) v = stream.Uniform(lo, hi);
  return out;
}

}  // namespace qava
