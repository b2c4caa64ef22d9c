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

#ifndef QAVA_TESTS_TEST_UTIL_HPP_
#define QAVA_TESTS_TEST_UTIL_HPP_

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "qava/autodiff.hpp"
#include "qava/qtns.hpp"
#include "qava/rng.hpp"

namespace qava::test {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string name = "qava_" + tag;
    if (info) name += std::string("_") + info->test_suite_name() + "_" + info->name();
    path_ = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Same relative file names with byte-identical contents.
inline bool DirectoriesIdentical(const std::filesystem::path& a, const std::filesystem::path& b,
                                 const std::vector<std::string>& skip = {}) {
  auto list = [&](const std::filesystem::path& root) {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
      if (!e.is_regular_file()) continue;
      const std::string rel = std::filesystem::relative(e.path(), root).string();
      if (std::find(skip.begin(), skip.end(), e.path().filename().string()) != skip.end()) continue;
      out.push_back(rel);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto la = list(a), lb = list(b);
  if (la != lb || la.empty()) return false;
  for (const auto& rel : la) {
    if (ReadFileBytes(a / rel) != ReadFileBytes(b / rel)) return false;
  }
  return true;
}

// Relative error between an analytic gradient and central differences on a
// subset of coordinates: the `count` largest-magnitude analytic entries plus
// `count` uniformly drawn ones. Error is max |g - fd| / max |fd|.
inline double GradOracleError(const std::function<double(const Tensor&)>& f, const Tensor& g,
                              const Tensor& x, std::size_t count, std::uint64_t seed,
                              double h = 1e-6) {
  count = std::min(count, x.size());
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                    [&](std::size_t i, std::size_t j) { return std::abs(g[i]) > std::abs(g[j]); });
  std::vector<std::size_t> coords(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  RngStream rng(seed);
  for (std::size_t k = 0; k < count; ++k) coords.push_back(rng.UniformInt(x.size()));

  double max_err = 0.0, max_ref = 0.0;
  for (std::size_t i : coords) {
    Tensor xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double fd = (f(xp) - f(xm)) / (2.0 * h);
    max_err = std::max(max_err, std::abs(g[i] - fd));
    max_ref = std::max(max_ref, std::abs(fd));
  }
  return max_err / std::max(max_ref, 1e-12);
}

inline double GradOracleError(const ad::Objective& f, const Tensor& x, std::size_t count,
                              std::uint64_t seed, double h = 1e-6) {
  return GradOracleError([&](const Tensor& t) { return ad::Evaluate(f, t); }, ad::Grad(f, x), x, count,
                         seed, h);
}

inline void ExpectGradMatchesOracle(const ad::Objective& f, const Tensor& x, std::size_t count,
                                    std::uint64_t seed, double tol) {
  EXPECT_LT(GradOracleError(f, x, count, seed), tol);
}

}  // namespace qava::test

#endif  // QAVA_TESTS_TEST_UTIL_HPP_
