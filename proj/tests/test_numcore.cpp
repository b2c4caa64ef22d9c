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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

#include "qava/autodiff.hpp"
#include "qava/errors.hpp"
#include "qava/qtns.hpp"
#include "qava/rng.hpp"
#include "qava/tensor.hpp"

namespace qava {
namespace {

using ad::Var;

// ---- Tensor ----

TEST(Tensor, DataLengthMustMatchShape) {
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ArgumentError);
  EXPECT_THROW(Tensor({0, 3}), ArgumentError);
  Tensor t({2, 3});
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rank(), 2u);
}

TEST(Tensor, F32StorageRoundsValues) {
  Tensor t({1}, {0.1});
  Tensor f = t.As(DType::kF32);
  EXPECT_EQ(f.dtype(), DType::kF32);
  EXPECT_EQ(f[0], static_cast<double>(0.1f));
  EXPECT_NE(f[0], 0.1);
}

TEST(Tensor, ItemRequiresSingleElement) {
  EXPECT_DOUBLE_EQ(Tensor::Scalar(2.5).item(), 2.5);
  EXPECT_THROW(Tensor({2}).item(), ContractError);
}

// ---- RNG ----

double ReferenceUniform01(std::mt19937_64& e) { return static_cast<double>(e() >> 11) * 0x1.0p-53; }

TEST(Rng, Seed42ReferenceSequence) {
  RngStream s(42);
  const Tensor t = RngUniform(s, 0.0, 1.0, {4});
  const double frozen[] = {0.75515553295453897, 0.63903139385469743, 0.7521452007480266,
                           0.13627268363243705};
  std::mt19937_64 oracle(42);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(t[i], frozen[i]) << i;
    EXPECT_EQ(t[i], ReferenceUniform01(oracle)) << i;
  }
}

TEST(Rng, EqualSeedsGiveIdenticalDraws) {
  RngStream a(123), b(123);
  const Tensor ta = RngUniform(a, -1.0, 2.0, {3, 5});
  const Tensor tb = RngUniform(b, -1.0, 2.0, {3, 5});
  EXPECT_TRUE(ta.Identical(tb));
  for (double v : ta.values()) {
    EXPECT_GE(v, -1.0);
    EXPECT_LT(v, 2.0);
  }
}

TEST(Rng, DegenerateRangeGivesConstant) {
  RngStream s(9);
  const Tensor t = RngUniform(s, 0.0, 0.0, {7});
  for (double v : t.values()) EXPECT_EQ(v, 0.0);
}

TEST(Rng, InvertedRangeIsAnError) {
  RngStream s(1);
  EXPECT_THROW(RngUniform(s, 1.0, 0.0, {2}), ArgumentError);
  EXPECT_THROW(s.Uniform(1.0, 0.0), ArgumentError);
  EXPECT_THROW(s.UniformInt(0), ArgumentError);
}

TEST(Rng, ForkDerivesChildSeedDeterministically) {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  EXPECT_EQ(RngStream::ChildSeed(42, 3), splitmix(42 ^ splitmix(4)));
  EXPECT_EQ(RngStream(42).Fork(3).seed(), RngStream::ChildSeed(42, 3));
  EXPECT_NE(RngStream::ChildSeed(42, 0), RngStream::ChildSeed(42, 1));
  // Forking does not advance the parent.
  RngStream p(5), q(5);
  (void)p.Fork(0);
  EXPECT_EQ(p.NextU64(), q.NextU64());
}

TEST(Rng, UniformIntStaysInRange) {
  RngStream s(77);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 700; ++i) {
    const auto v = s.UniformInt(7);
    ASSERT_LT(v, 7u);
    ++seen[v];
  }
  for (int c : seen) EXPECT_GT(c, 0);
}

// ---- QTNS ----

TEST(Qtns, HeaderLayoutIsBitExact) {
  Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  const auto bytes = EncodeQtns(t);
  ASSERT_EQ(bytes.size(), 8u + 2 * 4 + 6 * 8);
  EXPECT_EQ(std::memcmp(bytes.data(), "QTNS", 4), 0);
  EXPECT_EQ(bytes[4], 1);  // version
  EXPECT_EQ(bytes[5], 2);  // f64
  EXPECT_EQ(bytes[6], 2);  // ndim
  EXPECT_EQ(bytes[7], 0);  // reserved
  EXPECT_EQ(bytes[8], 2);
  EXPECT_EQ(bytes[9], 0);
  EXPECT_EQ(bytes[12], 3);
  double first;
  std::memcpy(&first, bytes.data() + 16, 8);
  EXPECT_EQ(first, 1.0);

  const auto f32 = EncodeQtns(t.As(DType::kF32));
  EXPECT_EQ(f32[5], 1);
  EXPECT_EQ(f32.size(), 8u + 2 * 4 + 6 * 4);
}

TEST(Qtns, RoundTripPreservesBits) {
  RngStream s(3);
  const Tensor t = RngUniform(s, -5, 5, {4, 3, 2});
  EXPECT_TRUE(DecodeQtns(EncodeQtns(t)).Identical(t));
  const Tensor f = t.As(DType::kF32);
  EXPECT_TRUE(DecodeQtns(EncodeQtns(f)).Identical(f));

  const auto path = std::filesystem::temp_directory_path() / "qava_test_roundtrip.qtns";
  SaveQtns(t, path);
  EXPECT_TRUE(LoadQtns(path).Identical(t));
  std::filesystem::remove(path);
}

TEST(Qtns, MalformedInputIsRejected) {
  auto bytes = EncodeQtns(Tensor({2}, {1, 2}));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(DecodeQtns(bad_magic), IoError);
  auto bad_version = bytes;
  bad_version[4] = 2;
  EXPECT_THROW(DecodeQtns(bad_version), IoError);
  auto bad_dtype = bytes;
  bad_dtype[5] = 7;
  EXPECT_THROW(DecodeQtns(bad_dtype), IoError);
  auto bad_reserved = bytes;
  bad_reserved[7] = 1;
  EXPECT_THROW(DecodeQtns(bad_reserved), IoError);
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW(DecodeQtns(truncated), IoError);
}

// ---- Gradients ----

TEST(Grad, SumGivesOnes) {
  RngStream s(1);
  const Tensor x = RngUniform(s, -1, 1, {3, 4});
  const Tensor g = ad::Grad([](Var v) { return ad::Sum(v); }, x);
  ASSERT_EQ(g.shape(), x.shape());
  for (double v : g.values()) EXPECT_EQ(v, 1.0);
}

TEST(Grad, ConstantObjectiveGivesZeros) {
  const Tensor x({5}, {1, 2, 3, 4, 5});
  const Tensor g = ad::Grad([](Var v) { return ad::Sum(ad::Scale(v, 0.0)); }, x);
  for (double v : g.values()) EXPECT_EQ(v, 0.0);
}

TEST(Grad, SquareMatchesHandValuesAndFiniteDifferences) {
  const Tensor x({3}, {1, 2, 3});
  const ad::Objective f = [](Var v) { return ad::Sum(ad::Square(v)); };
  const Tensor g = ad::Grad(f, x);
  const Tensor fd = ad::FiniteDiffGrad(f, x, 1e-5);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(g[i], 2.0 * x[i]);
  EXPECT_LT(ad::RelativeError(g, fd), 1e-6);
}

TEST(Grad, NonScalarObjectiveIsAContractViolation) {
  EXPECT_THROW(ad::Grad([](Var v) { return ad::Square(v); }, Tensor({2}, {1, 2})), ContractError);
}

TEST(Grad, NonFiniteForwardNamesTheOp) {
  try {
    ad::Grad([](Var v) { return ad::Sum(ad::Scale(v, 1e308)); }, Tensor({1}, {10.0}));
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("scale"), std::string::npos) << e.what();
  }
}

TEST(FiniteDiff, NonPositiveStepIsAnError) {
  const ad::Objective f = [](Var v) { return ad::Sum(v); };
  EXPECT_THROW(ad::FiniteDiffGrad(f, Tensor({2}, {1, 2}), 0.0), ArgumentError);
  EXPECT_THROW(ad::FiniteDiffGrad(f, Tensor({2}, {1, 2}), -1e-3), ArgumentError);
}

TEST(FiniteDiff, SumIsOnesUpToRounding) {
  RngStream s(4);
  const Tensor x = RngUniform(s, -1, 1, {6});
  const Tensor fd = ad::FiniteDiffGrad([](Var v) { return ad::Sum(v); }, x, 1e-5);
  for (double v : fd.values()) EXPECT_NEAR(v, 1.0, 1e-9);
}

// Every differentiable op against central differences on random inputs.
struct OpCase {
  const char* name;
  Shape shape;
  ad::Objective f;
};

std::vector<OpCase> OpCases() {
  auto other = [](Var v, std::uint64_t seed, double lo = -1, double hi = 1) {
    RngStream s(seed);
    return v.tape->Constant(RngUniform(s, lo, hi, v.shape()));
  };
  auto weight = [](Var v, Shape shape, std::uint64_t seed) {
    RngStream s(seed);
    return v.tape->Constant(RngUniform(s, -1, 1, std::move(shape)));
  };
  return {
      {"add", {3, 4}, [=](Var v) { return ad::Sum(ad::Square(ad::Add(v, other(v, 1)))); }},
      {"sub", {3, 4}, [=](Var v) { return ad::Sum(ad::Square(ad::Sub(other(v, 2), v))); }},
      {"mul", {3, 4}, [=](Var v) { return ad::Sum(ad::Mul(v, ad::Mul(v, other(v, 3)))); }},
      {"scale", {5}, [](Var v) { return ad::Sum(ad::Square(ad::Scale(v, -1.7))); }},
      {"add_scalar", {5}, [](Var v) { return ad::Sum(ad::Square(ad::AddScalar(v, 0.3))); }},
      {"gelu", {2, 5}, [=](Var v) { return ad::Sum(ad::Mul(ad::Gelu(v), other(v, 4))); }},
      {"relu", {2, 5}, [=](Var v) { return ad::Sum(ad::Mul(ad::Relu(v), other(v, 5))); }},
      {"add_row", {3, 4},
       [=](Var v) { return ad::Sum(ad::Square(ad::AddRow(v, weight(v, {4}, 6)))); }},
      {"add_row_bias", {4},
       [=](Var v) { return ad::Sum(ad::Square(ad::AddRow(weight(v, {3, 4}, 7), v))); }},
      {"matmul_lhs", {3, 4},
       [=](Var v) { return ad::Sum(ad::Square(ad::MatMul(v, weight(v, {4, 2}, 8)))); }},
      {"matmul_rhs", {4, 2},
       [=](Var v) { return ad::Sum(ad::Square(ad::MatMul(weight(v, {3, 4}, 9), v))); }},
      {"matmul_t_lhs", {3, 4},
       [=](Var v) { return ad::Sum(ad::Square(ad::MatMulT(v, weight(v, {5, 4}, 10)))); }},
      {"matmul_t_rhs", {5, 4},
       [=](Var v) { return ad::Sum(ad::Square(ad::MatMulT(weight(v, {3, 4}, 11), v))); }},
      {"softmax_rows", {3, 5},
       [=](Var v) { return ad::Sum(ad::Mul(ad::SoftmaxRows(v), other(v, 12))); }},
      {"softmax_rows_masked", {2, 3},
       [=](Var v) {
         static const Tensor mask({2, 3}, {0, -1e9, 0, 0, 0, -1e9});
         return ad::Sum(ad::Mul(ad::SoftmaxRows(v, &mask), other(v, 13)));
       }},
      {"layer_norm", {3, 6},
       [=](Var v) {
         return ad::Sum(ad::Mul(ad::LayerNormRows(v, weight(v, {6}, 14), weight(v, {6}, 15)), other(v, 16)));
       }},
      {"layer_norm_gain", {6},
       [=](Var v) {
         return ad::Sum(ad::Mul(ad::LayerNormRows(weight(v, {3, 6}, 17), v, weight(v, {6}, 18)),
                                weight(v, {3, 6}, 19)));
       }},
      {"concat_rows", {2, 3},
       [=](Var v) { return ad::Sum(ad::Square(ad::ConcatRows(weight(v, {1, 3}, 20), v))); }},
      {"slice_rows", {4, 3},
       [=](Var v) { return ad::Sum(ad::Square(ad::SliceRows(v, 1, 3))); }},
      {"reshape", {2, 6},
       [=](Var v) { return ad::Sum(ad::Mul(ad::Reshape(v, {3, 4}), weight(v, {3, 4}, 21))); }},
      {"gather", {2, 3},
       [=](Var v) { return ad::Sum(ad::Square(ad::Gather(v, {5, 0, -1, 5, 2}, {5}))); }},
      {"mean", {3, 3}, [=](Var v) { return ad::Mean(ad::Square(v)); }},
      {"cross_entropy", {1, 6}, [=](Var v) { return ad::CrossEntropy(v, 4); }},
  };
}

TEST(Grad, EveryOpMatchesFiniteDifferences) {
  for (const auto& c : OpCases()) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      RngStream s(100 + seed);
      const Tensor x = RngUniform(s, -1.5, 1.5, c.shape);
      const Tensor g = ad::Grad(c.f, x);
      const Tensor fd = ad::FiniteDiffGrad(c.f, x, 1e-6);
      EXPECT_LT(ad::RelativeError(g, fd, 1e-8), 1e-4) << c.name << " seed " << seed;
    }
  }
}

TEST(Grad, SumOfObjectivesIsSumOfGradients) {
  RngStream s(8);
  const Tensor x = RngUniform(s, -1, 1, {3, 4});
  const Tensor w = RngUniform(s, -1, 1, {4, 2});
  const ad::Objective f = [&](Var v) { return ad::Sum(ad::Gelu(ad::MatMul(v, v.tape->Constant(w)))); };
  const ad::Objective g = [](Var v) { return ad::Mean(ad::Square(v)); };
  const Tensor gf = ad::Grad(f, x), gg = ad::Grad(g, x);
  const Tensor gsum = ad::Grad([&](Var v) { return ad::Add(f(v), g(v)); }, x);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(gsum[i], gf[i] + gg[i], 1e-12);
}

TEST(Tape, NonRecordingTapeMatchesRecordingForward) {
  RngStream s(2);
  const Tensor x = RngUniform(s, -1, 1, {2, 4});
  const ad::Objective f = [](Var v) { return ad::Sum(ad::SoftmaxRows(ad::Gelu(v))); };
  ad::Tape rec(true), inf(false);
  EXPECT_EQ(f(rec.Leaf(x)).item(), f(inf.Leaf(x)).item());
  EXPECT_EQ(ad::Evaluate(f, x), f(rec.Leaf(x)).item());
  Var y = f(inf.Leaf(x));
  EXPECT_THROW(inf.Backward(y), ContractError);
}

}  // namespace
}  // namespace qava
