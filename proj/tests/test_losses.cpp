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

#include <algorithm>

#include "qava/errors.hpp"
#include "qava/losses.hpp"
#include "qava/model.hpp"
#include "test_util.hpp"

namespace qava::loss {
namespace {

Question Q(const std::string& id, const std::string& text) {
  return Question{id, std::nullopt, text, "other", {}};
}

std::vector<Question> ThreeQuestions() {
  return {Q("q1", "what color is the shape"), Q("q2", "how many shapes are there"),
          Q("q3", "is there a circle")};
}

Tensor Image(std::uint64_t seed) {
  RngStream s(seed);
  return RngUniform(s, 0, 1, {32, 32, 3});
}

Tensor Perturbed(const Tensor& x, std::uint64_t seed, double eps = 8.0 / 255.0) {
  RngStream s(seed);
  Tensor out = x;
  for (double& v : out.data()) v = std::clamp(v + s.Uniform(-eps, eps), 0.0, 1.0);
  return out;
}

TEST(QavaLoss, HandCase) {
  const Tensor q({2, 2}, {1, 2, 3, 4});
  const Tensor qa({2, 2}, {2, 4, 6, 8});
  EXPECT_NEAR(QavaLoss(q, qa), 7.5, 1e-9);
  EXPECT_EQ(QavaLoss(q, q), 0.0);
  const Tensor plus1({2, 2}, {2, 3, 4, 5});
  EXPECT_EQ(QavaLoss(q, plus1), 1.0);
}

TEST(QavaLoss, ShapeMismatchIsAnError) {
  EXPECT_THROW(QavaLoss(Tensor({2, 2}), Tensor({4, 1})), ArgumentError);
}

TEST(QavaLoss, NonnegativeSymmetricZeroIffEqual) {
  RngStream s(1);
  for (int i = 0; i < 20; ++i) {
    const Tensor a = RngUniform(s, -2, 2, {8, 32});
    Tensor b = RngUniform(s, -2, 2, {8, 32});
    EXPECT_GT(QavaLoss(a, b), 0.0);
    EXPECT_EQ(QavaLoss(a, b), QavaLoss(b, a));
    EXPECT_EQ(QavaLoss(a, a), 0.0);
    b = a;
    b[s.UniformInt(b.size())] += 1e-3;
    EXPECT_GT(QavaLoss(a, b), 0.0);
  }
}

TEST(QavaLossMultilayer, HandMeanAndDegenerateCases) {
  // Per-layer MSEs 2.0 and 4.0.
  const Tensor z = Tensor::Full({2, 2}, 0.0);
  const Tensor a = Tensor::Full({2, 2}, std::sqrt(2.0));
  const Tensor b = Tensor::Full({2, 2}, 2.0);
  EXPECT_NEAR(QavaLossMultilayer({z, z}, {a, b}), 3.0, 1e-12);
  EXPECT_EQ(QavaLossMultilayer({a, b}, {a, b}), 0.0);
  const Tensor q({2, 2}, {1, 2, 3, 4}), qa({2, 2}, {2, 4, 6, 8});
  EXPECT_EQ(QavaLossMultilayer({q}, {qa}), QavaLoss(q, qa));
  EXPECT_THROW(QavaLossMultilayer({z}, {z, z}), ArgumentError);
}

TEST(CwObjective, HandCase) {
  // ||x - x'||^2 = 10.
  const Tensor x({10}, std::vector<double>(10, 0.0));
  const Tensor xa({10}, std::vector<double>(10, 1.0));
  EXPECT_NEAR(CwObjective(2.0, x, xa, 0.005), 1.95, 1e-9);
  EXPECT_EQ(CwObjective(2.0, x, x, 0.3), 2.0);
  EXPECT_EQ(CwObjective(2.0, x, xa, 0.0), 2.0);
}

TEST(CwObjective, StrictlyDecreasingInC) {
  RngStream s(2);
  const Tensor x = RngUniform(s, 0, 1, {4, 4, 3});
  const Tensor xa = RngUniform(s, 0, 1, {4, 4, 3});
  double prev = CwObjective(1.0, x, xa, 0.0);
  for (double c : {1e-4, 1e-3, 5e-3, 0.05, 0.1, 1.0}) {
    const double v = CwObjective(1.0, x, xa, c);
    EXPECT_LT(v, prev) << c;
    prev = v;
  }
}

TEST(CwObjective, ConfidenceClampsTheBase) {
  const Tensor x({1}, {0.0}), xa({1}, {0.0});
  EXPECT_EQ(CwObjective(0.3, x, xa, 0.1, 0.5), 0.0);
  EXPECT_NEAR(CwObjective(0.8, x, xa, 0.1, 0.5), 0.3, 1e-15);
}

TEST(LossSpec, DefaultsAndValidation) {
  EXPECT_EQ(DefaultC(LossKind::kLlm), 0.1);
  EXPECT_EQ(DefaultC(LossKind::kQava), 0.005);
  EXPECT_EQ(DefaultC(LossKind::kQavaMultilayer), 0.005);
  EXPECT_EQ(LossSpec::Default(LossKind::kLlm, true).c, 0.1);
  LossSpec s;
  s.c = -1;
  EXPECT_THROW(s.Validate(), ArgumentError);
  s.c = 0;
  s.confidence = -0.5;
  EXPECT_THROW(s.Validate(), ArgumentError);
  EXPECT_EQ(ParseLossKind("qava-multilayer"), LossKind::kQavaMultilayer);
  EXPECT_EQ(ToString(LossKind::kLlm), "llm");
  EXPECT_THROW(ParseLossKind("mse"), ArgumentError);
}

// ---- Tape versions against the value versions and the FD oracle ----

TEST(LossGradients, TapeValuesMatchScalarFunctions) {
  RngStream s(3);
  const Tensor q = RngUniform(s, -1, 1, {8, 32}), qa = RngUniform(s, -1, 1, {8, 32});
  ad::Tape tape(false);
  EXPECT_EQ(QavaLossOnTape(tape.Constant(q), tape.Constant(qa)).item(), QavaLoss(q, qa));
  const Tensor x = RngUniform(s, 0, 1, {3, 3, 3}), xa = RngUniform(s, 0, 1, {3, 3, 3});
  ad::Var base = tape.Constant(Tensor::Scalar(1.25));
  EXPECT_NEAR(CwObjectiveOnTape(base, x, tape.Constant(xa), 0.2).item(), CwObjective(1.25, x, xa, 0.2),
              1e-15);
}

class ObjectiveGradient : public ::testing::TestWithParam<std::tuple<LossKind, bool, std::uint64_t>> {};

TEST_P(ObjectiveGradient, MatchesFiniteDifferences) {
  const auto [kind, cw, seed] = GetParam();
  const vlm::Model m = vlm::Model::Init(vlm::ModelConfig::Toy(), seed);
  const Tensor x = Image(seed + 100);
  const Tensor xa = Perturbed(x, seed + 200);
  LossSpec spec = LossSpec::Default(kind, cw);
  AttackObjective obj(m, x, spec);
  const auto qs = ThreeQuestions();
  const Evaluation e = obj.Evaluate(xa, qs, true);
  ASSERT_EQ(e.grad.shape(), x.shape());
  const auto f = [&](const Tensor& t) { return obj.Evaluate(t, qs, false).value; };
  EXPECT_EQ(f(xa), e.value);
  EXPECT_LT(test::GradOracleError(f, e.grad, xa, 24, seed), 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Losses, ObjectiveGradient,
                         ::testing::Combine(::testing::Values(LossKind::kQava, LossKind::kQavaMultilayer,
                                                              LossKind::kLlm),
                                            ::testing::Bool(), ::testing::Values(1u, 2u)));

// ---- Aggregation ----

TEST(Aggregate, SingleQuestionEqualsPerQuestionLoss) {
  const vlm::Model m = vlm::Model::Init(vlm::ModelConfig::Toy(), 5);
  const Tensor x = Image(1), xa = Perturbed(x, 2);
  const Question q = Q("a", "what shape is in the image");
  for (LossKind k : {LossKind::kQava, LossKind::kQavaMultilayer, LossKind::kLlm}) {
    const LossSpec spec = LossSpec::Default(k);
    EXPECT_EQ(AggregateQuestions(m, x, xa, {q}, spec), PerQuestionLoss(m, x, xa, q, spec)) << ToString(k);
    EXPECT_EQ(AggregateQuestions(m, x, xa, {q, q}, spec), AggregateQuestions(m, x, xa, {q}, spec));
  }
}

TEST(Aggregate, MeanOfIndependentPerQuestionLosses) {
  const vlm::Model m = vlm::Model::Init(vlm::ModelConfig::Toy(), 6);
  const Tensor x = Image(3), xa = Perturbed(x, 4);
  const auto qs = ThreeQuestions();
  for (LossKind k : {LossKind::kQava, LossKind::kQavaMultilayer, LossKind::kLlm}) {
    const LossSpec spec = LossSpec::Default(k);
    double sum = 0;
    for (const auto& q : qs) sum += PerQuestionLoss(m, x, xa, q, spec);
    EXPECT_NEAR(AggregateQuestions(m, x, xa, qs, spec), sum / 3.0, 1e-6) << ToString(k);
  }
}

TEST(Aggregate, PermutationInvariantBitForBit) {
  const vlm::Model m = vlm::Model::Init(vlm::ModelConfig::Toy(), 7);
  const Tensor x = Image(5), xa = Perturbed(x, 6);
  auto qs = ThreeQuestions();
  const LossSpec spec = LossSpec::Default(LossKind::kQava);
  const double ref = AggregateQuestions(m, x, xa, qs, spec);
  std::sort(qs.begin(), qs.end(), [](const Question& a, const Question& b) { return a.text < b.text; });
  do {
    EXPECT_EQ(AggregateQuestions(m, x, xa, qs, spec), ref);
  } while (std::next_permutation(qs.begin(), qs.end(),
                                 [](const Question& a, const Question& b) { return a.text < b.text; }));
}

TEST(Aggregate, EmptyListIsAnError) {
  const vlm::Model m = vlm::Model::Init(vlm::ModelConfig::Toy(), 8);
  const Tensor x = Image(1);
  EXPECT_THROW(AggregateQuestions(m, x, x, {}, LossSpec{}), ArgumentError);
}

TEST(Aggregate, CachedCleanSideMatchesRecomputation) {
  const vlm::Model m = vlm::Model::Init(vlm::ModelConfig::Toy(), 9);
  const Tensor x = Image(7);
  const auto qs = ThreeQuestions();
  AttackObjective obj(m, x, LossSpec::Default(LossKind::kQava));
  // Warm the cache, then evaluate at several points.
  for (std::uint64_t s = 0; s < 3; ++s) {
    const Tensor xa = Perturbed(x, 10 + s);
    const double cached = obj.Evaluate(xa, qs, false).value;
    AttackObjective fresh(m, x, LossSpec::Default(LossKind::kQava));
    EXPECT_EQ(cached, fresh.Evaluate(xa, qs, false).value);
  }
}

TEST(Aggregate, CleanImageGivesZeroFeatureLoss) {
  const vlm::Model m = vlm::Model::Init(vlm::ModelConfig::Toy(), 10);
  const Tensor x = Image(8);
  AttackObjective obj(m, x, LossSpec::Default(LossKind::kQavaMultilayer));
  EXPECT_EQ(obj.Evaluate(x, ThreeQuestions(), false).value, 0.0);
}

TEST(Counters, FeatureLossesNeverTouchTheDecoder) {
  const vlm::Model m = vlm::Model::Init(vlm::ModelConfig::Toy(), 11);
  const Tensor x = Image(9), xa = Perturbed(x, 1);
  const auto qs = ThreeQuestions();
  AttackObjective q(m, x, LossSpec::Default(LossKind::kQava));
  q.Evaluate(xa, qs, true);
  q.Evaluate(xa, qs, true);
  EXPECT_EQ(q.counters().decoder_forward, 0u);
  EXPECT_EQ(q.counters().decoder_backward, 0u);
  EXPECT_EQ(q.counters().encoder_forward, 3u);  // clean once, adversarial twice
  EXPECT_EQ(q.counters().encoder_backward, 2u);
  EXPECT_EQ(q.counters().align_backward, 6u);

  AttackObjective l(m, x, LossSpec::Default(LossKind::kLlm));
  l.Evaluate(xa, qs, true);
  EXPECT_EQ(l.counters().decoder_forward, 6u);  // 3 pseudo-labels + 3 attack terms
  EXPECT_EQ(l.counters().decoder_backward, 3u);
}

}  // namespace
}  // namespace qava::loss
