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

// Checks against the trained fixture checkpoint built by the fixture_setup
// test: build/fixture/{model, train_ds, eval_ds}.

#include <gtest/gtest.h>

#include <cstdlib>
#include <set>

#include "qava/evalkit.hpp"
#include "qava/model.hpp"
#include "qava/qtns.hpp"
#include "qava/vocab.hpp"
#include "qava/vqg.hpp"

#ifndef QAVA_FIXTURE_DIR
#error "QAVA_FIXTURE_DIR must be defined"
#endif

namespace qava {
namespace {

namespace fs = std::filesystem;

fs::path FixtureDir() {
  const char* env = std::getenv("QAVA_FIXTURE_DIR");
  return env && *env ? fs::path(env) : fs::path(QAVA_FIXTURE_DIR);
}

// Recorded from the fixture checkpoint when the training recipe was frozen.
constexpr double kLmLossImg0Red = 32.812814344122117;

class Fixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    model_ = new vlm::Model(vlm::Model::Load(FixtureDir() / "model"));
    eval_ = new eval::Dataset(eval::LoadDataset(FixtureDir() / "eval_ds"));
  }
  static void TearDownTestSuite() {
    delete model_;
    delete eval_;
  }

  static Tensor RedCircle() {
    RngStream rng(11);
    return eval::RenderScene({"circle", "red", "white", 1}, rng);
  }

  static vlm::Model* model_;
  static eval::Dataset* eval_;
};
vlm::Model* Fixture::model_ = nullptr;
eval::Dataset* Fixture::eval_ = nullptr;

TEST_F(Fixture, RedCircleIsRed) {
  EXPECT_EQ(vlm::AnswerQuestion(*model_, RedCircle(), "what color is the shape"), "red");
  EXPECT_EQ(vlm::AnswerQuestion(*model_, RedCircle(), "what shape is in the image"), "circle");
}

TEST_F(Fixture, CleanAccuracyOnUnseenImages) {
  const eval::EvalResult r = eval::Evaluate(*model_, *eval_);
  EXPECT_GE(r.overall, 90.0);
  const nlohmann::json meta = model_->metadata();
  EXPECT_GE(meta.at("heldout").at("overall").get<double>(), 90.0);
}

TEST_F(Fixture, PseudoLabelsMatchGroundTruth) {
  std::size_t agree = 0;
  for (const auto& q : eval_->records) {
    const std::size_t label = vlm::PseudoLabel(*model_, eval_->images.at(*q.image_id), q.text);
    agree += vlm::AnswerVocab::Default().answers()[label] == q.ground_truths[0];
  }
  EXPECT_GE(static_cast<double>(agree), 0.9 * static_cast<double>(eval_->records.size()));
}

TEST_F(Fixture, LmLossRegressionValue) {
  // img00000 holds a yellow shape; the loss of the wrong label "red" is large.
  const Tensor& img = eval_->images.at("img00000");
  const std::size_t red = *vlm::AnswerVocab::Default().Find("red");
  EXPECT_NEAR(vlm::LmLoss(*model_, img, "what color is the shape", red), kLmLossImg0Red, 1e-9);
}

TEST_F(Fixture, FeaturesDependOnTheQuestion) {
  const Tensor img = RedCircle();
  const Tensor a = vlm::ImageFeatures(*model_, img, "what color is the shape").final();
  const Tensor b = vlm::ImageFeatures(*model_, img, "how many shapes are there").final();
  double max_diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) max_diff = std::max(max_diff, std::abs(a[i] - b[i]));
  EXPECT_GT(max_diff, 1e-3);
}

TEST_F(Fixture, VqgAsksAboutWhatItSees) {
  const auto qs = vlm::GenerateQuestions(*model_, RedCircle(), 3);
  ASSERT_EQ(qs.size(), 3u);
  std::set<std::string> texts;
  for (const auto& q : qs) texts.insert(q.text);
  EXPECT_EQ(texts.size(), 3u);
  EXPECT_EQ(qs[0].text, "is there a red circle");
  EXPECT_EQ(qs[1].text, "how many circles are there");
  EXPECT_EQ(qs[2].text, "is the shape red");
}

TEST_F(Fixture, TrainingCurveDecreasesOverFirstTenCheckpoints) {
  const nlohmann::json& curve = model_->metadata().at("curve");
  ASSERT_GE(curve.size(), 10u);
  for (std::size_t i = 1; i < 10; ++i) {
    EXPECT_LT(curve[i].at("monitor_loss").get<double>(), curve[i - 1].at("monitor_loss").get<double>())
        << "checkpoint " << i << " at step " << curve[i].at("step");
  }
}

}  // namespace
}  // namespace qava
