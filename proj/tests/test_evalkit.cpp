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

#include <set>

#include "qava/errors.hpp"
#include "qava/evalkit.hpp"
#include "qava/model.hpp"
#include "test_util.hpp"

namespace qava::eval {
namespace {

std::vector<std::string> Gts(const std::string& answer, int matches, const std::string& other = "blue") {
  std::vector<std::string> g;
  for (int i = 0; i < 10; ++i) g.push_back(i < matches ? answer : other);
  return g;
}

// Direct enumeration of the ten 9-annotator subsets.
double LeaveOneOutOracle(const std::string& answer, const std::vector<std::string>& gts) {
  double sum = 0;
  for (std::size_t drop = 0; drop < 10; ++drop) {
    int m = 0;
    for (std::size_t i = 0; i < 10; ++i) m += i != drop && gts[i] == answer;
    sum += std::min(1.0, m / 3.0);
  }
  return sum / 10;
}

TEST(VqaScore, HandCases) {
  EXPECT_EQ(VqaScore("red", Gts("red", 10)), 1.0);
  EXPECT_EQ(VqaScore("red", Gts("red", 0)), 0.0);
  EXPECT_NEAR(VqaScore("red", Gts("red", 3)), 0.9, 1e-9);
  EXPECT_THROW(VqaScore("red", {"red"}), ArgumentError);
}

TEST(VqaScore, MatchesLeaveOneOutEnumeration) {
  for (int m = 0; m <= 10; ++m) {
    EXPECT_NEAR(VqaScore("red", Gts("red", m)), LeaveOneOutOracle("red", Gts("red", m)), 1e-12) << m;
  }
}

TEST(VqaScore, NormalizationInvariance) {
  EXPECT_EQ(VqaScore("A Red", Gts("red", 4)), VqaScore("red", Gts("red", 4)));
  EXPECT_EQ(VqaScore("the red!", Gts("red", 10)), 1.0);
  EXPECT_EQ(VqaScore("two", Gts("2", 10)), 1.0);
  EXPECT_EQ(NormalizeAnswer("  An   Orange. "), "orange");
}

TEST(Synthetic, OneByOneGivesOneRecord) {
  RngStream g(1);
  const Dataset d = GenerateSynthetic(g, 1, 1);
  EXPECT_EQ(d.images.size(), 1u);
  ASSERT_EQ(d.records.size(), 1u);
  EXPECT_EQ(d.records[0].ground_truths.size(), 10u);
  EXPECT_EQ(std::set<std::string>(d.records[0].ground_truths.begin(), d.records[0].ground_truths.end()).size(), 1u);
}

TEST(Synthetic, AllAnswerTypesPresent) {
  RngStream g(2);
  const Dataset d = GenerateSynthetic(g, 4, 3);
  std::set<std::string> types;
  for (const auto& r : d.records) types.insert(r.answer_type);
  EXPECT_EQ(types, (std::set<std::string>{"other", "number", "yes/no"}));
}

TEST(Synthetic, RecordsAreConsistentWithTheirScenes) {
  RngStream g(3);
  const Dataset d = GenerateSynthetic(g, 8, 20);
  for (const auto& r : d.records) {
    ASSERT_TRUE(r.image_id.has_value());
    EXPECT_TRUE(d.images.count(*r.image_id));
    EXPECT_TRUE(vlm::AnswerVocab::Default().Find(r.ground_truths[0]).has_value()) << r.ground_truths[0];
  }
  for (const auto& [id, img] : d.images) {
    EXPECT_EQ(img.shape(), (Shape{32, 32, 3}));
    for (double v : img.values()) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
    // Distinct texts per image.
    std::set<std::string> texts;
    for (const auto& r : d.RecordsFor(id)) texts.insert(r.text);
    EXPECT_EQ(texts.size(), 20u);
  }
}

TEST(Synthetic, LowContrastAroundMidGray) {
  RngStream g(4);
  const Dataset d = GenerateSynthetic(g, 16, 1);
  for (const auto& [id, img] : d.images) {
    const auto [lo, hi] = std::minmax_element(img.values().begin(), img.values().end());
    EXPECT_GE(*lo, 0.4 - 1e-6) << id;
    EXPECT_LE(*hi, 0.6 + 1e-6) << id;
    // Shapes stand out from the background.
    EXPECT_GT(*hi - *lo, 0.02) << id;
  }
}

TEST(Synthetic, FrozenCorpusChecksum) {
  RngStream g(1);
  const Dataset d = GenerateSynthetic(g, 32, 50);
  EXPECT_EQ(d.records.size(), 1600u);
  EXPECT_EQ(DatasetChecksum(d), "4a0e9783a83cd41f");
}

TEST(Synthetic, AnswerForFollowsTheScene) {
  const Scene s{"triangle", "blue", "black", 3};
  EXPECT_EQ(*AnswerFor(s, "what color is the shape"), "blue");
  EXPECT_EQ(*AnswerFor(s, "How many shapes are there?"), "3");
  EXPECT_EQ(*AnswerFor(s, "is there a circle"), "no");
  EXPECT_EQ(*AnswerFor(s, "is there a triangle"), "yes");
  EXPECT_FALSE(AnswerFor(s, "what is the meaning of life").has_value());
}

TEST(Subset, ExactCountsAndFrozenManifest) {
  RngStream g(1);
  const Dataset d = GenerateSynthetic(g, 32, 50);
  RngStream s(5);
  const Dataset sub = BuildSubset(d, {4, 3, 5}, s);
  std::vector<std::string> images;
  for (const auto& [id, _] : sub.images) images.push_back(id);
  EXPECT_EQ(images, (std::vector<std::string>{"img00000", "img00001", "img00015", "img00022"}));
  std::vector<std::string> ids;
  for (const auto& r : sub.records) ids.push_back(r.question_id);
  EXPECT_EQ(ids, (std::vector<std::string>{"img00000-q005", "img00000-q044", "img00000-q045", "img00001-q008",
                                           "img00001-q030", "img00001-q039", "img00015-q015", "img00015-q021",
                                           "img00015-q036", "img00022-q002", "img00022-q011", "img00022-q027"}));
  for (const auto& id : images) EXPECT_EQ(sub.RecordsFor(id).size(), 3u);
}

TEST(Subset, AllEligibleAndErrors) {
  RngStream g(4);
  Dataset d = GenerateSynthetic(g, 6, 5);
  // Thin out one image so only five are eligible for n = 5.
  d.records.erase(std::remove_if(d.records.begin(), d.records.end(),
                                 [](const Question& q) { return q.question_id == "img00002-q000"; }),
                  d.records.end());
  RngStream s(1);
  const Dataset all = BuildSubset(d, {5, 5, 0}, s);
  EXPECT_EQ(all.images.size(), 5u);
  EXPECT_FALSE(all.images.count("img00002"));
  EXPECT_EQ(all.records.size(), 25u);
  try {
    BuildSubset(d, {6, 5, 0}, s);
    FAIL();
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find('5'), std::string::npos) << e.what();
  }
  EXPECT_THROW(BuildSubset(d, {0, 5, 0}, s), ArgumentError);
}

TEST(Dataset, SaveLoadRoundTrip) {
  RngStream g(6);
  const Dataset d = GenerateSynthetic(g, 3, 4);
  const test::TempDir dir("dataset");
  SaveDataset(d, dir.path() / "a", {{"note", 1}});
  const Dataset back = LoadDataset(dir.path() / "a");
  EXPECT_EQ(back.records, d.records);
  for (const auto& [id, img] : d.images) EXPECT_EQ(MaxAbsDiff(back.images.at(id), img), 0.0);
  EXPECT_EQ(DatasetChecksum(back), DatasetChecksum(d));
  SaveDataset(back, dir.path() / "b", {{"note", 1}});
  EXPECT_TRUE(test::DirectoriesIdentical(dir.path() / "a", dir.path() / "b"));
}

// ---- Evaluation ----

class EvalFixture : public ::testing::Test {
 protected:
  vlm::Model model = vlm::Model::Init(vlm::ModelConfig::Toy(), 3);
  Dataset data = [] {
    RngStream g(7);
    return GenerateSynthetic(g, 4, 6);
  }();
};

TEST_F(EvalFixture, EmptyRecordListIsAnError) {
  Dataset empty;
  EXPECT_THROW(Evaluate(model, empty), ArgumentError);
  EXPECT_THROW(Summarize({}), ArgumentError);
}

TEST_F(EvalFixture, AllWrongAnswersScoreZero) {
  Dataset d = data;
  for (auto& r : d.records) r.ground_truths.assign(10, "zebra");
  const EvalResult e = Evaluate(model, d);
  EXPECT_EQ(e.overall, 0.0);
  EXPECT_EQ(e.records.size(), d.records.size());
}

TEST_F(EvalFixture, OverallIsTheSizeWeightedMeanOfCategories) {
  const EvalResult e = Evaluate(model, data);
  const double n = static_cast<double>(e.records.size());
  const double mix = (e.other * e.count_other + e.number * e.count_number + e.yes_no * e.count_yes_no) / n;
  EXPECT_NEAR(e.overall, mix, 1e-9);
  EXPECT_EQ(e.count_other + e.count_number + e.count_yes_no, e.records.size());
  double sum = 0;
  for (const auto& r : e.records) sum += r.score;
  EXPECT_NEAR(e.overall, 100.0 * sum / n, 1e-9);
  EXPECT_TRUE(std::is_sorted(e.records.begin(), e.records.end(),
                             [](const RecordScore& a, const RecordScore& b) { return a.question_id < b.question_id; }));
  EXPECT_EQ(e.counters.encoder_forward, data.images.size());
  EXPECT_EQ(e.counters.decoder_forward, data.records.size());
}

TEST_F(EvalFixture, AdversarialImagesSubstituteListedIds) {
  const std::string id = data.images.begin()->first;
  AdversarialSet adv;
  adv.image_ids = {id};
  adv.images[id] = data.images.at(id);
  const EvalResult same = Evaluate(model, data, &adv);
  EXPECT_EQ(same.overall, Evaluate(model, data).overall);
  AdversarialSet missing;
  missing.image_ids = {id};
  EXPECT_THROW(Evaluate(model, data, &missing), Error);
}

TEST(Noise, BudgetAndDeterminism) {
  RngStream s(1);
  const Tensor x = RngUniform(s, 0, 1, {32, 32, 3});
  RngStream a(2), b(2);
  EXPECT_TRUE(NoiseBaseline(x, 0.0, a).Identical(x));
  const Tensor n1 = NoiseBaseline(x, 8.0 / 255.0, a), n2 = NoiseBaseline(x, 8.0 / 255.0, b);
  RngStream c(2);
  (void)NoiseBaseline(x, 0.0, c);
  EXPECT_TRUE(n1.Identical(NoiseBaseline(x, 8.0 / 255.0, c)));
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_LE(std::abs(n1[i] - x[i]), 8.0 / 255.0 + 1e-15);
    EXPECT_GE(n1[i], 0.0);
    EXPECT_LE(n1[i], 1.0);
  }
  EXPECT_FALSE(n1.Identical(x));
  (void)n2;
  EXPECT_THROW(NoiseBaseline(x, -0.1, a), ArgumentError);
}

TEST_F(EvalFixture, SingleModelTransferIsPlainEvaluation) {
  AdversarialSet set;
  for (const auto& [id, img] : data.images) {
    set.image_ids.push_back(id);
    RngStream s(9);
    set.images[id] = NoiseBaseline(img, 0.05, s);
  }
  const TransferGrid grid = TransferMatrix({{"toy-a", &model}}, {{"toy-a", set}}, data);
  ASSERT_EQ(grid.cells.size(), 1u);
  ASSERT_EQ(grid.cells[0].size(), 1u);
  EXPECT_EQ(grid.cells[0][0].overall, Evaluate(model, data, &set).overall);
  EXPECT_EQ(grid.surrogates, std::vector<std::string>{"toy-a"});
  EXPECT_EQ(grid.targets, std::vector<std::string>{"toy-a"});
  EXPECT_NE(grid.ToCsv().find("toy-a"), std::string::npos);
  EXPECT_THROW(TransferMatrix({{"toy-a", &model}}, {}, data), ArgumentError);
}

TEST(Spread, MeanAndSampleStddev) {
  const Spread s = MeanSpread({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.stddev, std::sqrt(5.0 / 3.0), 1e-12);
  EXPECT_EQ(FormatWithSpread({57.61}), "57.61");
  EXPECT_EQ(FormatWithSpread({56.11, 59.11}), "57.61 (±2.12)");
}

}  // namespace
}  // namespace qava::eval
