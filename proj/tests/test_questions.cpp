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

#include <fstream>
#include <set>

#include "qava/errors.hpp"
#include "qava/evalkit.hpp"
#include "qava/questions.hpp"
#include "test_util.hpp"

#ifndef QAVA_TEST_DATA_DIR
#error "QAVA_TEST_DATA_DIR must be defined"
#endif

namespace qava::questions {
namespace {

const std::filesystem::path kData = QAVA_TEST_DATA_DIR;

std::vector<std::string> Ids(const std::vector<Question>& qs) {
  std::vector<std::string> out;
  for (const auto& q : qs) out.push_back(q.question_id);
  return out;
}

TEST(LoadPool, EmptyFileGivesEmptyPool) {
  const test::TempDir dir("pool");
  { std::ofstream(dir.path() / "empty.jsonl"); }
  EXPECT_TRUE(LoadPool(dir.path() / "empty.jsonl").empty());
}

TEST(LoadPool, FiveRecordFixture) {
  const QuestionPool pool = LoadPool(kData / "pool5.jsonl");
  ASSERT_EQ(pool.size(), 5u);
  EXPECT_EQ(pool[0].answer_type, "other");
  EXPECT_EQ(pool[1].answer_type, "number");
  EXPECT_EQ(pool[2].answer_type, "yes/no");
  EXPECT_EQ(pool[0].ground_truths.size(), 10u);
  EXPECT_TRUE(pool[3].ground_truths.empty());
  EXPECT_FALSE(pool[3].image_id.has_value());
  EXPECT_EQ(*pool[0].image_id, "coco-1");
  const auto index = pool.type_index();
  EXPECT_EQ(index.at("is this a"), std::vector<std::string>{"v3"});
  EXPECT_EQ(index.at("what is on the"), std::vector<std::string>{"v4"});
  std::size_t listed = 0;
  for (const auto& [_, ids] : index) listed += ids.size();
  EXPECT_EQ(listed, pool.size());
}

TEST(LoadPool, ErrorsNameTheLine) {
  const std::string good = R"({"question_id": "a", "image_id": null, "text": "is it red", "answer_type": "yes/no", "ground_truths": []})";
  try {
    ParsePool(good + "\n" + good + "\n", "dup.jsonl");
    FAIL();
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("dup.jsonl:2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos) << e.what();
  }
  try {
    ParsePool(good + "\n\n{not json\n", "bad.jsonl");
    FAIL();
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.jsonl:3"), std::string::npos) << e.what();
  }
  const std::string three_gts = R"({"question_id": "b", "image_id": null, "text": "x", "answer_type": "other", "ground_truths": ["a", "b", "c"]})";
  EXPECT_THROW(ParsePool(three_gts), ArgumentError);
  const std::string no_text = R"({"question_id": "c", "image_id": null, "text": "", "answer_type": "other", "ground_truths": []})";
  EXPECT_THROW(ParsePool(no_text), ArgumentError);
  EXPECT_THROW(LoadPool(kData / "missing.jsonl"), IoError);
}

TEST(Pool, SerializeRoundTrip) {
  const QuestionPool pool = LoadPool(kData / "pool5.jsonl");
  EXPECT_EQ(ParsePool(SerializePool(pool.questions())).questions(), pool.questions());
}

TEST(ClassifyType, PrefixExamples) {
  EXPECT_EQ(ClassifyType("What color is it?"), "what color is");
  EXPECT_EQ(ClassifyType("What color is the car?"), "what color is the");
  EXPECT_EQ(ClassifyType("Blorp?"), "none of the above");
  EXPECT_EQ(ClassifyType("WHAT IS ON THE table?"), "what is on the");
  EXPECT_EQ(ClassifyType("Whatever happened"), "none of the above");
  EXPECT_THROW(ClassifyType(""), ArgumentError);
  EXPECT_THROW(ClassifyType("?!"), ArgumentError);
}

TEST(ClassifyType, BundledListHoldsTheStandardTypes) {
  const auto& p = TypePrefixes();
  const std::set<std::string> all(p.begin(), p.end());
  EXPECT_GE(all.size(), 67u);
  for (const char* t : {"what color is", "what is on the", "how many", "is there a", "what", "why"}) {
    EXPECT_TRUE(all.count(t)) << t;
  }
}

TEST(ClassifyType, TotalAndDeterministic) {
  RngStream s(1);
  const std::string words[] = {"what", "is", "the", "how", "many", "color", "zzz", "are", "there"};
  for (int i = 0; i < 200; ++i) {
    std::string text;
    for (int k = 0; k < 4; ++k) text += words[s.UniformInt(9)] + " ";
    EXPECT_EQ(ClassifyType(text), ClassifyType(text));
  }
}

TEST(SampleRsq, EdgeCases) {
  const QuestionPool pool = LoadPool(kData / "pool20.jsonl");
  RngStream s(1);
  EXPECT_TRUE(SampleRsq(pool, 0, s).empty());
  auto all = Ids(SampleRsq(pool, 20, s));
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, Ids(pool.questions()));
  EXPECT_THROW(SampleRsq(pool, 21, s), ArgumentError);
}

TEST(SampleRsq, FrozenSeed7Selection) {
  const QuestionPool pool = LoadPool(kData / "pool20.jsonl");
  RngStream s(7);
  EXPECT_EQ(Ids(SampleRsq(pool, 5, s)), (std::vector<std::string>{"p15", "p11", "p08", "p01", "p17"}));
  RngStream t(7);
  EXPECT_EQ(Ids(SampleRsqByType(pool, 5, t)), (std::vector<std::string>{"p09", "p11", "p01", "p12", "p03"}));
}

TEST(SampleRsq, WithoutReplacementAndCoverage) {
  std::vector<Question> qs;
  for (int i = 0; i < 10; ++i) qs.push_back({"q" + std::to_string(i), std::nullopt, "is it " + std::to_string(i), "yes/no", {}});
  const QuestionPool pool(qs);
  std::set<std::string> hit;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    RngStream s(seed);
    hit.insert(SampleRsq(pool, 1, s)[0].question_id);
  }
  EXPECT_EQ(hit.size(), 10u);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    RngStream s(seed);
    const auto ids = Ids(SampleRsq(pool, 7, s));
    EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), 7u);
  }
}

TEST(SampleRsqByType, TypesPairwiseDistinct) {
  const QuestionPool pool(eval::SurrogatePool());
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    RngStream s(seed);
    const auto qs = SampleRsqByType(pool, 10, s);
    std::set<std::string> types;
    for (const auto& q : qs) types.insert(ClassifyType(q.text));
    EXPECT_EQ(types.size(), 10u);
  }
  RngStream s(1);
  EXPECT_EQ(SampleRsqByType(pool, 1, s).size(), 1u);
  EXPECT_THROW(SampleRsqByType(pool, pool.num_types() + 1, s), ArgumentError);
}

TEST(Wtq, IdentityPreservingOrder) {
  const QuestionPool pool = LoadPool(kData / "pool5.jsonl");
  const std::vector<Question> two = {pool[1], pool[0]};
  EXPECT_EQ(Wtq(two), two);
  EXPECT_THROW(Wtq({}), ArgumentError);
}

TEST(Pool, DuplicateIdsRejected) {
  const Question q{"x", std::nullopt, "is it", "yes/no", {}};
  EXPECT_THROW(QuestionPool({q, q}), ArgumentError);
}

}  // namespace
}  // namespace qava::questions
