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

#ifndef QAVA_QUESTIONS_HPP_
#define QAVA_QUESTIONS_HPP_

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qava/rng.hpp"

namespace qava::questions {

inline constexpr std::string_view kYesNo = "yes/no";
inline constexpr std::string_view kNumber = "number";
inline constexpr std::string_view kOther = "other";
inline constexpr std::string_view kNoType = "none of the above";

struct Question {
  std::string question_id;
  std::optional<std::string> image_id;
  std::string text;
  // "yes/no", "number", "other"; other labels are carried through but only
  // the three standard categories get a score breakdown.
  std::string answer_type;
  // Exactly 10 annotator answers, or empty for surrogate-only questions.
  std::vector<std::string> ground_truths;

  bool operator==(const Question&) const = default;
};

nlohmann::json ToJson(const Question& q);
// Throws ArgumentError describing the first violated field.
Question QuestionFromJson(const nlohmann::json& j);
void Validate(const Question& q);

class QuestionPool {
 public:
  QuestionPool() = default;
  // Throws ArgumentError on duplicate ids or invalid records.
  explicit QuestionPool(std::vector<Question> questions);

  const std::vector<Question>& questions() const { return questions_; }
  std::size_t size() const { return questions_.size(); }
  bool empty() const { return questions_.empty(); }
  const Question& operator[](std::size_t i) const { return questions_[i]; }

  // question type -> question ids, every question listed exactly once.
  std::map<std::string, std::vector<std::string>> type_index() const;
  std::size_t num_types() const { return by_type_.size(); }
  std::optional<std::size_t> Find(const std::string& question_id) const;

 private:
  friend std::vector<Question> SampleRsqByType(const QuestionPool&, std::size_t, RngStream&);

  std::vector<Question> questions_;
  std::map<std::string, std::vector<std::size_t>> by_type_;
  std::map<std::string, std::size_t> by_id_;
};

// JSONL, one Question per line. Blank lines are skipped. Errors name the
// 1-based line number.
QuestionPool LoadPool(const std::filesystem::path& path);
QuestionPool ParsePool(std::string_view jsonl, const std::string& source = "<memory>");
std::string SerializePool(const std::vector<Question>& questions);
void SavePool(const std::vector<Question>& questions, const std::filesystem::path& path);

// Bundled type prefix list (lower case).
const std::vector<std::string>& TypePrefixes();
// Longest word-boundary prefix match after normalization; kNoType otherwise.
std::string ClassifyType(std::string_view text);

// Uniform sample of n questions without replacement (partial Fisher-Yates).
std::vector<Question> SampleRsq(const QuestionPool& pool, std::size_t n, RngStream& rng);
// n distinct types chosen uniformly, then one uniform question per type.
std::vector<Question> SampleRsqByType(const QuestionPool& pool, std::size_t n, RngStream& rng);
// White-box targeting: the target questions themselves.
std::vector<Question> Wtq(const std::vector<Question>& targets);

}  // namespace qava::questions

#endif  // QAVA_QUESTIONS_HPP_
