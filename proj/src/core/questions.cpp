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

#include "qava/questions.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "qava/errors.hpp"
#include "qava/qtns.hpp"
#include "qava/vocab.hpp"

namespace qava::questions {

extern const char* const kQuestionTypesData;

nlohmann::json ToJson(const Question& q) {
  nlohmann::json j;
  j["question_id"] = q.question_id;
  j["image_id"] = q.image_id ? nlohmann::json(*q.image_id) : nlohmann::json(nullptr);
  j["text"] = q.text;
  j["answer_type"] = q.answer_type;
  j["ground_truths"] = q.ground_truths;
  return j;
}

void Validate(const Question& q) {
  if (q.question_id.empty()) throw ArgumentError("question_id is empty");
  if (q.text.empty()) throw ArgumentError("question " + q.question_id + ": text is empty");
  if (q.answer_type.empty()) throw ArgumentError("question " + q.question_id + ": answer_type is empty");
  if (!q.ground_truths.empty() && q.ground_truths.size() != 10) {
    throw ArgumentError("question " + q.question_id + ": ground_truths must hold 0 or 10 answers, got " +
                        std::to_string(q.ground_truths.size()));
  }
}

Question QuestionFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw ArgumentError("record is not a JSON object");
  Question q;
  try {
    q.question_id = j.at("question_id").get<std::string>();
    const auto& img = j.at("image_id");
    if (!img.is_null()) q.image_id = img.get<std::string>();
    q.text = j.at("text").get<std::string>();
    q.answer_type = j.at("answer_type").get<std::string>();
    q.ground_truths = j.at("ground_truths").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("invalid question record: ") + e.what());
  }
  Validate(q);
  return q;
}

QuestionPool::QuestionPool(std::vector<Question> questions) : questions_(std::move(questions)) {
  for (std::size_t i = 0; i < questions_.size(); ++i) {
    const Question& q = questions_[i];
    Validate(q);
    if (!by_id_.emplace(q.question_id, i).second) {
      throw ArgumentError("duplicate question_id " + q.question_id);
    }
    by_type_[ClassifyType(q.text)].push_back(i);
  }
}

std::map<std::string, std::vector<std::string>> QuestionPool::type_index() const {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& [type, idx] : by_type_) {
    auto& ids = out[type];
    for (std::size_t i : idx) ids.push_back(questions_[i].question_id);
  }
  return out;
}

std::optional<std::size_t> QuestionPool::Find(const std::string& question_id) const {
  const auto it = by_id_.find(question_id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

QuestionPool ParsePool(std::string_view jsonl, const std::string& source) {
  std::vector<Question> out;
  std::map<std::string, std::size_t> seen;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    try {
      Question q = QuestionFromJson(nlohmann::json::parse(line));
      if (!seen.emplace(q.question_id, line_no).second) {
        throw ArgumentError("duplicate question_id " + q.question_id + " (first seen on line " +
                            std::to_string(seen[q.question_id]) + ")");
      }
      out.push_back(std::move(q));
    } catch (const nlohmann::json::exception& e) {
      throw ArgumentError(where + "malformed JSON: " + e.what());
    } catch (const ArgumentError& e) {
      throw ArgumentError(where + e.what());
    }
  }
  return QuestionPool(std::move(out));
}

QuestionPool LoadPool(const std::filesystem::path& path) {
  return ParsePool(ReadTextFile(path), path.string());
}

std::string SerializePool(const std::vector<Question>& questions) {
  std::string out;
  for (const Question& q : questions) {
    out += ToJson(q).dump();
    out += '\n';
  }
  return out;
}

void SavePool(const std::vector<Question>& questions, const std::filesystem::path& path) {
  WriteTextFile(path, SerializePool(questions));
}

const std::vector<std::string>& TypePrefixes() {
  static const std::vector<std::string> prefixes = [] {
    std::vector<std::string> out;
    std::istringstream in(kQuestionTypesData);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      const std::string norm = vlm::NormalizeText(line);
      if (!norm.empty()) out.push_back(norm);
    }
    return out;
  }();
  return prefixes;
}

std::string ClassifyType(std::string_view text) {
  const std::string norm = vlm::NormalizeText(text);
  if (norm.empty()) throw ArgumentError("cannot classify an empty question");
  const std::string* best = nullptr;
  for (const std::string& p : TypePrefixes()) {
    if (p == kNoType) continue;
    const bool match = norm.size() == p.size() ? norm == p
                                               : norm.size() > p.size() && norm[p.size()] == ' ' &&
                                                     norm.compare(0, p.size(), p) == 0;
    if (match && (best == nullptr || p.size() > best->size())) best = &p;
  }
  return best ? *best : std::string(kNoType);
}

std::vector<Question> SampleRsq(const QuestionPool& pool, std::size_t n, RngStream& rng) {
  if (n > pool.size()) {
    throw ArgumentError("cannot sample " + std::to_string(n) + " questions from a pool of " +
                        std::to_string(pool.size()));
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Question> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.UniformInt(pool.size() - i);
    std::swap(order[i], order[j]);
    out.push_back(pool[order[i]]);
  }
  return out;
}

std::vector<Question> SampleRsqByType(const QuestionPool& pool, std::size_t n, RngStream& rng) {
  if (n > pool.num_types()) {
    throw ArgumentError("cannot sample " + std::to_string(n) + " types from a pool with " +
                        std::to_string(pool.num_types()) + " question types");
  }
  std::vector<const std::vector<std::size_t>*> types;
  for (const auto& [_, members] : pool.by_type_) types.push_back(&members);
  std::vector<Question> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.UniformInt(types.size() - i);
    std::swap(types[i], types[j]);
    const auto& members = *types[i];
    out.push_back(pool[members[rng.UniformInt(members.size())]]);
  }
  return out;
}

std::vector<Question> Wtq(const std::vector<Question>& targets) {
  if (targets.empty()) throw ArgumentError("WTQ needs at least one target question");
  return targets;
}

}  // namespace qava::questions
