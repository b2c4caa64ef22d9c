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

#ifndef QAVA_VOCAB_HPP_
#define QAVA_VOCAB_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qava::vlm {

// Attribute values of the synthetic shape world. The generator and the
// question templates draw from these lists; the answer vocabulary is their
// union plus yes/no and the counts.
inline const std::vector<std::string>& ShapeColors() {
  static const std::vector<std::string> v = {"red", "green", "blue", "yellow", "purple", "orange"};
  return v;
}
inline const std::vector<std::string>& BackgroundColors() {
  static const std::vector<std::string> v = {"white", "black", "gray"};
  return v;
}
inline const std::vector<std::string>& ShapeKinds() {
  static const std::vector<std::string> v = {"circle", "square", "triangle"};
  return v;
}
constexpr int kMaxShapes = 4;

// Whitespace tokenizer over a closed word list. Punctuation is stripped and
// text lower-cased; unknown words map to <unk>.
class Tokenizer {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  static const Tokenizer& Default();

  explicit Tokenizer(std::vector<std::string> words);

  std::size_t vocab_size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  int Lookup(std::string_view word) const;

  // Token ids padded with kPad (or truncated) to exactly max_len entries.
  std::vector<int> Encode(std::string_view text, std::size_t max_len) const;

 private:
  std::vector<std::string> words_;
};

// Single-token answer vocabulary. Ids are positions in the list.
class AnswerVocab {
 public:
  static const AnswerVocab& Default();

  explicit AnswerVocab(std::vector<std::string> answers);

  std::size_t size() const { return answers_.size(); }
  const std::string& Answer(std::size_t id) const { return answers_.at(id); }
  std::optional<std::size_t> Find(std::string_view answer) const;
  const std::vector<std::string>& answers() const { return answers_; }

 private:
  std::vector<std::string> answers_;
};

// Lower-case, punctuation replaced by spaces, whitespace collapsed.
std::string NormalizeText(std::string_view text);

}  // namespace qava::vlm

#endif  // QAVA_VOCAB_HPP_
