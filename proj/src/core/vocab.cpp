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

#include "qava/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "qava/errors.hpp"

namespace qava::vlm {

std::string NormalizeText(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cleaned.push_back(static_cast<char>(std::tolower(c)));
    } else {
      cleaned.push_back(' ');
    }
  }
  std::istringstream in(cleaned);
  std::string word, out;
  while (in >> word) {
    if (!out.empty()) out.push_back(' ');
    out += word;
  }
  return out;
}

const Tokenizer& Tokenizer::Default() {
  static const Tokenizer tok({
      "<pad>", "<unk>",
      // function words
      "what", "which", "how", "many", "is", "are", "the", "a", "this", "there", "of", "in",
      "does", "do", "can", "you", "see", "it", "on", "any", "here", "has", "have", "its",
      // nouns
      "color", "colors", "shape", "shapes", "background", "image", "picture", "kind", "object",
      "objects", "contain", "shown",
      // attributes
      "red", "green", "blue", "yellow", "purple", "orange", "white", "black", "gray",
      "circle", "circles", "square", "squares", "triangle", "triangles",
      "1", "2", "3", "4",
  });
  return tok;
}

Tokenizer::Tokenizer(std::vector<std::string> words) : words_(std::move(words)) {
  if (words_.size() < 2 || words_[kPad] != "<pad>" || words_[kUnk] != "<unk>") {
    throw ArgumentError("tokenizer word list must start with <pad>, <unk>");
  }
}

int Tokenizer::Lookup(std::string_view word) const {
  const auto it = std::find(words_.begin(), words_.end(), word);
  return it == words_.end() ? kUnk : static_cast<int>(it - words_.begin());
}

std::vector<int> Tokenizer::Encode(std::string_view text, std::size_t max_len) const {
  std::vector<int> ids;
  std::istringstream in(NormalizeText(text));
  std::string word;
  while (ids.size() < max_len && in >> word) ids.push_back(Lookup(word));
  ids.resize(max_len, kPad);
  return ids;
}

const AnswerVocab& AnswerVocab::Default() {
  static const AnswerVocab vocab({
      "yes", "no", "0", "1", "2", "3", "4",
      "red", "green", "blue", "yellow", "purple", "orange",
      "white", "black", "gray",
      "circle", "square", "triangle",
  });
  return vocab;
}

AnswerVocab::AnswerVocab(std::vector<std::string> answers) : answers_(std::move(answers)) {
  if (answers_.empty()) throw ArgumentError("answer vocabulary is empty");
}

std::optional<std::size_t> AnswerVocab::Find(std::string_view answer) const {
  const std::string norm = NormalizeText(answer);
  const auto it = std::find(answers_.begin(), answers_.end(), norm);
  if (it == answers_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - answers_.begin());
}

}  // namespace qava::vlm
