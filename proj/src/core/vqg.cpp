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

#include "qava/vqg.hpp"

#include <algorithm>
#include <cstdio>

#include "qava/errors.hpp"

namespace qava::vlm {
namespace {

// The model's answer if it lies in `allowed`, else the first allowed value.
std::string Probe(const Model& model, const Tensor& image, const char* question,
                  const std::vector<std::string>& allowed) {
  const std::string a = AnswerQuestion(model, image, question);
  return std::find(allowed.begin(), allowed.end(), a) != allowed.end() ? a : allowed.front();
}

}  // namespace

std::vector<questions::Question> GenerateQuestions(const Model& model, const Tensor& image, int count) {
  if (count < 0) throw ArgumentError("question count must be >= 0");
  if (count == 0) return {};
  CheckImageShape(model.config(), image);

  static const std::vector<std::string> kCounts = {"1", "2", "3", "4"};
  const std::string color = Probe(model, image, "what color is the shape", ShapeColors());
  const std::string shape = Probe(model, image, "what shape is in the image", ShapeKinds());
  const std::string n = Probe(model, image, "how many shapes are there", kCounts);
  const std::string bg = Probe(model, image, "what color is the background", BackgroundColors());

  const std::string yn(questions::kYesNo), num(questions::kNumber);
  const std::vector<std::pair<std::string, std::string>> templates = {
      {"is there a " + color + " " + shape, yn},
      {"how many " + shape + "s are there", num},
      {"is the shape " + color, yn},
      {"are there " + n + " shapes", yn},
      {"is the background " + bg, yn},
      {"is this a " + shape, yn},
      {"how many " + color + " shapes are there", num},
      {"does the image contain a " + shape, yn},
      {"is there a " + color + " shape", yn},
      {"are the shapes " + color, yn},
      {"is there a " + shape, yn},
  };

  std::vector<questions::Question> out;
  for (int i = 0; i < count; ++i) {
    const auto& [text, type] = templates[static_cast<std::size_t>(i) % templates.size()];
    char id[32];
    std::snprintf(id, sizeof(id), "vqg-%02d", i);
    out.push_back({id, std::nullopt, text, type, {}});
  }
  return out;
}

}  // namespace qava::vlm
