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

#ifndef QAVA_VQG_HPP_
#define QAVA_VQG_HPP_

#include <vector>

#include "qava/model.hpp"
#include "qava/questions.hpp"

namespace qava::vlm {

// Template-based visual question generation. The model is first asked for
// the colour, shape, count and background it perceives; its answers fill the
// slots of a fixed template list. Returns `count` questions with ids
// "vqg-00", "vqg-01", ...; texts are distinct while the list lasts and then
// cycle. Deterministic given the checkpoint and image.
std::vector<questions::Question> GenerateQuestions(const Model& model, const Tensor& image, int count);

}  // namespace qava::vlm

#endif  // QAVA_VQG_HPP_
