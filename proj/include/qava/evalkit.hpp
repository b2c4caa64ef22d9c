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

#ifndef QAVA_EVALKIT_HPP_
#define QAVA_EVALKIT_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "qava/model.hpp"
#include "qava/questions.hpp"
#include "qava/rng.hpp"
#include "qava/tensor.hpp"

namespace qava::eval {

using questions::Question;

// Images keyed by id plus VQA records (questions with image_id and ten
// ground truths). Records are kept sorted by question_id.
struct Dataset {
  std::map<std::string, Tensor> images;
  std::vector<Question> records;

  // Records of one image, in question_id order.
  std::vector<Question> RecordsFor(const std::string& image_id) const;
  std::size_t num_records() const { return records.size(); }
};

// Scene content of a synthetic image.
struct Scene {
  std::string shape;
  std::string color;
  std::string background;
  int count = 1;
};

// Renders one 32x32x3 scene: `count` shapes of one kind and colour, each in
// a distinct cell of the 4x4 grid, on a plain background. Values are rounded
// to float precision so an f32 QTNS round trip is exact.
Tensor RenderScene(const Scene& scene, RngStream& rng, std::size_t image_size = 32);
Scene SampleScene(RngStream& rng);

// Ground-truth answer of a templated question about a scene, or nullopt for
// text outside the template grammar.
std::optional<std::string> AnswerFor(const Scene& scene, const std::string& text);

// Desk-scale VQA corpus: image_count scenes with questions_per_image
// templated questions each (distinct texts per image while the template
// space lasts). Each question carries ten identical ground truths.
Dataset GenerateSynthetic(RngStream& rng, std::size_t image_count, std::size_t questions_per_image);

// Surrogate question pool with texts disjoint from the templated evaluation
// questions: paraphrases plus image-unrelated VQA-style questions. No
// ground truths, no image ids.
std::vector<Question> SurrogatePool();

struct DatasetSpec {
  std::size_t m = 32;  // images
  std::size_t n = 50;  // questions per image
  std::uint64_t seed = 0;
};

// m images sampled uniformly among those with at least n questions, then n
// questions sampled uniformly per image.
Dataset BuildSubset(const Dataset& dataset, const DatasetSpec& spec, RngStream& rng);

// Official VQA answer processing in reduced form: lower case, punctuation
// removed, articles dropped, number words mapped to digits.
std::string NormalizeAnswer(const std::string& answer);

// Mean over the ten leave-one-out annotator subsets of min(matches / 3, 1).
double VqaScore(const std::string& answer, const std::vector<std::string>& ground_truths);

struct RecordScore {
  std::string question_id;
  std::string image_id;
  std::string answer_type;
  std::string answer;
  double score = 0.0;  // [0, 1]
};

// Scores in [0, 100].
struct EvalResult {
  double overall = 0.0;
  double other = 0.0;
  double number = 0.0;
  double yes_no = 0.0;
  std::size_t count_other = 0;
  std::size_t count_number = 0;
  std::size_t count_yes_no = 0;
  std::vector<RecordScore> records;
  vlm::Counters counters;

  nlohmann::json ToJson(bool include_records = true) const;
};

// Adversarial images listed by an attack run. Every listed id must have a
// tensor; records of unlisted images use the clean image.
struct AdversarialSet {
  std::vector<std::string> image_ids;
  std::map<std::string, Tensor> images;
  vlm::Counters counters;
};

EvalResult Evaluate(const vlm::Model& model, const Dataset& data,
                    const AdversarialSet* adversarial = nullptr);

// Combines per-record scores into the category breakdown.
EvalResult Summarize(std::vector<RecordScore> records);

// x + Uniform(-eps, eps), clamped to [0, 1].
Tensor NoiseBaseline(const Tensor& x, double epsilon, RngStream& rng);

struct NamedModel {
  std::string name;
  const vlm::Model* model = nullptr;
};

struct TransferGrid {
  std::vector<std::string> surrogates;  // rows
  std::vector<std::string> targets;     // columns
  std::vector<std::vector<EvalResult>> cells;

  std::string ToCsv() const;
  nlohmann::json ToJson() const;
};

// cells[i][j]: target j evaluated on the adversarial set crafted on
// surrogate i. The diagonal is the white-box setting.
TransferGrid TransferMatrix(const std::vector<NamedModel>& models,
                            const std::map<std::string, AdversarialSet>& sets, const Dataset& data);

// On-disk corpus: images/<id>.qtns (f32), records.jsonl, manifest.json.
void SaveDataset(const Dataset& data, const std::filesystem::path& dir, const nlohmann::json& manifest);
Dataset LoadDataset(const std::filesystem::path& dir);
// FNV-1a over the QTNS bytes of every image (id order) and the serialized records.
std::string DatasetChecksum(const Dataset& data);

// Mean and sample standard deviation.
struct Spread {
  double mean = 0.0;
  double stddev = 0.0;
};
Spread MeanSpread(const std::vector<double>& values);
// "57.61 (±1.50)" style; the spread is omitted for a single value.
std::string FormatWithSpread(const std::vector<double>& values);

}  // namespace qava::eval

#endif  // QAVA_EVALKIT_HPP_
