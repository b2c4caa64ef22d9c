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

#ifndef QAVA_LOSSES_HPP_
#define QAVA_LOSSES_HPP_

#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "qava/autodiff.hpp"
#include "qava/model.hpp"
#include "qava/questions.hpp"

namespace qava::loss {

using questions::Question;

enum class LossKind { kQava, kQavaMultilayer, kLlm };

// "qava", "qava-multilayer", "llm".
std::string ToString(LossKind kind);
LossKind ParseLossKind(const std::string& name);

// CW penalty constant used when none is given: 0.1 with the language-model
// loss, 0.005 with the feature losses.
double DefaultC(LossKind kind);

struct LossSpec {
  LossKind kind = LossKind::kQava;
  bool cw = false;
  double c = 0.0;
  // Subtracted from the base loss before clamping at zero. 0 disables it.
  double confidence = 0.0;

  static LossSpec Default(LossKind kind, bool cw = false);
  void Validate() const;
  nlohmann::json ToJson() const;
};

// Mean squared difference of two feature matrices.
double QavaLoss(const Tensor& q, const Tensor& q_adv);
// Unweighted mean of the per-layer QavaLoss.
double QavaLossMultilayer(const std::vector<Tensor>& layers, const std::vector<Tensor>& layers_adv);
// max(base - confidence, 0) - c * ||x - x_adv||^2 when confidence > 0,
// otherwise base - c * ||x - x_adv||^2.
double CwObjective(double base_loss, const Tensor& x, const Tensor& x_adv, double c,
                   double confidence = 0.0);

ad::Var QavaLossOnTape(ad::Var q, ad::Var q_adv);
ad::Var QavaLossMultilayerOnTape(const std::vector<ad::Var>& layers,
                                 const std::vector<ad::Var>& layers_adv);
ad::Var CwObjectiveOnTape(ad::Var base_loss, const Tensor& x, ad::Var x_adv, double c,
                          double confidence = 0.0);

struct Evaluation {
  double value = 0.0;  // objective (CW-wrapped when the spec asks for it)
  double base = 0.0;   // mean per-question loss
  Tensor grad;         // d value / d x_adv; empty when not requested
};

// The attack objective for one clean image. Clean-side features and
// pseudo-labels are cached per question text; the cache holds exactly the
// values a fresh computation would produce. The adversarial image is encoded
// once per call and shared by all questions; per-question losses are summed
// in (question_id, text) order, so the result does not depend on the order
// of the list.
class AttackObjective {
 public:
  AttackObjective(const vlm::Model& model, Tensor clean, LossSpec spec);

  // `input_index`, when given, is a gather map applied to x_adv before the
  // forward pass (diverse-input transform); the CW penalty always uses the
  // untransformed x_adv.
  Evaluation Evaluate(const Tensor& x_adv, const std::vector<Question>& questions, bool need_grad,
                      const std::vector<std::int64_t>* input_index = nullptr);

  const vlm::Model& model() const { return *model_; }
  const Tensor& clean() const { return clean_; }
  const LossSpec& spec() const { return spec_; }
  const vlm::Counters& counters() const { return counters_; }

 private:
  struct CleanEntry {
    std::vector<Tensor> features;
    std::size_t label = 0;
  };
  const CleanEntry& Clean(const std::string& text);

  const vlm::Model* model_;
  Tensor clean_;
  LossSpec spec_;
  Tensor clean_patches_;
  std::map<std::string, CleanEntry> cache_;
  vlm::Counters counters_;
};

// Mean over questions of the per-question loss between x and x_adv (no CW
// wrapping). Throws ArgumentError for an empty list.
double AggregateQuestions(const vlm::Model& model, const Tensor& x, const Tensor& x_adv,
                          const std::vector<Question>& questions, const LossSpec& spec);

// Loss of a single question, computed from scratch without any caching.
double PerQuestionLoss(const vlm::Model& model, const Tensor& x, const Tensor& x_adv,
                       const Question& question, const LossSpec& spec);

}  // namespace qava::loss

#endif  // QAVA_LOSSES_HPP_
