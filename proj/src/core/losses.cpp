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

#include "qava/losses.hpp"

#include <algorithm>
#include <numeric>

#include "qava/errors.hpp"

namespace qava::loss {

using ad::Var;

std::string ToString(LossKind kind) {
  switch (kind) {
    case LossKind::kQava: return "qava";
    case LossKind::kQavaMultilayer: return "qava-multilayer";
    case LossKind::kLlm: return "llm";
  }
  return "?";
}

LossKind ParseLossKind(const std::string& name) {
  if (name == "qava") return LossKind::kQava;
  if (name == "qava-multilayer") return LossKind::kQavaMultilayer;
  if (name == "llm") return LossKind::kLlm;
  throw ArgumentError("unknown loss '" + name + "' (valid: qava, qava-multilayer, llm)");
}

double DefaultC(LossKind kind) { return kind == LossKind::kLlm ? 0.1 : 0.005; }

LossSpec LossSpec::Default(LossKind kind, bool cw) { return {kind, cw, DefaultC(kind), 0.0}; }

void LossSpec::Validate() const {
  if (!(c >= 0.0)) throw ArgumentError("CW constant c must be >= 0");
  if (!(confidence >= 0.0)) throw ArgumentError("confidence must be >= 0");
}

nlohmann::json LossSpec::ToJson() const {
  return {{"kind", ToString(kind)}, {"cw", cw}, {"c", c}, {"confidence", confidence}};
}

double QavaLoss(const Tensor& q, const Tensor& q_adv) {
  if (q.shape() != q_adv.shape()) {
    throw ArgumentError("feature shapes differ: " + ShapeToString(q.shape()) + " vs " +
                        ShapeToString(q_adv.shape()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double d = q[i] - q_adv[i];
    sum += d * d;
  }
  return sum / static_cast<double>(q.size());
}

double QavaLossMultilayer(const std::vector<Tensor>& layers, const std::vector<Tensor>& layers_adv) {
  if (layers.empty() || layers.size() != layers_adv.size()) {
    throw ArgumentError("layer counts differ: " + std::to_string(layers.size()) + " vs " +
                        std::to_string(layers_adv.size()));
  }
  double sum = 0.0;
  for (std::size_t l = 0; l < layers.size(); ++l) sum += QavaLoss(layers[l], layers_adv[l]);
  return sum / static_cast<double>(layers.size());
}

double CwObjective(double base_loss, const Tensor& x, const Tensor& x_adv, double c, double confidence) {
  if (x.shape() != x_adv.shape()) throw ArgumentError("image shapes differ");
  if (!(c >= 0.0)) throw ArgumentError("CW constant c must be >= 0");
  double dist = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - x_adv[i];
    dist += d * d;
  }
  const double base = confidence > 0.0 ? std::max(base_loss - confidence, 0.0) : base_loss;
  return base - c * dist;
}

Var QavaLossOnTape(Var q, Var q_adv) {
  if (q.shape() != q_adv.shape()) throw ArgumentError("feature shapes differ");
  return ad::Mean(ad::Square(ad::Sub(q, q_adv)));
}

Var QavaLossMultilayerOnTape(const std::vector<Var>& layers, const std::vector<Var>& layers_adv) {
  if (layers.empty() || layers.size() != layers_adv.size()) throw ArgumentError("layer counts differ");
  Var sum = QavaLossOnTape(layers[0], layers_adv[0]);
  for (std::size_t l = 1; l < layers.size(); ++l) sum = ad::Add(sum, QavaLossOnTape(layers[l], layers_adv[l]));
  return ad::Scale(sum, 1.0 / static_cast<double>(layers.size()));
}

Var CwObjectiveOnTape(Var base_loss, const Tensor& x, Var x_adv, double c, double confidence) {
  if (x.shape() != x_adv.shape()) throw ArgumentError("image shapes differ");
  ad::Tape& tape = *x_adv.tape;
  Var base = confidence > 0.0 ? ad::Relu(ad::AddScalar(base_loss, -confidence)) : base_loss;
  Var dist = ad::Sum(ad::Square(ad::Sub(x_adv, tape.Constant(x))));
  return ad::Sub(base, ad::Scale(dist, c));
}

AttackObjective::AttackObjective(const vlm::Model& model, Tensor clean, LossSpec spec)
    : model_(&model), clean_(std::move(clean)), spec_(spec) {
  spec_.Validate();
  vlm::CheckImageShape(model.config(), clean_);
}

const AttackObjective::CleanEntry& AttackObjective::Clean(const std::string& text) {
  const auto it = cache_.find(text);
  if (it != cache_.end()) return it->second;
  if (clean_patches_.empty()) {
    clean_patches_ = vlm::EncodeImage(*model_, clean_);
    ++counters_.encoder_forward;
  }
  CleanEntry e;
  vlm::AlignmentFeatures f = vlm::Align(*model_, clean_patches_, model_->Tokenize(text));
  ++counters_.align_forward;
  if (spec_.kind == LossKind::kLlm) {
    e.label = vlm::DecodeAnswer(*model_, f, text).answer_id;
    ++counters_.decoder_forward;
  }
  e.features = std::move(f.per_layer);
  return cache_.emplace(text, std::move(e)).first->second;
}

Evaluation AttackObjective::Evaluate(const Tensor& x_adv, const std::vector<Question>& questions,
                                     bool need_grad, const std::vector<std::int64_t>* input_index) {
  if (questions.empty()) throw ArgumentError("attack objective needs at least one question");
  vlm::CheckImageShape(model_->config(), x_adv);

  std::vector<std::size_t> order(questions.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Question& qa = questions[a];
    const Question& qb = questions[b];
    return qa.question_id != qb.question_id ? qa.question_id < qb.question_id : qa.text < qb.text;
  });
  // Clean side first so cache misses never touch the recording tape.
  for (std::size_t i : order) Clean(questions[i].text);

  ad::Tape tape(need_grad);
  vlm::Weights w(tape, *model_, false);
  Var x = tape.Leaf(x_adv);
  Var input = input_index ? ad::Gather(x, *input_index, x_adv.shape()) : x;
  const vlm::EncodedImage enc = vlm::EncodeOnTape(w, input);
  ++counters_.encoder_forward;
  if (need_grad) ++counters_.encoder_backward;

  Var sum;
  for (std::size_t i : order) {
    const Question& q = questions[i];
    const CleanEntry& clean = cache_.at(q.text);
    const auto tokens = model_->Tokenize(q.text);
    const std::vector<Var> layers = vlm::AlignOnTape(w, enc, tokens);
    ++counters_.align_forward;
    if (need_grad) ++counters_.align_backward;
    Var term;
    switch (spec_.kind) {
      case LossKind::kQava:
        term = QavaLossOnTape(tape.Constant(clean.features.back()), layers.back());
        break;
      case LossKind::kQavaMultilayer: {
        std::vector<Var> ref;
        for (const Tensor& t : clean.features) ref.push_back(tape.Constant(t));
        term = QavaLossMultilayerOnTape(ref, layers);
        break;
      }
      case LossKind::kLlm:
        term = ad::CrossEntropy(vlm::DecodeOnTape(w, layers.back(), tokens), clean.label);
        ++counters_.decoder_forward;
        if (need_grad) ++counters_.decoder_backward;
        break;
    }
    sum = sum.tape ? ad::Add(sum, term) : term;
  }
  Var base = ad::Scale(sum, 1.0 / static_cast<double>(questions.size()));
  Var objective = spec_.cw ? CwObjectiveOnTape(base, clean_, x, spec_.c, spec_.confidence) : base;

  Evaluation out;
  out.base = base.item();
  out.value = objective.item();
  if (need_grad) {
    tape.Backward(objective);
    out.grad = tape.Grad(x);
  }
  return out;
}

double AggregateQuestions(const vlm::Model& model, const Tensor& x, const Tensor& x_adv,
                          const std::vector<Question>& questions, const LossSpec& spec) {
  if (questions.empty()) throw ArgumentError("aggregate_questions needs at least one question");
  LossSpec base = spec;
  base.cw = false;
  AttackObjective objective(model, x, base);
  return objective.Evaluate(x_adv, questions, false).base;
}

double PerQuestionLoss(const vlm::Model& model, const Tensor& x, const Tensor& x_adv,
                       const Question& question, const LossSpec& spec) {
  switch (spec.kind) {
    case LossKind::kQava:
      return QavaLoss(vlm::ImageFeatures(model, x, question.text).final(),
                      vlm::ImageFeatures(model, x_adv, question.text).final());
    case LossKind::kQavaMultilayer:
      return QavaLossMultilayer(vlm::ImageFeatures(model, x, question.text).per_layer,
                                vlm::ImageFeatures(model, x_adv, question.text).per_layer);
    case LossKind::kLlm:
      return vlm::LmLoss(model, x_adv, question.text, vlm::PseudoLabel(model, x, question.text));
  }
  return 0.0;
}

}  // namespace qava::loss
