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

#ifndef QAVA_ATTACKS_HPP_
#define QAVA_ATTACKS_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "qava/losses.hpp"
#include "qava/model.hpp"
#include "qava/questions.hpp"
#include "qava/rng.hpp"
#include "qava/tensor.hpp"

namespace qava::attack {

using questions::Question;

enum class Method { kFgsm, kPgd, kCw };

std::string ToString(Method method);
Method ParseMethod(const std::string& name);

// Budgets and step sizes are fractions of the [0, 1] pixel range.
struct AttackConfig {
  Method method = Method::kPgd;
  std::size_t steps = 20;
  double alpha = 2.0 / 255.0;
  double epsilon = 8.0 / 255.0;
  // CW penalty constant; unset means the per-loss default.
  std::optional<double> c;
  double confidence = 0.0;
  bool random_init = true;
  // Fresh question sample at every step.
  bool sga = false;
  double momentum = 0.0;
  double di_prob = 0.0;
  std::uint64_t seed = 0;

  // PGD: 20 steps of 2/255 within 8/255. CW: 50 steps of 0.01.
  // FGSM: one step of epsilon.
  static AttackConfig Defaults(Method method);

  void Validate() const;
  nlohmann::json ToJson() const;
  // Missing keys keep the method defaults; unknown keys are rejected.
  static AttackConfig FromJson(const nlohmann::json& j);
};

// The loss spec an attack runs with: CW wrapping for the cw method, c from
// the config or the per-loss default.
loss::LossSpec ResolveLossSpec(loss::LossKind kind, const AttackConfig& config);

// Clamp into [x_clean - epsilon, x_clean + epsilon] and then into [0, 1].
Tensor ProjectLinf(const Tensor& x_adv, const Tensor& x_clean, double epsilon);
Tensor ClampUnit(const Tensor& x);
// Element-wise sign with sign(0) = 0.
Tensor Sign(const Tensor& g);
// m * g_accum + g / max(||g||_1, 1e-12).
Tensor MomentumUpdate(const Tensor& g_accum, const Tensor& g, double m);

// Diverse-input transform as a gather map over an H x W x C image: with
// probability p, nearest-neighbour resize to s x s' with s uniform in
// [ceil(0.8 H), H] (width scaled alike), zero-padded back to H x W at a
// uniform offset. Returns nullopt for the identity. Draw order: Bernoulli,
// size, row offset, column offset. p = 0 draws nothing.
std::optional<std::vector<std::int64_t>> DiverseInputIndex(const Shape& shape, double p, RngStream& rng);
Tensor DiverseInput(const Tensor& x, double p, RngStream& rng);

// ---- Generic loops ----

// Objective value at x_adv and, when need_grad, its gradient. `step` is the
// 0-based iteration (n for the final evaluation).
using ObjectiveFn = std::function<loss::Evaluation(const Tensor& x_adv, std::size_t step, bool need_grad)>;
// Called with every iterate, starting at step 0 (the initial point).
using IterateObserver = std::function<void(std::size_t step, const Tensor& x_adv)>;

struct LoopResult {
  Tensor adversarial;
  std::vector<double> loss_trace;  // objective at each gradient evaluation
  double final_loss = 0.0;         // objective at the returned image
};

// Sign-gradient ascent with l-inf projection after every step.
LoopResult PgdLoop(const Tensor& x, const ObjectiveFn& objective, const AttackConfig& config,
                   RngStream& rng, const IterateObserver& observer = nullptr);
// Sign-gradient ascent on a penalized objective, clamped to [0, 1]; returns
// the iterate with the highest objective (x_0 .. x_n, first wins ties).
// With random_init the walk starts from x + U(-eps, eps) and x itself is
// scored first.
LoopResult CwLoop(const Tensor& x, const ObjectiveFn& objective, const AttackConfig& config,
                  RngStream& rng, const IterateObserver& observer = nullptr);

// ---- Question providers ----

class QuestionProvider {
 public:
  virtual ~QuestionProvider() = default;
  // Questions for attack step `step`.
  virtual std::vector<Question> Next(std::size_t step, RngStream& rng) = 0;
};

// The same list at every step.
class FixedQuestions : public QuestionProvider {
 public:
  explicit FixedQuestions(std::vector<Question> questions);
  std::vector<Question> Next(std::size_t step, RngStream& rng) override;

 private:
  std::vector<Question> questions_;
};

// A fresh RSQ (or RSQ-by-type) sample from the pool on every call. PGD and
// CW ask once up front and again at each gradient step when config.sga is set.
class ResamplingQuestions : public QuestionProvider {
 public:
  ResamplingQuestions(const questions::QuestionPool& pool, std::size_t n, bool by_type);
  std::vector<Question> Next(std::size_t step, RngStream& rng) override;

 private:
  const questions::QuestionPool* pool_;
  std::size_t n_;
  bool by_type_;
};

// ---- Model-level attacks ----

struct AdversarialExample {
  Tensor clean;
  Tensor adversarial;
  AttackConfig config;
  loss::LossSpec loss;
  // Question ids used at each gradient step.
  std::vector<std::vector<std::string>> step_question_ids;
  std::vector<double> loss_trace;
  double final_loss = 0.0;
  vlm::Counters counters;
  double wall_seconds = 0.0;

  // Sidecar record; wall time is left out so reruns serialize identically.
  nlohmann::json ToJson() const;
};

AdversarialExample Fgsm(const vlm::Model& model, const loss::LossSpec& spec, const Tensor& x,
                        const std::vector<Question>& questions, const AttackConfig& config,
                        RngStream& rng);
AdversarialExample Pgd(const vlm::Model& model, const loss::LossSpec& spec, const Tensor& x,
                       QuestionProvider& provider, const AttackConfig& config, RngStream& rng,
                       const IterateObserver& observer = nullptr);
AdversarialExample Cw(const vlm::Model& model, const loss::LossSpec& spec, const Tensor& x,
                      QuestionProvider& provider, const AttackConfig& config, RngStream& rng,
                      const IterateObserver& observer = nullptr);

// Dispatches on config.method. FGSM takes the provider's step-0 questions.
AdversarialExample RunAttack(const vlm::Model& model, const loss::LossSpec& spec, const Tensor& x,
                             QuestionProvider& provider, const AttackConfig& config, RngStream& rng,
                             const IterateObserver& observer = nullptr);

}  // namespace qava::attack

#endif  // QAVA_ATTACKS_HPP_
