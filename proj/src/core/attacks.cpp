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

#include "qava/attacks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "qava/errors.hpp"

namespace qava::attack {
namespace {

constexpr double kMomentumFloor = 1e-12;

std::vector<std::string> Ids(const std::vector<Question>& qs) {
  std::vector<std::string> out;
  for (const Question& q : qs) out.push_back(q.question_id);
  return out;
}

void CheckSameShape(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ArgumentError("shape mismatch: " + ShapeToString(a.shape()) + " vs " + ShapeToString(b.shape()));
  }
}

// Shared driver for PGD and CW: binds the objective, question provider and
// diverse-input draws into an ObjectiveFn and records per-step question ids.
class Session {
 public:
  Session(const vlm::Model& model, const loss::LossSpec& spec, const Tensor& x,
          QuestionProvider& provider, const AttackConfig& config, RngStream& rng)
      : objective_(model, x, spec), provider_(provider), config_(config), rng_(rng) {}

  loss::Evaluation operator()(const Tensor& x_adv, std::size_t step, bool need_grad) {
    // The first call always draws; later gradient steps redraw under SGA.
    if (last_.empty() || (need_grad && config_.sga)) {
      last_ = provider_.Next(step, rng_);
      if (last_.empty()) throw ArgumentError("question provider returned no questions");
    }
    if (!need_grad) return objective_.Evaluate(x_adv, last_, false);
    step_ids_.push_back(Ids(last_));
    const auto index = DiverseInputIndex(x_adv.shape(), config_.di_prob, rng_);
    return objective_.Evaluate(x_adv, last_, true, index ? &*index : nullptr);
  }

  AdversarialExample Finish(const Tensor& x, LoopResult r, double seconds) {
    AdversarialExample ex;
    ex.clean = x;
    ex.adversarial = std::move(r.adversarial);
    ex.config = config_;
    ex.loss = objective_.spec();
    ex.step_question_ids = std::move(step_ids_);
    ex.loss_trace = std::move(r.loss_trace);
    ex.final_loss = r.final_loss;
    ex.counters = objective_.counters();
    ex.wall_seconds = seconds;
    return ex;
  }

 private:
  loss::AttackObjective objective_;
  QuestionProvider& provider_;
  const AttackConfig& config_;
  RngStream& rng_;
  std::vector<Question> last_;
  std::vector<std::vector<std::string>> step_ids_;
};

double Seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string ToString(Method method) {
  switch (method) {
    case Method::kFgsm: return "fgsm";
    case Method::kPgd: return "pgd";
    case Method::kCw: return "cw";
  }
  return "?";
}

Method ParseMethod(const std::string& name) {
  if (name == "fgsm") return Method::kFgsm;
  if (name == "pgd") return Method::kPgd;
  if (name == "cw") return Method::kCw;
  throw ArgumentError("unknown method '" + name + "' (valid: fgsm, pgd, cw)");
}

AttackConfig AttackConfig::Defaults(Method method) {
  AttackConfig c;
  c.method = method;
  if (method == Method::kCw) {
    c.steps = 50;
    c.alpha = 0.01;
  } else if (method == Method::kFgsm) {
    c.steps = 1;
    c.alpha = c.epsilon;
    c.random_init = false;
  }
  return c;
}

void AttackConfig::Validate() const {
  if (!(epsilon >= 0.0)) throw ArgumentError("epsilon must be >= 0");
  if (method == Method::kFgsm && !(epsilon > 0.0)) throw ArgumentError("fgsm needs epsilon > 0");
  if (method != Method::kFgsm && !(alpha > 0.0)) throw ArgumentError("alpha must be > 0");
  if (c && !(*c >= 0.0)) throw ArgumentError("CW constant c must be >= 0");
  if (!(confidence >= 0.0)) throw ArgumentError("confidence must be >= 0");
  if (!(momentum >= 0.0)) throw ArgumentError("momentum must be >= 0");
  if (!(di_prob >= 0.0 && di_prob <= 1.0)) throw ArgumentError("di_prob must lie in [0, 1]");
}

nlohmann::json AttackConfig::ToJson() const {
  return {{"method", ToString(method)},
          {"steps", steps},
          {"alpha", alpha},
          {"epsilon", epsilon},
          {"c", c ? nlohmann::json(*c) : nlohmann::json(nullptr)},
          {"confidence", confidence},
          {"random_init", random_init},
          {"sga", sga},
          {"momentum", momentum},
          {"di_prob", di_prob},
          {"seed", seed}};
}

AttackConfig AttackConfig::FromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw ArgumentError("attack config must be a JSON object");
  static const std::set<std::string> kKeys = {"method", "steps",    "alpha",    "epsilon",
                                              "c",      "confidence", "random_init", "sga",
                                              "momentum", "di_prob", "seed"};
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.count(key)) throw ArgumentError("unknown attack config key '" + key + "'");
  }
  try {
    AttackConfig c = Defaults(ParseMethod(j.value("method", std::string("pgd"))));
    if (j.contains("steps")) c.steps = j.at("steps").get<std::size_t>();
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
    if (j.contains("c") && !j.at("c").is_null()) c.c = j.at("c").get<double>();
    if (j.contains("confidence")) c.confidence = j.at("confidence").get<double>();
    if (j.contains("random_init")) c.random_init = j.at("random_init").get<bool>();
    if (j.contains("sga")) c.sga = j.at("sga").get<bool>();
    if (j.contains("momentum")) c.momentum = j.at("momentum").get<double>();
    if (j.contains("di_prob")) c.di_prob = j.at("di_prob").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    c.Validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("invalid attack config: ") + e.what());
  }
}

loss::LossSpec ResolveLossSpec(loss::LossKind kind, const AttackConfig& config) {
  loss::LossSpec spec = loss::LossSpec::Default(kind, config.method == Method::kCw);
  if (config.c) spec.c = *config.c;
  spec.confidence = config.confidence;
  spec.Validate();
  return spec;
}

Tensor ProjectLinf(const Tensor& x_adv, const Tensor& x_clean, double epsilon) {
  if (!(epsilon >= 0.0)) throw ArgumentError("epsilon must be >= 0");
  CheckSameShape(x_adv, x_clean);
  Tensor out = x_adv;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = std::clamp(x_adv[i], x_clean[i] - epsilon, x_clean[i] + epsilon);
    out[i] = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

Tensor ClampUnit(const Tensor& x) {
  Tensor out = x;
  for (double& v : out.data()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

Tensor Sign(const Tensor& g) {
  Tensor out = g;
  for (double& v : out.data()) v = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
  return out;
}

Tensor MomentumUpdate(const Tensor& g_accum, const Tensor& g, double m) {
  if (!(m >= 0.0)) throw ArgumentError("momentum must be >= 0");
  CheckSameShape(g_accum, g);
  double l1 = 0.0;
  for (double v : g.data()) l1 += std::abs(v);
  const double norm = std::max(l1, kMomentumFloor);
  Tensor out = g_accum;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = m * g_accum[i] + g[i] / norm;
  return out;
}

std::optional<std::vector<std::int64_t>> DiverseInputIndex(const Shape& shape, double p, RngStream& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("diverse-input probability must lie in [0, 1]");
  if (shape.size() != 3) throw ArgumentError("diverse input expects an H x W x C image");
  if (p == 0.0 || !rng.Bernoulli(p)) return std::nullopt;
  const std::size_t h = shape[0], w = shape[1], ch = shape[2];
  const auto lo = static_cast<std::size_t>(std::ceil(0.8 * static_cast<double>(h)));
  const std::size_t sh = lo + rng.UniformInt(h - lo + 1);
  const std::size_t sw = std::max<std::size_t>(1, (sh * w + h / 2) / h);
  const std::size_t oy = rng.UniformInt(h - sh + 1);
  const std::size_t ox = rng.UniformInt(w - std::min(sw, w) + 1);
  std::vector<std::int64_t> index(h * w * ch, -1);
  for (std::size_t y = oy; y < oy + sh; ++y) {
    const std::size_t sy = (y - oy) * h / sh;
    for (std::size_t x = ox; x < std::min(ox + sw, w); ++x) {
      const std::size_t sx = (x - ox) * w / sw;
      for (std::size_t c = 0; c < ch; ++c) {
        index[(y * w + x) * ch + c] = static_cast<std::int64_t>((sy * w + sx) * ch + c);
      }
    }
  }
  return index;
}

Tensor DiverseInput(const Tensor& x, double p, RngStream& rng) {
  const auto index = DiverseInputIndex(x.shape(), p, rng);
  if (!index) return x;
  Tensor out(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*index)[i] < 0 ? 0.0 : x[(*index)[i]];
  return out;
}

LoopResult PgdLoop(const Tensor& x, const ObjectiveFn& objective, const AttackConfig& config,
                   RngStream& rng, const IterateObserver& observer) {
  config.Validate();
  Tensor adv = x;
  if (config.random_init) {
    const Tensor noise = RngUniform(rng, -config.epsilon, config.epsilon, x.shape());
    for (std::size_t i = 0; i < adv.size(); ++i) adv[i] += noise[i];
    adv = ProjectLinf(adv, x, config.epsilon);
  }
  if (observer) observer(0, adv);
  LoopResult r;
  Tensor accum(x.shape());
  for (std::size_t k = 0; k < config.steps; ++k) {
    const loss::Evaluation e = objective(adv, k, true);
    r.loss_trace.push_back(e.value);
    Tensor direction;
    if (config.momentum > 0.0) {
      accum = MomentumUpdate(accum, e.grad, config.momentum);
      direction = Sign(accum);
    } else {
      direction = Sign(e.grad);
    }
    for (std::size_t i = 0; i < adv.size(); ++i) adv[i] += config.alpha * direction[i];
    adv = ProjectLinf(adv, x, config.epsilon);
    if (observer) observer(k + 1, adv);
  }
  r.final_loss = objective(adv, config.steps, false).value;
  r.adversarial = std::move(adv);
  return r;
}

LoopResult CwLoop(const Tensor& x, const ObjectiveFn& objective, const AttackConfig& config,
                  RngStream& rng, const IterateObserver& observer) {
  config.Validate();
  Tensor adv = x;
  Tensor best = x;
  double best_value = -INFINITY;
  if (config.random_init && config.epsilon > 0.0) {
    // The clean image stays the first candidate, so a start that never
    // improves on it still returns x.
    best_value = objective(x, 0, false).value;
    const Tensor noise = RngUniform(rng, -config.epsilon, config.epsilon, x.shape());
    for (std::size_t i = 0; i < adv.size(); ++i) adv[i] += noise[i];
    adv = ClampUnit(adv);
  }
  if (observer) observer(0, adv);
  LoopResult r;
  Tensor accum(x.shape());
  for (std::size_t k = 0; k < config.steps; ++k) {
    const loss::Evaluation e = objective(adv, k, true);
    r.loss_trace.push_back(e.value);
    if (e.value > best_value) {
      best_value = e.value;
      best = adv;
    }
    Tensor direction;
    if (config.momentum > 0.0) {
      accum = MomentumUpdate(accum, e.grad, config.momentum);
      direction = Sign(accum);
    } else {
      direction = Sign(e.grad);
    }
    for (std::size_t i = 0; i < adv.size(); ++i) adv[i] += config.alpha * direction[i];
    adv = ClampUnit(adv);
    if (observer) observer(k + 1, adv);
  }
  const double last = objective(adv, config.steps, false).value;
  if (last > best_value) {
    best_value = last;
    best = adv;
  }
  r.final_loss = best_value;
  r.adversarial = std::move(best);
  return r;
}

FixedQuestions::FixedQuestions(std::vector<Question> questions) : questions_(std::move(questions)) {
  if (questions_.empty()) throw ArgumentError("question list is empty");
}

std::vector<Question> FixedQuestions::Next(std::size_t, RngStream&) { return questions_; }

ResamplingQuestions::ResamplingQuestions(const questions::QuestionPool& pool, std::size_t n, bool by_type)
    : pool_(&pool), n_(n), by_type_(by_type) {
  if (n == 0) throw ArgumentError("resampling needs n >= 1");
}

std::vector<Question> ResamplingQuestions::Next(std::size_t, RngStream& rng) {
  return by_type_ ? questions::SampleRsqByType(*pool_, n_, rng) : questions::SampleRsq(*pool_, n_, rng);
}

nlohmann::json AdversarialExample::ToJson() const {
  double linf = 0.0, l2 = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const double d = adversarial[i] - clean[i];
    linf = std::max(linf, std::abs(d));
    l2 += d * d;
  }
  return {{"config", config.ToJson()},
          {"loss", loss.ToJson()},
          {"step_question_ids", step_question_ids},
          {"loss_trace", loss_trace},
          {"final_loss", final_loss},
          {"counters", counters.ToJson()},
          {"linf", linf},
          {"l2", std::sqrt(l2)}};
}

AdversarialExample Fgsm(const vlm::Model& model, const loss::LossSpec& spec, const Tensor& x,
                        const std::vector<Question>& questions, const AttackConfig& config,
                        RngStream& rng) {
  if (!(config.epsilon > 0.0)) throw ArgumentError("fgsm needs epsilon > 0");
  if (questions.empty()) throw ArgumentError("fgsm needs at least one question");
  const auto start = std::chrono::steady_clock::now();
  loss::AttackObjective objective(model, x, spec);
  const auto index = DiverseInputIndex(x.shape(), config.di_prob, rng);
  const loss::Evaluation e = objective.Evaluate(x, questions, true, index ? &*index : nullptr);
  const Tensor step = Sign(e.grad);
  Tensor adv = x;
  for (std::size_t i = 0; i < adv.size(); ++i) adv[i] += config.epsilon * step[i];
  adv = ProjectLinf(adv, x, config.epsilon);

  AdversarialExample ex;
  ex.final_loss = objective.Evaluate(adv, questions, false).value;
  ex.clean = x;
  ex.adversarial = std::move(adv);
  ex.config = config;
  ex.loss = spec;
  ex.step_question_ids = {Ids(questions)};
  ex.loss_trace = {e.value};
  ex.counters = objective.counters();
  ex.wall_seconds = Seconds(start);
  return ex;
}

AdversarialExample Pgd(const vlm::Model& model, const loss::LossSpec& spec, const Tensor& x,
                       QuestionProvider& provider, const AttackConfig& config, RngStream& rng,
                       const IterateObserver& observer) {
  const auto start = std::chrono::steady_clock::now();
  Session session(model, spec, x, provider, config, rng);
  LoopResult r = PgdLoop(
      x, [&](const Tensor& a, std::size_t k, bool g) { return session(a, k, g); }, config, rng, observer);
  return session.Finish(x, std::move(r), Seconds(start));
}

AdversarialExample Cw(const vlm::Model& model, const loss::LossSpec& spec, const Tensor& x,
                      QuestionProvider& provider, const AttackConfig& config, RngStream& rng,
                      const IterateObserver& observer) {
  if (!spec.cw) throw ArgumentError("cw attack needs a CW-wrapped loss spec");
  const auto start = std::chrono::steady_clock::now();
  Session session(model, spec, x, provider, config, rng);
  LoopResult r = CwLoop(
      x, [&](const Tensor& a, std::size_t k, bool g) { return session(a, k, g); }, config, rng, observer);
  return session.Finish(x, std::move(r), Seconds(start));
}

AdversarialExample RunAttack(const vlm::Model& model, const loss::LossSpec& spec, const Tensor& x,
                             QuestionProvider& provider, const AttackConfig& config, RngStream& rng,
                             const IterateObserver& observer) {
  config.Validate();
  switch (config.method) {
    case Method::kFgsm: {
      const std::vector<Question> qs = provider.Next(0, rng);
      AdversarialExample ex = Fgsm(model, spec, x, qs, config, rng);
      if (observer) {
        observer(0, x);
        observer(1, ex.adversarial);
      }
      return ex;
    }
    case Method::kPgd: return Pgd(model, spec, x, provider, config, rng, observer);
    case Method::kCw: return Cw(model, spec, x, provider, config, rng, observer);
  }
  throw ArgumentError("unknown attack method");
}

}  // namespace qava::attack
