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

#include "qava/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "qava/errors.hpp"

namespace qava::vlm {
namespace {

struct Example {
  const Tensor* image;
  std::string text;
  std::size_t label;
};

std::size_t LabelOf(const Model& model, const questions::Question& q) {
  if (q.ground_truths.empty()) throw ArgumentError("record " + q.question_id + " has no ground truth");
  const auto id = model.answers().Find(q.ground_truths.front());
  if (!id) throw ArgumentError("record " + q.question_id + ": answer '" + q.ground_truths.front() +
                               "' is outside the answer vocabulary");
  return *id;
}

// Mean cross-entropy over all records of a dataset, one encoding per image.
double MonitorLoss(const Model& model, const eval::Dataset& data) {
  std::map<std::string, std::vector<const questions::Question*>> by_image;
  for (const auto& q : data.records) by_image[*q.image_id].push_back(&q);
  double sum = 0.0;
  for (const auto& [id, recs] : by_image) {
    ad::Tape tape(false);
    Weights w(tape, model, false);
    const EncodedImage enc = EncodeOnTape(w, tape.Constant(data.images.at(id)));
    for (const auto* q : recs) {
      const auto tokens = model.Tokenize(q->text);
      sum += ad::CrossEntropy(DecodeOnTape(w, AlignOnTape(w, enc, tokens).back(), tokens),
                              LabelOf(model, *q))
                 .item();
    }
  }
  return sum / static_cast<double>(data.records.size());
}

double LearningRate(const TrainConfig& c, std::size_t step) {
  if (step <= c.warmup_steps) return c.learning_rate * static_cast<double>(step) / (c.warmup_steps + 1.0);
  const double t = static_cast<double>(step - c.warmup_steps) / static_cast<double>(c.steps - c.warmup_steps + 1);
  return c.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

}  // namespace

void TrainConfig::Validate() const {
  if (steps == 0 || batch_images == 0 || questions_per_image == 0 || eval_every == 0) {
    throw ArgumentError("train config: steps, batch sizes and eval_every must be positive");
  }
  if (!(learning_rate > 0.0)) throw ArgumentError("train config: learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw ArgumentError("train config: Adam betas must lie in [0, 1)");
  }
  if (!(noise_prob >= 0.0 && noise_prob <= 1.0) || !(noise_eps >= 0.0)) {
    throw ArgumentError("train config: noise_prob in [0, 1] and noise_eps >= 0 required");
  }
  if (heldout_images == 0) throw ArgumentError("train config: heldout_images must be positive");
  if (warmup_steps >= steps) throw ArgumentError("train config: warmup_steps must be below steps");
}

nlohmann::json TrainConfig::ToJson() const {
  return {{"init_seed", init_seed},
          {"steps", steps},
          {"batch_images", batch_images},
          {"questions_per_image", questions_per_image},
          {"learning_rate", learning_rate},
          {"warmup_steps", warmup_steps},
          {"beta1", beta1},
          {"beta2", beta2},
          {"adam_eps", adam_eps},
          {"heldout_images", heldout_images},
          {"eval_every", eval_every},
          {"noise_prob", noise_prob},
          {"noise_eps", noise_eps},
          {"min_accuracy", min_accuracy}};
}

TrainConfig TrainConfig::FromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw ArgumentError("train config must be a JSON object");
  TrainConfig c;
  const nlohmann::json defaults = c.ToJson();
  for (const auto& [key, _] : j.items()) {
    if (!defaults.contains(key)) throw ArgumentError("unknown train config key '" + key + "'");
  }
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("init_seed", c.init_seed);
    get("steps", c.steps);
    get("batch_images", c.batch_images);
    get("questions_per_image", c.questions_per_image);
    get("learning_rate", c.learning_rate);
    get("warmup_steps", c.warmup_steps);
    get("beta1", c.beta1);
    get("beta2", c.beta2);
    get("adam_eps", c.adam_eps);
    get("heldout_images", c.heldout_images);
    get("eval_every", c.eval_every);
    get("noise_prob", c.noise_prob);
    get("noise_eps", c.noise_eps);
    get("min_accuracy", c.min_accuracy);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("invalid train config: ") + e.what());
  }
  c.Validate();
  return c;
}

void SplitHeldout(const eval::Dataset& dataset, std::size_t heldout_images, eval::Dataset& train,
                  eval::Dataset& heldout) {
  if (heldout_images >= dataset.images.size()) {
    throw ArgumentError("dataset has " + std::to_string(dataset.images.size()) +
                        " images; cannot hold out " + std::to_string(heldout_images));
  }
  const std::size_t cut = dataset.images.size() - heldout_images;
  std::set<std::string> held;
  std::size_t i = 0;
  train = {};
  heldout = {};
  for (const auto& [id, img] : dataset.images) {
    if (i++ < cut) {
      train.images.emplace(id, img);
    } else {
      heldout.images.emplace(id, img);
      held.insert(id);
    }
  }
  for (const auto& q : dataset.records) {
    (q.image_id && held.count(*q.image_id) ? heldout : train).records.push_back(q);
  }
}

Model TrainToy(const eval::Dataset& dataset, const TrainConfig& config, RngStream& rng,
               const std::function<void(const TrainPoint&)>& progress) {
  config.Validate();
  eval::Dataset train, heldout;
  SplitHeldout(dataset, config.heldout_images, train, heldout);
  if (train.records.empty() || heldout.records.empty()) throw ArgumentError("empty training split");

  Model model = Model::Init(ModelConfig::Toy(), config.init_seed);
  std::vector<std::string> image_ids;
  std::vector<std::vector<Example>> per_image;
  {
    std::map<std::string, std::size_t> slot;
    for (const auto& [id, img] : train.images) {
      slot[id] = image_ids.size();
      image_ids.push_back(id);
      per_image.emplace_back();
    }
    for (const auto& q : train.records) {
      per_image[slot.at(*q.image_id)].push_back({&train.images.at(*q.image_id), q.text, LabelOf(model, q)});
    }
  }

  std::map<std::string, Tensor> m1, m2;
  for (const auto& [name, t] : model.params()) {
    m1.emplace(name, Tensor(t.shape()));
    m2.emplace(name, Tensor(t.shape()));
  }

  nlohmann::json curve = nlohmann::json::array();
  auto checkpoint = [&](std::size_t step) {
    TrainPoint p;
    p.step = step;
    p.monitor_loss = MonitorLoss(model, heldout);
    p.heldout_overall = eval::Evaluate(model, heldout).overall;
    curve.push_back({{"step", p.step}, {"monitor_loss", p.monitor_loss}, {"heldout_overall", p.heldout_overall}});
    if (progress) progress(p);
    return p;
  };

  double b1t = 1.0, b2t = 1.0;
  for (std::size_t step = 1; step <= config.steps; ++step) {
    ad::Tape tape(true);
    Weights w(tape, model, true);
    ad::Var total;
    std::size_t count = 0;
    for (std::size_t b = 0; b < config.batch_images; ++b) {
      const std::size_t img = rng.UniformInt(image_ids.size());
      std::vector<Example>& examples = per_image[img];
      Tensor image = *examples.front().image;
      if (config.noise_prob > 0.0 && rng.Bernoulli(config.noise_prob)) {
        for (std::size_t i = 0; i < image.size(); ++i) {
          image[i] = std::clamp(image[i] + rng.Uniform(-config.noise_eps, config.noise_eps), 0.0, 1.0);
        }
      }
      const EncodedImage enc = EncodeOnTape(w, tape.Constant(std::move(image)));
      const std::size_t k = std::min(config.questions_per_image, examples.size());
      for (std::size_t i = 0; i < k; ++i) {
        std::swap(examples[i], examples[i + rng.UniformInt(examples.size() - i)]);
        const auto tokens = model.Tokenize(examples[i].text);
        ad::Var ce = ad::CrossEntropy(DecodeOnTape(w, AlignOnTape(w, enc, tokens).back(), tokens),
                                      examples[i].label);
        total = total.tape ? ad::Add(total, ce) : ce;
        ++count;
      }
    }
    tape.Backward(ad::Scale(total, 1.0 / static_cast<double>(count)));

    const double lr = LearningRate(config, step);
    b1t *= config.beta1;
    b2t *= config.beta2;
    for (auto& [name, param] : model.mutable_params()) {
      const Tensor g = tape.Grad(w[name]);
      Tensor& a = m1.at(name);
      Tensor& v = m2.at(name);
      for (std::size_t i = 0; i < param.size(); ++i) {
        a[i] = config.beta1 * a[i] + (1.0 - config.beta1) * g[i];
        v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
        const double mhat = a[i] / (1.0 - b1t);
        const double vhat = v[i] / (1.0 - b2t);
        param[i] -= lr * mhat / (std::sqrt(vhat) + config.adam_eps);
      }
    }
    if (step % config.eval_every == 0 && step != config.steps) checkpoint(step);
  }
  const TrainPoint last = checkpoint(config.steps);
  const eval::EvalResult final_eval = eval::Evaluate(model, heldout);

  nlohmann::json meta;
  meta["train_config"] = config.ToJson();
  meta["train_seed"] = rng.seed();
  meta["train_images"] = train.images.size();
  meta["train_records"] = train.records.size();
  meta["heldout_images"] = heldout.images.size();
  meta["heldout_records"] = heldout.records.size();
  meta["curve"] = std::move(curve);
  meta["heldout"] = final_eval.ToJson(false);
  model.set_metadata(std::move(meta));

  if (last.heldout_overall < config.min_accuracy) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "held-out overall %.2f below required %.2f after %zu steps",
                  last.heldout_overall, config.min_accuracy, config.steps);
    throw TrainingError(buf);
  }
  return model;
}

}  // namespace qava::vlm
