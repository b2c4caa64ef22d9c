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

#ifndef QAVA_TRAIN_HPP_
#define QAVA_TRAIN_HPP_

#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "qava/evalkit.hpp"
#include "qava/model.hpp"
#include "qava/rng.hpp"

namespace qava::vlm {

struct TrainConfig {
  std::uint64_t init_seed = 0;
  std::size_t steps = 10000;
  std::size_t batch_images = 8;
  std::size_t questions_per_image = 8;
  // Peak Adam step size; cosine-decayed to zero over `steps` after a linear
  // warmup of `warmup_steps`.
  double learning_rate = 1e-3;
  std::size_t warmup_steps = 200;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  // Images held out (the last ones in id order) for evaluation.
  std::size_t heldout_images = 64;
  // Monitor-loss and held-out evaluation interval, in steps.
  std::size_t eval_every = 250;
  // Probability of adding U(-noise_eps, noise_eps) noise to a training image.
  double noise_prob = 0.0;
  double noise_eps = 0.0;
  // Held-out overall VQA score required, in [0, 100].
  double min_accuracy = 90.0;

  void Validate() const;
  nlohmann::json ToJson() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static TrainConfig FromJson(const nlohmann::json& j);
};

struct TrainPoint {
  std::size_t step = 0;
  double monitor_loss = 0.0;  // mean cross-entropy on held-out records
  double heldout_overall = 0.0;
};

// Adam on the mean answer cross-entropy over mini-batches of images, several
// questions per image. Seed-deterministic: identical inputs give identical
// checkpoint bytes. The returned model's metadata records the recipe, the
// curve and the final held-out scores. Throws TrainingError when the final
// held-out overall score is below config.min_accuracy.
Model TrainToy(const eval::Dataset& dataset, const TrainConfig& config, RngStream& rng,
               const std::function<void(const TrainPoint&)>& progress = nullptr);

// Splits off the last `heldout_images` images (id order).
void SplitHeldout(const eval::Dataset& dataset, std::size_t heldout_images, eval::Dataset& train,
                  eval::Dataset& heldout);

}  // namespace qava::vlm

#endif  // QAVA_TRAIN_HPP_
