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

// Command-line front end. Talks to the library only through the C API.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "qava/qava.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json LoadConfig(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw Usage("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    json j = json::parse(ss.str());
    if (!j.is_object()) throw Usage("config file " + path + " must hold a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Usage("config file " + path + ": " + e.what());
  }
}

// Sets config[key] (or config[group][key]) when the option was given.
template <typename T>
void Override(json& config, const CLI::Option* opt, const T& value, const char* key,
              const char* group = nullptr) {
  if (opt->count() == 0) return;
  if (group) {
    if (!config.contains(group)) config[group] = json::object();
    config[group][key] = value;
  } else {
    config[key] = value;
  }
}

int Run(qava_status (*fn)(const char*, char**), const json& config) {
  char* out = nullptr;
  const qava_status st = fn(config.dump().c_str(), &out);
  if (st != QAVA_OK) {
    std::cerr << "qava: " << qava_status_name(st) << ": " << qava_last_error() << "\n";
    return st == QAVA_ERR_ARGUMENT ? kExitUsage : kExitRuntime;
  }
  std::cout << out << "\n";
  qava_string_free(out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Question-agnostic adversarial attacks on a toy vision-language model"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", std::string(qava_version()));

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags override its values");

  // dataset
  auto* dataset = app.add_subcommand("dataset", "Generate a synthetic corpus or an m x n subset");
  dataset->require_subcommand(1);
  auto* synth = dataset->add_subcommand("synth", "Synthetic shapes corpus");
  auto* subset = dataset->add_subcommand("subset", "m images with n questions each");
  std::string ds_out, ds_source;
  long long ds_images = 0, ds_questions = 0, ds_m = 0, ds_n = 0;
  unsigned long long ds_seed = 0;
  auto* o_synth_out = synth->add_option("--out", ds_out, "Output directory");
  auto* o_images = synth->add_option("--images", ds_images, "Number of images");
  auto* o_questions = synth->add_option("--questions", ds_questions, "Questions per image");
  auto* o_synth_seed = synth->add_option("--seed", ds_seed, "Generator seed");
  auto* o_sub_out = subset->add_option("--out", ds_out, "Output directory");
  auto* o_source = subset->add_option("--source", ds_source, "Source corpus directory");
  auto* o_m = subset->add_option("--m", ds_m, "Images to sample");
  auto* o_n = subset->add_option("--n", ds_n, "Questions per image");
  auto* o_sub_seed = subset->add_option("--seed", ds_seed, "Sampling seed");

  // train
  auto* train = app.add_subcommand("train", "Train a toy checkpoint");
  std::string tr_dataset, tr_out, tr_name;
  unsigned long long tr_seed = 0, tr_init = 0;
  long long tr_steps = 0;
  double tr_lr = 0, tr_min = 0;
  auto* o_tr_dataset = train->add_option("--dataset", tr_dataset, "Training corpus directory");
  auto* o_tr_out = train->add_option("--out", tr_out, "Checkpoint directory");
  auto* o_tr_name = train->add_option("--name", tr_name, "Model name recorded in the manifest");
  auto* o_tr_seed = train->add_option("--seed", tr_seed, "Batch sampling seed");
  auto* o_tr_init = train->add_option("--init-seed", tr_init, "Parameter initialization seed");
  auto* o_tr_steps = train->add_option("--steps", tr_steps, "Optimizer steps");
  auto* o_tr_lr = train->add_option("--lr", tr_lr, "Peak learning rate");
  auto* o_tr_min = train->add_option("--min-accuracy", tr_min, "Required held-out overall score");

  // attack
  auto* attack = app.add_subcommand("attack", "Craft adversarial images");
  std::string at_model, at_dataset, at_out, at_pool, at_strategy, at_loss, at_method;
  long long at_nq = 0, at_steps = 0, at_repeats = 0, at_jobs = 0, at_max = 0;
  double at_eps = 0, at_alpha = 0, at_c = 0, at_conf = 0;
  std::vector<double> at_momentum, at_di;
  unsigned long long at_seed = 0;
  auto* o_at_model = attack->add_option("--model", at_model, "Checkpoint directory");
  auto* o_at_dataset = attack->add_option("--dataset", at_dataset, "Corpus directory");
  auto* o_at_out = attack->add_option("--out", at_out, "Output directory");
  auto* o_at_pool = attack->add_option("--pool", at_pool, "Surrogate question pool (JSONL)");
  auto* o_at_strategy = attack->add_option("--strategy", at_strategy, "wtq, rsq, rsq-t or vqg");
  auto* o_at_nq = attack->add_option("--n-questions", at_nq, "Questions per image");
  auto* o_at_loss = attack->add_option("--loss", at_loss, "qava, qava-multilayer or llm");
  auto* o_at_method = attack->add_option("--method", at_method, "fgsm, pgd or cw");
  auto* o_at_steps = attack->add_option("--steps", at_steps, "Attack steps");
  auto* o_at_eps = attack->add_option("--eps", at_eps, "l-inf budget in 1/255 units");
  auto* o_at_alpha = attack->add_option("--alpha", at_alpha, "Step size in 1/255 units");
  auto* o_at_c = attack->add_option("--c", at_c, "CW penalty constant");
  auto* o_at_conf = attack->add_option("--confidence", at_conf, "CW confidence");
  auto* o_at_noinit = attack->add_flag("--no-random-init", "Start pgd and cw at the clean image");
  auto* o_at_sga = attack->add_flag("--sga", "Resample questions at every step");
  auto* o_at_mom = attack->add_option("--momentum", at_momentum, "Momentum factor (0.9 when given bare)")
                       ->expected(0, 1);
  auto* o_at_di = attack->add_option("--di", at_di, "Diverse-input probability (0.5 when given bare)")
                      ->expected(0, 1);
  auto* o_at_seed = attack->add_option("--seed", at_seed, "Attack seed");
  auto* o_at_repeats = attack->add_option("--repeats", at_repeats, "Independent repeats");
  auto* o_at_jobs = attack->add_option("--jobs", at_jobs, "Concurrent per-image jobs");
  auto* o_at_share = attack->add_flag("--share-questions", "One question sample for all images");
  auto* o_at_max = attack->add_option("--max-images", at_max, "Attack only the first k images (0 = all)");

  // eval
  auto* evalc = app.add_subcommand("eval", "Score clean and adversarial images");
  std::string ev_model, ev_dataset, ev_attack, ev_out;
  double ev_noise = 0;
  long long ev_noise_reps = 0;
  unsigned long long ev_seed = 0;
  auto* o_ev_model = evalc->add_option("--model", ev_model, "Checkpoint directory");
  auto* o_ev_dataset = evalc->add_option("--dataset", ev_dataset, "Corpus directory");
  auto* o_ev_attack = evalc->add_option("--attack", ev_attack, "Attack output directory");
  auto* o_ev_out = evalc->add_option("--out", ev_out, "Output directory");
  auto* o_ev_noise = evalc->add_option("--noise-eps", ev_noise, "Noise baseline budget in 1/255 units");
  auto* o_ev_noise_reps = evalc->add_option("--noise-repeats", ev_noise_reps, "Noise baseline repeats");
  auto* o_ev_seed = evalc->add_option("--seed", ev_seed, "Noise seed");

  // transfer
  auto* transfer = app.add_subcommand("transfer", "Surrogate x target transfer grid");
  std::vector<std::string> tf_models, tf_attacks;
  std::string tf_dataset, tf_out;
  long long tf_repeat = 0;
  auto* o_tf_models = transfer->add_option("--model", tf_models, "Checkpoint directory (repeatable)");
  auto* o_tf_attacks = transfer->add_option("--attack", tf_attacks, "Attack directory (repeatable)");
  auto* o_tf_dataset = transfer->add_option("--dataset", tf_dataset, "Corpus directory");
  auto* o_tf_out = transfer->add_option("--out", tf_out, "Output directory");
  auto* o_tf_repeat = transfer->add_option("--repeat", tf_repeat, "Attack repeat to use");

  // report
  auto* report = app.add_subcommand("report", "Markdown and CSV tables for a run directory");
  std::string rp_dir, rp_out;
  auto* o_rp_dir = report->add_option("--run-dir", rp_dir, "Run directory");
  auto* o_rp_out = report->add_option("--out", rp_out, "Output directory (default: run dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    json c = LoadConfig(config_path);
    if (dataset->parsed()) {
      if (synth->parsed()) {
        c["mode"] = "synth";
        Override(c, o_synth_out, ds_out, "out");
        Override(c, o_images, ds_images, "images");
        Override(c, o_questions, ds_questions, "questions");
        Override(c, o_synth_seed, ds_seed, "seed");
      } else {
        c["mode"] = "subset";
        Override(c, o_sub_out, ds_out, "out");
        Override(c, o_source, ds_source, "source");
        Override(c, o_m, ds_m, "m");
        Override(c, o_n, ds_n, "n");
        Override(c, o_sub_seed, ds_seed, "seed");
      }
      return Run(qava_cmd_dataset, c);
    }
    if (train->parsed()) {
      Override(c, o_tr_dataset, tr_dataset, "dataset");
      Override(c, o_tr_out, tr_out, "out");
      Override(c, o_tr_name, tr_name, "name");
      Override(c, o_tr_seed, tr_seed, "seed");
      Override(c, o_tr_init, tr_init, "init_seed", "train");
      Override(c, o_tr_steps, tr_steps, "steps", "train");
      Override(c, o_tr_lr, tr_lr, "learning_rate", "train");
      Override(c, o_tr_min, tr_min, "min_accuracy", "train");
      return Run(qava_cmd_train, c);
    }
    if (attack->parsed()) {
      Override(c, o_at_model, at_model, "model");
      Override(c, o_at_dataset, at_dataset, "dataset");
      Override(c, o_at_out, at_out, "out");
      Override(c, o_at_pool, at_pool, "pool");
      Override(c, o_at_strategy, at_strategy, "strategy");
      Override(c, o_at_nq, at_nq, "n_questions");
      Override(c, o_at_loss, at_loss, "loss");
      Override(c, o_at_method, at_method, "method", "attack");
      Override(c, o_at_steps, at_steps, "steps", "attack");
      Override(c, o_at_eps, at_eps / 255.0, "epsilon", "attack");
      Override(c, o_at_alpha, at_alpha / 255.0, "alpha", "attack");
      Override(c, o_at_c, at_c, "c", "attack");
      Override(c, o_at_conf, at_conf, "confidence", "attack");
      Override(c, o_at_noinit, false, "random_init", "attack");
      Override(c, o_at_sga, true, "sga", "attack");
      Override(c, o_at_mom, at_momentum.empty() ? 0.9 : at_momentum.front(), "momentum", "attack");
      Override(c, o_at_di, at_di.empty() ? 0.5 : at_di.front(), "di_prob", "attack");
      Override(c, o_at_seed, at_seed, "seed", "attack");
      Override(c, o_at_repeats, at_repeats, "repeats");
      Override(c, o_at_jobs, at_jobs, "jobs");
      Override(c, o_at_share, true, "share_questions");
      Override(c, o_at_max, at_max, "max_images");
      return Run(qava_cmd_attack, c);
    }
    if (evalc->parsed()) {
      Override(c, o_ev_model, ev_model, "model");
      Override(c, o_ev_dataset, ev_dataset, "dataset");
      Override(c, o_ev_attack, ev_attack, "attack");
      Override(c, o_ev_out, ev_out, "out");
      Override(c, o_ev_noise, ev_noise / 255.0, "epsilon", "noise");
      Override(c, o_ev_noise_reps, ev_noise_reps, "repeats", "noise");
      Override(c, o_ev_seed, ev_seed, "seed", "noise");
      return Run(qava_cmd_eval, c);
    }
    if (transfer->parsed()) {
      Override(c, o_tf_models, tf_models, "models");
      Override(c, o_tf_attacks, tf_attacks, "attacks");
      Override(c, o_tf_dataset, tf_dataset, "dataset");
      Override(c, o_tf_out, tf_out, "out");
      Override(c, o_tf_repeat, tf_repeat, "repeat");
      return Run(qava_cmd_transfer, c);
    }
    Override(c, o_rp_dir, rp_dir, "run_dir");
    Override(c, o_rp_out, rp_out, "out");
    return Run(qava_cmd_report, c);
  } catch (const Usage& e) {
    std::cerr << "qava: usage error: " << e.what() << "\n";
    return kExitUsage;
  }
}
