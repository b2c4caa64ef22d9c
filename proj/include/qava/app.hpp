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

#ifndef QAVA_APP_HPP_
#define QAVA_APP_HPP_

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

namespace qava::app {

// Command runners behind the CLI and the C API. Each validates its config
// (unknown keys are rejected), fills in defaults, writes its artifacts below
// the configured "out" directory and returns a JSON summary. Every JSON
// artifact embeds the resolved config under "config".
//
// Relative paths resolve against the run root: $QAVA_RUN_DIR when set,
// otherwise the working directory.

// {"mode": "synth", "out", "images", "questions", "seed"} or
// {"mode": "subset", "out", "source", "m", "n", "seed"}.
nlohmann::json CmdDataset(const nlohmann::json& config);

// {"dataset", "out", "name", "seed", "train": {TrainConfig}}.
nlohmann::json CmdTrain(const nlohmann::json& config);

// {"model", "dataset", "out", "pool", "strategy", "n_questions", "loss",
//  "attack": {AttackConfig}, "repeats", "jobs", "share_questions",
//  "max_images"}.
nlohmann::json CmdAttack(const nlohmann::json& config);

// {"model", "dataset", "out", "attack", "noise": {"epsilon", "repeats", "seed"}}.
nlohmann::json CmdEval(const nlohmann::json& config);

// {"models": [dirs], "attacks": [attack dirs], "dataset", "out", "repeat"}.
nlohmann::json CmdTransfer(const nlohmann::json& config);

// {"run_dir", "out"}: markdown and CSV tables from eval, attack and transfer
// artifacts found under run_dir.
nlohmann::json CmdReport(const nlohmann::json& config);

std::filesystem::path RunRoot();
std::filesystem::path Resolve(const std::string& path);

// Full default config of a command, as echoed in its artifacts.
nlohmann::json DefaultConfig(const std::string& command);

}  // namespace qava::app

#endif  // QAVA_APP_HPP_
