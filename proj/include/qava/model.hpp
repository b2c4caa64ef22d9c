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

#ifndef QAVA_MODEL_HPP_
#define QAVA_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "qava/autodiff.hpp"
#include "qava/tensor.hpp"
#include "qava/vocab.hpp"

namespace qava::vlm {

// Dimensions of the three-stage model: patch encoder, query-based alignment
// module, single-token answer head.
struct ModelConfig {
  std::size_t image_size = 32;
  std::size_t channels = 3;
  std::size_t patch = 8;
  std::size_t vision_dim = 48;
  std::size_t vision_mlp = 96;
  std::size_t num_queries = 8;
  std::size_t feature_dim = 32;
  std::size_t align_layers = 2;
  std::size_t align_ffn = 64;
  std::size_t max_question_len = 10;
  std::size_t decoder_hidden = 128;
  std::size_t vocab_size = 0;
  std::size_t answer_vocab = 0;
  // Fixed input normalization (x - pixel_mean) / pixel_std ahead of the
  // patch embedding, matched to the synthetic renderer's intensity range.
  double pixel_mean = 0.5;
  double pixel_std = 0.1;

  // 32x32 images, patch 8, 2 alignment layers of 8 x 32 features.
  static ModelConfig Toy();
  // 224x224 images with patch 14 and 1408-wide patch features (257 tokens),
  // 32 x 768 alignment features. Shape-compatible with common Q-former LVLMs.
  static ModelConfig PaperScale();

  std::size_t patches_per_side() const { return image_size / patch; }
  std::size_t num_patches() const { return patches_per_side() * patches_per_side(); }
  // Patch tokens plus the leading summary token.
  std::size_t num_tokens() const { return num_patches() + 1; }
  Shape image_shape() const { return {image_size, image_size, channels}; }

  void Validate() const;
  nlohmann::json ToJson() const;
  static ModelConfig FromJson(const nlohmann::json& j);
};

// Instrumentation: how many times each stage ran forward / backward.
struct Counters {
  std::uint64_t encoder_forward = 0;
  std::uint64_t encoder_backward = 0;
  std::uint64_t align_forward = 0;
  std::uint64_t align_backward = 0;
  std::uint64_t decoder_forward = 0;
  std::uint64_t decoder_backward = 0;

  Counters& operator+=(const Counters& o);
  nlohmann::json ToJson() const;
  static Counters FromJson(const nlohmann::json& j);
};

// Per-layer alignment outputs, each [num_queries x feature_dim].
struct AlignmentFeatures {
  std::vector<Tensor> per_layer;
  const Tensor& final() const { return per_layer.back(); }
};

// Parameters keyed by canonical name. Immutable once loaded; any number of
// threads may run forward/backward passes against one Model.
//
// Initialization: weight matrices ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
// embeddings and learnable queries ~ U(-0.5, 0.5), biases 0, layer-norm
// gains 1. Parameters are drawn in lexicographic name order from one
// RngStream(seed).
class Model {
 public:
  Model(ModelConfig config, std::map<std::string, Tensor> params, std::uint64_t init_seed);

  static Model Init(const ModelConfig& config, std::uint64_t seed);
  // Directory of <name>.qtns files plus manifest.json.
  static Model Load(const std::filesystem::path& dir);
  void Save(const std::filesystem::path& dir) const;

  const ModelConfig& config() const { return config_; }
  const std::map<std::string, Tensor>& params() const { return params_; }
  std::map<std::string, Tensor>& mutable_params() { return params_; }
  const Tensor& param(const std::string& name) const;
  std::uint64_t init_seed() const { return init_seed_; }
  std::size_t num_parameters() const;

  // Free-form record stored in the manifest (training recipe and metrics).
  const nlohmann::json& metadata() const { return metadata_; }
  void set_metadata(nlohmann::json m) { metadata_ = std::move(m); }

  const Tokenizer& tokenizer() const { return Tokenizer::Default(); }
  const AnswerVocab& answers() const { return AnswerVocab::Default(); }

  std::vector<int> Tokenize(std::string_view question) const;

 private:
  ModelConfig config_;
  std::map<std::string, Tensor> params_;
  std::uint64_t init_seed_;
  nlohmann::json metadata_ = nlohmann::json::object();
};

// ---- Tape-level forward pass ----

// Model parameters bound onto a tape, either as constants (attacks,
// inference) or as leaves (training).
class Weights {
 public:
  Weights(ad::Tape& tape, const Model& model, bool trainable);

  ad::Var operator[](const std::string& name) const;
  const std::map<std::string, ad::Var>& vars() const { return vars_; }
  const Model& model() const { return *model_; }
  ad::Tape& tape() const { return *tape_; }

 private:
  ad::Tape* tape_;
  const Model* model_;
  std::map<std::string, ad::Var> vars_;
};

// Encoder output plus the question-independent cross-attention keys/values
// of every alignment layer, so many questions can share one encoding.
struct EncodedImage {
  ad::Var patches;  // [num_tokens x vision_dim]
  std::vector<ad::Var> cross_keys;
  std::vector<ad::Var> cross_values;
};

EncodedImage EncodeOnTape(const Weights& w, ad::Var image);
// Prepares cross-attention keys/values for already-encoded patch features.
EncodedImage WrapPatchFeatures(const Weights& w, ad::Var patches);
std::vector<ad::Var> AlignOnTape(const Weights& w, const EncodedImage& enc,
                                 const std::vector<int>& tokens);
// Answer logits [1 x answer_vocab].
ad::Var DecodeOnTape(const Weights& w, ad::Var final_features, const std::vector<int>& tokens);

// ---- Value-level API ----

// Patch features [num_tokens x vision_dim]; row 0 is the summary token.
Tensor EncodeImage(const Model& model, const Tensor& image);
AlignmentFeatures Align(const Model& model, const Tensor& patch_features,
                        const std::vector<int>& tokens);
AlignmentFeatures ImageFeatures(const Model& model, const Tensor& image, std::string_view question);

struct DecodedAnswer {
  Tensor logits;  // [answer_vocab]
  std::size_t answer_id = 0;
  std::string answer;
};

// Greedy argmax; ties go to the lowest id.
std::size_t ArgMax(const Tensor& logits);
DecodedAnswer DecodeAnswer(const Model& model, const AlignmentFeatures& features,
                           std::string_view question);
std::string AnswerQuestion(const Model& model, const Tensor& image, std::string_view question);

// Cross-entropy of the label answer under the decoder distribution.
double LmLoss(const Model& model, const Tensor& image, std::string_view question,
              std::size_t label);
// The model's own greedy answer on the clean image.
std::size_t PseudoLabel(const Model& model, const Tensor& image, std::string_view question);

void CheckImageShape(const ModelConfig& config, const Tensor& image);

}  // namespace qava::vlm

#endif  // QAVA_MODEL_HPP_
