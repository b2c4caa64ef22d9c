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

#include "qava/model.hpp"

#include <cmath>
#include <fstream>

#include "qava/errors.hpp"
#include "qava/qtns.hpp"
#include "qava/rng.hpp"

namespace qava::vlm {
namespace {

using ad::Var;

constexpr double kMaskedLogit = -1e9;

enum class Init { kFanIn, kEmbedding, kZero, kOne };

struct ParamSpec {
  Shape shape;
  Init init;
};

std::map<std::string, ParamSpec> ParameterSpecs(const ModelConfig& c) {
  std::map<std::string, ParamSpec> s;
  const std::size_t dv = c.vision_dim, df = c.feature_dim;
  const std::size_t patch_in = c.patch * c.patch * c.channels;
  s["enc.patch.w"] = {{patch_in, dv}, Init::kFanIn};
  s["enc.patch.b"] = {{dv}, Init::kZero};
  s["enc.summary"] = {{1, dv}, Init::kEmbedding};
  s["enc.pos"] = {{c.num_tokens(), dv}, Init::kEmbedding};
  s["enc.ln1.g"] = {{dv}, Init::kOne};
  s["enc.ln1.b"] = {{dv}, Init::kZero};
  for (const char* p : {"wq", "wk", "wv", "wo"}) s[std::string("enc.attn.") + p] = {{dv, dv}, Init::kFanIn};
  s["enc.ln2.g"] = {{dv}, Init::kOne};
  s["enc.ln2.b"] = {{dv}, Init::kZero};
  s["enc.mlp.w1"] = {{dv, c.vision_mlp}, Init::kFanIn};
  s["enc.mlp.b1"] = {{c.vision_mlp}, Init::kZero};
  s["enc.mlp.w2"] = {{c.vision_mlp, dv}, Init::kFanIn};
  s["enc.mlp.b2"] = {{dv}, Init::kZero};
  s["enc.ln_out.g"] = {{dv}, Init::kOne};
  s["enc.ln_out.b"] = {{dv}, Init::kZero};

  s["align.tok_emb"] = {{c.vocab_size, df}, Init::kEmbedding};
  s["align.txt_pos"] = {{c.max_question_len, df}, Init::kEmbedding};
  s["align.queries"] = {{c.num_queries, df}, Init::kEmbedding};
  for (std::size_t l = 0; l < c.align_layers; ++l) {
    const std::string p = "align.l" + std::to_string(l) + ".";
    for (const char* m : {"wq", "wk", "wv", "wo"}) s[p + "self." + m] = {{df, df}, Init::kFanIn};
    s[p + "ln_self.g"] = {{df}, Init::kOne};
    s[p + "ln_self.b"] = {{df}, Init::kZero};
    s[p + "cross.wq"] = {{df, df}, Init::kFanIn};
    s[p + "cross.wk"] = {{dv, df}, Init::kFanIn};
    s[p + "cross.wv"] = {{dv, df}, Init::kFanIn};
    s[p + "cross.wo"] = {{df, df}, Init::kFanIn};
    s[p + "ln_cross.g"] = {{df}, Init::kOne};
    s[p + "ln_cross.b"] = {{df}, Init::kZero};
    s[p + "ffn.w1"] = {{df, c.align_ffn}, Init::kFanIn};
    s[p + "ffn.b1"] = {{c.align_ffn}, Init::kZero};
    s[p + "ffn.w2"] = {{c.align_ffn, df}, Init::kFanIn};
    s[p + "ffn.b2"] = {{df}, Init::kZero};
  }

  s["dec.tok_emb"] = {{c.vocab_size, df}, Init::kEmbedding};
  s["dec.w_feat"] = {{c.num_queries * df, c.decoder_hidden}, Init::kFanIn};
  s["dec.w_q"] = {{df, c.decoder_hidden}, Init::kFanIn};
  s["dec.b1"] = {{c.decoder_hidden}, Init::kZero};
  s["dec.w_out"] = {{c.decoder_hidden, c.answer_vocab}, Init::kFanIn};
  s["dec.b_out"] = {{c.answer_vocab}, Init::kZero};
  return s;
}

std::vector<std::int64_t> PatchIndex(const ModelConfig& c) {
  const std::size_t side = c.patches_per_side();
  std::vector<std::int64_t> idx;
  idx.reserve(c.num_patches() * c.patch * c.patch * c.channels);
  for (std::size_t py = 0; py < side; ++py) {
    for (std::size_t px = 0; px < side; ++px) {
      for (std::size_t dy = 0; dy < c.patch; ++dy) {
        for (std::size_t dx = 0; dx < c.patch; ++dx) {
          const std::size_t y = py * c.patch + dy, x = px * c.patch + dx;
          for (std::size_t ch = 0; ch < c.channels; ++ch) {
            idx.push_back(static_cast<std::int64_t>((y * c.image_size + x) * c.channels + ch));
          }
        }
      }
    }
  }
  return idx;
}

// Single-head scaled dot-product attention with bias-free projections.
Var Attention(Var queries, Var keys, Var values, Var wo, const Tensor* mask) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(queries.shape()[1]));
  Var scores = ad::Scale(ad::MatMulT(queries, keys), scale);
  Var probs = ad::SoftmaxRows(scores, mask);
  return ad::MatMul(ad::MatMul(probs, values), wo);
}

Var Mlp(Var x, Var w1, Var b1, Var w2, Var b2) {
  return ad::AddRow(ad::MatMul(ad::Gelu(ad::AddRow(ad::MatMul(x, w1), b1)), w2), b2);
}

// Gathers rows of an embedding table for the given ids.
Var EmbedRows(Var table, const std::vector<int>& ids) {
  const std::size_t d = table.shape()[1];
  std::vector<std::int64_t> index;
  index.reserve(ids.size() * d);
  for (int id : ids) {
    for (std::size_t j = 0; j < d; ++j) index.push_back(static_cast<std::int64_t>(id * d + j));
  }
  return ad::Gather(table, std::move(index), {ids.size(), d});
}

void CheckTokens(const ModelConfig& c, const std::vector<int>& tokens) {
  if (tokens.size() != c.max_question_len) {
    throw ArgumentError("question tokens must be padded to " + std::to_string(c.max_question_len));
  }
  for (int t : tokens) {
    if (t < 0 || static_cast<std::size_t>(t) >= c.vocab_size) {
      throw ArgumentError("token id " + std::to_string(t) + " outside vocabulary");
    }
  }
}

std::size_t CountContent(const std::vector<int>& tokens) {
  std::size_t n = 0;
  for (int t : tokens) n += t != Tokenizer::kPad;
  return n;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

ModelConfig ModelConfig::Toy() {
  ModelConfig c;
  c.vocab_size = Tokenizer::Default().vocab_size();
  c.answer_vocab = AnswerVocab::Default().size();
  return c;
}

ModelConfig ModelConfig::PaperScale() {
  ModelConfig c = Toy();
  c.image_size = 224;
  c.patch = 14;
  c.vision_dim = 1408;
  c.vision_mlp = 1408;
  c.num_queries = 32;
  c.feature_dim = 768;
  c.align_ffn = 768;
  c.decoder_hidden = 8;
  return c;
}

void ModelConfig::Validate() const {
  if (channels == 0 || patch == 0 || image_size == 0 || image_size % patch != 0) {
    throw ArgumentError("image_size must be a positive multiple of patch");
  }
  if (vision_dim == 0 || vision_mlp == 0 || num_queries == 0 || feature_dim == 0 ||
      align_ffn == 0 || max_question_len == 0 || decoder_hidden == 0) {
    throw ArgumentError("model dimensions must be positive");
  }
  if (align_layers < 1) throw ArgumentError("alignment module needs at least one layer");
  if (vocab_size < 2 || answer_vocab < 1) throw ArgumentError("vocabulary sizes must be set");
  if (!(pixel_std > 0.0) || !std::isfinite(pixel_std) || !std::isfinite(pixel_mean)) {
    throw ArgumentError("pixel normalization needs finite values and pixel_std > 0");
  }
}

nlohmann::json ModelConfig::ToJson() const {
  return {{"image_size", image_size},     {"channels", channels},
          {"patch", patch},               {"vision_dim", vision_dim},
          {"vision_mlp", vision_mlp},     {"num_queries", num_queries},
          {"feature_dim", feature_dim},   {"align_layers", align_layers},
          {"align_ffn", align_ffn},       {"max_question_len", max_question_len},
          {"decoder_hidden", decoder_hidden}, {"vocab_size", vocab_size},
          {"answer_vocab", answer_vocab}, {"pixel_mean", pixel_mean},
          {"pixel_std", pixel_std}};
}

ModelConfig ModelConfig::FromJson(const nlohmann::json& j) {
  ModelConfig c;
  c.image_size = j.at("image_size");
  c.channels = j.at("channels");
  c.patch = j.at("patch");
  c.vision_dim = j.at("vision_dim");
  c.vision_mlp = j.at("vision_mlp");
  c.num_queries = j.at("num_queries");
  c.feature_dim = j.at("feature_dim");
  c.align_layers = j.at("align_layers");
  c.align_ffn = j.at("align_ffn");
  c.max_question_len = j.at("max_question_len");
  c.decoder_hidden = j.at("decoder_hidden");
  c.vocab_size = j.at("vocab_size");
  c.answer_vocab = j.at("answer_vocab");
  c.pixel_mean = j.at("pixel_mean");
  c.pixel_std = j.at("pixel_std");
  c.Validate();
  return c;
}

Counters& Counters::operator+=(const Counters& o) {
  encoder_forward += o.encoder_forward;
  encoder_backward += o.encoder_backward;
  align_forward += o.align_forward;
  align_backward += o.align_backward;
  decoder_forward += o.decoder_forward;
  decoder_backward += o.decoder_backward;
  return *this;
}

nlohmann::json Counters::ToJson() const {
  return {{"encoder_forward", encoder_forward}, {"encoder_backward", encoder_backward},
          {"align_forward", align_forward},     {"align_backward", align_backward},
          {"decoder_forward", decoder_forward}, {"decoder_backward", decoder_backward}};
}

Counters Counters::FromJson(const nlohmann::json& j) {
  Counters c;
  c.encoder_forward = j.at("encoder_forward");
  c.encoder_backward = j.at("encoder_backward");
  c.align_forward = j.at("align_forward");
  c.align_backward = j.at("align_backward");
  c.decoder_forward = j.at("decoder_forward");
  c.decoder_backward = j.at("decoder_backward");
  return c;
}

// ---------------------------------------------------------------------------
// Model

Model::Model(ModelConfig config, std::map<std::string, Tensor> params, std::uint64_t init_seed)
    : config_(config), params_(std::move(params)), init_seed_(init_seed) {
  config_.Validate();
  const auto specs = ParameterSpecs(config_);
  if (specs.size() != params_.size()) {
    throw ArgumentError("checkpoint has " + std::to_string(params_.size()) +
                        " parameters, expected " + std::to_string(specs.size()));
  }
  for (const auto& [name, spec] : specs) {
    const auto it = params_.find(name);
    if (it == params_.end()) throw ArgumentError("missing parameter " + name);
    if (it->second.shape() != spec.shape) {
      throw ArgumentError("parameter " + name + " has shape " + ShapeToString(it->second.shape()) +
                          ", expected " + ShapeToString(spec.shape));
    }
  }
}

Model Model::Init(const ModelConfig& config, std::uint64_t seed) {
  config.Validate();
  RngStream rng(seed);
  std::map<std::string, Tensor> params;
  for (const auto& [name, spec] : ParameterSpecs(config)) {
    Tensor t(spec.shape);
    switch (spec.init) {
      case Init::kFanIn: {
        const double bound = 1.0 / std::sqrt(static_cast<double>(spec.shape[0]));
        for (double& v : t.data()) v = rng.Uniform(-bound, bound);
        break;
      }
      case Init::kEmbedding:
        for (double& v : t.data()) v = rng.Uniform(-0.5, 0.5);
        break;
      case Init::kZero:
        break;
      case Init::kOne:
        for (double& v : t.data()) v = 1.0;
        break;
    }
    params.emplace(name, std::move(t));
  }
  return Model(config, std::move(params), seed);
}

const Tensor& Model::param(const std::string& name) const {
  const auto it = params_.find(name);
  if (it == params_.end()) throw ArgumentError("unknown parameter " + name);
  return it->second;
}

std::size_t Model::num_parameters() const {
  std::size_t n = 0;
  for (const auto& [_, t] : params_) n += t.size();
  return n;
}

std::vector<int> Model::Tokenize(std::string_view question) const {
  return tokenizer().Encode(question, config_.max_question_len);
}

void Model::Save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  nlohmann::json params = nlohmann::json::array();
  for (const auto& [name, t] : params_) {
    const auto bytes = EncodeQtns(t);
    const std::string file = name + ".qtns";
    WriteFileBytes(dir / file, bytes);
    params.push_back({{"name", name}, {"file", file}, {"shape", t.shape()}, {"fnv1a", Fnv1aHex(bytes)}});
  }
  nlohmann::json manifest = {
      {"format", "qava-checkpoint"},
      {"version", 1},
      {"config", config_.ToJson()},
      {"init_seed", init_seed_},
      {"parameters", params},
      {"vocabulary", tokenizer().words()},
      {"answers", answers().answers()},
      {"metadata", metadata_},
  };
  WriteTextFile(dir / "manifest.json", manifest.dump(2) + "\n");
}

Model Model::Load(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(ReadTextFile(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw IoError((dir / "manifest.json").string() + ": " + e.what());
  }
  if (manifest.value("format", "") != "qava-checkpoint") {
    throw IoError(dir.string() + ": not a checkpoint manifest");
  }
  if (manifest.at("vocabulary") != nlohmann::json(Tokenizer::Default().words()) ||
      manifest.at("answers") != nlohmann::json(AnswerVocab::Default().answers())) {
    throw IoError(dir.string() + ": checkpoint vocabulary does not match this build");
  }
  const ModelConfig config = ModelConfig::FromJson(manifest.at("config"));
  std::map<std::string, Tensor> params;
  for (const auto& p : manifest.at("parameters")) {
    params.emplace(p.at("name").get<std::string>(), LoadQtns(dir / p.at("file").get<std::string>()));
  }
  Model m(config, std::move(params), manifest.at("init_seed").get<std::uint64_t>());
  m.set_metadata(manifest.value("metadata", nlohmann::json::object()));
  return m;
}

// ---------------------------------------------------------------------------
// Tape-level forward

Weights::Weights(ad::Tape& tape, const Model& model, bool trainable)
    : tape_(&tape), model_(&model) {
  for (const auto& [name, t] : model.params()) {
    vars_.emplace(name, trainable ? tape.Leaf(t) : tape.Constant(t));
  }
}

Var Weights::operator[](const std::string& name) const {
  const auto it = vars_.find(name);
  if (it == vars_.end()) throw ArgumentError("unknown parameter " + name);
  return it->second;
}

void CheckImageShape(const ModelConfig& config, const Tensor& image) {
  if (image.shape() != config.image_shape()) {
    throw ArgumentError("image shape " + ShapeToString(image.shape()) + " does not match model " +
                        ShapeToString(config.image_shape()));
  }
}

EncodedImage WrapPatchFeatures(const Weights& w, Var patches) {
  const ModelConfig& c = w.model().config();
  if (patches.shape() != Shape{c.num_tokens(), c.vision_dim}) {
    throw ArgumentError("patch features of shape " + ShapeToString(patches.shape()) +
                        " do not match model");
  }
  EncodedImage enc{patches, {}, {}};
  for (std::size_t l = 0; l < c.align_layers; ++l) {
    const std::string p = "align.l" + std::to_string(l) + ".cross.";
    enc.cross_keys.push_back(ad::MatMul(patches, w[p + "wk"]));
    enc.cross_values.push_back(ad::MatMul(patches, w[p + "wv"]));
  }
  return enc;
}

EncodedImage EncodeOnTape(const Weights& w, Var image) {
  const ModelConfig& c = w.model().config();
  CheckImageShape(c, image.value());
  const std::size_t patch_in = c.patch * c.patch * c.channels;
  Var patches = ad::Gather(image, PatchIndex(c), {c.num_patches(), patch_in});
  patches = ad::Scale(ad::AddScalar(patches, -c.pixel_mean), 1.0 / c.pixel_std);
  Var embedded = ad::AddRow(ad::MatMul(patches, w["enc.patch.w"]), w["enc.patch.b"]);
  Var h = ad::Add(ad::ConcatRows(w["enc.summary"], embedded), w["enc.pos"]);

  Var a = ad::LayerNormRows(h, w["enc.ln1.g"], w["enc.ln1.b"]);
  h = ad::Add(h, Attention(ad::MatMul(a, w["enc.attn.wq"]), ad::MatMul(a, w["enc.attn.wk"]),
                           ad::MatMul(a, w["enc.attn.wv"]), w["enc.attn.wo"], nullptr));
  Var m = ad::LayerNormRows(h, w["enc.ln2.g"], w["enc.ln2.b"]);
  h = ad::Add(h, Mlp(m, w["enc.mlp.w1"], w["enc.mlp.b1"], w["enc.mlp.w2"], w["enc.mlp.b2"]));
  h = ad::LayerNormRows(h, w["enc.ln_out.g"], w["enc.ln_out.b"]);
  return WrapPatchFeatures(w, h);
}

std::vector<Var> AlignOnTape(const Weights& w, const EncodedImage& enc, const std::vector<int>& tokens) {
  const ModelConfig& c = w.model().config();
  CheckTokens(c, tokens);
  const std::size_t nq = c.num_queries, len = c.max_question_len, rows = nq + len;

  // Pad tokens are never attended to.
  Tensor mask({rows, rows});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < len; ++k) {
      if (tokens[k] == Tokenizer::kPad) mask.at(r, nq + k) = kMaskedLogit;
    }
  }

  Var queries = w["align.queries"];
  Var text = ad::Add(EmbedRows(w["align.tok_emb"], tokens), w["align.txt_pos"]);
  std::vector<Var> outputs;
  for (std::size_t l = 0; l < c.align_layers; ++l) {
    const std::string p = "align.l" + std::to_string(l) + ".";
    Var x = ad::ConcatRows(queries, text);
    Var sa = Attention(ad::MatMul(x, w[p + "self.wq"]), ad::MatMul(x, w[p + "self.wk"]),
                       ad::MatMul(x, w[p + "self.wv"]), w[p + "self.wo"], &mask);
    x = ad::LayerNormRows(ad::Add(x, sa), w[p + "ln_self.g"], w[p + "ln_self.b"]);
    queries = ad::SliceRows(x, 0, nq);
    text = ad::SliceRows(x, nq, rows);

    Var ca = Attention(ad::MatMul(queries, w[p + "cross.wq"]), enc.cross_keys[l],
                       enc.cross_values[l], w[p + "cross.wo"], nullptr);
    queries = ad::LayerNormRows(ad::Add(queries, ca), w[p + "ln_cross.g"], w[p + "ln_cross.b"]);
    Var ff = Mlp(queries, w[p + "ffn.w1"], w[p + "ffn.b1"], w[p + "ffn.w2"], w[p + "ffn.b2"]);
    // No norm after the FFN: a post-LN output has zero row sums, which
    // would leave a constant direction out of every layer's features.
    queries = ad::Add(queries, ff);
    outputs.push_back(queries);
  }
  return outputs;
}

Var DecodeOnTape(const Weights& w, Var final_features, const std::vector<int>& tokens) {
  const ModelConfig& c = w.model().config();
  CheckTokens(c, tokens);
  ad::Tape& tape = w.tape();
  // Mean of the non-pad question token embeddings.
  Tensor pool({1, c.max_question_len});
  const std::size_t content = CountContent(tokens);
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (tokens[k] != Tokenizer::kPad) pool[k] = 1.0 / static_cast<double>(content);
  }
  Var qvec = ad::MatMul(tape.Constant(std::move(pool)), EmbedRows(w["dec.tok_emb"], tokens));
  Var flat = ad::Reshape(final_features, {1, c.num_queries * c.feature_dim});
  Var hidden = ad::Gelu(ad::AddRow(
      ad::Add(ad::MatMul(flat, w["dec.w_feat"]), ad::MatMul(qvec, w["dec.w_q"])), w["dec.b1"]));
  return ad::AddRow(ad::MatMul(hidden, w["dec.w_out"]), w["dec.b_out"]);
}

// ---------------------------------------------------------------------------
// Value-level API

Tensor EncodeImage(const Model& model, const Tensor& image) {
  ad::Tape tape(false);
  Weights w(tape, model, false);
  return EncodeOnTape(w, tape.Constant(image)).patches.value();
}

AlignmentFeatures Align(const Model& model, const Tensor& patch_features,
                        const std::vector<int>& tokens) {
  ad::Tape tape(false);
  Weights w(tape, model, false);
  const EncodedImage enc = WrapPatchFeatures(w, tape.Constant(patch_features));
  AlignmentFeatures out;
  for (const Var& v : AlignOnTape(w, enc, tokens)) out.per_layer.push_back(v.value());
  return out;
}

AlignmentFeatures ImageFeatures(const Model& model, const Tensor& image, std::string_view question) {
  ad::Tape tape(false);
  Weights w(tape, model, false);
  const EncodedImage enc = EncodeOnTape(w, tape.Constant(image));
  AlignmentFeatures out;
  for (const Var& v : AlignOnTape(w, enc, model.Tokenize(question))) {
    out.per_layer.push_back(v.value());
  }
  return out;
}

std::size_t ArgMax(const Tensor& logits) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return best;
}

DecodedAnswer DecodeAnswer(const Model& model, const AlignmentFeatures& features,
                           std::string_view question) {
  const ModelConfig& c = model.config();
  if (features.per_layer.empty() || features.final().shape() != Shape{c.num_queries, c.feature_dim}) {
    throw ArgumentError("alignment features do not match model");
  }
  ad::Tape tape(false);
  Weights w(tape, model, false);
  Var logits = DecodeOnTape(w, tape.Constant(features.final()), model.Tokenize(question));
  DecodedAnswer out;
  out.logits = logits.value().Reshaped({c.answer_vocab});
  out.answer_id = ArgMax(out.logits);
  out.answer = model.answers().Answer(out.answer_id);
  return out;
}

std::string AnswerQuestion(const Model& model, const Tensor& image, std::string_view question) {
  return DecodeAnswer(model, ImageFeatures(model, image, question), question).answer;
}

double LmLoss(const Model& model, const Tensor& image, std::string_view question, std::size_t label) {
  if (label >= model.config().answer_vocab) {
    throw ArgumentError("label id " + std::to_string(label) + " outside answer vocabulary");
  }
  ad::Tape tape(false);
  Weights w(tape, model, false);
  const EncodedImage enc = EncodeOnTape(w, tape.Constant(image));
  const auto tokens = model.Tokenize(question);
  Var logits = DecodeOnTape(w, AlignOnTape(w, enc, tokens).back(), tokens);
  return ad::CrossEntropy(logits, label).item();
}

std::size_t PseudoLabel(const Model& model, const Tensor& image, std::string_view question) {
  const AlignmentFeatures f = ImageFeatures(model, image, question);
  return DecodeAnswer(model, f, question).answer_id;
}

}  // namespace qava::vlm
