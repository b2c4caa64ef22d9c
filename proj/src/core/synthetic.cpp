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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "qava/errors.hpp"
#include "qava/evalkit.hpp"
#include "qava/qtns.hpp"
#include "qava/vocab.hpp"

namespace qava::eval {
namespace {

using vlm::BackgroundColors;
using vlm::ShapeColors;
using vlm::ShapeKinds;

struct Rgb {
  double r, g, b;
};

Rgb ColorValue(const std::string& name) {
  static const std::map<std::string, Rgb> table = {
      {"red", {0.90, 0.10, 0.10}},    {"green", {0.10, 0.75, 0.15}},
      {"blue", {0.10, 0.20, 0.90}},   {"yellow", {0.95, 0.90, 0.10}},
      {"purple", {0.60, 0.15, 0.75}}, {"orange", {1.00, 0.55, 0.05}},
      {"white", {0.95, 0.95, 0.95}},  {"black", {0.05, 0.05, 0.05}},
      {"gray", {0.50, 0.50, 0.50}},
  };
  const auto it = table.find(name);
  if (it == table.end()) throw ArgumentError("unknown colour " + name);
  return it->second;
}

template <typename T>
const T& Pick(const std::vector<T>& v, RngStream& rng) {
  return v[rng.UniformInt(v.size())];
}

double Jitter(double v, double amount, RngStream& rng) {
  return std::clamp(v + rng.Uniform(-amount, amount), 0.0, 1.0);
}

// Scenes are rendered at low contrast around mid-gray so that neighbouring
// palette entries sit a few tens of intensity levels apart, as fine colour
// and texture distinctions do in natural photographs.
constexpr double kContrast = 0.2;

Rgb Dim(const Rgb& c) {
  auto f = [](double v) { return 0.5 + kContrast * (v - 0.5); };
  return {f(c.r), f(c.g), f(c.b)};
}

// One templated question about a scene.
struct Instance {
  std::size_t template_id;
  std::string text;
  std::string answer;
  std::string answer_type;
};

std::string YesNo(bool b) { return b ? "yes" : "no"; }

std::vector<Instance> EnumerateInstances(const Scene& s) {
  std::vector<Instance> out;
  const std::string other(questions::kOther), number(questions::kNumber), yn(questions::kYesNo);
  const std::string count = std::to_string(s.count);
  auto add = [&](std::size_t t, std::string text, std::string answer, const std::string& type) {
    out.push_back({t, std::move(text), std::move(answer), type});
  };
  add(0, "what color is the shape", s.color, other);
  add(1, "what color are the shapes", s.color, other);
  add(2, "what color is the background", s.background, other);
  add(3, "what shape is in the image", s.shape, other);
  add(4, "what kind of shape is this", s.shape, other);
  add(5, "how many shapes are there", count, number);
  for (const auto& k : ShapeKinds()) {
    add(6, "how many " + k + "s are there", k == s.shape ? count : "0", number);
  }
  for (const auto& c : ShapeColors()) {
    add(7, "how many " + c + " shapes are there", c == s.color ? count : "0", number);
  }
  for (const auto& k : ShapeKinds()) add(8, "is there a " + k, YesNo(k == s.shape), yn);
  for (const auto& c : ShapeColors()) add(9, "is there a " + c + " shape", YesNo(c == s.color), yn);
  for (const auto& c : ShapeColors()) {
    for (const auto& k : ShapeKinds()) {
      add(10, "is there a " + c + " " + k, YesNo(c == s.color && k == s.shape), yn);
    }
  }
  for (const auto& c : ShapeColors()) add(11, "is the shape " + c, YesNo(c == s.color), yn);
  for (const auto& b : BackgroundColors()) {
    add(12, "is the background " + b, YesNo(b == s.background), yn);
  }
  for (int k = 1; k <= vlm::kMaxShapes; ++k) {
    add(13, "are there " + std::to_string(k) + " shapes", YesNo(k == s.count), yn);
  }
  for (const auto& c : ShapeColors()) add(14, "are the shapes " + c, YesNo(c == s.color), yn);
  for (const auto& k : ShapeKinds()) add(15, "is this a " + k, YesNo(k == s.shape), yn);
  for (const auto& k : ShapeKinds()) {
    add(16, "does the image contain a " + k, YesNo(k == s.shape), yn);
  }
  return out;
}

constexpr std::size_t kNumTemplates = 17;

bool Inside(const std::string& shape, double px, double py, double cx, double cy, double size) {
  const double dx = px - cx, dy = py - cy;
  if (shape == "circle") return dx * dx + dy * dy <= size * size;
  if (shape == "square") return std::abs(dx) <= size * 0.9 && std::abs(dy) <= size * 0.9;
  // Upward triangle with apex at (cx, cy - size) and base at cy + size.
  if (dy < -size || dy > size) return false;
  const double half_width = size * (dy + size) / (2.0 * size) * 1.15;
  return std::abs(dx) <= half_width;
}

std::string Sprintf(const char* fmt, std::size_t v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

}  // namespace

std::vector<Question> Dataset::RecordsFor(const std::string& image_id) const {
  std::vector<Question> out;
  for (const Question& q : records) {
    if (q.image_id && *q.image_id == image_id) out.push_back(q);
  }
  return out;
}

Scene SampleScene(RngStream& rng) {
  Scene s;
  s.shape = Pick(ShapeKinds(), rng);
  s.color = Pick(ShapeColors(), rng);
  s.background = Pick(BackgroundColors(), rng);
  s.count = 1 + static_cast<int>(rng.UniformInt(vlm::kMaxShapes));
  return s;
}

Tensor RenderScene(const Scene& scene, RngStream& rng, std::size_t image_size) {
  if (image_size % 4 != 0 || image_size < 16) throw ArgumentError("image size must be a multiple of 4, >= 16");
  if (scene.count < 1 || scene.count > vlm::kMaxShapes) throw ArgumentError("shape count out of range");
  const std::size_t cell = image_size / 4;
  Rgb bg = ColorValue(scene.background);
  bg = Dim({Jitter(bg.r, 0.04, rng), Jitter(bg.g, 0.04, rng), Jitter(bg.b, 0.04, rng)});
  Rgb fg = ColorValue(scene.color);
  fg = Dim({Jitter(fg.r, 0.06, rng), Jitter(fg.g, 0.06, rng), Jitter(fg.b, 0.06, rng)});

  Tensor img({image_size, image_size, 3});
  for (std::size_t i = 0; i < image_size * image_size; ++i) {
    img[3 * i] = bg.r;
    img[3 * i + 1] = bg.g;
    img[3 * i + 2] = bg.b;
  }
  // Distinct cells via partial Fisher-Yates over the 16 grid cells.
  std::array<std::size_t, 16> cells;
  std::iota(cells.begin(), cells.end(), 0);
  const double scale = static_cast<double>(cell) / 8.0;
  for (int k = 0; k < scene.count; ++k) {
    const std::size_t j = k + rng.UniformInt(16 - k);
    std::swap(cells[k], cells[j]);
    const double size = rng.Uniform(2.4, 3.2) * scale;
    const double cx = (cells[k] % 4) * cell + cell / 2.0 + rng.Uniform(-0.6, 0.6) * scale;
    const double cy = (cells[k] / 4) * cell + cell / 2.0 + rng.Uniform(-0.6, 0.6) * scale;
    for (std::size_t y = (cells[k] / 4) * cell; y < (cells[k] / 4 + 1) * cell; ++y) {
      for (std::size_t x = (cells[k] % 4) * cell; x < (cells[k] % 4 + 1) * cell; ++x) {
        if (Inside(scene.shape, x + 0.5, y + 0.5, cx, cy, size)) {
          const std::size_t p = 3 * (y * image_size + x);
          img[p] = fg.r;
          img[p + 1] = fg.g;
          img[p + 2] = fg.b;
        }
      }
    }
  }
  return img.As(DType::kF32).As(DType::kF64);
}

std::optional<std::string> AnswerFor(const Scene& scene, const std::string& text) {
  const std::string norm = vlm::NormalizeText(text);
  for (const Instance& inst : EnumerateInstances(scene)) {
    if (inst.text == norm) return inst.answer;
  }
  return std::nullopt;
}

Dataset GenerateSynthetic(RngStream& rng, std::size_t image_count, std::size_t questions_per_image) {
  if (image_count < 1 || questions_per_image < 1) {
    throw ArgumentError("synthetic corpus needs at least one image and one question per image");
  }
  Dataset data;
  for (std::size_t i = 0; i < image_count; ++i) {
    const std::string image_id = Sprintf("img%05zu", i);
    const Scene scene = SampleScene(rng);
    data.images.emplace(image_id, RenderScene(scene, rng));

    const std::vector<Instance> all = EnumerateInstances(scene);
    std::vector<bool> used(all.size(), false);
    std::size_t used_count = 0;
    for (std::size_t qi = 0; qi < questions_per_image; ++qi) {
      if (used_count == all.size()) {
        std::fill(used.begin(), used.end(), false);
        used_count = 0;
      }
      // Template uniformly among those with unused instances; yes/no
      // templates are balanced between yes and no answers.
      std::vector<std::size_t> open_templates;
      for (std::size_t t = 0; t < kNumTemplates; ++t) {
        for (std::size_t k = 0; k < all.size(); ++k) {
          if (!used[k] && all[k].template_id == t) {
            open_templates.push_back(t);
            break;
          }
        }
      }
      const std::size_t t = Pick(open_templates, rng);
      std::vector<std::size_t> yes, rest;
      for (std::size_t k = 0; k < all.size(); ++k) {
        if (used[k] || all[k].template_id != t) continue;
        (all[k].answer == "yes" ? yes : rest).push_back(k);
      }
      const bool want_yes = all[rest.empty() ? yes[0] : rest[0]].answer_type == questions::kYesNo &&
                            rng.Bernoulli(0.5);
      const std::vector<std::size_t>& group = (want_yes && !yes.empty()) || rest.empty() ? yes : rest;
      const std::size_t k = Pick(group, rng);
      used[k] = true;
      ++used_count;

      Question q;
      q.question_id = image_id + Sprintf("-q%03zu", qi);
      q.image_id = image_id;
      q.text = all[k].text;
      q.answer_type = all[k].answer_type;
      q.ground_truths.assign(10, all[k].answer);
      data.records.push_back(std::move(q));
    }
  }
  return data;
}

std::vector<Question> SurrogatePool() {
  struct Entry {
    const char* text;
    std::string_view type;
  };
  static const Entry entries[] = {
      // paraphrases of the shape world
      {"what is the color of the shape", questions::kOther},
      {"which color does the object have", questions::kOther},
      {"what object is shown", questions::kOther},
      {"which shape can you see", questions::kOther},
      {"what is the background color", questions::kOther},
      {"what colors are in the picture", questions::kOther},
      {"how many objects are there", questions::kNumber},
      {"how many objects can you see", questions::kNumber},
      {"is there any circle here", questions::kYesNo},
      {"can you see a square", questions::kYesNo},
      {"do you see a triangle", questions::kYesNo},
      {"is it red", questions::kYesNo},
      {"is it a circle", questions::kYesNo},
      {"does it have blue objects", questions::kYesNo},
      {"are any shapes green", questions::kYesNo},
      {"is the picture white", questions::kYesNo},
      // unrelated VQA-style questions
      {"what is on the table", questions::kOther},
      {"what animal is this", questions::kOther},
      {"what sport is being played", questions::kOther},
      {"is it raining", questions::kYesNo},
      {"how many people are in the picture", questions::kNumber},
      {"what room is this", questions::kOther},
      {"what is the man holding", questions::kOther},
      {"is this a kitchen", questions::kYesNo},
      {"what time is it", questions::kOther},
      {"what brand is the phone", questions::kOther},
      {"are there any cars", questions::kYesNo},
      {"what is in the sky", questions::kOther},
      {"who is in the picture", questions::kOther},
      {"why is the man smiling", questions::kOther},
      {"where is the dog", questions::kOther},
      {"what does the sign say", questions::kOther},
      {"is the person happy", questions::kYesNo},
      {"what number is on the bus", questions::kNumber},
      {"can you see the ocean", questions::kYesNo},
      {"what type of food is this", questions::kOther},
      {"what are the people doing", questions::kOther},
      {"is that a bird", questions::kYesNo},
      {"what is the woman wearing", questions::kOther},
      {"what is the name of the store", questions::kOther},
      {"could this be a farm", questions::kYesNo},
      {"has the game started", questions::kYesNo},
      {"was this taken at night", questions::kYesNo},
      {"is he wearing a hat", questions::kYesNo},
      {"are they playing tennis", questions::kYesNo},
      {"does this bus have two levels", questions::kYesNo},
      {"which way is the train going", questions::kOther},
      {"what is the person riding", questions::kOther},
      {"how many windows are there", questions::kNumber},
      {"is the woman smiling", questions::kYesNo},
      {"what color is the cat", questions::kOther},
      {"what color are the flowers", questions::kOther},
      {"what kind of tree is this", questions::kOther},
      {"is there a clock on the wall", questions::kYesNo},
      {"what is the man doing", questions::kOther},
      {"are these apples", questions::kYesNo},
      {"is this an airport", questions::kYesNo},
      {"do you think it is cold", questions::kYesNo},
      {"how many birds are in the sky", questions::kNumber},
      {"what is this", questions::kOther},
  };
  std::vector<Question> out;
  std::size_t i = 0;
  for (const Entry& e : entries) {
    Question q;
    q.question_id = Sprintf("pool%04zu", i++);
    q.text = e.text;
    q.answer_type = std::string(e.type);
    out.push_back(std::move(q));
  }
  return out;
}

Dataset BuildSubset(const Dataset& dataset, const DatasetSpec& spec, RngStream& rng) {
  if (spec.m < 1 || spec.n < 1) throw ArgumentError("subset needs m >= 1 and n >= 1");
  std::map<std::string, std::vector<std::size_t>> by_image;
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const Question& q = dataset.records[i];
    if (q.image_id) by_image[*q.image_id].push_back(i);
  }
  std::vector<std::string> eligible;
  for (const auto& [id, recs] : by_image) {
    if (recs.size() >= spec.n && dataset.images.count(id)) eligible.push_back(id);
  }
  if (eligible.size() < spec.m) {
    throw ArgumentError("only " + std::to_string(eligible.size()) + " images have at least " +
                        std::to_string(spec.n) + " questions; " + std::to_string(spec.m) +
                        " requested");
  }
  for (std::size_t i = 0; i < spec.m; ++i) {
    std::swap(eligible[i], eligible[i + rng.UniformInt(eligible.size() - i)]);
  }
  eligible.resize(spec.m);
  std::sort(eligible.begin(), eligible.end());

  Dataset out;
  for (const std::string& id : eligible) {
    out.images.emplace(id, dataset.images.at(id));
    std::vector<std::size_t> recs = by_image.at(id);
    for (std::size_t i = 0; i < spec.n; ++i) {
      std::swap(recs[i], recs[i + rng.UniformInt(recs.size() - i)]);
    }
    for (std::size_t i = 0; i < spec.n; ++i) out.records.push_back(dataset.records[recs[i]]);
  }
  std::sort(out.records.begin(), out.records.end(),
            [](const Question& a, const Question& b) { return a.question_id < b.question_id; });
  return out;
}

void SaveDataset(const Dataset& data, const std::filesystem::path& dir, const nlohmann::json& manifest) {
  std::filesystem::create_directories(dir / "images");
  for (const auto& [id, img] : data.images) SaveQtns(img.As(DType::kF32), dir / "images" / (id + ".qtns"));
  questions::SavePool(data.records, dir / "records.jsonl");
  nlohmann::json m = manifest;
  m["num_images"] = data.images.size();
  m["num_records"] = data.records.size();
  m["checksum"] = DatasetChecksum(data);
  WriteTextFile(dir / "manifest.json", m.dump(2) + "\n");
}

Dataset LoadDataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("dataset directory not found: " + dir.string());
  Dataset data;
  const questions::QuestionPool pool = questions::LoadPool(dir / "records.jsonl");
  data.records = pool.questions();
  for (const Question& q : data.records) {
    if (!q.image_id) throw IoError("record " + q.question_id + " has no image_id");
    if (q.ground_truths.size() != 10) throw IoError("record " + q.question_id + " lacks ten ground truths");
    if (!data.images.count(*q.image_id)) {
      data.images.emplace(*q.image_id, LoadQtns(dir / "images" / (*q.image_id + ".qtns")).As(DType::kF64));
    }
  }
  std::sort(data.records.begin(), data.records.end(),
            [](const Question& a, const Question& b) { return a.question_id < b.question_id; });
  return data;
}

std::string DatasetChecksum(const Dataset& data) {
  std::vector<std::uint8_t> all;
  for (const auto& [id, img] : data.images) {
    all.insert(all.end(), id.begin(), id.end());
    const auto bytes = EncodeQtns(img.As(DType::kF32));
    all.insert(all.end(), bytes.begin(), bytes.end());
  }
  const std::string recs = questions::SerializePool(data.records);
  all.insert(all.end(), recs.begin(), recs.end());
  return Fnv1aHex(all);
}

}  // namespace qava::eval
