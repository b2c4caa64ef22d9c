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
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "qava/errors.hpp"
#include "qava/evalkit.hpp"
#include "qava/vocab.hpp"

namespace qava::eval {
namespace {

const std::map<std::string, std::string>& NumberWords() {
  static const std::map<std::string, std::string> m = {
      {"none", "0"}, {"zero", "0"}, {"one", "1"},   {"two", "2"},   {"three", "3"}, {"four", "4"},
      {"five", "5"}, {"six", "6"},  {"seven", "7"}, {"eight", "8"}, {"nine", "9"},  {"ten", "10"},
  };
  return m;
}

double Percent(double sum, std::size_t n) { return n == 0 ? 0.0 : 100.0 * sum / static_cast<double>(n); }

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string NormalizeAnswer(const std::string& answer) {
  std::istringstream in(vlm::NormalizeText(answer));
  std::string word, out;
  while (in >> word) {
    if (word == "a" || word == "an" || word == "the") continue;
    const auto it = NumberWords().find(word);
    if (it != NumberWords().end()) word = it->second;
    if (!out.empty()) out.push_back(' ');
    out += word;
  }
  return out;
}

double VqaScore(const std::string& answer, const std::vector<std::string>& ground_truths) {
  if (ground_truths.size() != 10) {
    throw ArgumentError("VQA scoring needs exactly 10 ground truths, got " +
                        std::to_string(ground_truths.size()));
  }
  const std::string a = NormalizeAnswer(answer);
  std::vector<bool> match(10);
  int total = 0;
  for (std::size_t i = 0; i < 10; ++i) {
    match[i] = NormalizeAnswer(ground_truths[i]) == a;
    total += match[i];
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    const int others = total - (match[i] ? 1 : 0);
    sum += std::min(others / 3.0, 1.0);
  }
  return sum / 10.0;
}

nlohmann::json EvalResult::ToJson(bool include_records) const {
  nlohmann::json j;
  j["overall"] = overall;
  j["other"] = other;
  j["number"] = number;
  j["yes_no"] = yes_no;
  j["counts"] = {{"other", count_other}, {"number", count_number}, {"yes_no", count_yes_no},
                 {"total", records.size()}};
  j["counters"] = counters.ToJson();
  if (include_records) {
    nlohmann::json recs = nlohmann::json::array();
    for (const RecordScore& r : records) {
      recs.push_back({{"question_id", r.question_id},
                      {"image_id", r.image_id},
                      {"answer_type", r.answer_type},
                      {"answer", r.answer},
                      {"score", r.score}});
    }
    j["records"] = std::move(recs);
  }
  return j;
}

EvalResult Summarize(std::vector<RecordScore> records) {
  if (records.empty()) throw ArgumentError("cannot summarize an empty record list");
  std::sort(records.begin(), records.end(),
            [](const RecordScore& a, const RecordScore& b) { return a.question_id < b.question_id; });
  EvalResult r;
  double all = 0.0, other = 0.0, number = 0.0, yes_no = 0.0;
  for (const RecordScore& s : records) {
    all += s.score;
    if (s.answer_type == questions::kOther) {
      other += s.score;
      ++r.count_other;
    } else if (s.answer_type == questions::kNumber) {
      number += s.score;
      ++r.count_number;
    } else if (s.answer_type == questions::kYesNo) {
      yes_no += s.score;
      ++r.count_yes_no;
    }
  }
  r.overall = Percent(all, records.size());
  r.other = Percent(other, r.count_other);
  r.number = Percent(number, r.count_number);
  r.yes_no = Percent(yes_no, r.count_yes_no);
  r.records = std::move(records);
  return r;
}

EvalResult Evaluate(const vlm::Model& model, const Dataset& data, const AdversarialSet* adversarial) {
  if (data.records.empty()) throw ArgumentError("no records to evaluate");
  std::set<std::string> listed;
  if (adversarial) {
    for (const std::string& id : adversarial->image_ids) {
      if (!adversarial->images.count(id)) throw ArgumentError("adversarial tensor missing for image " + id);
      listed.insert(id);
    }
  }
  std::map<std::string, std::vector<const Question*>> by_image;
  for (const Question& q : data.records) {
    if (!q.image_id) throw ArgumentError("record " + q.question_id + " has no image_id");
    by_image[*q.image_id].push_back(&q);
  }

  vlm::Counters counters;
  std::vector<RecordScore> scores;
  for (const auto& [image_id, recs] : by_image) {
    const Tensor* image = nullptr;
    if (listed.count(image_id)) {
      image = &adversarial->images.at(image_id);
    } else {
      const auto it = data.images.find(image_id);
      if (it == data.images.end()) throw ArgumentError("image " + image_id + " not in dataset");
      image = &it->second;
    }
    ad::Tape tape(false);
    vlm::Weights w(tape, model, false);
    const vlm::EncodedImage enc = vlm::EncodeOnTape(w, tape.Constant(*image));
    ++counters.encoder_forward;
    for (const Question* q : recs) {
      const auto tokens = model.Tokenize(q->text);
      const ad::Var logits = vlm::DecodeOnTape(w, vlm::AlignOnTape(w, enc, tokens).back(), tokens);
      ++counters.align_forward;
      ++counters.decoder_forward;
      RecordScore s;
      s.question_id = q->question_id;
      s.image_id = image_id;
      s.answer_type = q->answer_type;
      s.answer = model.answers().Answer(vlm::ArgMax(logits.value()));
      s.score = VqaScore(s.answer, q->ground_truths);
      scores.push_back(std::move(s));
    }
  }
  EvalResult r = Summarize(std::move(scores));
  r.counters = counters;
  if (adversarial) r.counters += adversarial->counters;
  return r;
}

Tensor NoiseBaseline(const Tensor& x, double epsilon, RngStream& rng) {
  if (epsilon < 0.0) throw ArgumentError("noise budget must be >= 0");
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::clamp(x[i] + rng.Uniform(-epsilon, epsilon), std::max(0.0, x[i] - epsilon),
                        std::min(1.0, x[i] + epsilon));
  }
  return out;
}

std::string TransferGrid::ToCsv() const {
  std::string out = "surrogate";
  for (const std::string& t : targets) out += "," + t;
  out += "\n";
  for (std::size_t i = 0; i < surrogates.size(); ++i) {
    out += surrogates[i];
    for (std::size_t j = 0; j < targets.size(); ++j) out += "," + Fixed(cells[i][j].overall, 2);
    out += "\n";
  }
  return out;
}

nlohmann::json TransferGrid::ToJson() const {
  nlohmann::json j;
  j["surrogates"] = surrogates;
  j["targets"] = targets;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : cells) {
    nlohmann::json r = nlohmann::json::array();
    for (const EvalResult& e : row) r.push_back(e.ToJson(false));
    rows.push_back(std::move(r));
  }
  j["cells"] = std::move(rows);
  return j;
}

TransferGrid TransferMatrix(const std::vector<NamedModel>& models,
                            const std::map<std::string, AdversarialSet>& sets, const Dataset& data) {
  if (models.empty()) throw ArgumentError("transfer matrix needs at least one model");
  TransferGrid grid;
  for (const NamedModel& m : models) {
    if (m.model == nullptr) throw ArgumentError("model " + m.name + " is null");
    grid.surrogates.push_back(m.name);
    grid.targets.push_back(m.name);
  }
  for (const NamedModel& s : models) {
    const auto it = sets.find(s.name);
    if (it == sets.end()) throw ArgumentError("no adversarial set for surrogate " + s.name);
    std::vector<EvalResult> row;
    for (const NamedModel& t : models) row.push_back(Evaluate(*t.model, data, &it->second));
    grid.cells.push_back(std::move(row));
  }
  return grid;
}

Spread MeanSpread(const std::vector<double>& values) {
  if (values.empty()) throw ArgumentError("no values to summarize");
  Spread s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::string FormatWithSpread(const std::vector<double>& values) {
  const Spread s = MeanSpread(values);
  if (values.size() == 1) return Fixed(s.mean, 2);
  return Fixed(s.mean, 2) + " (±" + Fixed(s.stddev, 2) + ")";
}

}  // namespace qava::eval
