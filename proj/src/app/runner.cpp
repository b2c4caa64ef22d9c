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
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "qava/app.hpp"
#include "qava/attacks.hpp"
#include "qava/errors.hpp"
#include "qava/evalkit.hpp"
#include "qava/qtns.hpp"
#include "qava/train.hpp"
#include "qava/vqg.hpp"

namespace qava::app {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Picks a forked stream for the once-per-repeat shared question sample.
constexpr std::uint64_t kSharedSampleJob = 0xFFFFFFFFull;

const std::set<std::string>& Strategies() {
  static const std::set<std::string> s = {"wtq", "rsq", "rsq-t", "vqg"};
  return s;
}

std::string Join(const std::set<std::string>& s) {
  std::string out;
  for (const auto& v : s) out += (out.empty() ? "" : ", ") + v;
  return out;
}

bool SameKind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

// Overlays `user` on `defaults`. Unknown keys and type changes are errors;
// keys listed in `free_form` accept any value (validated by their owner).
json Merge(const json& defaults, const json& user, const std::string& where,
           const std::set<std::string>& free_form = {}) {
  if (!user.is_object()) throw ArgumentError(where + ": config must be a JSON object");
  json out = defaults;
  for (const auto& [key, value] : user.items()) {
    if (!defaults.contains(key)) throw ArgumentError(where + ": unknown key '" + key + "'");
    const json& d = defaults.at(key);
    if (!free_form.count(key) && !d.is_null() && !value.is_null() && !SameKind(d, value)) {
      throw ArgumentError(where + ": key '" + key + "' has the wrong type");
    }
    if (d.is_object() && !free_form.count(key)) {
      out[key] = Merge(d, value, where + "." + key);
    } else {
      out[key] = value;
    }
  }
  return out;
}

std::size_t Count(const json& c, const char* key, std::size_t min_value) {
  const json& v = c.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < static_cast<std::int64_t>(min_value)) {
    throw ArgumentError(std::string("'") + key + "' must be an integer >= " + std::to_string(min_value));
  }
  return v.get<std::size_t>();
}

std::string RequiredPath(const json& c, const char* key) {
  const json& v = c.at(key);
  if (!v.is_string() || v.get<std::string>().empty()) {
    throw ArgumentError(std::string("'") + key + "' is required");
  }
  return v.get<std::string>();
}

void WriteJson(const fs::path& path, const json& j) { WriteTextFile(path, j.dump(2) + "\n"); }

json ReadJson(const fs::path& path) {
  try {
    return json::parse(ReadTextFile(path));
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::string Fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string RepDir(std::size_t r) { return "rep" + std::to_string(r); }

std::string ModelName(const vlm::Model& model, const fs::path& dir) {
  const json& meta = model.metadata();
  if (meta.contains("name") && meta.at("name").is_string()) return meta.at("name").get<std::string>();
  return fs::path(dir).lexically_normal().filename().string();
}

// Adversarial set of one repeat of an attack run.
eval::AdversarialSet LoadAdversarialSet(const fs::path& attack_dir, std::size_t repeat) {
  if (!fs::is_directory(attack_dir)) throw IoError("attack directory not found: " + attack_dir.string());
  const json manifest = ReadJson(attack_dir / "manifest.json");
  const json& reps = manifest.at("repeats");
  if (repeat >= reps.size()) {
    throw ArgumentError("attack run " + attack_dir.string() + " has " + std::to_string(reps.size()) +
                        " repeats; repeat " + std::to_string(repeat) + " requested");
  }
  eval::AdversarialSet set;
  set.counters = vlm::Counters::FromJson(reps[repeat].at("counters"));
  for (const auto& id : reps[repeat].at("image_ids")) {
    const std::string s = id.get<std::string>();
    set.image_ids.push_back(s);
    set.images.emplace(s, LoadQtns(attack_dir / RepDir(repeat) / "adv" / (s + ".qtns")).As(DType::kF64));
  }
  return set;
}

json ScoreRow(const std::string& label, const std::vector<eval::EvalResult>& results) {
  std::vector<double> overall, other, number, yes_no;
  for (const auto& r : results) {
    overall.push_back(r.overall);
    other.push_back(r.other);
    number.push_back(r.number);
    yes_no.push_back(r.yes_no);
  }
  const auto spread = [](const std::vector<double>& v) {
    const eval::Spread s = eval::MeanSpread(v);
    return json{{"mean", s.mean}, {"stddev", s.stddev}, {"values", v}, {"text", eval::FormatWithSpread(v)}};
  };
  return {{"condition", label},
          {"overall", spread(overall)},
          {"other", spread(other)},
          {"number", spread(number)},
          {"yes_no", spread(yes_no)}};
}

std::string ScoreTable(const json& rows) {
  std::string md = "| Condition | Overall | Other | Number | Yes/No |\n|---|---|---|---|---|\n";
  for (const json& r : rows) {
    md += "| " + r.at("condition").get<std::string>() + " | " + r.at("overall").at("text").get<std::string>() +
          " | " + r.at("other").at("text").get<std::string>() + " | " +
          r.at("number").at("text").get<std::string>() + " | " + r.at("yes_no").at("text").get<std::string>() +
          " |\n";
  }
  return md;
}

std::string ConfigComment(const json& config, const char* prefix) {
  return std::string(prefix) + " config: " + config.dump() + "\n";
}

}  // namespace

fs::path RunRoot() {
  const char* env = std::getenv("QAVA_RUN_DIR");
  return env && *env ? fs::path(env) : fs::current_path();
}

fs::path Resolve(const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? p : RunRoot() / p;
}

json DefaultConfig(const std::string& command) {
  if (command == "dataset") {
    return {{"mode", "synth"}, {"out", "dataset"}, {"images", 32},   {"questions", 50},
            {"seed", 1},       {"source", nullptr}, {"m", 32},     {"n", 50}};
  }
  if (command == "train") {
    return {{"dataset", nullptr}, {"out", "model"}, {"name", nullptr}, {"seed", 0},
            {"train", vlm::TrainConfig().ToJson()}};
  }
  if (command == "attack") {
    return {{"model", nullptr},
            {"dataset", nullptr},
            {"out", "attack"},
            {"pool", nullptr},
            {"strategy", "rsq"},
            {"n_questions", 10},
            {"loss", "qava"},
            {"attack", attack::AttackConfig::Defaults(attack::Method::kPgd).ToJson()},
            {"repeats", 3},
            {"jobs", 1},
            {"share_questions", false},
            {"max_images", 0}};
  }
  if (command == "eval") {
    return {{"model", nullptr},
            {"dataset", nullptr},
            {"out", "eval"},
            {"attack", nullptr},
            {"noise", {{"epsilon", nullptr}, {"repeats", 3}, {"seed", 0}}}};
  }
  if (command == "transfer") {
    return {{"models", json::array()}, {"attacks", json::array()}, {"dataset", nullptr}, {"out", "transfer"},
            {"repeat", 0}};
  }
  if (command == "report") return {{"run_dir", nullptr}, {"out", nullptr}};
  throw ArgumentError("unknown command '" + command + "'");
}

json CmdDataset(const json& user) {
  json c = Merge(DefaultConfig("dataset"), user, "dataset");
  const std::string mode = c.at("mode").is_string() ? c.at("mode").get<std::string>() : "";
  const fs::path out = Resolve(RequiredPath(c, "out"));
  const std::uint64_t seed = c.at("seed").get<std::uint64_t>();
  eval::Dataset data;
  if (mode == "synth") {
    const std::size_t images = Count(c, "images", 1), questions = Count(c, "questions", 1);
    RngStream rng(seed);
    data = eval::GenerateSynthetic(rng, images, questions);
  } else if (mode == "subset") {
    eval::DatasetSpec spec{Count(c, "m", 1), Count(c, "n", 1), seed};
    const eval::Dataset source = eval::LoadDataset(Resolve(RequiredPath(c, "source")));
    RngStream rng(seed);
    data = eval::BuildSubset(source, spec, rng);
  } else {
    throw ArgumentError("dataset: unknown mode '" + mode + "' (valid: synth, subset)");
  }
  std::vector<std::string> ids;
  for (const auto& [id, _] : data.images) ids.push_back(id);
  eval::SaveDataset(data, out, {{"command", "dataset"}, {"config", c}, {"image_ids", ids}});
  return {{"command", "dataset"},
          {"config", c},
          {"out", out.string()},
          {"num_images", data.images.size()},
          {"num_records", data.records.size()},
          {"checksum", eval::DatasetChecksum(data)}};
}

json CmdTrain(const json& user) {
  json c = Merge(DefaultConfig("train"), user, "train", {"train"});
  const vlm::TrainConfig tc = vlm::TrainConfig::FromJson(c.at("train"));
  c["train"] = tc.ToJson();
  const fs::path out = Resolve(RequiredPath(c, "out"));
  const std::string name =
      c.at("name").is_string() ? c.at("name").get<std::string>() : out.lexically_normal().filename().string();
  c["name"] = name;
  const eval::Dataset data = eval::LoadDataset(Resolve(RequiredPath(c, "dataset")));
  RngStream rng(c.at("seed").get<std::uint64_t>());
  vlm::Model model = vlm::TrainToy(data, tc, rng);
  json meta = model.metadata();
  meta["name"] = name;
  meta["config"] = c;
  meta["dataset_checksum"] = eval::DatasetChecksum(data);
  model.set_metadata(meta);
  model.Save(out);
  return {{"command", "train"}, {"config", c}, {"out", out.string()}, {"name", name}, {"heldout", meta.at("heldout")}};
}

json CmdAttack(const json& user) {
  json c = Merge(DefaultConfig("attack"), user, "attack", {"attack"});
  const attack::AttackConfig ac = attack::AttackConfig::FromJson(c.at("attack"));
  c["attack"] = ac.ToJson();
  const std::string strategy = c.at("strategy").is_string() ? c.at("strategy").get<std::string>() : "";
  if (!Strategies().count(strategy)) {
    throw ArgumentError("attack: unknown strategy '" + strategy + "' (valid: " + Join(Strategies()) + ")");
  }
  const loss::LossKind kind = loss::ParseLossKind(c.at("loss").get<std::string>());
  const loss::LossSpec spec = attack::ResolveLossSpec(kind, ac);
  const std::size_t n_questions = Count(c, "n_questions", 1);
  const std::size_t repeats = Count(c, "repeats", 1);
  const std::size_t jobs = Count(c, "jobs", 1);
  const std::size_t max_images = Count(c, "max_images", 0);
  const bool share = c.at("share_questions").get<bool>();
  const bool pooled = strategy == "rsq" || strategy == "rsq-t";
  if (ac.sga && !pooled) throw ArgumentError("attack: sga needs strategy rsq or rsq-t");
  if (share && !pooled) throw ArgumentError("attack: share_questions needs strategy rsq or rsq-t");

  const fs::path model_dir = Resolve(RequiredPath(c, "model"));
  const vlm::Model model = vlm::Model::Load(model_dir);
  const eval::Dataset data = eval::LoadDataset(Resolve(RequiredPath(c, "dataset")));
  const questions::QuestionPool pool =
      c.at("pool").is_string() ? questions::LoadPool(Resolve(c.at("pool").get<std::string>()))
                               : questions::QuestionPool(eval::SurrogatePool());
  const fs::path out = Resolve(RequiredPath(c, "out"));

  std::vector<std::string> image_ids;
  for (const auto& [id, _] : data.images) image_ids.push_back(id);
  if (max_images > 0 && image_ids.size() > max_images) image_ids.resize(max_images);

  auto sample = [&](RngStream& rng) {
    return strategy == "rsq" ? questions::SampleRsq(pool, n_questions, rng)
                             : questions::SampleRsqByType(pool, n_questions, rng);
  };

  json manifest = {{"command", "attack"},
                   {"config", c},
                   {"model_name", ModelName(model, model_dir)},
                   {"dataset_checksum", eval::DatasetChecksum(data)},
                   {"repeats", json::array()}};
  std::string timing;
  const RngStream root(ac.seed);
  for (std::size_t r = 0; r < repeats; ++r) {
    const RngStream rep = root.Fork(r);
    std::vector<questions::Question> shared;
    if (share) {
      RngStream s = rep.Fork(kSharedSampleJob);
      shared = sample(s);
    }
    std::vector<attack::AdversarialExample> results(image_ids.size());
    std::vector<std::string> errors(image_ids.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < image_ids.size(); i = next++) {
        try {
          const std::string& id = image_ids[i];
          const Tensor& x = data.images.at(id);
          RngStream rng = rep.Fork(i);
          std::unique_ptr<attack::QuestionProvider> provider;
          if (strategy == "wtq") {
            provider = std::make_unique<attack::FixedQuestions>(questions::Wtq(data.RecordsFor(id)));
          } else if (strategy == "vqg") {
            provider = std::make_unique<attack::FixedQuestions>(
                vlm::GenerateQuestions(model, x, static_cast<int>(n_questions)));
          } else if (ac.sga) {
            provider = std::make_unique<attack::ResamplingQuestions>(pool, n_questions, strategy == "rsq-t");
          } else {
            provider = std::make_unique<attack::FixedQuestions>(share ? shared : sample(rng));
          }
          results[i] = attack::RunAttack(model, spec, x, *provider, ac, rng);
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      }
    };
    std::vector<std::thread> pool_threads;
    for (std::size_t t = 1; t < std::min(jobs, image_ids.size()); ++t) pool_threads.emplace_back(worker);
    worker();
    for (auto& t : pool_threads) t.join();
    for (std::size_t i = 0; i < errors.size(); ++i) {
      if (!errors[i].empty()) throw Error("attack on " + image_ids[i] + ": " + errors[i]);
    }

    vlm::Counters total;
    double loss_sum = 0.0;
    const fs::path dir = out / RepDir(r);
    for (std::size_t i = 0; i < image_ids.size(); ++i) {
      const auto& ex = results[i];
      SaveQtns(ex.adversarial.As(DType::kF64), dir / "adv" / (image_ids[i] + ".qtns"));
      SaveQtns(ex.clean.As(DType::kF64), dir / "clean" / (image_ids[i] + ".qtns"));
      json side = ex.ToJson();
      side["image_id"] = image_ids[i];
      side["repeat"] = r;
      side["run_config"] = c;
      WriteJson(dir / "sidecars" / (image_ids[i] + ".json"), side);
      total += ex.counters;
      loss_sum += ex.final_loss;
      char line[160];
      std::snprintf(line, sizeof(line), "repeat=%zu image=%s wall_seconds=%.6f\n", r, image_ids[i].c_str(),
                    ex.wall_seconds);
      timing += line;
    }
    manifest["repeats"].push_back({{"repeat", r},
                                   {"image_ids", image_ids},
                                   {"counters", total.ToJson()},
                                   {"mean_final_loss", loss_sum / static_cast<double>(image_ids.size())}});
  }
  WriteJson(out / "manifest.json", manifest);
  // Wall-clock measurements stay out of the deterministic artifacts.
  WriteTextFile(out / "timing.log", timing);
  return {{"command", "attack"},
          {"config", c},
          {"out", out.string()},
          {"images", image_ids.size()},
          {"repeats", manifest.at("repeats")}};
}

json CmdEval(const json& user) {
  json c = Merge(DefaultConfig("eval"), user, "eval");
  const fs::path model_dir = Resolve(RequiredPath(c, "model"));
  const vlm::Model model = vlm::Model::Load(model_dir);
  const eval::Dataset data = eval::LoadDataset(Resolve(RequiredPath(c, "dataset")));
  const fs::path out = Resolve(RequiredPath(c, "out"));

  const eval::EvalResult clean = eval::Evaluate(model, data);
  json rows = json::array({ScoreRow("clean", {clean})});
  json adversarial = json::array();
  double attack_eps = -1.0;
  if (c.at("attack").is_string()) {
    const fs::path attack_dir = Resolve(c.at("attack").get<std::string>());
    if (!fs::is_directory(attack_dir)) throw IoError("attack directory not found: " + attack_dir.string());
    const json am = ReadJson(attack_dir / "manifest.json");
    attack_eps = am.at("config").at("attack").at("epsilon").get<double>();
    std::vector<eval::EvalResult> results;
    for (std::size_t r = 0; r < am.at("repeats").size(); ++r) {
      const eval::AdversarialSet set = LoadAdversarialSet(attack_dir, r);
      results.push_back(eval::Evaluate(model, data, &set));
      adversarial.push_back(results.back().ToJson(true));
    }
    const json& ac = am.at("config");
    rows.push_back(ScoreRow("adversarial (" + ac.at("loss").get<std::string>() + ", " +
                                ac.at("strategy").get<std::string>() + ", " +
                                ac.at("attack").at("method").get<std::string>() + ")",
                            results));
  }
  json noise = json::array();
  const json& nc = c.at("noise");
  const double noise_eps = nc.at("epsilon").is_number() ? nc.at("epsilon").get<double>() : attack_eps;
  if (noise_eps >= 0.0) {
    const std::size_t reps = Count(nc, "repeats", 1);
    const RngStream root(nc.at("seed").get<std::uint64_t>());
    std::vector<eval::EvalResult> results;
    for (std::size_t r = 0; r < reps; ++r) {
      eval::AdversarialSet set;
      std::size_t i = 0;
      for (const auto& [id, img] : data.images) {
        RngStream rng = root.Fork(r).Fork(i++);
        set.image_ids.push_back(id);
        set.images.emplace(id, eval::NoiseBaseline(img, noise_eps, rng));
      }
      results.push_back(eval::Evaluate(model, data, &set));
      noise.push_back(results.back().ToJson(false));
    }
    rows.push_back(ScoreRow("noise (eps " + Fixed(noise_eps * 255.0) + "/255)", results));
  }
  const json result = {{"command", "eval"},
                       {"config", c},
                       {"model_name", ModelName(model, model_dir)},
                       {"table", rows},
                       {"clean", clean.ToJson(true)},
                       {"adversarial", adversarial},
                       {"noise", noise}};
  WriteJson(out / "eval.json", result);
  WriteTextFile(out / "eval.md", "<!-- config: " + c.dump() + " -->\n\n" + ScoreTable(rows));
  return {{"command", "eval"}, {"config", c}, {"out", out.string()}, {"table", rows}};
}

json CmdTransfer(const json& user) {
  json c = Merge(DefaultConfig("transfer"), user, "transfer");
  const std::size_t repeat = Count(c, "repeat", 0);
  std::vector<vlm::Model> models;
  std::vector<std::string> names;
  for (const auto& m : c.at("models")) {
    const fs::path dir = Resolve(m.get<std::string>());
    models.push_back(vlm::Model::Load(dir));
    names.push_back(ModelName(models.back(), dir));
  }
  if (models.empty()) throw ArgumentError("transfer: 'models' must list at least one checkpoint");
  std::vector<eval::NamedModel> named;
  for (std::size_t i = 0; i < models.size(); ++i) named.push_back({names[i], &models[i]});
  std::map<std::string, eval::AdversarialSet> sets;
  for (const auto& a : c.at("attacks")) {
    const fs::path dir = Resolve(a.get<std::string>());
    if (!fs::is_directory(dir)) throw IoError("attack directory not found: " + dir.string());
    const std::string surrogate = ReadJson(dir / "manifest.json").at("model_name").get<std::string>();
    sets[surrogate] = LoadAdversarialSet(dir, repeat);
  }
  const eval::Dataset data = eval::LoadDataset(Resolve(RequiredPath(c, "dataset")));
  const fs::path out = Resolve(RequiredPath(c, "out"));
  const eval::TransferGrid grid = eval::TransferMatrix(named, sets, data);
  json j = grid.ToJson();
  j["command"] = "transfer";
  j["config"] = c;
  WriteJson(out / "transfer.json", j);
  WriteTextFile(out / "transfer.csv", ConfigComment(c, "#") + grid.ToCsv());
  return {{"command", "transfer"}, {"config", c}, {"out", out.string()}, {"csv", grid.ToCsv()}};
}

json CmdReport(const json& user) {
  json c = Merge(DefaultConfig("report"), user, "report");
  const fs::path run_dir = Resolve(RequiredPath(c, "run_dir"));
  if (!fs::is_directory(run_dir)) throw IoError("run directory not found: " + run_dir.string());
  const fs::path out = c.at("out").is_string() ? Resolve(c.at("out").get<std::string>()) : run_dir;

  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(run_dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  std::string accuracy, efficiency, transfer, csv = ConfigComment(c, "#");
  csv += "source,condition,overall,other,number,yes_no\n";
  std::string timing;
  for (const fs::path& f : files) {
    const std::string rel = fs::relative(f, run_dir).generic_string();
    if (f.filename() == "eval.json") {
      const json j = ReadJson(f);
      accuracy += "### " + rel + "\n\n" + ScoreTable(j.at("table")) + "\n";
      for (const json& r : j.at("table")) {
        csv += rel + "," + r.at("condition").get<std::string>() + "," +
               Fixed(r.at("overall").at("mean").get<double>()) + "," + Fixed(r.at("other").at("mean").get<double>()) +
               "," + Fixed(r.at("number").at("mean").get<double>()) + "," +
               Fixed(r.at("yes_no").at("mean").get<double>()) + "\n";
      }
    } else if (f.filename() == "manifest.json") {
      const json j = ReadJson(f);
      if (j.value("command", "") != "attack") continue;
      const json& ac = j.at("config");
      const json& rep = j.at("repeats").at(0);
      const vlm::Counters k = vlm::Counters::FromJson(rep.at("counters"));
      efficiency += "| " + fs::path(rel).parent_path().generic_string() + " | " + ac.at("loss").get<std::string>() +
                    " | " + ac.at("attack").at("method").get<std::string>() + " | " +
                    ac.at("strategy").get<std::string>() + " | " + std::to_string(k.encoder_forward) + " / " +
                    std::to_string(k.encoder_backward) + " | " + std::to_string(k.align_forward) + " / " +
                    std::to_string(k.align_backward) + " | " + std::to_string(k.decoder_forward) + " / " +
                    std::to_string(k.decoder_backward) + " |\n";
      const fs::path log = f.parent_path() / "timing.log";
      if (fs::exists(log)) {
        double total = 0.0;
        std::size_t n = 0;
        std::istringstream in(ReadTextFile(log));
        std::string line;
        while (std::getline(in, line)) {
          const auto pos = line.find("wall_seconds=");
          if (pos == std::string::npos) continue;
          total += std::stod(line.substr(pos + 13));
          ++n;
        }
        timing += "| " + fs::path(rel).parent_path().generic_string() + " | " + Fixed(total) + " | " +
                  (n ? Fixed(total / static_cast<double>(n)) : std::string("-")) + " |\n";
      }
    } else if (f.filename() == "transfer.csv") {
      transfer += "### " + rel + "\n\n```\n" + ReadTextFile(f) + "```\n\n";
    }
  }
  if (accuracy.empty() && efficiency.empty() && transfer.empty()) {
    throw IoError("no eval, attack or transfer artifacts under " + run_dir.string());
  }
  std::string md = "<!-- config: " + c.dump() + " -->\n\n# Report\n\n";
  if (!accuracy.empty()) md += "## Accuracy\n\n" + accuracy;
  if (!efficiency.empty()) {
    md += "## Efficiency (repeat 0, summed over images)\n\n"
          "| Attack | Loss | Method | Strategy | Encoder fwd / bwd | Alignment fwd / bwd | Decoder fwd / bwd |\n"
          "|---|---|---|---|---|---|---|\n" +
          efficiency + "\n";
  }
  if (!transfer.empty()) md += "## Transfer\n\n" + transfer;
  WriteTextFile(out / "report.md", md);
  WriteTextFile(out / "report.csv", csv);
  if (!timing.empty()) {
    WriteTextFile(out / "report_timing.md",
                  "| Attack | Wall time (s) | Per image (s) |\n|---|---|---|\n" + timing);
  }
  return {{"command", "report"}, {"config", c}, {"out", out.string()}, {"markdown", md}};
}

}  // namespace qava::app
