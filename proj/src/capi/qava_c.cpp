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

#include "qava/qava.h"

#include <cstring>
#include <new>
#include <string>

#include "qava/app.hpp"
#include "qava/attacks.hpp"
#include "qava/errors.hpp"
#include "qava/evalkit.hpp"
#include "qava/losses.hpp"
#include "qava/model.hpp"
#include "qava/qtns.hpp"
#include "qava/questions.hpp"

struct qava_tensor {
  qava::Tensor value;
};

struct qava_model {
  qava::vlm::Model value;
};

namespace {

thread_local std::string g_last_error;

qava_status Fail(qava_status status, const char* what) {
  g_last_error = what;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
qava_status Guard(F&& body) {
  try {
    g_last_error.clear();
    body();
    return QAVA_OK;
  } catch (const qava::ArgumentError& e) {
    return Fail(QAVA_ERR_ARGUMENT, e.what());
  } catch (const qava::ContractError& e) {
    return Fail(QAVA_ERR_CONTRACT, e.what());
  } catch (const qava::NumericError& e) {
    return Fail(QAVA_ERR_NUMERIC, e.what());
  } catch (const qava::IoError& e) {
    return Fail(QAVA_ERR_IO, e.what());
  } catch (const qava::TrainingError& e) {
    return Fail(QAVA_ERR_TRAINING, e.what());
  } catch (const nlohmann::json::exception& e) {
    return Fail(QAVA_ERR_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return Fail(QAVA_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(QAVA_ERR_INTERNAL, e.what());
  }
}

void Require(const void* p, const char* name) {
  if (p == nullptr) throw qava::ContractError(std::string(name) + " is null");
}

char* CopyString(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

using CommandFn = nlohmann::json (*)(const nlohmann::json&);

qava_status Command(CommandFn fn, const char* config_json, char** out_json) {
  return Guard([&] {
    Require(config_json, "config_json");
    Require(out_json, "out_json");
    nlohmann::json config;
    try {
      config = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
      throw qava::ArgumentError(std::string("config is not valid JSON: ") + e.what());
    }
    *out_json = CopyString(fn(config).dump(2));
  });
}

}  // namespace

extern "C" {

const char* qava_version(void) { return "1.0.0"; }

const char* qava_last_error(void) { return g_last_error.c_str(); }

const char* qava_status_name(qava_status status) {
  switch (status) {
    case QAVA_OK: return "ok";
    case QAVA_ERR_ARGUMENT: return "argument error";
    case QAVA_ERR_CONTRACT: return "contract violation";
    case QAVA_ERR_NUMERIC: return "numeric error";
    case QAVA_ERR_IO: return "i/o error";
    case QAVA_ERR_TRAINING: return "training failure";
    case QAVA_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void qava_string_free(char* s) { delete[] s; }

qava_status qava_tensor_create(const size_t* shape, size_t ndim, const double* data, qava_tensor** out) {
  return Guard([&] {
    Require(shape, "shape");
    Require(out, "out");
    qava::Shape s(shape, shape + ndim);
    std::vector<double> values(qava::NumElements(s));
    if (!values.empty()) Require(data, "data");
    std::copy(data, data + values.size(), values.begin());
    *out = new qava_tensor{qava::Tensor(std::move(s), std::move(values))};
  });
}

qava_status qava_tensor_load(const char* path, qava_tensor** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    *out = new qava_tensor{qava::LoadQtns(path).As(qava::DType::kF64)};
  });
}

qava_status qava_tensor_save(const qava_tensor* t, const char* path, int dtype) {
  return Guard([&] {
    Require(t, "tensor");
    Require(path, "path");
    if (dtype != 1 && dtype != 2) throw qava::ArgumentError("dtype must be 1 (f32) or 2 (f64)");
    qava::SaveQtns(t->value.As(static_cast<qava::DType>(dtype)), path);
  });
}

size_t qava_tensor_ndim(const qava_tensor* t) { return t ? t->value.rank() : 0; }

size_t qava_tensor_dim(const qava_tensor* t, size_t axis) {
  return t && axis < t->value.rank() ? t->value.dim(axis) : 0;
}

size_t qava_tensor_size(const qava_tensor* t) { return t ? t->value.size() : 0; }

qava_status qava_tensor_read(const qava_tensor* t, double* out, size_t n) {
  return Guard([&] {
    Require(t, "tensor");
    Require(out, "out");
    const size_t k = std::min(n, t->value.size());
    std::copy(t->value.values().begin(), t->value.values().begin() + static_cast<std::ptrdiff_t>(k), out);
  });
}

void qava_tensor_free(qava_tensor* t) { delete t; }

qava_status qava_model_init(uint64_t seed, qava_model** out) {
  return Guard([&] {
    Require(out, "out");
    *out = new qava_model{qava::vlm::Model::Init(qava::vlm::ModelConfig::Toy(), seed)};
  });
}

qava_status qava_model_load(const char* dir, qava_model** out) {
  return Guard([&] {
    Require(dir, "dir");
    Require(out, "out");
    *out = new qava_model{qava::vlm::Model::Load(dir)};
  });
}

qava_status qava_model_save(const qava_model* m, const char* dir) {
  return Guard([&] {
    Require(m, "model");
    Require(dir, "dir");
    m->value.Save(dir);
  });
}

void qava_model_free(qava_model* m) { delete m; }

qava_status qava_model_answer(const qava_model* m, const qava_tensor* image, const char* question,
                              char** answer) {
  return Guard([&] {
    Require(m, "model");
    Require(image, "image");
    Require(question, "question");
    Require(answer, "answer");
    *answer = CopyString(qava::vlm::AnswerQuestion(m->value, image->value, question));
  });
}

qava_status qava_model_features(const qava_model* m, const qava_tensor* image, const char* question,
                                qava_tensor** out) {
  return Guard([&] {
    Require(m, "model");
    Require(image, "image");
    Require(question, "question");
    Require(out, "out");
    *out = new qava_tensor{qava::vlm::ImageFeatures(m->value, image->value, question).final()};
  });
}

qava_status qava_vqa_score(const char* answer, const char* const* ground_truths, size_t n, double* score) {
  return Guard([&] {
    Require(answer, "answer");
    Require(score, "score");
    if (n > 0) Require(ground_truths, "ground_truths");
    std::vector<std::string> gts;
    for (size_t i = 0; i < n; ++i) {
      Require(ground_truths[i], "ground truth");
      gts.emplace_back(ground_truths[i]);
    }
    *score = qava::eval::VqaScore(answer, gts);
  });
}

qava_status qava_qava_loss(const qava_tensor* q, const qava_tensor* q_adv, double* loss) {
  return Guard([&] {
    Require(q, "q");
    Require(q_adv, "q_adv");
    Require(loss, "loss");
    *loss = qava::loss::QavaLoss(q->value, q_adv->value);
  });
}

qava_status qava_project_linf(const qava_tensor* x_adv, const qava_tensor* x_clean, double epsilon,
                             qava_tensor** out) {
  return Guard([&] {
    Require(x_adv, "x_adv");
    Require(x_clean, "x_clean");
    Require(out, "out");
    *out = new qava_tensor{qava::attack::ProjectLinf(x_adv->value, x_clean->value, epsilon)};
  });
}

qava_status qava_classify_type(const char* text, char** type) {
  return Guard([&] {
    Require(text, "text");
    Require(type, "type");
    *type = CopyString(qava::questions::ClassifyType(text));
  });
}

qava_status qava_cmd_dataset(const char* config_json, char** out_json) {
  return Command(&qava::app::CmdDataset, config_json, out_json);
}
qava_status qava_cmd_train(const char* config_json, char** out_json) {
  return Command(&qava::app::CmdTrain, config_json, out_json);
}
qava_status qava_cmd_attack(const char* config_json, char** out_json) {
  return Command(&qava::app::CmdAttack, config_json, out_json);
}
qava_status qava_cmd_eval(const char* config_json, char** out_json) {
  return Command(&qava::app::CmdEval, config_json, out_json);
}
qava_status qava_cmd_transfer(const char* config_json, char** out_json) {
  return Command(&qava::app::CmdTransfer, config_json, out_json);
}
qava_status qava_cmd_report(const char* config_json, char** out_json) {
  return Command(&qava::app::CmdReport, config_json, out_json);
}

}  // extern "C"
