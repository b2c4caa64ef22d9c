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

/* C interface to the qava library. All functions return a qava_status; on
 * failure qava_last_error() describes the problem (per calling thread).
 * Objects are opaque and owned by the caller, who releases them with the
 * matching *_free function. Strings returned through char** are released
 * with qava_string_free. */
#ifndef QAVA_QAVA_H_
#define QAVA_QAVA_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define QAVA_API __declspec(dllexport)
#else
#define QAVA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  QAVA_OK = 0,
  QAVA_ERR_ARGUMENT = 1, /* invalid argument, shape or config */
  QAVA_ERR_CONTRACT = 2, /* API misuse, e.g. null handle */
  QAVA_ERR_NUMERIC = 3,  /* non-finite value in a computation */
  QAVA_ERR_IO = 4,       /* unreadable or malformed file */
  QAVA_ERR_TRAINING = 5, /* training missed its accuracy threshold */
  QAVA_ERR_INTERNAL = 6
} qava_status;

typedef struct qava_tensor qava_tensor;
typedef struct qava_model qava_model;

QAVA_API const char* qava_version(void);
/* Message of the last failed call on this thread; "" if none. */
QAVA_API const char* qava_last_error(void);
QAVA_API const char* qava_status_name(qava_status status);
QAVA_API void qava_string_free(char* s);

/* ---- Tensors (f64 values, row-major) ---- */
QAVA_API qava_status qava_tensor_create(const size_t* shape, size_t ndim, const double* data,
                                        qava_tensor** out);
QAVA_API qava_status qava_tensor_load(const char* path, qava_tensor** out);
/* dtype: 1 = f32, 2 = f64. */
QAVA_API qava_status qava_tensor_save(const qava_tensor* t, const char* path, int dtype);
QAVA_API size_t qava_tensor_ndim(const qava_tensor* t);
QAVA_API size_t qava_tensor_dim(const qava_tensor* t, size_t axis);
QAVA_API size_t qava_tensor_size(const qava_tensor* t);
/* Copies min(n, size) values into out. */
QAVA_API qava_status qava_tensor_read(const qava_tensor* t, double* out, size_t n);
QAVA_API void qava_tensor_free(qava_tensor* t);

/* ---- Models ---- */
QAVA_API qava_status qava_model_init(uint64_t seed, qava_model** out);
QAVA_API qava_status qava_model_load(const char* dir, qava_model** out);
QAVA_API qava_status qava_model_save(const qava_model* m, const char* dir);
QAVA_API void qava_model_free(qava_model* m);
/* Greedy single-token answer. */
QAVA_API qava_status qava_model_answer(const qava_model* m, const qava_tensor* image,
                                       const char* question, char** answer);
/* Final-layer alignment features [num_queries x feature_dim]. */
QAVA_API qava_status qava_model_features(const qava_model* m, const qava_tensor* image,
                                         const char* question, qava_tensor** out);

/* ---- Scalar helpers ---- */
QAVA_API qava_status qava_vqa_score(const char* answer, const char* const* ground_truths, size_t n,
                                    double* score);
QAVA_API qava_status qava_qava_loss(const qava_tensor* q, const qava_tensor* q_adv, double* loss);
QAVA_API qava_status qava_project_linf(const qava_tensor* x_adv, const qava_tensor* x_clean,
                                       double epsilon, qava_tensor** out);
QAVA_API qava_status qava_classify_type(const char* text, char** type);

/* ---- Commands ----
 * Each takes a JSON config document and, on success, stores a JSON summary
 * in *out_json. */
QAVA_API qava_status qava_cmd_dataset(const char* config_json, char** out_json);
QAVA_API qava_status qava_cmd_train(const char* config_json, char** out_json);
QAVA_API qava_status qava_cmd_attack(const char* config_json, char** out_json);
QAVA_API qava_status qava_cmd_eval(const char* config_json, char** out_json);
QAVA_API qava_status qava_cmd_transfer(const char* config_json, char** out_json);
QAVA_API qava_status qava_cmd_report(const char* config_json, char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* QAVA_QAVA_H_ */
