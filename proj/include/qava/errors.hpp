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

#ifndef QAVA_ERRORS_HPP_
#define QAVA_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace qava {

// Base of every exception the core throws. The C API maps each subclass to a
// distinct status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller-supplied value: shape mismatch, out-of-range id, malformed config.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// An API was used in a way its contract forbids (e.g. grad() of a non-scalar).
class ContractError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf produced inside a computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Training finished its budget without reaching the accuracy threshold.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace qava

#endif  // QAVA_ERRORS_HPP_
