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

#ifndef QAVA_QTNS_HPP_
#define QAVA_QTNS_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qava/tensor.hpp"

namespace qava {

// QTNS tensor container, little-endian throughout:
//   "QTNS" | u8 version=1 | u8 dtype (1=f32, 2=f64) | u8 ndim | u8 reserved=0
//   | ndim x u32 dims | row-major payload
std::vector<std::uint8_t> EncodeQtns(const Tensor& tensor);
Tensor DecodeQtns(const std::vector<std::uint8_t>& bytes);

void SaveQtns(const Tensor& tensor, const std::filesystem::path& path);
Tensor LoadQtns(const std::filesystem::path& path);

// Whole-file helpers shared by the persistence code.
std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void WriteTextFile(const std::filesystem::path& path, const std::string& text);
std::string ReadTextFile(const std::filesystem::path& path);

// FNV-1a 64 over a byte buffer, rendered as 16 hex digits.
std::string Fnv1aHex(const std::vector<std::uint8_t>& bytes);

}  // namespace qava

#endif  // QAVA_QTNS_HPP_
