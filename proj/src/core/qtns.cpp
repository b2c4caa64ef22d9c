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

#include "qava/qtns.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "qava/errors.hpp"

namespace qava {
namespace {

constexpr std::uint8_t kMagic[4] = {0x51, 0x54, 0x4E, 0x53};
constexpr std::uint8_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "QTNS encoding assumes a little-endian host");

template <typename T>
void Append(std::vector<std::uint8_t>& out, T value) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T Read(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw IoError("QTNS: truncated data");
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

std::vector<std::uint8_t> EncodeQtns(const Tensor& tensor) {
  if (tensor.empty()) throw ArgumentError("QTNS: cannot encode an empty tensor");
  if (tensor.rank() > 255) throw ArgumentError("QTNS: rank exceeds 255");
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.push_back(kVersion);
  out.push_back(static_cast<std::uint8_t>(tensor.dtype()));
  out.push_back(static_cast<std::uint8_t>(tensor.rank()));
  out.push_back(0);
  for (std::size_t d : tensor.shape()) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw ArgumentError("QTNS: dimension too large");
    Append(out, static_cast<std::uint32_t>(d));
  }
  out.reserve(out.size() + tensor.size() * 8);
  if (tensor.dtype() == DType::kF32) {
    for (double v : tensor.data()) Append(out, static_cast<float>(v));
  } else {
    for (double v : tensor.data()) Append(out, v);
  }
  return out;
}

Tensor DecodeQtns(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw IoError("QTNS: bad magic");
  }
  std::size_t pos = 4;
  const auto version = Read<std::uint8_t>(bytes, pos);
  const auto dtype_code = Read<std::uint8_t>(bytes, pos);
  const auto ndim = Read<std::uint8_t>(bytes, pos);
  const auto reserved = Read<std::uint8_t>(bytes, pos);
  if (version != kVersion) throw IoError("QTNS: unsupported version " + std::to_string(version));
  if (dtype_code != 1 && dtype_code != 2) {
    throw IoError("QTNS: unknown dtype code " + std::to_string(dtype_code));
  }
  if (reserved != 0) throw IoError("QTNS: reserved byte must be zero");
  Shape shape;
  for (int i = 0; i < ndim; ++i) shape.push_back(Read<std::uint32_t>(bytes, pos));
  const DType dtype = static_cast<DType>(dtype_code);
  const std::size_t n = NumElements(shape);
  const std::size_t width = dtype == DType::kF32 ? 4 : 8;
  if (bytes.size() - pos != n * width) throw IoError("QTNS: payload size mismatch");
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    data[i] = dtype == DType::kF32 ? static_cast<double>(Read<float>(bytes, pos))
                                   : Read<double>(bytes, pos);
  }
  return Tensor(std::move(shape), std::move(data), dtype);
}

void SaveQtns(const Tensor& tensor, const std::filesystem::path& path) {
  WriteFileBytes(path, EncodeQtns(tensor));
}

Tensor LoadQtns(const std::filesystem::path& path) {
  try {
    return DecodeQtns(ReadFileBytes(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void WriteFileBytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  WriteFileBytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string ReadTextFile(const std::filesystem::path& path) {
  const auto bytes = ReadFileBytes(path);
  return std::string(bytes.begin(), bytes.end());
}

std::string Fnv1aHex(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qava
