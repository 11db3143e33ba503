// Copyright 2026 The gsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ibert/tensor_io.h"

#include <cstring>
#include <random>
#include <string>

#include "common/error.h"
#include "common/io.h"

namespace gsim::ibert {

std::vector<uint8_t> encode_tensor(const QuantTensor& t) {
  std::vector<uint8_t> out;
  out.reserve(16 + t.data.size());
  append_le<uint32_t>(out, kTensorMagic);
  append_le<uint32_t>(out, static_cast<uint32_t>(t.rows));
  append_le<uint32_t>(out, static_cast<uint32_t>(t.cols));
  append_le<uint32_t>(out, 0);
  const auto* p = reinterpret_cast<const uint8_t*>(t.data.data());
  out.insert(out.end(), p, p + t.data.size());
  return out;
}

QuantTensor decode_tensor(const std::vector<uint8_t>& bytes, double scale) {
  if (bytes.size() < 16 || load_le<uint32_t>(bytes.data()) != kTensorMagic) {
    throw validation_error("format error", "not a tensor blob (bad magic)");
  }
  const uint32_t rows = load_le<uint32_t>(bytes.data() + 4);
  const uint32_t cols = load_le<uint32_t>(bytes.data() + 8);
  if (load_le<uint32_t>(bytes.data() + 12) != 0) {
    throw validation_error("format error", "tensor blob reserved field is nonzero");
  }
  if (uint64_t{rows} * cols != bytes.size() - 16 || rows > (1u << 20) || cols > (1u << 20)) {
    throw validation_error("format error", "tensor blob size does not match " +
                                               std::to_string(rows) + "x" + std::to_string(cols));
  }
  QuantTensor t(static_cast<int>(rows), static_cast<int>(cols), scale);
  std::memcpy(t.data.data(), bytes.data() + 16, t.data.size());
  return t;
}

void write_tensor(const std::filesystem::path& path, const QuantTensor& t) {
  write_file(path, encode_tensor(t));
}

QuantTensor read_tensor(const std::filesystem::path& path, double scale) {
  return decode_tensor(read_file(path), scale);
}

QuantTensor random_tensor(int rows, int cols, uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  QuantTensor t(rows, cols, scale);
  for (auto& v : t.data) v = static_cast<int8_t>(static_cast<int>(rng() % 256) - 128);
  return t;
}

}  // namespace gsim::ibert
