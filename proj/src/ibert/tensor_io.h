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

#ifndef GSIM_IBERT_TENSOR_IO_H_
#define GSIM_IBERT_TENSOR_IO_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ibert/tensor.h"

namespace gsim::ibert {

// Tensor blob: 16-byte little-endian header {magic "GQT1", rows, cols,
// reserved = 0} followed by rows*cols INT8 values, row-major. The scale is
// not stored; it belongs to the model the tensor feeds.
inline constexpr uint32_t kTensorMagic = 0x31545147;  // "GQT1"

std::vector<uint8_t> encode_tensor(const QuantTensor& t);
QuantTensor decode_tensor(const std::vector<uint8_t>& bytes, double scale = 1.0);

void write_tensor(const std::filesystem::path& path, const QuantTensor& t);
QuantTensor read_tensor(const std::filesystem::path& path, double scale = 1.0);

// Uniform random INT8 values from a seeded mt19937_64.
QuantTensor random_tensor(int rows, int cols, uint64_t seed, double scale = 1.0);

}  // namespace gsim::ibert

#endif  // GSIM_IBERT_TENSOR_IO_H_
