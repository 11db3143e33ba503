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

#ifndef GSIM_IBERT_TENSOR_H_
#define GSIM_IBERT_TENSOR_H_

#include <cstdint>
#include <span>
#include <vector>

namespace gsim::ibert {

// Row-major INT8 matrix with a per-tensor dequantization scale.
struct QuantTensor {
  int rows = 0;
  int cols = 0;
  std::vector<int8_t> data;
  double scale = 1.0;

  QuantTensor() = default;
  QuantTensor(int r, int c, double s) : rows(r), cols(c), data(size_t(r) * c), scale(s) {}

  int8_t at(int r, int c) const { return data[size_t(r) * cols + c]; }
  int8_t& at(int r, int c) { return data[size_t(r) * cols + c]; }
  std::span<const int8_t> row(int r) const { return {data.data() + size_t(r) * cols, size_t(cols)}; }
  bool operator==(const QuantTensor&) const = default;
};

// Row-major INT32 accumulator matrix.
struct AccTensor {
  int rows = 0;
  int cols = 0;
  std::vector<int32_t> data;
  double scale = 1.0;

  AccTensor() = default;
  AccTensor(int r, int c, double s) : rows(r), cols(c), data(size_t(r) * c), scale(s) {}

  int32_t at(int r, int c) const { return data[size_t(r) * cols + c]; }
  int32_t& at(int r, int c) { return data[size_t(r) * cols + c]; }
  bool operator==(const AccTensor&) const = default;
};

// Columns [begin, end) of every row.
QuantTensor column_slice(const QuantTensor& t, int begin, int end);
// Concatenates along columns; all parts share rows and scale.
QuantTensor concat_columns(std::span<const QuantTensor> parts);
QuantTensor row_slice(const QuantTensor& t, int begin, int end);
QuantTensor concat_rows(std::span<const QuantTensor> parts);

// One matrix row as the byte payload carried by a stream packet.
std::vector<uint8_t> row_bytes(const QuantTensor& t, int r);
QuantTensor tensor_from_rows(const std::vector<std::vector<uint8_t>>& rows, int cols,
                             double scale);

// Smallest multiple of num_pe covering m.
int min_padding(int m, int num_pe);

}  // namespace gsim::ibert

#endif  // GSIM_IBERT_TENSOR_H_
