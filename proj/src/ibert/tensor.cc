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

#include "ibert/tensor.h"

#include <cstring>
#include <string>

#include "common/error.h"

namespace gsim::ibert {

QuantTensor column_slice(const QuantTensor& t, int begin, int end) {
  if (begin < 0 || end > t.cols || begin > end) {
    throw validation_error("shape mismatch", "column slice [" + std::to_string(begin) + ", " +
                                                 std::to_string(end) + ") of " +
                                                 std::to_string(t.cols) + " columns");
  }
  QuantTensor out(t.rows, end - begin, t.scale);
  for (int r = 0; r < t.rows; ++r) {
    for (int c = begin; c < end; ++c) out.at(r, c - begin) = t.at(r, c);
  }
  return out;
}

QuantTensor concat_columns(std::span<const QuantTensor> parts) {
  if (parts.empty()) return {};
  int cols = 0;
  for (const auto& p : parts) {
    if (p.rows != parts[0].rows) throw validation_error("shape mismatch", "row counts differ");
    cols += p.cols;
  }
  QuantTensor out(parts[0].rows, cols, parts[0].scale);
  int offset = 0;
  for (const auto& p : parts) {
    for (int r = 0; r < p.rows; ++r) {
      for (int c = 0; c < p.cols; ++c) out.at(r, offset + c) = p.at(r, c);
    }
    offset += p.cols;
  }
  return out;
}

QuantTensor row_slice(const QuantTensor& t, int begin, int end) {
  if (begin < 0 || end > t.rows || begin > end) {
    throw validation_error("shape mismatch", "row slice out of range");
  }
  QuantTensor out(end - begin, t.cols, t.scale);
  std::memcpy(out.data.data(), t.data.data() + size_t(begin) * t.cols, out.data.size());
  return out;
}

QuantTensor concat_rows(std::span<const QuantTensor> parts) {
  if (parts.empty()) return {};
  int rows = 0;
  for (const auto& p : parts) {
    if (p.cols != parts[0].cols) throw validation_error("shape mismatch", "column counts differ");
    rows += p.rows;
  }
  QuantTensor out(rows, parts[0].cols, parts[0].scale);
  size_t offset = 0;
  for (const auto& p : parts) {
    std::memcpy(out.data.data() + offset, p.data.data(), p.data.size());
    offset += p.data.size();
  }
  return out;
}

std::vector<uint8_t> row_bytes(const QuantTensor& t, int r) {
  auto row = t.row(r);
  std::vector<uint8_t> out(row.size());
  std::memcpy(out.data(), row.data(), row.size());
  return out;
}

QuantTensor tensor_from_rows(const std::vector<std::vector<uint8_t>>& rows, int cols,
                             double scale) {
  QuantTensor out(static_cast<int>(rows.size()), cols, scale);
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != size_t(cols)) {
      throw validation_error("shape mismatch", "row " + std::to_string(r) + " has " +
                                                   std::to_string(rows[r].size()) +
                                                   " bytes, expected " + std::to_string(cols));
    }
    std::memcpy(out.data.data() + r * cols, rows[r].data(), size_t(cols));
  }
  return out;
}

int min_padding(int m, int num_pe) {
  if (num_pe < 1) {
    throw validation_error("config fault", "NUM_PE must be at least 1, got " +
                                               std::to_string(num_pe));
  }
  return num_pe * ((m + num_pe - 1) / num_pe);
}

}  // namespace gsim::ibert
