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

#include "ibert/linear.h"

#include <cstdlib>
#include <limits>
#include <string>

#include "common/error.h"

namespace gsim::ibert {

void check_linear_params(const LinearParams& p, const char* where) {
  if (p.in_dim <= 0 || p.out_dim <= 0 ||
      p.weight.size() != size_t(p.in_dim) * p.out_dim ||
      p.bias.size() != size_t(p.out_dim)) {
    throw validation_error("shape mismatch", std::string(where) + ": weight/bias shapes do not match " +
                                                 std::to_string(p.in_dim) + "x" +
                                                 std::to_string(p.out_dim));
  }
  if (!(p.in_scale > 0 && p.weight_scale > 0 && p.out_scale > 0)) {
    throw validation_error("config fault", std::string(where) + ": scales must be positive");
  }
  int64_t worst = int64_t{p.in_dim} * 128 * 128;
  for (int32_t b : p.bias) {
    if (worst + std::llabs(b) > std::numeric_limits<int32_t>::max()) {
      throw validation_error("config fault", std::string(where) +
                                                 ": INT32 accumulator can overflow");
    }
  }
}

AccTensor linear(const QuantTensor& x, const LinearParams& p, int col_begin, int col_end) {
  if (col_end < 0) col_end = p.out_dim;
  if (x.cols != p.in_dim) {
    throw validation_error("shape mismatch", "linear input has " + std::to_string(x.cols) +
                                                 " columns, weight expects " +
                                                 std::to_string(p.in_dim));
  }
  if (col_begin < 0 || col_end > p.out_dim || col_begin >= col_end) {
    throw validation_error("shape mismatch", "bad linear column range");
  }
  const int n = col_end - col_begin;
  AccTensor out(x.rows, n, x.scale * p.weight_scale);
  std::vector<int64_t> acc(n);
  for (int m = 0; m < x.rows; ++m) {
    for (int j = 0; j < n; ++j) acc[j] = p.bias[col_begin + j];
    for (int h = 0; h < p.in_dim; ++h) {
      const int64_t xv = x.at(m, h);
      if (xv == 0) continue;
      const int8_t* w = p.weight.data() + size_t(h) * p.out_dim + col_begin;
      for (int j = 0; j < n; ++j) acc[j] += xv * w[j];
    }
    for (int j = 0; j < n; ++j) {
      if (acc[j] > std::numeric_limits<int32_t>::max() ||
          acc[j] < std::numeric_limits<int32_t>::min()) {
        throw simulation_error("arithmetic fault", "linear accumulator overflow");
      }
      out.at(m, j) = static_cast<int32_t>(acc[j]);
    }
  }
  return out;
}

}  // namespace gsim::ibert
