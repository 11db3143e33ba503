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

#ifndef GSIM_IBERT_LINEAR_H_
#define GSIM_IBERT_LINEAR_H_

#include <cstdint>
#include <vector>

#include "ibert/tensor.h"

namespace gsim::ibert {

// Quantized Linear layer parameters. weight is in_dim x out_dim row-major
// (W[h][j]); bias is already in the accumulator scale in_scale*weight_scale.
struct LinearParams {
  int in_dim = 0;
  int out_dim = 0;
  std::vector<int8_t> weight;
  std::vector<int32_t> bias;
  double in_scale = 1.0;
  double weight_scale = 1.0;
  double out_scale = 1.0;  // scale of the INT8 output after Quant (or GELU)

  bool operator==(const LinearParams&) const = default;
};

// Throws a validation error when shapes disagree or the INT32 accumulator
// could overflow for some INT8 input (in_dim*128*128 + |bias| >= 2^31).
void check_linear_params(const LinearParams& p, const char* where);

// out[m][j] = sum_h x[m][h] * W[h][j] + bias[j] over output columns
// [col_begin, col_end). Exact; an out-of-range accumulator is an arithmetic
// fault.
AccTensor linear(const QuantTensor& x, const LinearParams& p, int col_begin = 0,
                 int col_end = -1);

}  // namespace gsim::ibert

#endif  // GSIM_IBERT_LINEAR_H_
