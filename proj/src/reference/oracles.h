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

#ifndef GSIM_REFERENCE_ORACLES_H_
#define GSIM_REFERENCE_ORACLES_H_

// Scalar reference versions of the integer-only I-BERT operators. They follow
// the published software formulation step by step, evaluating every
// intermediate in 113-bit binary floating point instead of shifts and
// integer rounding tricks, so they share no arithmetic code with the kernels
// they check.

#include <cstdint>
#include <optional>
#include <vector>

#include "ibert/encoder.h"
#include "ibert/tensor.h"

namespace gsim::reference {

struct Residual {
  int64_t value;
  double scale;
};

// Fixed-point rescale of z_int from in_scale to out_scale, saturated to a
// signed `bits` range. With a residual, both operands are rescaled
// independently and summed before saturation.
int64_t fixedpoint_mul(int64_t z_int, double in_scale, double out_scale, int bits,
                       std::optional<Residual> residual = std::nullopt);

std::vector<int64_t> linear(const std::vector<int8_t>& x, int rows, const ibert::LinearParams& p);
std::vector<int64_t> matmul_nt(const ibert::QuantTensor& a, const ibert::QuantTensor& b);  // a.b^T
std::vector<int64_t> matmul_nn(const ibert::QuantTensor& a, const ibert::QuantTensor& b);  // a.b

std::vector<int64_t> softmax_row(const std::vector<int64_t>& x, double scale);
int64_t gelu(int64_t x, double in_scale, double out_scale);
// Residual-folded LayerNorm of one row, returning INT8 codes.
std::vector<int64_t> layernorm_row(const std::vector<int64_t>& main,
                                   const std::vector<int64_t>& residual,
                                   const ibert::LayerNormParams& p);
// Pre-affine normalized values of a 22-bit row.
std::vector<int64_t> layernorm_normalize(const std::vector<int64_t>& x, int shift);

ibert::QuantTensor encoder_forward(const ibert::QuantTensor& x, const ibert::EncoderParams& p,
                                   const ibert::EncoderConfig& cfg);

}  // namespace gsim::reference

#endif  // GSIM_REFERENCE_ORACLES_H_
