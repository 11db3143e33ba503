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

#ifndef GSIM_IBERT_NONLINEAR_H_
#define GSIM_IBERT_NONLINEAR_H_

#include <cstdint>
#include <span>
#include <vector>

#include "ibert/requant.h"
#include "ibert/tensor.h"

namespace gsim::ibert {

// Integer-only softmax along rows with the second-order polynomial
// exponential. Output codes are in [0, 127] at scale 2^-7.
class IntSoftmax {
 public:
  static constexpr int kOutputBits = 7;
  static constexpr int kExpBits = 16;

  explicit IntSoftmax(double in_scale);

  QuantTensor forward(const AccTensor& x) const;
  void forward_row(std::span<const int32_t> x, std::span<int8_t> out) const;
  static double output_scale() { return 1.0 / (1 << kOutputBits); }

 private:
  double in_scale_;
  int64_t x0_int_, b_int_, c_int_;
  FixedPointMultiplier exp_to_16_;
};

// Integer-only GELU via the polynomial erf, followed by requantization of
// the result to INT8 at out_scale.
class IntGelu {
 public:
  IntGelu(double in_scale, double out_scale);

  // GELU in the intermediate integer domain (before the INT8 requant).
  int64_t raw(int64_t x) const;
  double raw_scale() const { return raw_scale_; }
  QuantTensor forward(const AccTensor& x) const;

 private:
  int64_t b_int_, c_int_, shift_int_;
  double raw_scale_;
  double out_scale_;
  Requantizer out_;
};

struct LayerNormParams {
  int dim = 0;
  std::vector<float> gamma;
  std::vector<float> beta;
  double main_scale = 1.0;      // INT8 scale of the main branch input
  double residual_scale = 1.0;  // INT8 scale of the residual input
  double input_scale = 1.0;     // scale of the 22-bit LayerNorm input
  int shift = 0;                // variance pre-shift, fixed at calibration
  double out_scale = 1.0;

  bool operator==(const LayerNormParams&) const = default;
};

void check_layernorm_params(const LayerNormParams& p, const char* where);

// Residual add + integer-only LayerNorm + requant to INT8. The residual is
// folded in by rescaling both INT8 operands into one 22-bit integer.
class IntLayerNorm {
 public:
  static constexpr int kInputBits = 22;

  explicit IntLayerNorm(const LayerNormParams& p);

  QuantTensor forward(const QuantTensor& main, const QuantTensor& residual) const;
  // Normalized integers before the affine step: floor((x - mean) * factor / 2)
  // with factor = floor(2^31 / std). A zero-variance row yields zeros.
  std::vector<int64_t> normalize(std::span<const int64_t> x) const;
  // Residual-folded 22-bit LayerNorm input.
  int64_t fold(int64_t main, int64_t residual) const;

 private:
  LayerNormParams p_;
  FixedPointMultiplier main_to_in_, res_to_in_;
  std::vector<int64_t> bias_int_;
  Requantizer out_;
};

// Integer square root, floor(sqrt(v)) for v >= 0.
uint64_t isqrt(uint64_t v);

}  // namespace gsim::ibert

#endif  // GSIM_IBERT_NONLINEAR_H_
