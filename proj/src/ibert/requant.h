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

#ifndef GSIM_IBERT_REQUANT_H_
#define GSIM_IBERT_REQUANT_H_

#include <cstdint>
#include <vector>

#include "ibert/tensor.h"

namespace gsim::ibert {

// Dyadic approximation of a real rescaling ratio: ratio ~= m / 2^e with a
// 31-bit mantissa. Built once at configuration time; applying it is pure
// integer arithmetic.
struct FixedPointMultiplier {
  int64_t m = 0;
  int e = 0;

  static FixedPointMultiplier from_ratio(double ratio);
  // round_half_even(z * m / 2^e), exact.
  int64_t apply(int64_t z) const;
};

// Arithmetic shift right with round-half-to-even; negative e shifts left.
int64_t shift_round_half_even(__int128 v, int e);
// Arithmetic shift right rounding toward negative infinity.
int64_t shift_floor(__int128 v, int e);

int64_t clamp_bits(int64_t v, int bits);

// Rescales integers from one scale to another and saturates to a signed
// `bits`-wide range. The residual form adds a second independently rescaled
// operand before saturation.
class Requantizer {
 public:
  Requantizer() = default;
  Requantizer(double in_scale, double out_scale, int bits = 8);
  // One multiplier per column; in_scales.size() must equal the row width.
  Requantizer(const std::vector<double>& in_scales, double out_scale, int bits = 8);

  int64_t apply(int64_t z, int column = 0) const;
  int bits() const { return bits_; }

 private:
  std::vector<FixedPointMultiplier> mult_;
  int bits_ = 8;
};

QuantTensor requantize(const AccTensor& x, double out_scale);

}  // namespace gsim::ibert

#endif  // GSIM_IBERT_REQUANT_H_
