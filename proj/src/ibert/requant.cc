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

#include "ibert/requant.h"

#include <algorithm>
#include <cmath>

#include "common/error.h"

namespace gsim::ibert {

FixedPointMultiplier FixedPointMultiplier::from_ratio(double ratio) {
  if (!std::isfinite(ratio)) {
    throw validation_error("config fault", "non-finite rescaling ratio");
  }
  int exp = 0;
  double mant = std::frexp(ratio, &exp);
  FixedPointMultiplier f;
  // std::round breaks ties away from zero.
  f.m = static_cast<int64_t>(std::round(std::ldexp(mant, 31)));
  f.e = 31 - exp;
  return f;
}

int64_t shift_round_half_even(__int128 v, int e) {
  if (e <= 0) return static_cast<int64_t>(v << -e);
  if (e >= 126) return 0;
  __int128 q = v >> e;  // floor
  __int128 rem = v - (q << e);
  __int128 half = __int128{1} << (e - 1);
  if (rem > half || (rem == half && (q & 1))) ++q;
  return static_cast<int64_t>(q);
}

int64_t shift_floor(__int128 v, int e) {
  if (e <= 0) return static_cast<int64_t>(v << -e);
  if (e >= 126) return v < 0 ? -1 : 0;
  return static_cast<int64_t>(v >> e);
}

int64_t FixedPointMultiplier::apply(int64_t z) const {
  return shift_round_half_even(static_cast<__int128>(z) * m, e);
}

int64_t clamp_bits(int64_t v, int bits) {
  int64_t hi = (int64_t{1} << (bits - 1)) - 1;
  return std::clamp(v, -hi - 1, hi);
}

Requantizer::Requantizer(double in_scale, double out_scale, int bits)
    : Requantizer(std::vector<double>{in_scale}, out_scale, bits) {}

Requantizer::Requantizer(const std::vector<double>& in_scales, double out_scale, int bits)
    : bits_(bits) {
  if (!(out_scale > 0)) throw validation_error("config fault", "output scale must be positive");
  for (double s : in_scales) mult_.push_back(FixedPointMultiplier::from_ratio(s / out_scale));
}

int64_t Requantizer::apply(int64_t z, int column) const {
  const auto& f = mult_.size() == 1 ? mult_[0] : mult_[column];
  return clamp_bits(f.apply(z), bits_);
}

QuantTensor requantize(const AccTensor& x, double out_scale) {
  Requantizer rq(x.scale, out_scale);
  QuantTensor out(x.rows, x.cols, out_scale);
  for (size_t i = 0; i < x.data.size(); ++i) {
    out.data[i] = static_cast<int8_t>(rq.apply(x.data[i]));
  }
  return out;
}

}  // namespace gsim::ibert
