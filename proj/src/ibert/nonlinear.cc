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

#include "ibert/nonlinear.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "common/error.h"

namespace gsim::ibert {
namespace {

// Polynomial exp on [-ln2, 0]: a(x + b)x + c, normalized by a.
constexpr double kExpX0 = -0.6931;
constexpr int kExpConst = 30;
constexpr double kExpCoef0 = 0.35815147;
constexpr double kExpCoef1 = 0.96963238 / 0.35815147;
constexpr double kExpCoef2 = 1.0 / 0.35815147;

// erf(x) ~ sign(x) * a * (min(|x|, -b) + b)^2 + 1 over a.
constexpr double kGeluK = 1.4142;
constexpr int kGeluConst = 14;
constexpr double kGeluCoef0 = -0.2888;
constexpr double kGeluCoef1 = -1.769;
constexpr double kGeluCoef2 = 1.0 / -0.2888;

int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

int64_t checked_floor(double v, const char* what) {
  double f = std::floor(v);
  if (!(std::fabs(f) < 9.0e18)) {
    throw validation_error("config fault", std::string(what) + " constant out of range");
  }
  return static_cast<int64_t>(f);
}

}  // namespace

uint64_t isqrt(uint64_t v) {
  uint64_t r = static_cast<uint64_t>(std::sqrt(static_cast<long double>(v)));
  while (r > 0 && static_cast<unsigned __int128>(r) * r > v) --r;
  while (static_cast<unsigned __int128>(r + 1) * (r + 1) <= v) ++r;
  return r;
}

IntSoftmax::IntSoftmax(double in_scale) : in_scale_(in_scale) {
  if (!(in_scale > 0)) throw validation_error("config fault", "softmax input scale must be positive");
  x0_int_ = checked_floor(kExpX0 / in_scale, "softmax x0");
  b_int_ = checked_floor(kExpCoef1 / in_scale, "softmax b");
  c_int_ = checked_floor(kExpCoef2 / (in_scale * in_scale), "softmax c");
  const double exp_scale = kExpCoef0 * in_scale * in_scale / std::ldexp(1.0, kExpConst);
  const double exp16_scale = 1.0 / ((1 << (kExpBits - 1)) - 1);
  exp_to_16_ = FixedPointMultiplier::from_ratio(exp_scale / exp16_scale);
}

void IntSoftmax::forward_row(std::span<const int32_t> x, std::span<int8_t> out) const {
  if (x.empty()) return;
  const int64_t mx = *std::max_element(x.begin(), x.end());
  std::vector<int64_t> e16(x.size());
  int64_t sum = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    int64_t v = std::max<int64_t>(int64_t{x[i]} - mx, kExpConst * x0_int_);
    int64_t q = v / x0_int_;  // both non-positive, so this is the floor
    int64_t r = v - x0_int_ * q;
    __int128 z = static_cast<__int128>(r + b_int_) * r + c_int_;
    z <<= (kExpConst - q);
    if (z < 0) z = 0;
    int64_t e = shift_round_half_even(z * exp_to_16_.m, exp_to_16_.e);
    e16[i] = clamp_bits(e, kExpBits);
    sum += e16[i];
  }
  const int64_t factor = sum > 0 ? (int64_t{1} << 32) / sum : 0;
  for (size_t i = 0; i < x.size(); ++i) {
    int64_t p = shift_floor(static_cast<__int128>(e16[i]) * factor, 32 - kOutputBits);
    out[i] = static_cast<int8_t>(std::clamp<int64_t>(p, 0, 127));
  }
}

QuantTensor IntSoftmax::forward(const AccTensor& x) const {
  QuantTensor out(x.rows, x.cols, output_scale());
  for (int r = 0; r < x.rows; ++r) {
    forward_row({x.data.data() + size_t(r) * x.cols, size_t(x.cols)},
                {out.data.data() + size_t(r) * x.cols, size_t(x.cols)});
  }
  return out;
}

IntGelu::IntGelu(double in_scale, double out_scale) {
  if (!(in_scale > 0)) throw validation_error("config fault", "GELU input scale must be positive");
  const double s = in_scale / kGeluK;
  b_int_ = checked_floor(kGeluCoef1 / s, "GELU b");
  c_int_ = checked_floor(kGeluCoef2 / (s * s), "GELU c");
  const double sig_scale = s * s * kGeluCoef0 * std::ldexp(1.0, kGeluConst);
  shift_int_ = checked_floor(1.0 / sig_scale, "GELU shift");
  raw_scale_ = in_scale * sig_scale / 2;
  out_scale_ = out_scale;
  out_ = Requantizer(raw_scale_, out_scale);
}

int64_t IntGelu::raw(int64_t x) const {
  const int64_t sign = (x > 0) - (x < 0);
  const int64_t a = std::min<int64_t>(x < 0 ? -x : x, -b_int_);
  const int64_t t = a + b_int_;
  const int64_t y = floor_div(sign * (t * t + c_int_), int64_t{1} << kGeluConst);
  __int128 v = static_cast<__int128>(x) * (y + shift_int_);
  if (v > std::numeric_limits<int64_t>::max() || v < std::numeric_limits<int64_t>::min()) {
    throw simulation_error("arithmetic fault", "GELU intermediate overflow");
  }
  return static_cast<int64_t>(v);
}

QuantTensor IntGelu::forward(const AccTensor& x) const {
  QuantTensor out(x.rows, x.cols, out_scale_);
  for (size_t i = 0; i < x.data.size(); ++i) {
    out.data[i] = static_cast<int8_t>(out_.apply(raw(x.data[i])));
  }
  return out;
}

void check_layernorm_params(const LayerNormParams& p, const char* where) {
  if (p.dim <= 0 || p.gamma.size() != size_t(p.dim) || p.beta.size() != size_t(p.dim)) {
    throw validation_error("shape mismatch", std::string(where) + ": gamma/beta size mismatch");
  }
  for (float g : p.gamma) {
    if (g == 0.0f || !std::isfinite(g)) {
      throw validation_error("config fault", std::string(where) + ": gamma must be finite and nonzero");
    }
  }
  if (!(p.main_scale > 0 && p.residual_scale > 0 && p.input_scale > 0 && p.out_scale > 0)) {
    throw validation_error("config fault", std::string(where) + ": scales must be positive");
  }
  if (p.shift < 0 || p.shift > 31) {
    throw validation_error("config fault", std::string(where) + ": shift outside 0..31");
  }
}

IntLayerNorm::IntLayerNorm(const LayerNormParams& p) : p_(p) {
  check_layernorm_params(p, "layernorm");
  main_to_in_ = FixedPointMultiplier::from_ratio(p.main_scale / p.input_scale);
  res_to_in_ = FixedPointMultiplier::from_ratio(p.residual_scale / p.input_scale);
  const double ln_scale = std::sqrt(static_cast<double>(p.dim)) / std::ldexp(1.0, 30);
  std::vector<double> channel_scales(p.dim);
  bias_int_.resize(p.dim);
  for (int j = 0; j < p.dim; ++j) {
    const double ratio = static_cast<double>(p.beta[j]) / static_cast<double>(p.gamma[j]);
    bias_int_[j] = checked_floor(ratio / ln_scale, "LayerNorm bias");
    channel_scales[j] = ln_scale * p.gamma[j];
  }
  out_ = Requantizer(channel_scales, p.out_scale);
}

int64_t IntLayerNorm::fold(int64_t main, int64_t residual) const {
  return clamp_bits(main_to_in_.apply(main) + res_to_in_.apply(residual), kInputBits);
}

std::vector<int64_t> IntLayerNorm::normalize(std::span<const int64_t> x) const {
  const int64_t n = static_cast<int64_t>(x.size());
  int64_t sum = 0;
  for (int64_t v : x) sum += v;
  // round(sum / n), ties to even
  int64_t mean = floor_div(sum, n);
  const int64_t rem2 = 2 * (sum - mean * n);
  if (rem2 > n || (rem2 == n && (mean & 1))) ++mean;

  std::vector<int64_t> y(x.size());
  uint64_t var = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    y[i] = x[i] - mean;
    const int64_t ys = shift_floor(y[i], p_.shift);
    var += static_cast<uint64_t>(ys * ys);
  }
  const uint64_t std_int = isqrt(var) << p_.shift;
  if (std_int == 0) return std::vector<int64_t>(x.size(), 0);
  const int64_t factor = static_cast<int64_t>((uint64_t{1} << 31) / std_int);
  for (auto& v : y) v = shift_floor(static_cast<__int128>(v) * factor, 1);
  return y;
}

QuantTensor IntLayerNorm::forward(const QuantTensor& main, const QuantTensor& residual) const {
  if (main.cols != p_.dim || residual.cols != p_.dim || main.rows != residual.rows) {
    throw validation_error("shape mismatch", "LayerNorm operands must both be M x " +
                                                 std::to_string(p_.dim));
  }
  QuantTensor out(main.rows, main.cols, p_.out_scale);
  std::vector<int64_t> row(p_.dim);
  for (int r = 0; r < main.rows; ++r) {
    for (int j = 0; j < p_.dim; ++j) row[j] = fold(main.at(r, j), residual.at(r, j));
    auto y = normalize(row);
    for (int j = 0; j < p_.dim; ++j) {
      out.at(r, j) = static_cast<int8_t>(out_.apply(y[j] + bias_int_[j], j));
    }
  }
  return out;
}

}  // namespace gsim::ibert
