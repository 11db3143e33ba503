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

#include "reference/oracles.h"

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

namespace gsim::reference {
namespace {

using Quad = boost::multiprecision::cpp_bin_float_quad;

Quad qfloor(const Quad& v) { return boost::multiprecision::floor(v); }

// Python's round() / torch.round(): ties go to the even neighbour.
Quad round_half_even(const Quad& v) {
  Quad f = qfloor(v);
  Quad diff = v - f;
  if (diff > Quad(0.5)) return f + 1;
  if (diff < Quad(0.5)) return f;
  return (boost::multiprecision::fmod(f, Quad(2)) == 0) ? f : f + 1;
}

// decimal ROUND_HALF_UP: ties away from zero.
Quad round_half_away(const Quad& v) {
  return v < 0 ? -qfloor(-v + Quad(0.5)) : qfloor(v + Quad(0.5));
}

Quad pow2(int e) { return boost::multiprecision::ldexp(Quad(1), e); }

Quad clamp_q(const Quad& v, int bits) {
  Quad n = pow2(bits - 1) - 1;
  if (v > n) return n;
  if (v < -n - 1) return -n - 1;
  return v;
}

int64_t to_i64(const Quad& v) { return v.convert_to<int64_t>(); }

// batch_frexp for one value: (mantissa * 2^31 rounded, 31 - exponent).
std::pair<Quad, int> frexp31(double scale) {
  int e = 0;
  Quad m = boost::multiprecision::frexp(Quad(scale), &e);
  return {round_half_away(m * pow2(31)), 31 - e};
}

Quad rescale(const Quad& z, double in_scale, double out_scale) {
  auto [m, e] = frexp31(in_scale / out_scale);
  return round_half_even(z * m / pow2(e));
}

constexpr double kX0 = -0.6931;
constexpr int kExpN = 30;
const double kCoef[3] = {0.35815147, 0.96963238 / 0.35815147, 1.0 / 0.35815147};

constexpr double kK = 1.4142;
constexpr int kGeluN = 14;
const double kErf[3] = {-0.2888, -1.769, 1.0 / -0.2888};

}  // namespace

int64_t fixedpoint_mul(int64_t z_int, double in_scale, double out_scale, int bits,
                       std::optional<Residual> residual) {
  Quad out = rescale(Quad(z_int), in_scale, out_scale);
  if (residual) out += rescale(Quad(residual->value), residual->scale, out_scale);
  return to_i64(clamp_q(out, bits));
}

std::vector<int64_t> linear(const std::vector<int8_t>& x, int rows, const ibert::LinearParams& p) {
  std::vector<int64_t> out(size_t(rows) * p.out_dim);
  for (int m = 0; m < rows; ++m) {
    for (int j = 0; j < p.out_dim; ++j) {
      int64_t acc = p.bias[j];
      for (int h = 0; h < p.in_dim; ++h) {
        acc += int64_t{x[size_t(m) * p.in_dim + h]} * p.weight[size_t(h) * p.out_dim + j];
      }
      out[size_t(m) * p.out_dim + j] = acc;
    }
  }
  return out;
}

std::vector<int64_t> matmul_nt(const ibert::QuantTensor& a, const ibert::QuantTensor& b) {
  std::vector<int64_t> out(size_t(a.rows) * b.rows);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < b.rows; ++j) {
      int64_t acc = 0;
      for (int d = 0; d < a.cols; ++d) acc += int64_t{a.at(i, d)} * b.at(j, d);
      out[size_t(i) * b.rows + j] = acc;
    }
  }
  return out;
}

std::vector<int64_t> matmul_nn(const ibert::QuantTensor& a, const ibert::QuantTensor& b) {
  std::vector<int64_t> out(size_t(a.rows) * b.cols);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < b.cols; ++j) {
      int64_t acc = 0;
      for (int d = 0; d < a.cols; ++d) acc += int64_t{a.at(i, d)} * b.at(d, j);
      out[size_t(i) * b.cols + j] = acc;
    }
  }
  return out;
}

std::vector<int64_t> softmax_row(const std::vector<int64_t>& xs, double scale) {
  const Quad x0_int = qfloor(Quad(kX0 / scale));
  const Quad b_int = qfloor(Quad(kCoef[1] / scale));
  const Quad c_int = qfloor(Quad(kCoef[2] / (scale * scale)));
  const double exp_scale = kCoef[0] * scale * scale / std::ldexp(1.0, kExpN);

  Quad mx = Quad(*std::max_element(xs.begin(), xs.end()));
  std::vector<Quad> e16(xs.size());
  Quad sum = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    Quad x = Quad(xs[i]) - mx;
    if (x < kExpN * x0_int) x = kExpN * x0_int;
    Quad q = qfloor(x / x0_int);
    Quad r = x - x0_int * q;
    Quad z = (r + b_int) * r + c_int;
    Quad e = qfloor(z * pow2(kExpN - q.convert_to<int>()));
    if (e < 0) e = 0;
    // QuantAct(16) on values bounded by 1.0: scale 1/32767.
    e16[i] = clamp_q(rescale(e, exp_scale, 1.0 / 32767), 16);
    sum += e16[i];
  }
  std::vector<int64_t> out(xs.size(), 0);
  if (sum == 0) return out;
  Quad factor = qfloor(pow2(32) / sum);
  for (size_t i = 0; i < xs.size(); ++i) {
    Quad p = qfloor(e16[i] * factor / pow2(32 - 7));
    out[i] = std::clamp<int64_t>(to_i64(p), 0, 127);
  }
  return out;
}

int64_t gelu(int64_t x_in, double in_scale, double out_scale) {
  const double s = in_scale / kK;
  const Quad b_int = qfloor(Quad(kErf[1] / s));
  const Quad c_int = qfloor(Quad(kErf[2] / (s * s)));
  const double sig_scale = s * s * kErf[0] * std::ldexp(1.0, kGeluN);
  const Quad shift_int = qfloor(Quad(1.0 / sig_scale));

  Quad x = Quad(x_in);
  Quad sign = x > 0 ? Quad(1) : (x < 0 ? Quad(-1) : Quad(0));
  Quad a = boost::multiprecision::abs(x);
  if (a > -b_int) a = -b_int;
  Quad y = sign * ((a + b_int) * (a + b_int) + c_int);
  y = qfloor(y / pow2(kGeluN));
  Quad raw = x * (y + shift_int);
  const double raw_scale = in_scale * sig_scale / 2;
  return to_i64(clamp_q(rescale(raw, raw_scale, out_scale), 8));
}

std::vector<int64_t> layernorm_normalize(const std::vector<int64_t>& xs, int shift) {
  const Quad n = Quad(static_cast<int64_t>(xs.size()));
  Quad total = 0;
  for (int64_t v : xs) total += v;
  const Quad mean = round_half_even(total / n);
  std::vector<Quad> y(xs.size());
  Quad var = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    y[i] = Quad(xs[i]) - mean;
    Quad ys = qfloor(y[i] / pow2(shift));
    var += ys * ys;
  }
  Quad std_int = qfloor(boost::multiprecision::sqrt(var)) * pow2(shift);
  std::vector<int64_t> out(xs.size(), 0);
  if (std_int == 0) return out;
  Quad factor = qfloor(pow2(31) / std_int);
  for (size_t i = 0; i < xs.size(); ++i) out[i] = to_i64(qfloor(y[i] * factor / 2));
  return out;
}

std::vector<int64_t> layernorm_row(const std::vector<int64_t>& main,
                                   const std::vector<int64_t>& residual,
                                   const ibert::LayerNormParams& p) {
  std::vector<int64_t> folded(main.size());
  for (size_t j = 0; j < main.size(); ++j) {
    folded[j] = fixedpoint_mul(main[j], p.main_scale, p.input_scale, 22,
                               Residual{residual[j], p.residual_scale});
  }
  std::vector<int64_t> y = layernorm_normalize(folded, p.shift);
  const double dim_sqrt = std::sqrt(static_cast<double>(p.dim));
  const double ln_scale = dim_sqrt / std::ldexp(1.0, 30);
  std::vector<int64_t> out(main.size());
  for (size_t j = 0; j < main.size(); ++j) {
    const double bias = static_cast<double>(p.beta[j]) / static_cast<double>(p.gamma[j]);
    Quad bias_int = qfloor(Quad(bias / ln_scale));
    Quad z = Quad(y[j]) + bias_int;
    out[j] = fixedpoint_mul(to_i64(z), ln_scale * p.gamma[j], p.out_scale, 8);
  }
  return out;
}

namespace {

ibert::QuantTensor requant_all(const std::vector<int64_t>& acc, int rows, int cols,
                               double in_scale, double out_scale) {
  ibert::QuantTensor t(rows, cols, out_scale);
  for (size_t i = 0; i < acc.size(); ++i) {
    t.data[i] = static_cast<int8_t>(fixedpoint_mul(acc[i], in_scale, out_scale, 8));
  }
  return t;
}

ibert::QuantTensor head_cols(const ibert::QuantTensor& t, int h, int dh) {
  ibert::QuantTensor out(t.rows, dh, t.scale);
  for (int r = 0; r < t.rows; ++r)
    for (int c = 0; c < dh; ++c) out.at(r, c) = t.at(r, h * dh + c);
  return out;
}

ibert::QuantTensor ln(const ibert::QuantTensor& main, const ibert::QuantTensor& res,
                      const ibert::LayerNormParams& p) {
  ibert::QuantTensor out(main.rows, main.cols, p.out_scale);
  for (int r = 0; r < main.rows; ++r) {
    std::vector<int64_t> a(main.cols), b(main.cols);
    for (int c = 0; c < main.cols; ++c) {
      a[c] = main.at(r, c);
      b[c] = res.at(r, c);
    }
    auto y = layernorm_row(a, b, p);
    for (int c = 0; c < main.cols; ++c) out.at(r, c) = static_cast<int8_t>(y[c]);
  }
  return out;
}

}  // namespace

ibert::QuantTensor encoder_forward(const ibert::QuantTensor& x, const ibert::EncoderParams& p,
                                   const ibert::EncoderConfig& cfg) {
  const int m = x.rows;
  const int h = cfg.hidden;
  auto proj = [&](const ibert::LinearParams& l, const ibert::QuantTensor& in) {
    return requant_all(linear(in.data, m, l), m, l.out_dim, in.scale * l.weight_scale,
                       l.out_scale);
  };
  ibert::QuantTensor xin = x;
  xin.scale = p.in_scale;
  auto q = proj(p.q, xin), k = proj(p.k, xin), v = proj(p.v, xin);

  const int dh = cfg.head_dim();
  const double sscale = p.q.out_scale * p.k.out_scale / std::sqrt(static_cast<double>(dh));
  ibert::QuantTensor ctx(m, h, p.attention.context_scale);
  for (int hd = 0; hd < cfg.heads; ++hd) {
    auto qh = head_cols(q, hd, dh), kh = head_cols(k, hd, dh), vh = head_cols(v, hd, dh);
    auto scores = matmul_nt(qh, kh);
    ibert::QuantTensor probs(m, m, 1.0 / 128);
    for (int r = 0; r < m; ++r) {
      std::vector<int64_t> row(scores.begin() + size_t(r) * m, scores.begin() + size_t(r + 1) * m);
      auto pr = softmax_row(row, sscale);
      for (int c = 0; c < m; ++c) probs.at(r, c) = static_cast<int8_t>(pr[c]);
    }
    auto c = matmul_nn(probs, vh);
    auto cq = requant_all(c, m, dh, probs.scale * vh.scale, p.attention.context_scale);
    for (int r = 0; r < m; ++r)
      for (int j = 0; j < dh; ++j) ctx.at(r, hd * dh + j) = cq.at(r, j);
  }
  auto ao = proj(p.attn_out, ctx);
  auto l1 = ln(ao, xin, p.ln1);
  auto acc = linear(l1.data, m, p.ffn1);
  ibert::QuantTensor g(m, cfg.ffn, p.ffn1.out_scale);
  for (size_t i = 0; i < acc.size(); ++i) {
    g.data[i] = static_cast<int8_t>(gelu(acc[i], l1.scale * p.ffn1.weight_scale, p.ffn1.out_scale));
  }
  auto f2 = proj(p.ffn2, g);
  return ln(f2, l1, p.ln2);
}

}  // namespace gsim::reference
