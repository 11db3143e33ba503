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

#include "builder/synth.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "ibert/attention.h"
#include "ibert/linear.h"
#include "ibert/nonlinear.h"
#include "ibert/requant.h"
#include "ibert/tensor_io.h"

namespace gsim::builder {
namespace {

using ibert::AccTensor;
using ibert::QuantTensor;

// Sum of four uniform bytes, centered: a cheap bell shape that is identical
// on every standard library.
int8_t bell_int8(std::mt19937_64& rng) {
  uint64_t r = rng();
  int s = 0;
  for (int i = 0; i < 4; ++i) s += static_cast<int>((r >> (8 * i)) & 0xff);
  return static_cast<int8_t>(std::clamp((s - 510) / 3, -127, 127));
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double range_scale(double max_abs_real, int bits, double fallback) {
  const double top = std::ldexp(1.0, bits - 1) - 1;
  return max_abs_real > 0 ? max_abs_real / top : fallback;
}

double calibrate(const AccTensor& a) {
  int64_t mx = 0;
  for (int32_t v : a.data) mx = std::max<int64_t>(mx, std::llabs(v));
  return range_scale(static_cast<double>(mx) * a.scale, 8, a.scale);
}

ibert::LinearParams make_linear(int in, int out, double in_scale, std::mt19937_64& rng) {
  ibert::LinearParams p;
  p.in_dim = in;
  p.out_dim = out;
  p.in_scale = in_scale;
  p.weight_scale = 1.0 / (64.0 * std::sqrt(static_cast<double>(in)));
  p.weight.resize(size_t(in) * out);
  for (auto& w : p.weight) w = bell_int8(rng);
  p.bias.resize(out);
  const int64_t span = int64_t{in} * 32;
  for (auto& b : p.bias) b = static_cast<int32_t>(static_cast<int64_t>(rng() % (2 * span + 1)) - span);
  return p;
}

ibert::LayerNormParams make_layernorm(int dim, double main_scale, double residual_scale,
                                      std::mt19937_64& rng) {
  ibert::LayerNormParams p;
  p.dim = dim;
  p.main_scale = main_scale;
  p.residual_scale = residual_scale;
  p.gamma.resize(dim);
  p.beta.resize(dim);
  for (int j = 0; j < dim; ++j) {
    p.gamma[j] = static_cast<float>(0.75 + 0.5 * uniform01(rng));
    p.beta[j] = static_cast<float>(0.2 * (uniform01(rng) - 0.5));
  }
  return p;
}

// Fixes input_scale, shift and out_scale from a calibration pass.
void calibrate_layernorm(ibert::LayerNormParams& p, const QuantTensor& main,
                         const QuantTensor& res) {
  double mx = 0;
  for (size_t i = 0; i < main.data.size(); ++i) {
    mx = std::max(mx, std::fabs(main.data[i] * p.main_scale + res.data[i] * p.residual_scale));
  }
  p.input_scale = range_scale(mx, ibert::IntLayerNorm::kInputBits, p.main_scale);
  p.out_scale = 1.0;
  ibert::IntLayerNorm probe(p);
  const double ln_scale = std::sqrt(static_cast<double>(p.dim)) / std::ldexp(1.0, 30);
  double shift_needed = 0;
  double out_max = 0;
  std::vector<int64_t> row(p.dim);
  for (int r = 0; r < main.rows; ++r) {
    double mean = 0;
    for (int j = 0; j < p.dim; ++j) {
      row[j] = probe.fold(main.at(r, j), res.at(r, j));
      mean += static_cast<double>(row[j]);
    }
    mean /= p.dim;
    double var = 0;
    for (int j = 0; j < p.dim; ++j) var += (row[j] - mean) * (row[j] - mean);
    if (var > 0) shift_needed = std::max(shift_needed, std::ceil(std::log2(std::sqrt(var / std::ldexp(1.0, 32)))));
    auto y = probe.normalize(row);
    for (int j = 0; j < p.dim; ++j) {
      const double bias = std::floor((double(p.beta[j]) / double(p.gamma[j])) / ln_scale);
      out_max = std::max(out_max, std::fabs((y[j] + bias) * ln_scale * p.gamma[j]));
    }
  }
  p.shift = static_cast<int>(std::max(0.0, shift_needed));
  p.out_scale = range_scale(out_max, 8, 1.0 / 32);
}

}  // namespace

ibert::EncoderParams synthesize_encoder(const ibert::EncoderConfig& cfg, double in_scale,
                                        uint64_t seed) {
  cfg.check();
  std::mt19937_64 rng(seed);
  const int h = cfg.hidden;
  const int dh = cfg.head_dim();
  const int m = std::min(cfg.max_seq, 32);
  ibert::EncoderParams p;
  p.in_scale = in_scale;
  QuantTensor x = ibert::random_tensor(m, h, rng(), in_scale);

  auto project = [&](ibert::LinearParams& l, const QuantTensor& in) {
    AccTensor acc = ibert::linear(in, l);
    l.out_scale = calibrate(acc);
    return ibert::requantize(acc, l.out_scale);
  };

  p.q = make_linear(h, h, in_scale, rng);
  p.k = make_linear(h, h, in_scale, rng);
  p.v = make_linear(h, h, in_scale, rng);
  QuantTensor q = project(p.q, x), k = project(p.k, x), v = project(p.v, x);

  p.attention.heads = cfg.heads;
  p.attention.head_dim = dh;
  const double sscale = q.scale * k.scale / std::sqrt(static_cast<double>(dh));
  std::vector<AccTensor> ctx_acc;
  double ctx_max = 0;
  for (int hd = 0; hd < cfg.heads; ++hd) {
    AccTensor s = ibert::attention_dot_product(ibert::column_slice(q, hd * dh, (hd + 1) * dh),
                                               ibert::column_slice(k, hd * dh, (hd + 1) * dh), 1);
    s.scale = sscale;
    QuantTensor probs = ibert::IntSoftmax(sscale).forward(s);
    ctx_acc.push_back(
        ibert::softmax_matmul(probs, ibert::column_slice(v, hd * dh, (hd + 1) * dh), 1));
    for (int32_t c : ctx_acc.back().data) {
      ctx_max = std::max(ctx_max, std::fabs(c * ctx_acc.back().scale));
    }
  }
  p.attention.context_scale = range_scale(ctx_max, 8, ctx_acc[0].scale);
  std::vector<QuantTensor> heads;
  for (const auto& c : ctx_acc) heads.push_back(ibert::requantize(c, p.attention.context_scale));
  QuantTensor ctx = ibert::concat_columns(heads);

  p.attn_out = make_linear(h, h, p.attention.context_scale, rng);
  QuantTensor ao = project(p.attn_out, ctx);

  p.ln1 = make_layernorm(h, p.attn_out.out_scale, in_scale, rng);
  calibrate_layernorm(p.ln1, ao, x);
  QuantTensor l1 = ibert::IntLayerNorm(p.ln1).forward(ao, x);

  p.ffn1 = make_linear(h, cfg.ffn, p.ln1.out_scale, rng);
  AccTensor f1 = ibert::linear(l1, p.ffn1);
  {
    ibert::IntGelu probe(f1.scale, 1.0);
    double mx = 0;
    for (int32_t a : f1.data) mx = std::max(mx, std::fabs(probe.raw(a) * probe.raw_scale()));
    p.ffn1.out_scale = range_scale(mx, 8, 1.0 / 32);
  }
  QuantTensor g = ibert::IntGelu(f1.scale, p.ffn1.out_scale).forward(f1);

  p.ffn2 = make_linear(cfg.ffn, h, p.ffn1.out_scale, rng);
  QuantTensor f2 = project(p.ffn2, g);

  p.ln2 = make_layernorm(h, p.ffn2.out_scale, p.ln1.out_scale, rng);
  calibrate_layernorm(p.ln2, f2, l1);
  return p;
}

std::vector<ibert::EncoderParams> synthesize_model(const ibert::EncoderConfig& cfg,
                                                   uint64_t seed) {
  std::vector<ibert::EncoderParams> out;
  double scale = kModelInputScale;
  std::mt19937_64 seeds(seed);
  for (int l = 0; l < cfg.layers; ++l) {
    out.push_back(synthesize_encoder(cfg, scale, seeds()));
    scale = out.back().out_scale();
  }
  return out;
}

}  // namespace gsim::builder
