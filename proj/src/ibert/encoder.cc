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

#include "ibert/encoder.h"

#include <cmath>
#include <string>

#include "common/error.h"
#include "ibert/attention.h"
#include "ibert/requant.h"

namespace gsim::ibert {

void EncoderConfig::check() const {
  if (hidden <= 0 || heads <= 0 || ffn <= 0 || max_seq <= 0 || layers <= 0) {
    throw validation_error("config fault", "encoder dimensions must be positive");
  }
  if (hidden % heads != 0) {
    throw validation_error("config fault", "hidden size " + std::to_string(hidden) +
                                               " is not divisible by " + std::to_string(heads) +
                                               " heads");
  }
}

namespace {

void expect_linear(const LinearParams& l, int in, int out, double in_scale, const char* name) {
  check_linear_params(l, name);
  if (l.in_dim != in || l.out_dim != out) {
    throw validation_error("shape mismatch", std::string(name) + " is " +
                                                 std::to_string(l.in_dim) + "x" +
                                                 std::to_string(l.out_dim) + ", expected " +
                                                 std::to_string(in) + "x" + std::to_string(out));
  }
  if (l.in_scale != in_scale) {
    throw validation_error("config fault", std::string(name) +
                                               ": input scale does not match upstream output");
  }
}

}  // namespace

void check_encoder_params(const EncoderParams& p, const EncoderConfig& cfg) {
  cfg.check();
  const int h = cfg.hidden;
  expect_linear(p.q, h, h, p.in_scale, "q");
  expect_linear(p.k, h, h, p.in_scale, "k");
  expect_linear(p.v, h, h, p.in_scale, "v");
  if (p.attention.heads != cfg.heads || p.attention.head_dim != cfg.head_dim() ||
      !(p.attention.context_scale > 0)) {
    throw validation_error("config fault", "attention parameters do not match the config");
  }
  expect_linear(p.attn_out, h, h, p.attention.context_scale, "attn_out");
  check_layernorm_params(p.ln1, "ln1");
  if (p.ln1.dim != h || p.ln1.main_scale != p.attn_out.out_scale ||
      p.ln1.residual_scale != p.in_scale) {
    throw validation_error("config fault", "ln1 scales do not match its inputs");
  }
  expect_linear(p.ffn1, h, cfg.ffn, p.ln1.out_scale, "ffn1");
  expect_linear(p.ffn2, cfg.ffn, h, p.ffn1.out_scale, "ffn2");
  check_layernorm_params(p.ln2, "ln2");
  if (p.ln2.dim != h || p.ln2.main_scale != p.ffn2.out_scale ||
      p.ln2.residual_scale != p.ln1.out_scale) {
    throw validation_error("config fault", "ln2 scales do not match its inputs");
  }
}

double score_scale(const EncoderParams& p) {
  return p.q.out_scale * p.k.out_scale / std::sqrt(static_cast<double>(p.attention.head_dim));
}

AttentionHeadOut attention_head(const QuantTensor& q, const QuantTensor& k, const QuantTensor& v,
                                const EncoderParams& p, int num_pe) {
  AccTensor scores = attention_dot_product(q, k, num_pe);
  scores.scale = score_scale(p);
  AttentionHeadOut out;
  out.probs = IntSoftmax(scores.scale).forward(scores);
  AccTensor ctx = softmax_matmul(out.probs, v, num_pe);
  out.context = requantize(ctx, p.attention.context_scale);
  return out;
}

QuantTensor encoder_forward(const QuantTensor& x, const EncoderParams& p,
                            const EncoderConfig& cfg, int num_pe) {
  if (x.rows < 1 || x.rows > cfg.max_seq) {
    throw validation_error("shape mismatch", "sequence length " + std::to_string(x.rows) +
                                                 " outside 1.." + std::to_string(cfg.max_seq));
  }
  if (x.cols != cfg.hidden) {
    throw validation_error("shape mismatch", "input has " + std::to_string(x.cols) +
                                                 " columns, hidden size is " +
                                                 std::to_string(cfg.hidden));
  }
  QuantTensor xin = x;
  xin.scale = p.in_scale;
  const QuantTensor q = requantize(linear(xin, p.q), p.q.out_scale);
  const QuantTensor k = requantize(linear(xin, p.k), p.k.out_scale);
  const QuantTensor v = requantize(linear(xin, p.v), p.v.out_scale);

  const int dh = cfg.head_dim();
  std::vector<QuantTensor> heads;
  for (int h = 0; h < cfg.heads; ++h) {
    heads.push_back(attention_head(column_slice(q, h * dh, (h + 1) * dh),
                                   column_slice(k, h * dh, (h + 1) * dh),
                                   column_slice(v, h * dh, (h + 1) * dh), p, num_pe)
                        .context);
  }
  const QuantTensor ctx = concat_columns(heads);
  const QuantTensor ao = requantize(linear(ctx, p.attn_out), p.attn_out.out_scale);
  const QuantTensor ln1 = IntLayerNorm(p.ln1).forward(ao, xin);
  const QuantTensor g =
      IntGelu(p.ln1.out_scale * p.ffn1.weight_scale, p.ffn1.out_scale).forward(linear(ln1, p.ffn1));
  const QuantTensor f2 = requantize(linear(g, p.ffn2), p.ffn2.out_scale);
  return IntLayerNorm(p.ln2).forward(f2, ln1);
}

QuantTensor model_forward(const QuantTensor& x, const std::vector<EncoderParams>& layers,
                          const EncoderConfig& cfg, int num_pe) {
  QuantTensor h = x;
  for (const auto& p : layers) h = encoder_forward(h, p, cfg, num_pe);
  return h;
}

}  // namespace gsim::ibert
