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

#ifndef GSIM_IBERT_ENCODER_H_
#define GSIM_IBERT_ENCODER_H_

#include <string>
#include <vector>

#include "ibert/linear.h"
#include "ibert/nonlinear.h"
#include "ibert/tensor.h"

namespace gsim::ibert {

struct EncoderConfig {
  int hidden = 768;
  int heads = 12;
  int ffn = 3072;
  int max_seq = 128;
  int layers = 12;

  int head_dim() const { return hidden / heads; }
  void check() const;
  bool operator==(const EncoderConfig&) const = default;
};

// The nine parameterized modules of one encoder, in dataflow order.
inline constexpr const char* kModuleNames[] = {"q",   "k",    "v",    "attention", "attn_out",
                                               "ln1", "ffn1", "ffn2", "ln2"};

struct AttentionParams {
  int heads = 0;
  int head_dim = 0;
  double context_scale = 1.0;  // INT8 scale after softmax-matmul + Quant

  bool operator==(const AttentionParams&) const = default;
};

struct EncoderParams {
  double in_scale = 1.0;
  LinearParams q, k, v, attn_out, ffn1, ffn2;
  AttentionParams attention;
  LayerNormParams ln1, ln2;

  double out_scale() const { return ln2.out_scale; }
  bool operator==(const EncoderParams&) const = default;
};

// Checks shapes against the config and the scale chain between modules.
void check_encoder_params(const EncoderParams& p, const EncoderConfig& cfg);

// Attention scores scale: s_q * s_k / sqrt(head_dim).
double score_scale(const EncoderParams& p);

struct AttentionHeadOut {
  QuantTensor probs;    // M x M at scale 2^-7
  QuantTensor context;  // M x head_dim INT8
};

AttentionHeadOut attention_head(const QuantTensor& q, const QuantTensor& k, const QuantTensor& v,
                                const EncoderParams& p, int num_pe);

// Whole-matrix, single-process encoder. This is the reference the
// distributed plan is checked against.
QuantTensor encoder_forward(const QuantTensor& x, const EncoderParams& p,
                            const EncoderConfig& cfg, int num_pe = 12);

QuantTensor model_forward(const QuantTensor& x, const std::vector<EncoderParams>& layers,
                          const EncoderConfig& cfg, int num_pe = 12);

}  // namespace gsim::ibert

#endif  // GSIM_IBERT_ENCODER_H_
