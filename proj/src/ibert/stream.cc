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

#include "ibert/stream.h"

#include <cmath>

#include "common/error.h"
#include "ibert/attention.h"
#include "ibert/requant.h"

namespace gsim::ibert {

using runtime::Firing;
using runtime::StreamPacket;

namespace {

uint64_t ceil_div(uint64_t a, uint64_t b) { return (a + b - 1) / b; }

int lanes_of(const KernelHw& hw, int dim) { return hw.lanes > 0 ? hw.lanes : dim; }

void check_row(const StreamPacket& p, int cols, const char* what) {
  if (static_cast<int>(p.payload.size()) != cols) {
    throw simulation_error("shape mismatch", std::string(what) + " row of " +
                                                 std::to_string(p.payload.size()) +
                                                 " bytes, expected " + std::to_string(cols));
  }
}

void emit_all(Firing& f, const QuantTensor& t, int outputs, bool last_eof) {
  for (int r = 0; r < t.rows; ++r) {
    std::vector<uint8_t> bytes = row_bytes(t, r);
    bool eof = last_eof && r + 1 == t.rows;
    for (int o = 0; o < outputs; ++o) f.outputs.push_back({o, bytes, eof});
  }
}

}  // namespace

uint64_t linear_ii(int in_dim, int cols, const KernelHw& hw) {
  return ceil_div(uint64_t(in_dim) * cols, uint64_t(hw.tiles) * hw.pes);
}

uint64_t linear_latency(int in_dim, int cols, const KernelHw& hw, bool gelu) {
  return linear_ii(in_dim, cols, hw) + ceil_div(cols, 16) + 8 + (gelu ? 16 : 0);
}

uint64_t scores_row_ii(int m, int head_dim, const KernelHw& hw) {
  return ceil_div(m, hw.num_pe) * ceil_div(head_dim, lanes_of(hw, head_dim)) + ceil_div(m, 16);
}

uint64_t scores_row_latency(int m, int head_dim, const KernelHw& hw) {
  return scores_row_ii(m, head_dim, hw) + 3 * ceil_div(m, 16) + 10;
}

uint64_t context_group_ii(int m, int n, const KernelHw& hw) {
  return uint64_t(m) * ceil_div(n, lanes_of(hw, n));
}

uint64_t layernorm_ii(int dim) { return 3 * ceil_div(dim, 64) + 4; }

uint64_t layernorm_latency(int dim) { return layernorm_ii(dim) + ceil_div(dim, 16) + 8; }

LinearKernel::LinearKernel(std::shared_ptr<const LinearParams> params, int col_begin,
                           int col_end, bool gelu, KernelHw hw, int outputs)
    : p_(std::move(params)), begin_(col_begin), end_(col_end), gelu_(gelu), hw_(hw),
      outputs_(outputs) {
  check_linear_params(*p_, "linear kernel");
  if (begin_ < 0 || end_ > p_->out_dim || begin_ >= end_) {
    throw validation_error("config fault", "column range outside the weight matrix");
  }
  if (hw_.tiles < 1 || hw_.pes < 1) throw validation_error("config fault", "tiles and pes must be >= 1");
  const double acc_scale = p_->in_scale * p_->weight_scale;
  if (gelu_) {
    gelu_op_.emplace(acc_scale, p_->out_scale);
  } else {
    quant_ = Requantizer(acc_scale, p_->out_scale);
  }
}

Firing LinearKernel::fire(std::vector<StreamPacket>& in) {
  check_row(in[0], p_->in_dim, "linear input");
  QuantTensor x = tensor_from_rows({in[0].payload}, p_->in_dim, p_->in_scale);
  AccTensor acc = linear(x, *p_, begin_, end_);
  QuantTensor y;
  if (gelu_) {
    y = gelu_op_->forward(acc);
  } else {
    y = QuantTensor(acc.rows, acc.cols, p_->out_scale);
    for (size_t i = 0; i < acc.data.size(); ++i) {
      y.data[i] = static_cast<int8_t>(quant_.apply(acc.data[i]));
    }
  }
  const int cols = end_ - begin_;
  Firing f;
  f.ii = linear_ii(p_->in_dim, cols, hw_);
  f.latency = linear_latency(p_->in_dim, cols, hw_, gelu_);
  f.iterations = static_cast<uint32_t>(f.ii);
  emit_all(f, y, outputs_, in[0].end_of_frame);
  return f;
}

ScoresKernel::ScoresKernel(int head_dim, double q_scale, double k_scale, KernelHw hw)
    : dim_(head_dim), q_scale_(q_scale), k_scale_(k_scale), hw_(hw),
      softmax_(q_scale * k_scale / std::sqrt(static_cast<double>(head_dim))) {
  if (hw_.num_pe < 1) throw validation_error("config fault", "NUM_PE must be >= 1");
}

std::vector<int> ScoresKernel::need() const { return {k_done_ ? 0 : 1}; }

Firing ScoresKernel::fire(std::vector<StreamPacket>& in) {
  Firing f;
  f.latency = 1;
  if (!k_done_) {
    check_row(in[0], dim_, "K");
    k_rows_.push_back(std::move(in[0].payload));
    f.ii = 1;
    if (in[0].end_of_frame) {
      k_done_ = true;
      const int m = static_cast<int>(k_rows_.size());
      f.ii += min_padding(m, hw_.num_pe) - m;  // zero rows written into the PE buffers
    }
    return f;
  }
  check_row(in[0], dim_, "Q");
  const int m = static_cast<int>(k_rows_.size());
  QuantTensor q = tensor_from_rows({in[0].payload}, dim_, q_scale_);
  QuantTensor k = tensor_from_rows(k_rows_, dim_, k_scale_);
  AccTensor s = attention_dot_product(q, k, hw_.num_pe);
  QuantTensor probs(1, m, IntSoftmax::output_scale());
  softmax_.forward_row(s.data, probs.data);
  f.ii = scores_row_ii(m, dim_, hw_);
  f.latency = scores_row_latency(m, dim_, hw_);
  f.iterations = static_cast<uint32_t>(ceil_div(m, hw_.num_pe));
  const bool eof = in[0].end_of_frame;
  f.outputs.push_back({0, row_bytes(probs, 0), eof});
  if (eof) {
    k_rows_.clear();
    k_done_ = false;
  }
  return f;
}

ContextKernel::ContextKernel(int head_dim, double v_scale, double out_scale, KernelHw hw)
    : dim_(head_dim), v_scale_(v_scale), hw_(hw),
      quant_(IntSoftmax::output_scale() * v_scale, out_scale), out_scale_(out_scale) {
  if (hw_.num_pe < 1) throw validation_error("config fault", "NUM_PE must be >= 1");
}

std::vector<int> ContextKernel::need() const { return {v_done_ ? 0 : 1}; }

Firing ContextKernel::fire(std::vector<StreamPacket>& in) {
  Firing f;
  f.latency = 1;
  f.ii = 1;
  if (!v_done_) {
    check_row(in[0], dim_, "V");
    v_rows_.push_back(std::move(in[0].payload));
    v_done_ = in[0].end_of_frame;
    return f;
  }
  const int m = static_cast<int>(v_rows_.size());
  check_row(in[0], m, "probability");
  const bool eof = in[0].end_of_frame;
  p_rows_.push_back(std::move(in[0].payload));
  if (static_cast<int>(p_rows_.size()) < hw_.num_pe && !eof) return f;

  QuantTensor p = tensor_from_rows(p_rows_, m, IntSoftmax::output_scale());
  QuantTensor v = tensor_from_rows(v_rows_, dim_, v_scale_);
  AccTensor acc = softmax_matmul(p, v, hw_.num_pe);
  QuantTensor y(acc.rows, acc.cols, out_scale_);
  for (size_t i = 0; i < acc.data.size(); ++i) {
    y.data[i] = static_cast<int8_t>(quant_.apply(acc.data[i]));
  }
  f.ii = context_group_ii(m, dim_, hw_);
  f.latency = f.ii + 4;
  f.iterations = static_cast<uint32_t>(m);
  emit_all(f, y, 1, eof);
  p_rows_.clear();
  if (eof) {
    v_rows_.clear();
    v_done_ = false;
  }
  return f;
}

LayerNormKernel::LayerNormKernel(const LayerNormParams& params, int outputs)
    : p_(params), ln_(params), outputs_(outputs) {}

Firing LayerNormKernel::fire(std::vector<StreamPacket>& in) {
  check_row(in[0], p_.dim, "layernorm main");
  check_row(in[1], p_.dim, "layernorm residual");
  QuantTensor main = tensor_from_rows({in[0].payload}, p_.dim, p_.main_scale);
  QuantTensor res = tensor_from_rows({in[1].payload}, p_.dim, p_.residual_scale);
  QuantTensor y = ln_.forward(main, res);
  Firing f;
  f.ii = layernorm_ii(p_.dim);
  f.latency = layernorm_latency(p_.dim);
  emit_all(f, y, outputs_, in[0].end_of_frame);
  return f;
}

}  // namespace gsim::ibert
