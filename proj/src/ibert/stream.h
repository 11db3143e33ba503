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

#ifndef GSIM_IBERT_STREAM_H_
#define GSIM_IBERT_STREAM_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ibert/linear.h"
#include "ibert/nonlinear.h"
#include "ibert/tensor.h"
#include "runtime/kernel.h"

namespace gsim::ibert {

// Hardware knobs of one compute kernel. tiles * pes multiply-accumulates
// per cycle for Linear; num_pe and lanes shape the attention kernels
// (lanes = 0 means one lane per head-dimension element).
struct KernelHw {
  int tiles = 1;
  int pes = 1;
  int num_pe = 12;
  int lanes = 0;
  bool operator==(const KernelHw&) const = default;
};

// Declared cycle costs, one firing per row.
uint64_t linear_ii(int in_dim, int cols, const KernelHw& hw);
uint64_t linear_latency(int in_dim, int cols, const KernelHw& hw, bool gelu);
uint64_t scores_row_ii(int m, int head_dim, const KernelHw& hw);
uint64_t scores_row_latency(int m, int head_dim, const KernelHw& hw);
uint64_t context_group_ii(int m, int n, const KernelHw& hw);
uint64_t layernorm_ii(int dim);
uint64_t layernorm_latency(int dim);

// Linear + Quant (or Linear + GELU) over output columns [col_begin,
// col_end). Each input row yields one output row, copied to every output.
class LinearKernel : public runtime::KernelBehavior {
 public:
  LinearKernel(std::shared_ptr<const LinearParams> params, int col_begin, int col_end,
               bool gelu, KernelHw hw, int outputs);
  std::string op() const override { return gelu_ ? "linear_gelu" : "linear_quant"; }
  std::vector<int> need() const override { return {0}; }
  runtime::Firing fire(std::vector<runtime::StreamPacket>& in) override;

 private:
  std::shared_ptr<const LinearParams> p_;
  int begin_, end_;
  bool gelu_;
  KernelHw hw_;
  int outputs_;
  Requantizer quant_;
  std::optional<IntGelu> gelu_op_;
};

// Attention dot product + softmax for one head. Port 0 streams Q rows,
// port 1 streams K rows; every K row of the frame is buffered (padded to
// the PE count) before Q rows are consumed. Emits one probability row
// (M codes in [0, 127]) per Q row.
class ScoresKernel : public runtime::KernelBehavior {
 public:
  ScoresKernel(int head_dim, double q_scale, double k_scale, KernelHw hw);
  std::string op() const override { return "attention_scores"; }
  std::vector<int> need() const override;
  runtime::Firing fire(std::vector<runtime::StreamPacket>& in) override;

 private:
  int dim_;
  double q_scale_, k_scale_;
  KernelHw hw_;
  IntSoftmax softmax_;
  std::vector<std::vector<uint8_t>> k_rows_;
  bool k_done_ = false;
};

// Softmax matrix multiply + Quant for one head. Port 0 streams probability
// rows, port 1 streams V rows; V is buffered first, then probability rows
// are taken NUM_PE at a time, each PE walking the M entries of its row.
class ContextKernel : public runtime::KernelBehavior {
 public:
  ContextKernel(int head_dim, double v_scale, double out_scale, KernelHw hw);
  std::string op() const override { return "softmax_matmul"; }
  std::vector<int> need() const override;
  runtime::Firing fire(std::vector<runtime::StreamPacket>& in) override;

 private:
  int dim_;
  double v_scale_;
  KernelHw hw_;
  Requantizer quant_;
  double out_scale_;
  std::vector<std::vector<uint8_t>> v_rows_;
  std::vector<std::vector<uint8_t>> p_rows_;
  bool v_done_ = false;
};

// Residual add + LayerNorm. Port 0 is the main branch, port 1 the residual.
class LayerNormKernel : public runtime::KernelBehavior {
 public:
  LayerNormKernel(const LayerNormParams& params, int outputs);
  std::string op() const override { return "layernorm"; }
  std::vector<int> need() const override { return {0, 1}; }
  runtime::Firing fire(std::vector<runtime::StreamPacket>& in) override;

 private:
  LayerNormParams p_;
  IntLayerNorm ln_;
  int outputs_;
};

}  // namespace gsim::ibert

#endif  // GSIM_IBERT_STREAM_H_
