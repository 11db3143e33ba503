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

#ifndef GSIM_IBERT_ATTENTION_H_
#define GSIM_IBERT_ATTENTION_H_

#include "ibert/tensor.h"

namespace gsim::ibert {

// Q . K^T for one head. Rows of q are broadcast to all PEs; rows of k (the
// columns of K^T) are dealt round-robin to NUM_PE PEs after padding k to
// min_padding(M, num_pe) zero rows. Padded output columns are dropped, so the
// result is exactly M_q x M_k. Output scale is q.scale * k.scale.
AccTensor attention_dot_product(const QuantTensor& q, const QuantTensor& k, int num_pe);

// P . V for one head. Each PE owns one row of P and walks its M entries,
// multiplying each by the matching row of V across all N columns. Rows of P
// are padded to min_padding(M, num_pe) and padded outputs dropped.
AccTensor softmax_matmul(const QuantTensor& p, const QuantTensor& v, int num_pe);

}  // namespace gsim::ibert

#endif  // GSIM_IBERT_ATTENTION_H_
