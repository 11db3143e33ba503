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

#include "ibert/attention.h"

#include <string>
#include <vector>

#include "common/error.h"

namespace gsim::ibert {

AccTensor attention_dot_product(const QuantTensor& q, const QuantTensor& k, int num_pe) {
  if (q.cols != k.cols) {
    throw validation_error("shape mismatch", "Q has " + std::to_string(q.cols) +
                                                 " columns, K has " + std::to_string(k.cols));
  }
  const int padded = min_padding(k.rows, num_pe);
  const int dim = q.cols;
  std::vector<int8_t> kpad(size_t(padded) * dim, 0);
  std::copy(k.data.begin(), k.data.end(), kpad.begin());

  AccTensor out(q.rows, k.rows, q.scale * k.scale);
  std::vector<int32_t> row(padded);
  for (int m = 0; m < q.rows; ++m) {
    const int8_t* qr = q.data.data() + size_t(m) * dim;
    for (int pe = 0; pe < num_pe; ++pe) {
      for (int col = pe; col < padded; col += num_pe) {
        const int8_t* kr = kpad.data() + size_t(col) * dim;
        int32_t acc = 0;
        for (int d = 0; d < dim; ++d) acc += int32_t{qr[d]} * kr[d];
        row[col] = acc;
      }
    }
    for (int c = 0; c < k.rows; ++c) out.at(m, c) = row[c];
  }
  return out;
}

AccTensor softmax_matmul(const QuantTensor& p, const QuantTensor& v, int num_pe) {
  if (p.cols != v.rows) {
    throw validation_error("shape mismatch", "P has " + std::to_string(p.cols) +
                                                 " columns, V has " + std::to_string(v.rows) +
                                                 " rows");
  }
  const int padded = min_padding(p.rows, num_pe);
  const int inner = p.cols;
  const int n = v.cols;
  AccTensor out(p.rows, n, p.scale * v.scale);
  std::vector<int32_t> acc(size_t(num_pe) * n);
  for (int group = 0; group < padded; group += num_pe) {
    std::fill(acc.begin(), acc.end(), 0);
    for (int it = 0; it < inner; ++it) {
      const int8_t* vr = v.data.data() + size_t(it) * n;
      for (int pe = 0; pe < num_pe; ++pe) {
        const int r = group + pe;
        const int32_t pv = r < p.rows ? p.at(r, it) : 0;
        if (pv == 0) continue;
        int32_t* a = acc.data() + size_t(pe) * n;
        for (int j = 0; j < n; ++j) a[j] += pv * vr[j];
      }
    }
    for (int pe = 0; pe < num_pe && group + pe < p.rows; ++pe) {
      for (int j = 0; j < n; ++j) out.at(group + pe, j) = acc[size_t(pe) * n + j];
    }
  }
  return out;
}

}  // namespace gsim::ibert
