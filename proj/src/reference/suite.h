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

#ifndef GSIM_REFERENCE_SUITE_H_
#define GSIM_REFERENCE_SUITE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "builder/model_fs.h"

namespace gsim::reference {

// Outcome of running one kernel family against its scalar oracle.
struct KernelCheck {
  std::string kernel;
  std::string scale;  // "desk", "full" or a model module path
  int64_t instances = 0;
  int64_t values = 0;      // individual outputs compared
  int64_t mismatches = 0;  // instances with at least one differing value
  double seconds = 0;

  bool pass() const { return instances > 0 && mismatches == 0; }
};

// requant, linear, dot_product, softmax, softmax_matmul, gelu, layernorm,
// encoder.
std::vector<std::string> suite_kernels();

// Randomized instances of one kernel family. Desk scale keeps M <= 32 and
// widths <= 128; full scale uses M = 128 with the base model widths.
// Throws a validation error for an unknown kernel name.
KernelCheck check_kernel(const std::string& kernel, int instances, bool full_size, uint64_t seed);

// Every module of every encoder of `model` on a random `rows`-row input,
// followed by the whole encoder.
std::vector<KernelCheck> check_model(const builder::Model& model, int rows, uint64_t seed);

std::string checks_csv(const std::vector<KernelCheck>& checks);
std::string checks_text(const std::vector<KernelCheck>& checks);

}  // namespace gsim::reference

#endif  // GSIM_REFERENCE_SUITE_H_
