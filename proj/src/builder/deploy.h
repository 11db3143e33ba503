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

#ifndef GSIM_BUILDER_DEPLOY_H_
#define GSIM_BUILDER_DEPLOY_H_

#include <cstdint>
#include <memory>
#include <optional>

#include "builder/model_fs.h"
#include "builder/plan.h"
#include "ibert/tensor.h"
#include "runtime/measure.h"
#include "runtime/simulator.h"

namespace gsim::builder {

struct RunOptions {
  uint64_t start = 0;
  // Cycles between injected rows; 0 means one row per serialization time
  // (12 cycles for a 768-byte row).
  uint64_t interval = 0;
  uint64_t cycle_budget = UINT64_MAX;
  std::optional<double> loss_probability;
  std::optional<uint64_t> seed;
};

struct PlanRun {
  ibert::QuantTensor output;  // valid when complete
  bool complete = false;
  runtime::SimTrace trace;
  runtime::LatencyComponents xti;  // at the output kernel, from the first injection
  uint64_t drops = 0;
};

// Instantiates every kernel of the plan with parameters from `source`.
std::unique_ptr<runtime::Simulator> instantiate(const ClusterPlan& plan,
                                                const FileSource& source,
                                                const RunOptions& options = {});

// Streams the input rows through the plan. A run that loses packets or
// hits the cycle budget returns complete = false.
PlanRun run_plan(const ClusterPlan& plan, const FileSource& source,
                 const ibert::QuantTensor& input, const RunOptions& options = {});
// Reads parameters from plan.model_fs.
PlanRun run_plan(const ClusterPlan& plan, const ibert::QuantTensor& input,
                 const RunOptions& options = {});

}  // namespace gsim::builder

#endif  // GSIM_BUILDER_DEPLOY_H_
