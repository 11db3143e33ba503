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

#ifndef GSIM_PERFMODEL_MODEL_H_
#define GSIM_PERFMODEL_MODEL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "ibert/encoder.h"
#include "runtime/measure.h"

namespace gsim::perfmodel {

// The FPGA clock that turns the measured cycle table into the published
// millisecond table. The hardware clock itself is not documented.
inline constexpr double kDefaultClockHz = 200e6;
inline constexpr double kDefaultSwitchLatencyS = 1.1e-6;

// One encoder per cluster, encoders chained through switches.
struct PipelineModel {
  int layers = 12;     // L
  double t = 0;        // cycles until the last output row of one encoder
  double x = 0;        // cycles until its first output row
  double i = 0;        // cycles between output rows
  double d = kDefaultSwitchLatencyS;  // seconds per switch hop
  double f = kDefaultClockHz;
};

PipelineModel from_components(const runtime::LatencyComponents& c, int layers);

// Throws a validation error unless L >= 1, f > 0, d >= 0 and 0 <= X <= T.
void check(const PipelineModel& m);

// T/f + (L-1)(X/f + d). The next encoder starts as soon as the previous one
// emits its first row, so only the last one contributes its full T.
double end_to_end_latency(const PipelineModel& m);
// Same with d = 0.
double end_to_end_latency_no_switch(const PipelineModel& m);
// T + (L-1)(X + d*f), in cycles.
double end_to_end_cycles(const PipelineModel& m);

// f / (M*I) inferences per second; with I = 0 (a single row) the pipeline
// is latency bound and this returns f/T.
double throughput(const PipelineModel& m, int seq);

// A row of the measured cycle table.
struct CycleRow {
  int seq = 0;
  double x = 0;
  double t = 0;
  double i = 0;
};

// CSV with header seq,X,T,I; rows strictly increasing in seq.
std::vector<CycleRow> parse_cycle_table(const std::string& csv);
std::string format_cycle_table(const std::vector<CycleRow>& rows);

// Linear interpolation between the bracketing rows. Throws outside the
// table range.
CycleRow interpolate(const std::vector<CycleRow>& table, double seq);

struct LatencyRow {
  int seq = 0;
  double x = 0, t = 0, i = 0;
  double latency_s = 0;            // with d
  double latency_no_switch_s = 0;  // d = 0
  double throughput = 0;
};

std::vector<LatencyRow> latency_table(const std::vector<CycleRow>& table, int layers, double d,
                                      double f);
std::string latency_csv(const std::vector<LatencyRow>& rows);
std::string latency_text(const std::vector<LatencyRow>& rows);

// --- Versal AIE estimate ---------------------------------------------------

inline constexpr int kAieMultipliesPerCycle = 64;
inline constexpr int64_t kAieClockHz = 1'000'000'000;
inline constexpr int64_t kAieDataBytes = 32 * 1024;
inline constexpr int kDeviceAies = 400;

// A matrix product m x k x n repeated `instances` times (heads), spread over
// `aies` engines. The k x n operand of each product stays resident in AIE
// data memory.
struct AieKernel {
  std::string name;
  int64_t m = 0, k = 0, n = 0;
  int64_t instances = 1;
  int64_t aies = 0;
  // 0: finishes before the attention scores can start (needs complete K, V);
  // 1: streams behind it.
  int phase = 1;
};

struct VersalAllocation {
  std::vector<AieKernel> kernels;
  int64_t nonlinear_ns = 26'100;  // quant, GELU, softmax, LayerNorm in PL
  int64_t switch_ns = 1'100;
  // First output arrives after this fraction of T (per mille).
  int64_t x_over_t_permille = 530;
};

// 32-column weight slices for the projections and FFN, one AIE per head for
// the two attention products.
VersalAllocation default_allocation(const ibert::EncoderConfig& cfg);

struct AieKernelEstimate {
  std::string name;
  int64_t aies = 0;
  int64_t ops_per_aie = 0;
  int64_t cycles = 0;
  int64_t latency_ns = 0;  // cycles at 1 GHz
  int64_t latency_us = 0;  // rounded to whole microseconds
  int64_t bytes_per_aie = 0;
};

struct VersalEstimate {
  std::vector<AieKernelEstimate> kernels;
  int64_t total_aies = 0;
  int64_t matmul_ns = 0;   // critical path through the two phases
  int64_t encoder_ns = 0;  // T
  int64_t first_output_ns = 0;  // X, rounded to 0.1 us
  int64_t model_ns = 0;
  int layers = 0;
};

// Integer arithmetic throughout. Throws "allocation fault" when a kernel's
// resident operand overflows 32 KB per AIE or the ops do not divide evenly,
// "device fault" past 400 AIEs.
VersalEstimate versal_estimate(const ibert::EncoderConfig& cfg, const VersalAllocation& alloc);
std::string versal_text(const VersalEstimate& e);
std::string versal_csv(const VersalEstimate& e);

// --- routing state ---------------------------------------------------------

struct RoutingBound {
  int64_t gateway = 0;    // own kernels plus one entry per other cluster
  int64_t full_mesh = 0;  // every node knows every kernel of every cluster
};

// With N clusters of N kernels: 2N-1 against N^2.
RoutingBound routing_state_bound(int64_t clusters, int64_t kernels_per_cluster);
std::string routing_text(int64_t clusters, int64_t kernels_per_cluster);

}  // namespace gsim::perfmodel

#endif  // GSIM_PERFMODEL_MODEL_H_
