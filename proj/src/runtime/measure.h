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

#ifndef GSIM_RUNTIME_MEASURE_H_
#define GSIM_RUNTIME_MEASURE_H_

#include <cstdint>
#include <string>

#include "fabric/packet.h"
#include "runtime/trace.h"

namespace gsim::runtime {

struct LatencyComponents {
  uint64_t x = 0;  // cycles until the first output packet leaves
  uint64_t t = 0;  // cycles until the last output packet leaves
  uint64_t i = 0;  // median gap between consecutive output packets, 0 if < 2
  double f = 200e6;
  double d = 1.1e-6;
  uint64_t outputs = 0;
};

// Output packets are the send/egress events whose source is `observer`.
// Cycles are counted from `origin`, normally the first host injection.
// Throws a validation error when the observer emitted nothing.
LatencyComponents measure_xti(const SimTrace& trace, Endpoint observer, uint64_t origin);

// Cycle of the first packet the host injected, 0 when there is none.
uint64_t first_injection(const SimTrace& trace);

// Key-value report block: X, T, I, f, d.
std::string format_report(const LatencyComponents& c);
LatencyComponents parse_report(const std::string& text);

}  // namespace gsim::runtime

#endif  // GSIM_RUNTIME_MEASURE_H_
