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

#include "runtime/measure.h"

#include <algorithm>
#include <vector>

#include "common/error.h"
#include "common/io.h"

namespace gsim::runtime {

LatencyComponents measure_xti(const SimTrace& trace, Endpoint observer, uint64_t origin) {
  std::vector<uint64_t> out;
  for (const TraceEvent& e : trace.events) {
    if ((e.type == EventType::kSend || e.type == EventType::kEgress) && e.src == observer) {
      out.push_back(e.cycle);
    }
  }
  if (out.empty()) {
    throw validation_error("no output", "observer " + std::to_string(observer.cluster) + "." +
                                            std::to_string(observer.kernel) +
                                            " sent no packets");
  }
  if (out.front() < origin) {
    throw validation_error("no output", "observer output precedes the origin cycle");
  }
  LatencyComponents c;
  c.outputs = out.size();
  c.x = out.front() - origin;
  c.t = out.back() - origin;
  if (out.size() >= 2) {
    std::vector<uint64_t> gaps;
    for (size_t k = 1; k < out.size(); ++k) gaps.push_back(out[k] - out[k - 1]);
    // Lower median, so an even count still yields an observed gap.
    auto mid = gaps.begin() + (gaps.size() - 1) / 2;
    std::nth_element(gaps.begin(), mid, gaps.end());
    c.i = *mid;
  }
  return c;
}

uint64_t first_injection(const SimTrace& trace) {
  for (const TraceEvent& e : trace.events) {
    if (e.type == EventType::kSend && e.src.is_host()) return e.cycle;
  }
  return 0;
}

std::string format_report(const LatencyComponents& c) {
  KeyValues kv;
  kv["X"] = std::to_string(c.x);
  kv["T"] = std::to_string(c.t);
  kv["I"] = std::to_string(c.i);
  kv["f"] = format_double(c.f);
  kv["d"] = format_double(c.d);
  return render_key_values(kv);
}

LatencyComponents parse_report(const std::string& text) {
  KeyValues kv = parse_key_values(text);
  LatencyComponents c;
  const char* where = "latency report";
  c.x = static_cast<uint64_t>(kv_int(kv, "X", where));
  c.t = static_cast<uint64_t>(kv_int(kv, "T", where));
  c.i = static_cast<uint64_t>(kv_int(kv, "I", where));
  c.f = kv_double(kv, "f", where);
  c.d = kv_double(kv, "d", where);
  if (c.x > c.t) throw validation_error("invalid report", "X exceeds T");
  return c;
}

}  // namespace gsim::runtime
