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

#include "runtime/trace.h"

#include "common/io.h"

namespace gsim::runtime {

const char* event_name(EventType t) {
  switch (t) {
    case EventType::kSend: return "send";
    case EventType::kRecv: return "recv";
    case EventType::kDrop: return "drop";
    case EventType::kFireStart: return "fire_start";
    case EventType::kFireEnd: return "fire_end";
    case EventType::kStall: return "stall";
    case EventType::kEgress: return "egress";
    case EventType::kDeadLetter: return "dead_letter";
    case EventType::kUnderfill: return "underfill";
    case EventType::kWarning: return "warning";
  }
  return "unknown";
}

std::string format_trace(const SimTrace& trace) {
  std::string out;
  out.reserve(trace.events.size() * 32);
  for (const auto& e : trace.events) {
    out += std::to_string(e.cycle);
    out += ',';
    out += event_name(e.type);
    for (int v : {e.src.cluster, e.src.kernel, e.dst.cluster, e.dst.kernel}) {
      out += ',';
      out += std::to_string(v);
    }
    out += ',';
    out += std::to_string(e.bytes);
    out += '\n';
  }
  return out;
}

void write_trace(const std::filesystem::path& path, const SimTrace& trace) {
  write_text(path, format_trace(trace));
}

}  // namespace gsim::runtime
