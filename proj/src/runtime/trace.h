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

#ifndef GSIM_RUNTIME_TRACE_H_
#define GSIM_RUNTIME_TRACE_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gsim::runtime {

enum class EventType {
  kSend,        // packet leaves a kernel (or the host injector)
  kRecv,        // packet enters a kernel input FIFO
  kDrop,        // packet lost in the network
  kFireStart,   // kernel starts one firing
  kFireEnd,     // kernel finishes its initiation interval
  kStall,       // packet held back: receiver FIFO full
  kEgress,      // packet delivered to the host sink
  kDeadLetter,  // gateway could not resolve a GMI header byte
  kUnderfill,   // scatter member received no segment
  kWarning,
};

const char* event_name(EventType t);

// Endpoint of an event; the host is {-1, -1}.
struct Endpoint {
  int cluster = -1;
  int kernel = -1;

  bool is_host() const { return cluster < 0; }
  bool operator==(const Endpoint&) const = default;
};

struct TraceEvent {
  uint64_t cycle = 0;
  EventType type = EventType::kSend;
  Endpoint src;
  Endpoint dst;
  uint64_t bytes = 0;          // wire payload, GMI header byte included
  uint32_t gmi_bytes = 0;      // 1 on inter-cluster packets, else 0
  bool inter_cluster = false;
  bool end_of_frame = false;
  uint32_t iterations = 0;     // firing events: PE iterations per output row
  int hops = -1;               // send events: switches crossed, 0 on one node
  std::string note;
};

struct SimTrace {
  std::vector<TraceEvent> events;
  bool incomplete = false;  // cycle budget reached before the streams drained
  uint64_t end_cycle = 0;
};

// One line per event: cycle,event,src_cluster,src_kernel,dst_cluster,dst_kernel,bytes
std::string format_trace(const SimTrace& trace);
void write_trace(const std::filesystem::path& path, const SimTrace& trace);

}  // namespace gsim::runtime

#endif  // GSIM_RUNTIME_TRACE_H_
